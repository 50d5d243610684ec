#include "riskner/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

#include "riskner/errors.hpp"
#include "riskner/kernels.hpp"

namespace riskner::nn {

namespace {

void require(bool cond, ErrorKind kind, const std::string& message) {
    if (!cond) raise(kind, message);
}

void require_matrix(const Tensor& t, const char* who) {
    require(t.rank() == 2, ErrorKind::ShapeMismatch,
            std::string(who) + " expects a 2D tensor, got " + t.shape_str());
}

void axpy(Tensor& dst, const Tensor& src) {
    double* d = dst.data();
    const double* s = src.data();
    for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

}  // namespace

Var matmul(Tape& tape, Var a, Var b) {
    const Tensor& av = tape.value(a);
    const Tensor& bv = tape.value(b);
    require_matrix(av, "matmul");
    require_matrix(bv, "matmul");
    require(av.dim(1) == bv.dim(0), ErrorKind::ShapeMismatch,
            "matmul inner dims differ: " + av.shape_str() + " vs " + bv.shape_str());
    const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
    Tensor out({m, n});
    kernels::matmul_nn(av.data(), bv.data(), out.data(), m, k, n);
    return tape.record("matmul", std::move(out), {a.id, b.id},
                       [a, b, m, k, n](Tape& t, int id) {
                           const Tensor& dy = t.grad_of(id);
                           const Tensor& avv = t.value_of(a.id);
                           const Tensor& bvv = t.value_of(b.id);
                           Tensor da({m, k});
                           kernels::matmul_nt(dy.data(), bvv.data(), da.data(), m, n, k);
                           axpy(t.grad_of(a.id), da);
                           Tensor db({k, n});
                           kernels::matmul_tn(avv.data(), dy.data(), db.data(), k, m, n);
                           axpy(t.grad_of(b.id), db);
                       });
}

Var add(Tape& tape, Var a, Var b) {
    const Tensor& av = tape.value(a);
    const Tensor& bv = tape.value(b);
    const auto& as = av.shape();
    const auto& bs = bv.shape();
    const bool suffix = bs.size() <= as.size() &&
                        std::equal(bs.begin(), bs.end(), as.end() - bs.size());
    require(suffix, ErrorKind::ShapeMismatch,
            "add: shape " + bv.shape_str() + " does not broadcast onto " + av.shape_str());
    Tensor out(as);
    const std::size_t bn = bv.size();
    const double* ap = av.data();
    const double* bp = bv.data();
    double* op = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) op[i] = ap[i] + bp[i % bn];
    return tape.record("add", std::move(out), {a.id, b.id}, [a, b, bn](Tape& t, int id) {
        const Tensor& dy = t.grad_of(id);
        axpy(t.grad_of(a.id), dy);
        Tensor& db = t.grad_of(b.id);
        const double* dyp = dy.data();
        double* dbp = db.data();
        for (std::size_t i = 0; i < dy.size(); ++i) dbp[i % bn] += dyp[i];
    });
}

Var embedding_lookup(Tape& tape, Var table, const std::vector<std::size_t>& ids) {
    const Tensor& tv = tape.value(table);
    require_matrix(tv, "embedding_lookup");
    const std::size_t v = tv.dim(0), d = tv.dim(1);
    for (std::size_t id : ids) {
        require(id < v, ErrorKind::IdOutOfRange,
                "embedding id " + std::to_string(id) + " out of range [0, " + std::to_string(v) + ")");
    }
    Tensor out({ids.size(), d});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const double* row = tv.data() + ids[i] * d;
        double* dst = out.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) dst[j] = row[j];
    }
    return tape.record("embedding_lookup", std::move(out), {table.id},
                       [table, ids, d](Tape& t, int id) {
                           const Tensor& dy = t.grad_of(id);
                           Tensor& dt = t.grad_of(table.id);
                           for (std::size_t i = 0; i < ids.size(); ++i) {
                               double* row = dt.data() + ids[i] * d;
                               const double* src = dy.data() + i * d;
                               for (std::size_t j = 0; j < d; ++j) row[j] += src[j];
                           }
                       });
}

Var layer_norm(Tape& tape, Var x, Var gain, Var bias, double eps) {
    const Tensor& xv = tape.value(x);
    const Tensor& gv = tape.value(gain);
    const Tensor& bv = tape.value(bias);
    require_matrix(xv, "layer_norm");
    const std::size_t rows = xv.dim(0), cols = xv.dim(1);
    require(gv.size() == cols && bv.size() == cols, ErrorKind::ShapeMismatch,
            "layer_norm gain/bias must have " + std::to_string(cols) + " entries");
    Tensor out({rows, cols});
    auto xhat = std::make_shared<Tensor>(Tensor({rows, cols}));
    auto inv_std = std::make_shared<Tensor>(Tensor({rows}));
    kernels::layer_norm_rows(xv.data(), gv.data(), bv.data(), eps, out.data(), xhat->data(),
                             inv_std->data(), rows, cols);
    return tape.record("layer_norm", std::move(out), {x.id, gain.id, bias.id},
                       [x, gain, bias, xhat, inv_std, rows, cols](Tape& t, int id) {
                           const Tensor& dy = t.grad_of(id);
                           const Tensor& gv2 = t.value_of(gain.id);
                           Tensor dx({rows, cols});
                           kernels::layer_norm_rows_backward(
                               dy.data(), xhat->data(), inv_std->data(), gv2.data(), dx.data(),
                               t.grad_of(gain.id).data(), t.grad_of(bias.id).data(), rows, cols);
                           axpy(t.grad_of(x.id), dx);
                       });
}

Var softmax(Tape& tape, Var x, const Tensor& mask) {
    const Tensor& xv = tape.value(x);
    require_matrix(xv, "softmax");
    const std::size_t rows = xv.dim(0), cols = xv.dim(1);
    require(mask.empty() || mask.size() == cols, ErrorKind::ShapeMismatch,
            "softmax mask must have one entry per column");
    Tensor out({rows, cols});
    kernels::softmax_rows(xv.data(), mask.empty() ? nullptr : mask.data(), out.data(), rows, cols);
    return tape.record("softmax", std::move(out), {x.id}, [x, rows, cols](Tape& t, int id) {
        const Tensor& y = t.value_of(id);
        const Tensor& dy = t.grad_of(id);
        Tensor dx({rows, cols});
        kernels::softmax_rows_backward(y.data(), dy.data(), dx.data(), rows, cols);
        axpy(t.grad_of(x.id), dx);
    });
}

Var gelu(Tape& tape, Var x) {
    const Tensor& xv = tape.value(x);
    Tensor out(xv.shape());
    kernels::gelu(xv.data(), out.data(), xv.size());
    return tape.record("gelu", std::move(out), {x.id}, [x](Tape& t, int id) {
        const Tensor& dy = t.grad_of(id);
        const Tensor& xin = t.value_of(x.id);
        Tensor dx(xin.shape());
        kernels::gelu_backward(xin.data(), dy.data(), dx.data(), xin.size());
        axpy(t.grad_of(x.id), dx);
    });
}

Var dropout(Tape& tape, Var x, double rate, bool training, std::uint64_t seed) {
    require(rate >= 0.0 && rate < 1.0, ErrorKind::ShapeMismatch,
            "dropout rate must lie in [0, 1)");
    if (!training || rate == 0.0) return x;
    const Tensor& xv = tape.value(x);
    Tensor out(xv.shape());
    kernels::dropout(xv.data(), out.data(), xv.size(), rate, seed);
    return tape.record("dropout", std::move(out), {x.id}, [x, rate, seed](Tape& t, int id) {
        const Tensor& dy = t.grad_of(id);
        Tensor dx(dy.shape());
        kernels::dropout_backward(dy.data(), dx.data(), dy.size(), rate, seed);
        axpy(t.grad_of(x.id), dx);
    });
}

Var cross_entropy(Tape& tape, Var logits, const std::vector<int>& targets, int ignore_index) {
    const Tensor& lv = tape.value(logits);
    require_matrix(lv, "cross_entropy");
    const std::size_t rows = lv.dim(0), cols = lv.dim(1);
    require(targets.size() == rows, ErrorKind::ShapeMismatch,
            "cross_entropy needs one target per logit row");
    for (int t : targets) {
        require(t == ignore_index || (t >= 0 && static_cast<std::size_t>(t) < cols),
                ErrorKind::IdOutOfRange, "target label " + std::to_string(t) + " out of range");
    }

    auto probs = std::make_shared<Tensor>(Tensor({rows, cols}));
    kernels::softmax_rows(lv.data(), nullptr, probs->data(), rows, cols);

    std::size_t counted = 0;
    double loss = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (targets[i] == ignore_index) continue;
        ++counted;
        const double p = (*probs)[i * cols + static_cast<std::size_t>(targets[i])];
        loss -= std::log(p > 0.0 ? p : 5e-324);
    }
    if (counted > 0) loss /= static_cast<double>(counted);

    return tape.record("cross_entropy", Tensor::scalar(loss), {logits.id},
                       [logits, probs, targets, ignore_index, rows, cols, counted](Tape& t, int id) {
                           if (counted == 0) return;
                           const double g = t.grad_of(id)[0] / static_cast<double>(counted);
                           Tensor& dl = t.grad_of(logits.id);
                           for (std::size_t i = 0; i < rows; ++i) {
                               if (targets[i] == ignore_index) continue;
                               const double* prow = probs->data() + i * cols;
                               double* drow = dl.data() + i * cols;
                               for (std::size_t j = 0; j < cols; ++j) drow[j] += g * prow[j];
                               drow[static_cast<std::size_t>(targets[i])] -= g;
                           }
                       });
}

Var transpose(Tape& tape, Var x) {
    const Tensor& xv = tape.value(x);
    require_matrix(xv, "transpose");
    const std::size_t m = xv.dim(0), n = xv.dim(1);
    Tensor out({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = xv[i * n + j];
    return tape.record("transpose", std::move(out), {x.id}, [x, m, n](Tape& t, int id) {
        const Tensor& dy = t.grad_of(id);
        Tensor& dx = t.grad_of(x.id);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) dx.data()[i * n + j] += dy[j * m + i];
    });
}

Var scale(Tape& tape, Var x, double c) {
    const Tensor& xv = tape.value(x);
    Tensor out(xv.shape());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] * c;
    return tape.record("scale", std::move(out), {x.id}, [x, c](Tape& t, int id) {
        const Tensor& dy = t.grad_of(id);
        Tensor& dx = t.grad_of(x.id);
        for (std::size_t i = 0; i < dy.size(); ++i) dx.data()[i] += c * dy[i];
    });
}

Var concat_cols(Tape& tape, const std::vector<Var>& xs) {
    require(!xs.empty(), ErrorKind::ShapeMismatch, "concat_cols needs at least one input");
    const std::size_t rows = tape.value(xs[0]).dim(0);
    std::size_t total = 0;
    std::vector<int> input_ids;
    std::vector<std::size_t> widths;
    for (Var x : xs) {
        const Tensor& xv = tape.value(x);
        require_matrix(xv, "concat_cols");
        require(xv.dim(0) == rows, ErrorKind::ShapeMismatch, "concat_cols row counts differ");
        widths.push_back(xv.dim(1));
        total += xv.dim(1);
        input_ids.push_back(x.id);
    }
    Tensor out({rows, total});
    std::size_t offset = 0;
    for (std::size_t s = 0; s < xs.size(); ++s) {
        const Tensor& xv = tape.value(xs[s]);
        for (std::size_t i = 0; i < rows; ++i) {
            const double* src = xv.data() + i * widths[s];
            double* dst = out.data() + i * total + offset;
            for (std::size_t j = 0; j < widths[s]; ++j) dst[j] = src[j];
        }
        offset += widths[s];
    }
    return tape.record("concat_cols", std::move(out), input_ids,
                       [input_ids, widths, rows, total](Tape& t, int id) {
                           const Tensor& dy = t.grad_of(id);
                           std::size_t off = 0;
                           for (std::size_t s = 0; s < input_ids.size(); ++s) {
                               Tensor& dx = t.grad_of(input_ids[s]);
                               for (std::size_t i = 0; i < rows; ++i) {
                                   const double* src = dy.data() + i * total + off;
                                   double* dst = dx.data() + i * widths[s];
                                   for (std::size_t j = 0; j < widths[s]; ++j) dst[j] += src[j];
                               }
                               off += widths[s];
                           }
                       });
}

Var sum(Tape& tape, Var x) {
    const Tensor& xv = tape.value(x);
    double total = 0.0;
    for (std::size_t i = 0; i < xv.size(); ++i) total += xv[i];
    return tape.record("sum", Tensor::scalar(total), {x.id}, [x](Tape& t, int id) {
        const double g = t.grad_of(id)[0];
        Tensor& dx = t.grad_of(x.id);
        for (std::size_t i = 0; i < dx.size(); ++i) dx.data()[i] += g;
    });
}

}  // namespace riskner::nn
