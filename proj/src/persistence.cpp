#include "riskner/persistence.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <bit>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "riskner/errors.hpp"
#include "riskner/hashutil.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is written as little-endian float64");

namespace riskner {

using nlohmann::json;

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string utc_timestamp_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::Io, "cannot write " + path);
    out << content;
    if (!out) raise(ErrorKind::Io, "short write to " + path);
}

namespace {

constexpr char kMagic[8] = {'R', 'N', 'C', 'K', 'P', 'T', '0', '1'};

json config_to_json(const EncoderConfig& c) {
    return json{{"vocab_size", c.vocab_size}, {"d_model", c.d_model},
                {"n_heads", c.n_heads},       {"n_layers", c.n_layers},
                {"d_ff", c.d_ff},             {"max_len", c.max_len},
                {"n_labels", c.n_labels},     {"dropout_rate", c.dropout_rate}};
}

EncoderConfig config_from_json(const json& j) {
    EncoderConfig c;
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.d_model = j.at("d_model").get<std::size_t>();
    c.n_heads = j.at("n_heads").get<std::size_t>();
    c.n_layers = j.at("n_layers").get<std::size_t>();
    c.d_ff = j.at("d_ff").get<std::size_t>();
    c.max_len = j.at("max_len").get<std::size_t>();
    c.n_labels = j.at("n_labels").get<std::size_t>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    return c;
}

}  // namespace

void save_checkpoint(const EncoderModel& model, const std::string& path) {
    json manifest;
    manifest["format_version"] = kCheckpointFormatVersion;
    manifest["config"] = config_to_json(model.config());
    manifest["seed"] = model.seed();
    json params = json::array();
    for (const nn::Parameter* p : model.parameters()) {
        params.push_back(json{{"name", p->name}, {"shape", p->value.shape()}});
    }
    manifest["parameters"] = std::move(params);
    const std::string manifest_text = manifest.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::Io, "cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = manifest_text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(manifest_text.data(), static_cast<std::streamsize>(manifest_text.size()));
    for (const nn::Parameter* p : model.parameters()) {
        out.write(reinterpret_cast<const char*>(p->value.data()),
                  static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    }
    if (!out) raise(ErrorKind::Io, "short write to " + path);
}

std::unique_ptr<EncoderModel> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open " + path);

    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        raise(ErrorKind::VersionMismatch, path + " is not a riskner checkpoint");
    }
    std::uint64_t len = 0;
    if (!in.read(reinterpret_cast<char*>(&len), sizeof(len))) {
        raise(ErrorKind::TruncatedFile, path + " ends inside the header");
    }
    std::string manifest_text(len, '\0');
    if (!in.read(manifest_text.data(), static_cast<std::streamsize>(len))) {
        raise(ErrorKind::TruncatedFile, path + " ends inside the manifest");
    }
    const json manifest = json::parse(manifest_text, nullptr, false);
    if (manifest.is_discarded()) {
        raise(ErrorKind::VersionMismatch, path + " has an unparseable manifest");
    }
    if (manifest.value("format_version", -1) != kCheckpointFormatVersion) {
        raise(ErrorKind::VersionMismatch, path + " has checkpoint format version " +
                                              std::to_string(manifest.value("format_version", -1)));
    }

    auto model = std::make_unique<EncoderModel>(config_from_json(manifest.at("config")),
                                                manifest.at("seed").get<std::uint64_t>());
    const std::vector<nn::Parameter*> params = model->parameters();
    const json& listed = manifest.at("parameters");
    if (listed.size() != params.size()) {
        raise(ErrorKind::ShapeMismatch,
              "manifest lists " + std::to_string(listed.size()) + " parameters, model has " +
                  std::to_string(params.size()));
    }
    // Validate the whole manifest before reading any payload so a mismatch
    // never yields a partially loaded model.
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::string name = listed[i].at("name").get<std::string>();
        const auto shape = listed[i].at("shape").get<std::vector<std::size_t>>();
        if (name != params[i]->name || shape != params[i]->value.shape()) {
            raise(ErrorKind::ShapeMismatch,
                  "parameter " + std::to_string(i) + " (" + name + ") does not match the model");
        }
    }
    for (nn::Parameter* p : params) {
        if (!in.read(reinterpret_cast<char*>(p->value.data()),
                     static_cast<std::streamsize>(p->value.size() * sizeof(double)))) {
            raise(ErrorKind::TruncatedFile, path + " ends inside parameter " + p->name);
        }
    }
    char extra;
    if (in.read(&extra, 1)) {
        raise(ErrorKind::TruncatedFile, path + " has trailing bytes after the payload");
    }
    return model;
}

std::string run_record_to_json(const RunRecord& record) {
    json j;
    j["run_id"] = record.run_id;
    j["timestamp"] = record.timestamp;
    j["artifact_version"] = record.artifact_version;
    j["corpus_hash"] = record.corpus_hash;
    j["config"] = {{"lr", record.config.lr},
                   {"batch_size", record.config.batch_size},
                   {"epochs", record.config.epochs},
                   {"epsilon", record.config.epsilon},
                   {"optimizer", optimizer_name(record.config.optimizer)},
                   {"weight_decay", record.config.weight_decay},
                   {"dropout_rate", record.config.dropout_rate},
                   {"max_len", record.config.max_len},
                   {"seed", record.config.seed}};
    json hist = json::array();
    for (const EpochStats& e : record.history) {
        hist.push_back({{"train_loss", e.train_loss},
                        {"val_macro_f1", e.val_macro_f1},
                        {"seconds", e.seconds}});
    }
    j["history"] = std::move(hist);
    json rows = json::array();
    for (std::size_t i = 0; i < record.final_metrics.rows.size(); ++i) {
        const Prf& r = record.final_metrics.rows[i];
        rows.push_back({{"category", record.categories.at(i)},
                        {"precision", r.precision},
                        {"recall", r.recall},
                        {"f1", r.f1}});
    }
    j["final_metrics"] = {{"rows", std::move(rows)},
                          {"average",
                           {{"precision", record.final_metrics.average.precision},
                            {"recall", record.final_metrics.average.recall},
                            {"f1", record.final_metrics.average.f1}}}};
    return j.dump();
}

RunRecord run_record_from_json(const std::string& line) {
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) raise(ErrorKind::LedgerCorrupt, "unparseable run record line");
    RunRecord r;
    r.run_id = j.at("run_id").get<std::string>();
    r.timestamp = j.value("timestamp", "");
    r.artifact_version = j.value("artifact_version", "");
    r.corpus_hash = j.value("corpus_hash", "");
    const json& c = j.at("config");
    r.config.lr = c.at("lr").get<double>();
    r.config.batch_size = c.at("batch_size").get<std::size_t>();
    r.config.epochs = c.at("epochs").get<std::size_t>();
    r.config.epsilon = c.at("epsilon").get<double>();
    r.config.optimizer = optimizer_from_name(c.at("optimizer").get<std::string>());
    r.config.weight_decay = c.at("weight_decay").get<double>();
    r.config.dropout_rate = c.at("dropout_rate").get<double>();
    r.config.max_len = c.at("max_len").get<std::size_t>();
    r.config.seed = c.at("seed").get<std::uint64_t>();
    for (const json& e : j.value("history", json::array())) {
        r.history.push_back(EpochStats{e.at("train_loss").get<double>(),
                                       e.at("val_macro_f1").get<double>(),
                                       e.at("seconds").get<double>()});
    }
    if (j.contains("final_metrics")) {
        const json& fm = j["final_metrics"];
        for (const json& row : fm.value("rows", json::array())) {
            r.categories.push_back(row.at("category").get<std::string>());
            r.final_metrics.categories.push_back(row.at("category").get<std::string>());
            r.final_metrics.rows.push_back(Prf{row.at("precision").get<double>(),
                                               row.at("recall").get<double>(),
                                               row.at("f1").get<double>()});
        }
        const json& avg = fm.at("average");
        r.final_metrics.average = Prf{avg.at("precision").get<double>(),
                                      avg.at("recall").get<double>(), avg.at("f1").get<double>()};
    }
    return r;
}

void append_jsonl_line(const std::string& path, const std::string& line) {
    std::string payload = line;
    payload.push_back('\n');
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) raise(ErrorKind::Io, "cannot open " + path + " for append");
    const ssize_t written = ::write(fd, payload.data(), payload.size());
    ::close(fd);
    if (written != static_cast<ssize_t>(payload.size())) {
        raise(ErrorKind::Io, "short append to " + path);
    }
}

std::vector<std::string> read_jsonl_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        const std::size_t nl = content.find('\n', start);
        if (nl == std::string::npos) break;  // trailing partial line: ignore
        if (nl > start) lines.push_back(content.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

void append_run_record(const RunRecord& record, const std::string& ledger_path) {
    append_jsonl_line(ledger_path, run_record_to_json(record));
}

std::vector<RunRecord> read_run_records(const std::string& ledger_path) {
    std::vector<RunRecord> records;
    for (const std::string& line : read_jsonl_lines(ledger_path)) {
        records.push_back(run_record_from_json(line));
    }
    return records;
}

std::string corpus_content_hash(const Corpus& corpus, const TagScheme& scheme) {
    return to_hex(fnv1a64(serialize_conll(corpus, scheme)));
}

}  // namespace riskner
