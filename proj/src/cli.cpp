#include "riskner/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "riskner/corpus.hpp"
#include "riskner/encoder.hpp"
#include "riskner/errors.hpp"
#include "riskner/hashutil.hpp"
#include "riskner/ingest.hpp"
#include "riskner/persistence.hpp"
#include "riskner/report.hpp"
#include "riskner/tagcodec.hpp"
#include "riskner/trainer.hpp"
#include "riskner/tuner.hpp"

namespace riskner::cli {

namespace {

namespace fs = std::filesystem;

struct ModelDims {
    std::size_t d_model = 64;
    std::size_t n_heads = 4;
    std::size_t n_layers = 2;
    std::size_t d_ff = 256;
};

void add_model_dims(CLI::App* sub, ModelDims& dims) {
    sub->add_option("--d-model", dims.d_model, "embedding width")->check(CLI::PositiveNumber);
    sub->add_option("--n-heads", dims.n_heads, "attention heads")->check(CLI::PositiveNumber);
    sub->add_option("--n-layers", dims.n_layers, "encoder layers")->check(CLI::PositiveNumber);
    sub->add_option("--d-ff", dims.d_ff, "feed-forward inner width")->check(CLI::PositiveNumber);
}

EncoderConfig encoder_config_for(const ModelDims& dims, std::size_t vocab_size,
                                 std::size_t n_labels, std::size_t max_len, double dropout) {
    EncoderConfig c;
    c.vocab_size = vocab_size;
    c.d_model = dims.d_model;
    c.n_heads = dims.n_heads;
    c.n_layers = dims.n_layers;
    c.d_ff = dims.d_ff;
    c.max_len = max_len;
    c.n_labels = n_labels;
    c.dropout_rate = dropout;
    return c;
}

Corpus load_corpus(const std::string& path, const TagScheme& scheme,
                   ParseMode mode = ParseMode::Lenient) {
    return parse_conll(read_text_file(path), scheme, mode);
}

std::array<double, 3> parse_ratios(const std::string& text) {
    std::array<double, 3> ratios{};
    std::istringstream is(text);
    std::string part;
    std::size_t i = 0;
    while (std::getline(is, part, ',')) {
        if (i >= 3) raise(ErrorKind::Usage, "--ratios needs exactly three comma-separated values");
        try {
            ratios[i++] = std::stod(part);
        } catch (const std::exception&) {
            raise(ErrorKind::Usage, "--ratios value \"" + part + "\" is not a number");
        }
    }
    if (i != 3) raise(ErrorKind::Usage, "--ratios needs exactly three comma-separated values");
    return ratios;
}

void print_config_line(const std::string& key, const std::string& value) {
    std::cout << "  " << key << " = " << value << "\n";
}

void print_train_config(const TrainConfig& config) {
    std::ostringstream lr, eps;
    lr << config.lr;
    eps << config.epsilon;
    std::cout << "resolved config:\n";
    print_config_line("lr", lr.str());
    print_config_line("batch_size", std::to_string(config.batch_size));
    print_config_line("epochs", std::to_string(config.epochs));
    print_config_line("epsilon", eps.str());
    print_config_line("optimizer", optimizer_name(config.optimizer));
    print_config_line("weight_decay", std::to_string(config.weight_decay));
    print_config_line("dropout_rate", std::to_string(config.dropout_rate));
    print_config_line("max_len", std::to_string(config.max_len));
    print_config_line("seed", std::to_string(config.seed));
    print_config_line("grad_clip_norm", std::to_string(kGradClipNorm));
}

struct TrainFlags {
    std::optional<double> lr;
    std::optional<std::size_t> batch_size;
    std::optional<std::size_t> epochs;
    std::optional<double> epsilon;
    std::optional<std::string> optimizer;
    std::optional<double> weight_decay;
    std::optional<double> dropout;
    std::optional<std::size_t> max_len;
    std::optional<std::uint64_t> seed;
};

void add_train_flags(CLI::App* sub, TrainFlags& flags) {
    sub->add_option("--lr", flags.lr, "learning rate")->check(CLI::PositiveNumber);
    sub->add_option("--batch-size", flags.batch_size, "sentences per optimizer step")
        ->check(CLI::PositiveNumber);
    sub->add_option("--epochs", flags.epochs, "training epochs");
    sub->add_option("--epsilon", flags.epsilon, "optimizer stabilizer")
        ->check(CLI::PositiveNumber);
    sub->add_option("--optimizer", flags.optimizer, "adam or adamw");
    sub->add_option("--weight-decay", flags.weight_decay, "AdamW decoupled decay")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--dropout", flags.dropout, "dropout rate")
        ->check(CLI::Range(0.0, 0.999999));
    sub->add_option("--max-len", flags.max_len, "maximum encoded length")
        ->check(CLI::Range(static_cast<std::size_t>(3), static_cast<std::size_t>(1 << 16)));
    sub->add_option("--seed", flags.seed, "seed for every random choice in this run");
}

/// Defaults, then config file, then explicit flags.
TrainConfig resolve_train_config(const std::string& config_path, const TrainFlags& flags) {
    TrainConfig config;
    if (!config_path.empty()) {
        config = parse_train_config(read_text_file(config_path), config);
    }
    if (flags.lr) config.lr = *flags.lr;
    if (flags.batch_size) config.batch_size = *flags.batch_size;
    if (flags.epochs) config.epochs = *flags.epochs;
    if (flags.epsilon) config.epsilon = *flags.epsilon;
    if (flags.optimizer) config.optimizer = optimizer_from_name(*flags.optimizer);
    if (flags.weight_decay) config.weight_decay = *flags.weight_decay;
    if (flags.dropout) config.dropout_rate = *flags.dropout;
    if (flags.max_len) config.max_len = *flags.max_len;
    if (flags.seed) config.seed = *flags.seed;
    config.validate();
    return config;
}

int do_ingest(const std::string& query_path, const std::string& store_path,
              const std::string& out_path, const std::string& api_base,
              const std::string& mapping_path) {
    std::cout << "resolved config:\n";
    print_config_line("query", query_path);
    print_config_line("store", store_path);
    print_config_line("api_base", api_base);
    if (!out_path.empty()) print_config_line("out", out_path);

    const char* key = std::getenv("RISKNER_API_KEY");
    if (key == nullptr || *key == '\0') {
        raise(ErrorKind::AuthFailed, "set RISKNER_API_KEY in the environment (never a flag)");
    }
    const QuerySpec query = QuerySpec::from_json(read_text_file(query_path));
    FieldMapping mapping;
    if (!mapping_path.empty()) mapping = FieldMapping::from_json(read_text_file(mapping_path));

    auto transport = make_http_transport(api_base);
    const std::vector<Article> fetched = fetch_articles(query, key, *transport, mapping);
    const StoreResult stored = dedupe_store(fetched, store_path);
    std::cout << "fetched " << fetched.size() << " articles; stored " << stored.added << " new, "
              << stored.duplicates << " duplicates\n";

    if (!out_path.empty()) {
        Corpus pretokenized;
        for (const Article& a : read_article_store(store_path)) {
            for (Sentence& s : to_pretokenized(a)) {
                pretokenized.sentences.push_back(std::move(s));
            }
        }
        write_text_file(out_path, serialize_conll(pretokenized, TagScheme::default_scheme()));
        std::cout << "wrote " << pretokenized.size() << " pre-tokenized sentences to " << out_path
                  << "\n";
    }
    return 0;
}

int do_validate(const std::string& corpus_path, bool strict, std::size_t max_len) {
    std::cout << "resolved config:\n";
    print_config_line("corpus", corpus_path);
    print_config_line("mode", strict ? "strict" : "lenient");
    print_config_line("max_len", std::to_string(max_len));

    const TagScheme& scheme = TagScheme::default_scheme();
    const Corpus corpus = load_corpus(corpus_path, scheme,
                                      strict ? ParseMode::Strict : ParseMode::Lenient);
    const std::vector<std::size_t> counts = corpus.entity_counts(scheme);

    std::size_t truncated = 0;
    std::size_t dropped = 0;
    const Vocabulary probe = build_vocab(corpus, 1);
    for (const Sentence& s : corpus.sentences) {
        const ModelExample ex = encode_sentence(s, probe, scheme, max_len);
        if (ex.truncated) ++truncated;
        dropped += ex.dropped_entities;
    }

    std::cout << "sentences: " << corpus.size() << "\n";
    std::cout << "tokens: " << corpus.token_count() << "\n";
    for (std::size_t c = 0; c < scheme.n_categories(); ++c) {
        std::cout << "entities[" << scheme.entity_types()[c] << "]: " << counts[c] << "\n";
    }
    std::cout << "entities total: " << corpus.total_entities(scheme) << "\n";
    std::cout << "truncated sentences at max_len " << max_len << ": " << truncated << "\n";
    std::cout << "entities dropped by truncation: " << dropped << "\n";
    return 0;
}

int do_split(const std::string& corpus_path, const std::string& ratios_text, std::uint64_t seed,
             const std::string& out_dir) {
    const std::array<double, 3> ratios = parse_ratios(ratios_text);
    std::cout << "resolved config:\n";
    print_config_line("corpus", corpus_path);
    print_config_line("ratios", ratios_text);
    print_config_line("seed", std::to_string(seed));
    print_config_line("out_dir", out_dir);

    const TagScheme& scheme = TagScheme::default_scheme();
    const Corpus corpus = load_corpus(corpus_path, scheme);
    const SplitSet split = split_corpus(corpus, ratios, seed);

    fs::create_directories(out_dir);
    const std::string stem = fs::path(corpus_path).stem().string();
    const auto out = [&](const char* suffix) {
        return (fs::path(out_dir) / (stem + "-" + suffix + ".conll")).string();
    };
    write_text_file(out("train"), serialize_conll(split.train, scheme));
    write_text_file(out("val"), serialize_conll(split.validation, scheme));
    write_text_file(out("test"), serialize_conll(split.test, scheme));
    write_text_file((fs::path(out_dir) / (stem + "-split.json")).string(),
                    split_manifest_json(split));

    const auto report = [&](const char* name, const Corpus& part) {
        std::cout << name << ": " << part.size() << " sentences, " << part.total_entities(scheme)
                  << " entities\n";
    };
    report("train", split.train);
    report("validation", split.validation);
    report("test", split.test);
    return 0;
}

int do_train(const std::string& train_path, const std::string& val_path,
             const std::string& config_path, const TrainFlags& flags, const ModelDims& dims,
             std::size_t min_freq, const std::string& checkpoint_path,
             const std::string& vocab_path, const std::string& history_path,
             const std::string& run_name) {
    const TrainConfig config = resolve_train_config(config_path, flags);
    print_train_config(config);

    const TagScheme& scheme = TagScheme::default_scheme();
    const Corpus train_corpus = load_corpus(train_path, scheme);
    const Corpus val_corpus = val_path.empty() ? Corpus{} : load_corpus(val_path, scheme);

    const Vocabulary vocab = build_vocab(train_corpus, min_freq);
    EncoderModel model(encoder_config_for(dims, vocab.size(), scheme.n_labels(), config.max_len,
                                          config.dropout_rate),
                       config.seed);
    std::cout << "model parameters: " << model.parameter_count() << "\n";

    const TrainHistory history = train(model, train_corpus, val_corpus, vocab, scheme, config);
    for (std::size_t e = 0; e < history.size(); ++e) {
        std::cout << "epoch " << (e + 1) << ": loss " << history[e].train_loss << " val_macro_f1 "
                  << history[e].val_macro_f1 << " (" << history[e].seconds << " s)\n";
    }

    MetricsTable final_metrics;
    if (!val_corpus.empty()) {
        final_metrics = evaluate(model, val_corpus, vocab, scheme, config.max_len);
        std::cout << "validation macro: p " << format_fixed6(final_metrics.average.precision)
                  << " r " << format_fixed6(final_metrics.average.recall) << " f1 "
                  << format_fixed6(final_metrics.average.f1) << "\n";
    }

    save_checkpoint(model, checkpoint_path);
    write_text_file(vocab_path, vocab.to_json());
    std::cout << "checkpoint: " << checkpoint_path << "\nvocabulary: " << vocab_path << "\n";

    if (!history_path.empty()) {
        RunRecord record;
        record.timestamp = utc_timestamp_now();
        record.corpus_hash = corpus_content_hash(train_corpus, scheme);
        record.run_id = run_name + "-" +
                        to_hex(fnv1a64(record.timestamp + record.corpus_hash +
                                       std::to_string(config.seed)));
        record.config = config;
        record.history = history;
        record.final_metrics = final_metrics;
        record.categories = scheme.entity_types();
        append_run_record(record, history_path);
        std::cout << "run record " << record.run_id << " appended to " << history_path << "\n";
    }
    return 0;
}

int do_evaluate(const std::string& model_path, const std::string& vocab_path,
                const std::string& test_path, const std::string& out_path,
                const std::string& run_name) {
    std::cout << "resolved config:\n";
    print_config_line("model", model_path);
    print_config_line("vocab", vocab_path);
    print_config_line("test", test_path);
    print_config_line("run_name", run_name);

    const TagScheme& scheme = TagScheme::default_scheme();
    const std::unique_ptr<EncoderModel> model = load_checkpoint(model_path);
    const Vocabulary vocab = Vocabulary::from_json(read_text_file(vocab_path));
    if (vocab.size() != model->config().vocab_size) {
        raise(ErrorKind::ShapeMismatch,
              "vocabulary size " + std::to_string(vocab.size()) +
                  " does not match the checkpoint's " +
                  std::to_string(model->config().vocab_size));
    }
    const Corpus test_corpus = load_corpus(test_path, scheme);
    const MetricsTable metrics =
        evaluate(*model, test_corpus, vocab, scheme, model->config().max_len);

    const std::string csv = metrics_table_csv(run_name, metrics);
    if (!out_path.empty()) {
        write_text_file(out_path, csv);
        std::cout << "metrics written to " << out_path << "\n";
    }
    std::cout << csv;
    return 0;
}

int do_tune(const std::string& train_path, const std::string& val_path,
            const std::string& grid_path, std::size_t epochs, std::uint64_t seed,
            std::size_t workers, const std::string& records_path, const std::string& summary_path,
            std::size_t top_k, const TrainFlags& flags, const ModelDims& dims,
            const std::string& model_name) {
    GridSpace space = grid_path.empty() ? GridSpace::default_space()
                                        : GridSpace::from_json(read_text_file(grid_path));
    space.validate();

    TrainConfig base = resolve_train_config("", flags);
    std::cout << "resolved config:\n";
    print_config_line("grid", grid_path.empty() ? "(built-in 8x3x3x2)" : grid_path);
    print_config_line("combinations", std::to_string(space.size()));
    print_config_line("trial_epochs", std::to_string(epochs));
    print_config_line("seed", std::to_string(seed));
    print_config_line("workers", std::to_string(workers));
    print_config_line("records", records_path);
    print_config_line("max_len", std::to_string(base.max_len));
    print_config_line("dropout_rate", std::to_string(base.dropout_rate));

    const TagScheme& scheme = TagScheme::default_scheme();
    const Corpus train_corpus = load_corpus(train_path, scheme);
    const Corpus val_corpus = load_corpus(val_path, scheme);

    ModelDims effective = dims;
    EncoderConfig enc = encoder_config_for(effective, 0, scheme.n_labels(), base.max_len,
                                           base.dropout_rate);

    GridRunOptions options;
    options.trial_epochs = epochs;
    options.seed = seed;
    options.workers = workers;
    options.records_path = records_path;
    options.model_name = model_name;
    options.verbose = true;

    const GridRunResult result =
        run_grid(space, enc, train_corpus, val_corpus, scheme, base, options);
    std::cout << "trials: " << result.records.size() << " total, " << result.trained
              << " trained now, " << result.skipped << " resumed\n";

    const std::vector<SummaryRow> rows = summarize(result.records, top_k);
    const std::string csv = summary_csv(rows, model_name);
    if (!summary_path.empty()) {
        write_text_file(summary_path, csv);
        std::cout << "summary written to " << summary_path << "\n";
    }
    std::cout << csv;
    return 0;
}

int do_report(const std::vector<std::string>& metrics_paths, const std::string& table_path,
              const std::string& chart_path) {
    std::cout << "resolved config:\n";
    for (const std::string& p : metrics_paths) print_config_line("metrics", p);
    if (!table_path.empty()) print_config_line("table", table_path);
    if (!chart_path.empty()) print_config_line("chart", chart_path);

    std::vector<RunMetrics> runs;
    for (const std::string& path : metrics_paths) {
        for (RunMetrics& run : parse_metrics_csv(read_text_file(path))) {
            runs.push_back(std::move(run));
        }
    }
    const std::string table = results_table_csv(runs);
    if (!table_path.empty()) {
        write_text_file(table_path, table);
        std::cout << "table written to " << table_path << "\n";
    } else {
        std::cout << table;
    }
    if (!chart_path.empty()) {
        write_text_file(chart_path, f1_chart_svg(runs));
        std::cout << "chart written to " << chart_path << "\n";
    }
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"NER experimentation pipeline for construction supply chain risk entities"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "fetch news articles and emit pre-tokenized text");
    std::string q_query, q_store, q_out, q_api_base = "https://newsapi.org", q_mapping;
    ingest->add_option("--query", q_query, "query spec JSON")->required();
    ingest->add_option("--store", q_store, "article store (JSON lines)")->required();
    ingest->add_option("--out", q_out, "pre-tokenized CoNLL output");
    ingest->add_option("--api-base", q_api_base, "news API base URL");
    ingest->add_option("--mapping", q_mapping, "response field mapping JSON");

    // validate
    auto* validate = app.add_subcommand("validate", "parse a corpus and report statistics");
    std::string v_corpus;
    bool v_strict = false;
    std::size_t v_max_len = 128;
    validate->add_option("corpus", v_corpus, "CoNLL corpus file")->required();
    validate->add_flag("--strict", v_strict, "fail on empty sentences and truncation");
    validate->add_option("--max-len", v_max_len, "length used for truncation accounting");

    // split
    auto* split = app.add_subcommand("split", "shuffle and partition a corpus");
    std::string s_corpus, s_ratios = "0.8,0.1,0.1", s_out_dir = ".";
    std::uint64_t s_seed = 42;
    split->add_option("corpus", s_corpus, "CoNLL corpus file")->required();
    split->add_option("--ratios", s_ratios, "train,val,test fractions");
    split->add_option("--seed", s_seed, "shuffle seed");
    split->add_option("--out-dir", s_out_dir, "output directory");

    // train
    auto* train_cmd = app.add_subcommand("train", "train the token classifier");
    std::string t_train, t_val, t_config, t_checkpoint = "model.ckpt", t_vocab = "vocab.json";
    std::string t_history, t_run_name = "encoder";
    std::size_t t_min_freq = 1;
    TrainFlags t_flags;
    ModelDims t_dims;
    train_cmd->add_option("--train", t_train, "training corpus")->required();
    train_cmd->add_option("--val", t_val, "validation corpus");
    train_cmd->add_option("--config", t_config, "key = value config file (flags override)");
    train_cmd->add_option("--checkpoint", t_checkpoint, "checkpoint output path");
    train_cmd->add_option("--vocab-out", t_vocab, "vocabulary output path");
    train_cmd->add_option("--history", t_history, "run-record JSON-lines ledger");
    train_cmd->add_option("--run-name", t_run_name, "name recorded with this run");
    train_cmd->add_option("--min-freq", t_min_freq, "vocabulary frequency floor")
        ->check(CLI::PositiveNumber);
    add_train_flags(train_cmd, t_flags);
    add_model_dims(train_cmd, t_dims);

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint on a test corpus");
    std::string e_model, e_vocab, e_test, e_out, e_run_name = "encoder";
    eval_cmd->add_option("--model", e_model, "checkpoint path")->required();
    eval_cmd->add_option("--vocab", e_vocab, "vocabulary JSON")->required();
    eval_cmd->add_option("--test", e_test, "test corpus")->required();
    eval_cmd->add_option("--out", e_out, "metrics CSV output");
    eval_cmd->add_option("--run-name", e_run_name, "model column value");

    // tune
    auto* tune = app.add_subcommand("tune", "full-factorial hyper-parameter grid search");
    std::string g_train, g_val, g_grid, g_records = "trials.jsonl", g_summary, g_model = "encoder";
    std::size_t g_epochs = 10, g_workers = std::max(1u, std::thread::hardware_concurrency());
    std::size_t g_top_k = 5;
    std::uint64_t g_seed = 42;
    TrainFlags g_flags;
    ModelDims g_dims;
    tune->add_option("--train", g_train, "training corpus")->required();
    tune->add_option("--val", g_val, "validation corpus")->required();
    tune->add_option("--grid", g_grid, "grid space JSON (four arrays); default built-in");
    tune->add_option("--epochs", g_epochs, "epoch budget per trial")->check(CLI::PositiveNumber);
    tune->add_option("--seed", g_seed, "shared seed for every trial");
    tune->add_option("--workers", g_workers, "concurrent trials")->check(CLI::PositiveNumber);
    tune->add_option("--records", g_records, "trial record JSON-lines store");
    tune->add_option("--summary", g_summary, "summary CSV output");
    tune->add_option("--top-k", g_top_k, "rows in the summary")->check(CLI::PositiveNumber);
    tune->add_option("--model-name", g_model, "model column value");
    add_train_flags(tune, g_flags);
    add_model_dims(tune, g_dims);

    // report
    auto* report = app.add_subcommand("report", "combined results table and F1 chart");
    std::vector<std::string> r_metrics;
    std::string r_table, r_chart;
    report->add_option("--metrics", r_metrics, "metrics CSV files from evaluate")->required();
    report->add_option("--table", r_table, "combined CSV output");
    report->add_option("--chart", r_chart, "grouped-bar SVG output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(ingest)) {
            return do_ingest(q_query, q_store, q_out, q_api_base, q_mapping);
        }
        if (app.got_subcommand(validate)) {
            return do_validate(v_corpus, v_strict, v_max_len);
        }
        if (app.got_subcommand(split)) {
            return do_split(s_corpus, s_ratios, s_seed, s_out_dir);
        }
        if (app.got_subcommand(train_cmd)) {
            return do_train(t_train, t_val, t_config, t_flags, t_dims, t_min_freq, t_checkpoint,
                            t_vocab, t_history, t_run_name);
        }
        if (app.got_subcommand(eval_cmd)) {
            return do_evaluate(e_model, e_vocab, e_test, e_out, e_run_name);
        }
        if (app.got_subcommand(tune)) {
            return do_tune(g_train, g_val, g_grid, g_epochs, g_seed, g_workers, g_records,
                           g_summary, g_top_k, g_flags, g_dims, g_model);
        }
        if (app.got_subcommand(report)) {
            return do_report(r_metrics, r_table, r_chart);
        }
        std::cerr << "error: no command\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::Usage ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace riskner::cli
