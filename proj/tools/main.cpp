// smokegram: wrist-accelerometer smoking-gesture detection.
//
// Subcommands wire the library into a reproducible pipeline:
//   generate  synthetic labeled streams + ground-truth events
//   train     csv -> windows -> balance -> split -> mini-batch Adam
//   eval      confusion matrix + per-class report on the test partition
//   detect    windows -> tokens -> grammar parse -> puff/session events
//   sweep     architecture/epoch/batch grid, ranked results table
//   rerun     re-execute any command from its manifest
//
// Every command writes a manifest with its resolved arguments; identical
// inputs and seed give byte-identical artifacts.

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "smokegram/dataset.hpp"
#include "smokegram/errors.hpp"
#include "smokegram/eval.hpp"
#include "smokegram/grammar.hpp"
#include "smokegram/kvfile.hpp"
#include "smokegram/models.hpp"
#include "smokegram/rng.hpp"
#include "smokegram/synth.hpp"
#include "smokegram/textio.hpp"
#include "smokegram/version.hpp"

using namespace smokegram;

namespace {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitMissingFile = 3,
    kExitParse = 4,
    kExitNumeric = 5,
    kExitCompat = 6,
};

int run_cli(const std::vector<std::string>& args); // forward, rerun re-enters

// ---------------------------------------------------------------------------
// small parsing helpers

std::vector<std::size_t> parse_size_list(const std::string& s, const std::string& what) {
    std::vector<std::size_t> out;
    for (const auto tok : textio::split(s, ',')) {
        const auto t = textio::trim(tok);
        if (t.empty()) {
            throw CLI::ValidationError(what, "empty element in '" + s + "'");
        }
        const long long v = textio::parse_int(t, what);
        if (v < 0) {
            throw CLI::ValidationError(what, "negative value in '" + s + "'");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::vector<int> parse_class_list(const std::string& s) {
    std::vector<int> out;
    for (std::size_t v : parse_size_list(s, "classes")) {
        if (v < 1 || v > 4) {
            throw CLI::ValidationError("classes", "class ids must be 1..4");
        }
        out.push_back(static_cast<int>(v));
    }
    return out;
}

std::array<double, 3> parse_ratios(const std::string& s) {
    const auto parts = textio::split(s, ',');
    if (parts.size() != 3) {
        throw CLI::ValidationError("ratios", "expected three comma-separated ratios");
    }
    std::array<double, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
        out[i] = textio::parse_double(textio::trim(parts[i]), "ratios");
    }
    return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) {
            out += ',';
        }
        out += std::to_string(v[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// manifests

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::string>& canonical_args,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, std::uint64_t seed,
                    double duration_s) {
    kv::File f;
    f.set_int("manifest_version", kManifestFormatVersion);
    f.set("tool_version", kToolVersion);
    f.set("command", command);
    f.set_int("arg_count", static_cast<long long>(canonical_args.size()));
    for (std::size_t i = 0; i < canonical_args.size(); ++i) {
        f.set("arg." + std::to_string(i), canonical_args[i]);
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        f.set("input." + std::to_string(i), inputs[i]);
    }
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        f.set("output." + std::to_string(i), outputs[i]);
    }
    f.set_uint("seed", seed);
    f.set_double("duration_s", duration_s);
    f.write_file(path);
}

// ---------------------------------------------------------------------------
// config file: key<space>value lines applied beneath command-line flags

kv::File load_config(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) {
                throw CLI::ValidationError("--config", "missing file argument");
            }
            kv::File f = kv::File::read_file(args[i + 1]);
            if (f.has("config_version") && f.get_int("config_version") != 1) {
                throw CompatibilityError("unsupported config_version in config file");
            }
            return f;
        }
    }
    return {};
}

template <typename T>
void cfg_int(const kv::File& cfg, const char* key, T& target) {
    if (const auto v = cfg.find(key)) {
        target = static_cast<T>(textio::parse_int(*v, key));
    }
}

void cfg_uint(const kv::File& cfg, const char* key, std::uint64_t& target) {
    if (const auto v = cfg.find(key)) {
        target = textio::parse_uint64(*v, key);
    }
}

void cfg_double(const kv::File& cfg, const char* key, double& target) {
    if (const auto v = cfg.find(key)) {
        target = textio::parse_double(*v, key);
    }
}

void cfg_string(const kv::File& cfg, const char* key, std::string& target) {
    if (const auto v = cfg.find(key)) {
        target = *v;
    }
}

void cfg_bool(const kv::File& cfg, const char* key, bool& target) {
    if (const auto v = cfg.find(key)) {
        target = *v == "1" || *v == "true";
    }
}

// ---------------------------------------------------------------------------
// shared pipeline options (train, eval, sweep)

struct PipelineOpts {
    std::vector<std::string> data;
    std::size_t window = 20;
    std::size_t stride = 1;
    bool normalize = false;
    double rate = kDefaultSampleRateHz;
    bool allow_any_rate = false;
    std::size_t balance_factor = 30;
    std::string balance_classes = "2,4";
    std::string leak_mode = "paper";
    std::string ratios = "0.7,0.15,0.15";
};

void add_pipeline_flags(CLI::App* cmd, PipelineOpts& p, bool with_split_flags) {
    cmd->add_option("--data", p.data, "input stream CSV file(s)")->required();
    cmd->add_option("--window", p.window, "samples per window");
    cmd->add_option("--stride", p.stride, "samples between window starts");
    cmd->add_flag("--normalize", p.normalize, "per-window min-max scaling");
    cmd->add_option("--rate", p.rate, "expected sample rate (Hz)");
    cmd->add_flag("--allow-any-rate", p.allow_any_rate, "skip the sample-rate check");
    if (with_split_flags) {
        cmd->add_option("--balance-factor", p.balance_factor,
                        "duplication factor for sparse classes");
        cmd->add_option("--balance-classes", p.balance_classes,
                        "classes to duplicate, e.g. 2,4");
        cmd->add_option("--leak-mode", p.leak_mode, "paper | no_leak")
            ->check(CLI::IsMember({"paper", "no_leak"}));
        cmd->add_option("--ratios", p.ratios, "train,val,test split ratios");
    }
}

void apply_pipeline_config(const kv::File& cfg, PipelineOpts& p) {
    if (const auto v = cfg.find("data")) {
        p.data.clear();
        for (const auto tok : textio::split(*v, ';')) {
            p.data.emplace_back(textio::trim(tok));
        }
    }
    cfg_int(cfg, "window", p.window);
    cfg_int(cfg, "stride", p.stride);
    cfg_bool(cfg, "normalize", p.normalize);
    cfg_double(cfg, "rate", p.rate);
    cfg_bool(cfg, "allow_any_rate", p.allow_any_rate);
    cfg_int(cfg, "balance_factor", p.balance_factor);
    cfg_string(cfg, "balance_classes", p.balance_classes);
    cfg_string(cfg, "leak_mode", p.leak_mode);
    cfg_string(cfg, "ratios", p.ratios);
}

void pipeline_argv(const PipelineOpts& p, std::vector<std::string>& out,
                   bool with_split_flags) {
    for (const auto& d : p.data) {
        out.push_back("--data");
        out.push_back(d);
    }
    out.push_back("--window");
    out.push_back(std::to_string(p.window));
    out.push_back("--stride");
    out.push_back(std::to_string(p.stride));
    if (p.normalize) {
        out.push_back("--normalize");
    }
    out.push_back("--rate");
    out.push_back(textio::format_double(p.rate));
    if (p.allow_any_rate) {
        out.push_back("--allow-any-rate");
    }
    if (with_split_flags) {
        out.push_back("--balance-factor");
        out.push_back(std::to_string(p.balance_factor));
        out.push_back("--balance-classes");
        out.push_back(p.balance_classes);
        out.push_back("--leak-mode");
        out.push_back(p.leak_mode);
        out.push_back("--ratios");
        out.push_back(p.ratios);
    }
}

std::vector<Window> load_labeled_windows(const PipelineOpts& p) {
    std::vector<Window> windows;
    IngestOptions in_opts;
    in_opts.expected_rate_hz = p.rate;
    in_opts.allow_any_rate = p.allow_any_rate;
    in_opts.require_labels = true;
    WindowOptions w_opts;
    w_opts.window = p.window;
    w_opts.stride = p.stride;
    w_opts.normalize = p.normalize;
    for (const auto& path : p.data) {
        const SampleStream stream = ingest_csv_file(path, in_opts);
        auto ws = extract_windows(stream, w_opts);
        windows.insert(windows.end(), std::make_move_iterator(ws.begin()),
                       std::make_move_iterator(ws.end()));
    }
    return windows;
}

Dataset build_dataset(const PipelineOpts& p, std::uint64_t split_seed) {
    SplitSpec spec;
    spec.ratios = parse_ratios(p.ratios);
    spec.seed = split_seed;
    spec.leak_mode = leak_mode_from_string(p.leak_mode);
    spec.balance_factor = p.balance_factor;
    spec.balance_classes = parse_class_list(p.balance_classes);
    return split_dataset(load_labeled_windows(p), spec);
}

PipelineMeta meta_from_pipeline(const PipelineOpts& p, std::uint64_t split_seed) {
    PipelineMeta meta;
    meta.feature_order = kFeatureOrder;
    meta.sample_rate_hz = p.rate;
    meta.window = p.window;
    meta.stride = p.stride;
    meta.normalize = p.normalize;
    meta.leak_mode = leak_mode_from_string(p.leak_mode);
    meta.balance_factor = p.balance_factor;
    meta.ratios = parse_ratios(p.ratios);
    meta.split_seed = split_seed;
    return meta;
}

PipelineOpts pipeline_from_meta(const PipelineMeta& meta, std::vector<std::string> data,
                                bool allow_any_rate) {
    PipelineOpts p;
    p.data = std::move(data);
    p.window = meta.window;
    p.stride = meta.stride;
    p.normalize = meta.normalize;
    p.rate = meta.sample_rate_hz;
    p.allow_any_rate = allow_any_rate;
    p.balance_factor = meta.balance_factor;
    p.leak_mode = to_string(meta.leak_mode);
    p.ratios = textio::format_double(meta.ratios[0]) + "," +
               textio::format_double(meta.ratios[1]) + "," +
               textio::format_double(meta.ratios[2]);
    return p;
}

// Dataset sidecars carry the feature ordering; a model trained on one
// ordering must not be evaluated against another.
void check_feature_order(const std::string& data_path, const PipelineMeta& meta) {
    bool found = false;
    const DatasetMeta side = read_dataset_meta(data_path, &found);
    if (found && side.feature_order != meta.feature_order) {
        throw CompatibilityError(data_path + ": feature order '" + side.feature_order +
                                 "' does not match the model's '" + meta.feature_order +
                                 "'");
    }
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOpts {
    std::string out;
    std::string truth;
    std::size_t puffs = 10;
    std::size_t distractors = 3;
    double noise = 0.05;
    double hol_min = 0.5;
    double hol_max = 3.0;
    double rate = kDefaultSampleRateHz;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> data_seed;
};

int run_generate(const GenerateOpts& o) {
    Stopwatch clock;
    if (!(o.hol_min > 0.0 && o.hol_min < o.hol_max)) {
        throw CLI::ValidationError("--hol-min/--hol-max", "need 0 < min < max");
    }
    if (o.noise < 0.0) {
        throw CLI::ValidationError("--noise", "must be >= 0");
    }

    SynthConfig cfg;
    cfg.seed = o.data_seed ? *o.data_seed : sub_seed(o.seed, "data");
    cfg.sample_rate_hz = o.rate;
    cfg.puffs = o.puffs;
    cfg.distractors = o.distractors;
    cfg.noise_sigma = o.noise;
    cfg.hol_min_s = o.hol_min;
    cfg.hol_max_s = o.hol_max;

    const SynthResult result = generate(cfg);
    export_csv_file(o.out, result.stream);

    DatasetMeta meta;
    meta.sample_rate_hz = o.rate;
    meta.feature_order = kFeatureOrder;
    meta.seed = cfg.seed;
    write_dataset_meta(o.out, meta);

    const std::string truth_path = o.truth.empty() ? o.out + ".truth.csv" : o.truth;
    GrammarConfig gcfg;
    gcfg.sample_rate_hz = o.rate;
    write_events_csv_file(truth_path, result.truth, {});

    std::vector<std::string> argv = {"--out", o.out, "--truth", truth_path,
                                     "--puffs", std::to_string(o.puffs),
                                     "--distractors", std::to_string(o.distractors),
                                     "--noise", textio::format_double(o.noise),
                                     "--hol-min", textio::format_double(o.hol_min),
                                     "--hol-max", textio::format_double(o.hol_max),
                                     "--rate", textio::format_double(o.rate),
                                     "--seed", std::to_string(o.seed),
                                     "--data-seed", std::to_string(cfg.seed)};
    write_manifest(o.out + ".manifest", "generate", argv, {},
                   {o.out, o.out + ".meta", truth_path}, o.seed, clock.seconds());

    std::printf("generate: %zu samples, %zu puffs  ->  %s\n",
                result.stream.samples.size(), result.truth.size(), o.out.c_str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
    PipelineOpts pipeline;
    std::string out;
    std::string trace;
    std::string family = "mlp";
    std::string layers = "12,8";
    std::size_t units = 2;
    std::string lstm_mode = "stacked";
    std::string loss; // empty = family default
    std::size_t epochs = 100;
    std::size_t batch = 100;
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    bool no_epoch_shuffle = false;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> data_seed;
    std::optional<std::uint64_t> init_seed;
    std::optional<std::uint64_t> shuffle_seed;
};

struct ResolvedSeeds {
    std::uint64_t split;
    std::uint64_t init;
    std::uint64_t shuffle;
};

ResolvedSeeds resolve_seeds(std::uint64_t seed, const std::optional<std::uint64_t>& data,
                            const std::optional<std::uint64_t>& init,
                            const std::optional<std::uint64_t>& shuffle) {
    return {data ? *data : sub_seed(seed, "data"), init ? *init : sub_seed(seed, "init"),
            shuffle ? *shuffle : sub_seed(seed, "shuffle")};
}

LossKind resolve_loss(const std::string& flag, const std::string& family) {
    if (!flag.empty()) {
        return loss_from_string(flag);
    }
    return family == "mlp" ? LossKind::bce : LossKind::mse;
}

Model make_model_for(const std::string& family, const std::string& layers,
                     std::size_t units, const std::string& lstm_mode, LossKind loss,
                     std::uint64_t init_seed) {
    if (family == "mlp") {
        return make_mlp(parse_size_list(layers, "--layers"), init_seed, loss);
    }
    return make_lstm(units, init_seed, lstm_mode_from_string(lstm_mode), loss);
}

int run_train(const TrainOpts& o) {
    Stopwatch clock;
    if (o.pipeline.window * 3 != kInputWidth) {
        throw CLI::ValidationError("--window",
                                   "models take 60 features = 20 samples x 3 axes");
    }
    const ResolvedSeeds seeds =
        resolve_seeds(o.seed, o.data_seed, o.init_seed, o.shuffle_seed);
    const LossKind loss_kind = resolve_loss(o.loss, o.family);

    const Dataset data = build_dataset(o.pipeline, seeds.split);
    const PipelineMeta meta = meta_from_pipeline(o.pipeline, seeds.split);

    TrainConfig tcfg;
    tcfg.epochs = o.epochs;
    tcfg.batch = o.batch;
    tcfg.adam = {o.lr, o.beta1, o.beta2, o.epsilon};
    tcfg.shuffle_each_epoch = !o.no_epoch_shuffle;
    tcfg.shuffle_seed = seeds.shuffle;

    Model model = make_model_for(o.family, o.layers, o.units, o.lstm_mode, loss_kind,
                                 seeds.init);
    TrainTrace trace;
    if (auto* mlp = std::get_if<MlpModel>(&model)) {
        mlp->meta = meta;
        mlp->seed = seeds.init;
        trace = train(*mlp, data, tcfg);
    } else {
        auto& lstm = std::get<LstmModel>(model);
        lstm.meta = meta;
        lstm.seed = seeds.init;
        trace = train(lstm, data, tcfg);
    }

    save_model(model, o.out);
    const std::string trace_path = o.trace.empty() ? o.out + ".trace.csv" : o.trace;
    export_curves_file(trace_path, trace);

    std::vector<std::string> argv;
    pipeline_argv(o.pipeline, argv, true);
    argv.insert(argv.end(),
                {"--out", o.out, "--trace", trace_path, "--family", o.family});
    if (o.family == "mlp") {
        argv.insert(argv.end(), {"--layers", o.layers});
    } else {
        argv.insert(argv.end(),
                    {"--units", std::to_string(o.units), "--lstm-mode", o.lstm_mode});
    }
    argv.insert(argv.end(), {"--loss", std::string(to_string(loss_kind)),
                             "--epochs", std::to_string(o.epochs),
                             "--batch", std::to_string(o.batch),
                             "--lr", textio::format_double(o.lr),
                             "--beta1", textio::format_double(o.beta1),
                             "--beta2", textio::format_double(o.beta2),
                             "--epsilon", textio::format_double(o.epsilon),
                             "--seed", std::to_string(o.seed),
                             "--data-seed", std::to_string(seeds.split),
                             "--init-seed", std::to_string(seeds.init),
                             "--shuffle-seed", std::to_string(seeds.shuffle)});
    if (o.no_epoch_shuffle) {
        argv.push_back("--no-epoch-shuffle");
    }
    write_manifest(o.out + ".manifest", "train", argv, o.pipeline.data,
                   {o.out, trace_path}, o.seed, clock.seconds());

    const EpochStats& last = trace.epochs.back();
    std::printf("train: %s epochs=%zu batch=%zu  loss=%s val_loss=%s acc=%s val_acc=%s\n",
                o.family.c_str(), o.epochs, o.batch,
                textio::format_double(last.train_loss).c_str(),
                textio::format_double(last.val_loss).c_str(),
                textio::format_double(last.train_acc).c_str(),
                textio::format_double(last.val_acc).c_str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
    std::string model;
    std::vector<std::string> data;
    std::string out;
    bool all = false;
    bool allow_any_rate = false;
};

int run_eval(const EvalOpts& o) {
    Stopwatch clock;
    const Model model = load_model(o.model);
    const PipelineMeta& meta = model_meta(model);
    for (const auto& path : o.data) {
        check_feature_order(path, meta);
    }

    const PipelineOpts pipeline =
        pipeline_from_meta(meta, o.data, o.allow_any_rate);
    const Dataset data = build_dataset(pipeline, meta.split_seed);

    std::vector<const Window*> rows;
    if (o.all) {
        rows.reserve(data.windows.size());
        for (const auto& w : data.windows) {
            rows.push_back(&w);
        }
    } else {
        rows = data.partition(Partition::test);
    }
    if (rows.empty()) {
        throw DataError("eval: no windows to evaluate");
    }

    Matrix features(rows.size(), 3 * meta.window);
    std::vector<int> actual(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i]->features.size(); ++j) {
            features(i, j) = rows[i]->features[j];
        }
        actual[i] = rows[i]->label;
    }

    const Matrix predictions = model_forward(model, features);
    const std::vector<int> predicted = predicted_classes(predictions);
    const ConfusionMatrix cm = confusion(predicted, actual);
    const MetricsReport rep = report(cm);
    write_report_csv_file(o.out, rep);

    Matrix targets(rows.size(), kNumClasses);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        targets(i, static_cast<std::size_t>(actual[i] - 1)) = 1.0;
    }
    const double elementwise = accuracy(predictions, targets, AccuracyMode::elementwise);

    std::vector<std::string> argv = {"--model", o.model};
    for (const auto& d : o.data) {
        argv.push_back("--data");
        argv.push_back(d);
    }
    argv.insert(argv.end(), {"--out", o.out});
    if (o.all) {
        argv.push_back("--all");
    }
    if (o.allow_any_rate) {
        argv.push_back("--allow-any-rate");
    }
    write_manifest(o.out + ".manifest", "eval", argv, o.data, {o.out},
                   model_meta(model).split_seed, clock.seconds());

    std::printf("eval: %zu windows  argmax_acc=%s  elementwise_acc=%s  ->  %s\n",
                rows.size(), textio::format_double(rep.accuracy).c_str(),
                textio::format_double(elementwise).c_str(), o.out.c_str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// detect

struct DetectOpts {
    std::string model;
    std::string data;
    std::string out;
    double min_hol = 0.5;
    double max_hol = 3.0;
    bool strict_bounds = false;
    std::size_t tolerance = 2;
    std::size_t min_puffs = 2;
    double max_gap = 60.0;
    bool allow_any_rate = false;
};

int run_detect(const DetectOpts& o) {
    Stopwatch clock;
    if (!(o.min_hol < o.max_hol)) {
        throw CLI::ValidationError("--min-hol/--max-hol", "need min < max");
    }
    const Model model = load_model(o.model);
    const PipelineMeta& meta = model_meta(model);
    check_feature_order(o.data, meta);

    IngestOptions in_opts;
    in_opts.expected_rate_hz = meta.sample_rate_hz;
    in_opts.allow_any_rate = o.allow_any_rate;
    const SampleStream stream = ingest_csv_file(o.data, in_opts);

    WindowOptions w_opts;
    w_opts.window = meta.window;
    w_opts.stride = meta.stride;
    w_opts.normalize = meta.normalize;
    const InferenceWindows windows = windows_for_inference(stream, w_opts);

    GrammarConfig gcfg;
    gcfg.sample_rate_hz = meta.sample_rate_hz;
    gcfg.min_hol_s = o.min_hol;
    gcfg.max_hol_s = o.max_hol;
    gcfg.inclusive_bounds = !o.strict_bounds;
    gcfg.noise_tolerance = o.tolerance;
    gcfg.stride = meta.stride;
    gcfg.min_puffs = o.min_puffs;
    gcfg.max_gap_s = o.max_gap;

    std::vector<PuffEvent> puffs;
    std::vector<Session> sessions;
    if (windows.origins.empty()) {
        // stream shorter than one window: empty events file, header only
    } else {
        const Matrix predictions = model_forward(model, windows.features);
        const auto tokens = tokenize(predictions, windows.origins);
        puffs = parse(tokens, gcfg);
        sessions = group_sessions(puffs, gcfg);
    }
    write_events_csv_file(o.out, puffs, sessions);

    std::vector<std::string> argv = {
        "--model", o.model, "--data", o.data, "--out", o.out,
        "--min-hol", textio::format_double(o.min_hol),
        "--max-hol", textio::format_double(o.max_hol),
        "--tolerance", std::to_string(o.tolerance),
        "--min-puffs", std::to_string(o.min_puffs),
        "--max-gap", textio::format_double(o.max_gap)};
    if (o.strict_bounds) {
        argv.push_back("--strict-bounds");
    }
    if (o.allow_any_rate) {
        argv.push_back("--allow-any-rate");
    }
    write_manifest(o.out + ".manifest", "detect", argv, {o.model, o.data}, {o.out},
                   meta.split_seed, clock.seconds());

    std::printf("detect: %zu puffs, %zu sessions  ->  %s\n", puffs.size(),
                sessions.size(), o.out.c_str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOpts {
    PipelineOpts pipeline;
    std::string out;
    std::string family = "mlp";
    std::string epochs = "100";
    std::string batches = "100";
    std::string layers = "2,3,4"; // hidden-layer counts for mlp
    std::string units = "2,3,4";  // stacked cells for lstm
    std::string lstm_mode = "stacked";
    std::string loss;
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t jobs = 1;
    std::uint64_t seed = 0;
};

struct SweepRow {
    std::size_t epochs = 0;
    std::size_t batch = 0;
    std::size_t arch = 0;
    double loss = 0.0;
    double val_loss = 0.0;
    double acc = 0.0;
    double val_acc = 0.0;
    double test_acc = 0.0;
    std::size_t params = 0;
    std::size_t grid_index = 0;
};

int run_sweep(const SweepOpts& o) {
    Stopwatch clock;
    const auto epoch_grid = parse_size_list(o.epochs, "--epochs");
    const auto batch_grid = parse_size_list(o.batches, "--batches");
    const auto arch_grid = o.family == "mlp" ? parse_size_list(o.layers, "--layers")
                                             : parse_size_list(o.units, "--units");
    if (epoch_grid.empty() || batch_grid.empty() || arch_grid.empty()) {
        throw CLI::ValidationError("grid", "empty sweep grid");
    }
    const LossKind loss_kind = resolve_loss(o.loss, o.family);

    const std::uint64_t split_seed = sub_seed(o.seed, "data");
    const std::uint64_t shuffle_seed = sub_seed(o.seed, "shuffle");
    const Dataset data = build_dataset(o.pipeline, split_seed);
    const PipelineMeta meta = meta_from_pipeline(o.pipeline, split_seed);

    struct Cell {
        std::size_t epochs, batch, arch, index;
    };
    std::vector<Cell> cells;
    for (std::size_t e : epoch_grid) {
        for (std::size_t b : batch_grid) {
            for (std::size_t a : arch_grid) {
                cells.push_back({e, b, a, cells.size()});
            }
        }
    }

    // test partition, shared by every cell
    const auto test_rows = data.partition(Partition::test);
    Matrix test_x(test_rows.size(), 3 * o.pipeline.window);
    Matrix test_t(test_rows.size(), kNumClasses);
    for (std::size_t i = 0; i < test_rows.size(); ++i) {
        for (std::size_t j = 0; j < test_rows[i]->features.size(); ++j) {
            test_x(i, j) = test_rows[i]->features[j];
        }
        test_t(i, static_cast<std::size_t>(test_rows[i]->label - 1)) = 1.0;
    }

    auto run_cell = [&](const Cell& cell) -> SweepRow {
        const std::uint64_t init_seed =
            sub_seed(o.seed, "sweep.cell" + std::to_string(cell.index));
        TrainConfig tcfg;
        tcfg.epochs = cell.epochs;
        tcfg.batch = cell.batch;
        tcfg.adam = {o.lr, o.beta1, o.beta2, o.epsilon};
        tcfg.shuffle_seed = shuffle_seed;

        SweepRow row;
        row.epochs = cell.epochs;
        row.batch = cell.batch;
        row.arch = cell.arch;
        row.grid_index = cell.index;

        TrainTrace trace;
        Matrix test_pred;
        if (o.family == "mlp") {
            MlpModel m = make_mlp(default_hidden_widths(cell.arch), init_seed, loss_kind);
            m.meta = meta;
            trace = train(m, data, tcfg);
            test_pred = mlp_forward(m, test_x);
            row.params = m.parameter_count();
        } else {
            LstmModel m = make_lstm(cell.arch, init_seed,
                                    lstm_mode_from_string(o.lstm_mode), loss_kind);
            m.meta = meta;
            trace = train(m, data, tcfg);
            test_pred = lstm_forward(m, test_x);
            row.params = m.parameter_count();
        }
        const EpochStats& last = trace.epochs.back();
        row.loss = last.train_loss;
        row.val_loss = last.val_loss;
        row.acc = last.train_acc;
        row.val_acc = last.val_acc;
        row.test_acc = accuracy(test_pred, test_t, AccuracyMode::argmax);
        return row;
    };

    std::vector<SweepRow> rows(cells.size());
    if (o.jobs <= 1) {
        for (const Cell& cell : cells) {
            rows[cell.index] = run_cell(cell);
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cells.size()) {
                    return;
                }
                rows[i] = run_cell(cells[i]);
            }
        };
        std::vector<std::future<void>> pool;
        for (std::size_t j = 0; j < std::min(o.jobs, cells.size()); ++j) {
            pool.push_back(std::async(std::launch::async, worker));
        }
        for (auto& f : pool) {
            f.get();
        }
    }

    // Rank: minimum combined train+val loss, then the smallest architecture;
    // grid order breaks remaining ties.
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        const double ca = a.loss + a.val_loss;
        const double cb = b.loss + b.val_loss;
        if (ca != cb) {
            return ca < cb;
        }
        if (a.params != b.params) {
            return a.params < b.params;
        }
        return a.grid_index < b.grid_index;
    });

    std::ofstream out(o.out, std::ios::binary);
    if (!out) {
        throw MissingFileError("cannot write '" + o.out + "'");
    }
    out << "rank,epochs,batch,arch,loss,val_loss,acc_pct,val_acc_pct,test_acc_pct,params\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const SweepRow& r = rows[i];
        out << (i + 1) << ',' << r.epochs << ',' << r.batch << ',' << r.arch << ','
            << textio::format_double(r.loss) << ',' << textio::format_double(r.val_loss)
            << ',' << textio::format_double(100.0 * r.acc) << ','
            << textio::format_double(100.0 * r.val_acc) << ','
            << textio::format_double(100.0 * r.test_acc) << ',' << r.params << '\n';
    }
    out.close();

    std::vector<std::string> argv;
    pipeline_argv(o.pipeline, argv, true);
    argv.insert(argv.end(), {"--out", o.out, "--family", o.family,
                             "--epochs", o.epochs, "--batches", o.batches});
    if (o.family == "mlp") {
        argv.insert(argv.end(), {"--layers", join_sizes(arch_grid)});
    } else {
        argv.insert(argv.end(),
                    {"--units", join_sizes(arch_grid), "--lstm-mode", o.lstm_mode});
    }
    argv.insert(argv.end(), {"--loss", std::string(to_string(loss_kind)),
                             "--lr", textio::format_double(o.lr),
                             "--beta1", textio::format_double(o.beta1),
                             "--beta2", textio::format_double(o.beta2),
                             "--epsilon", textio::format_double(o.epsilon),
                             "--jobs", std::to_string(o.jobs),
                             "--seed", std::to_string(o.seed)});
    write_manifest(o.out + ".manifest", "sweep", argv, o.pipeline.data, {o.out}, o.seed,
                   clock.seconds());

    std::printf("sweep: %zu cells  best epochs=%zu batch=%zu arch=%zu test_acc=%s  ->  %s\n",
                rows.size(), rows[0].epochs, rows[0].batch, rows[0].arch,
                textio::format_double(100.0 * rows[0].test_acc).c_str(), o.out.c_str());
    return kExitOk;
}

// ---------------------------------------------------------------------------
// rerun

int run_rerun(const std::string& manifest_path) {
    const kv::File f = kv::File::read_file(manifest_path);
    if (f.get_int("manifest_version") != kManifestFormatVersion) {
        throw CompatibilityError(manifest_path + ": unsupported manifest version");
    }
    const std::string command = f.get("command");
    if (command == "rerun") {
        throw DataError("refusing to rerun a rerun manifest");
    }
    std::vector<std::string> args = {command};
    const auto count = f.get_int("arg_count");
    for (long long i = 0; i < count; ++i) {
        args.push_back(f.get("arg." + std::to_string(i)));
    }
    return run_cli(args);
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"wrist-accelerometer smoking gesture detection"};
    app.set_version_flag("--version", std::string("smokegram ") + kToolVersion);
    app.require_subcommand(1);

    const kv::File cfg = load_config(args);
    std::string config_path;

    GenerateOpts gen;
    CLI::App* c_gen = app.add_subcommand("generate", "synthesize a labeled stream");
    c_gen->add_option("--config", config_path, "key-value config file");
    c_gen->add_option("--out", gen.out, "output CSV path")->required();
    c_gen->add_option("--truth", gen.truth, "ground-truth events CSV path");
    c_gen->add_option("--puffs", gen.puffs, "number of puffs");
    c_gen->add_option("--distractors", gen.distractors, "number of distractor segments");
    c_gen->add_option("--noise", gen.noise, "per-axis gaussian noise sigma");
    c_gen->add_option("--hol-min", gen.hol_min, "min hand-on-lip duration (s)");
    c_gen->add_option("--hol-max", gen.hol_max, "max hand-on-lip duration (s)");
    c_gen->add_option("--rate", gen.rate, "sample rate (Hz)");
    c_gen->add_option("--seed", gen.seed, "run seed");
    c_gen->add_option("--data-seed", gen.data_seed, "override the derived data seed");
    cfg_string(cfg, "out", gen.out);
    cfg_string(cfg, "truth", gen.truth);
    cfg_int(cfg, "puffs", gen.puffs);
    cfg_int(cfg, "distractors", gen.distractors);
    cfg_double(cfg, "noise", gen.noise);
    cfg_double(cfg, "hol_min", gen.hol_min);
    cfg_double(cfg, "hol_max", gen.hol_max);
    cfg_double(cfg, "rate", gen.rate);
    cfg_uint(cfg, "seed", gen.seed);

    TrainOpts tr;
    CLI::App* c_train = app.add_subcommand("train", "train a window classifier");
    c_train->add_option("--config", config_path, "key-value config file");
    add_pipeline_flags(c_train, tr.pipeline, true);
    c_train->add_option("--out", tr.out, "model file path")->required();
    c_train->add_option("--trace", tr.trace, "per-epoch curve CSV path");
    c_train->add_option("--family", tr.family, "mlp | lstm")
        ->check(CLI::IsMember({"mlp", "lstm"}));
    c_train->add_option("--layers", tr.layers, "mlp hidden widths, e.g. 12,8");
    c_train->add_option("--units", tr.units, "lstm stacked cell count");
    c_train->add_option("--lstm-mode", tr.lstm_mode, "stacked | wide")
        ->check(CLI::IsMember({"stacked", "wide"}));
    c_train->add_option("--loss", tr.loss, "bce | mse (default per family)")
        ->check(CLI::IsMember({"", "bce", "mse"}));
    c_train->add_option("--epochs", tr.epochs, "training epochs");
    c_train->add_option("--batch", tr.batch, "mini-batch size");
    c_train->add_option("--lr", tr.lr, "Adam learning rate");
    c_train->add_option("--beta1", tr.beta1, "Adam beta1");
    c_train->add_option("--beta2", tr.beta2, "Adam beta2");
    c_train->add_option("--epsilon", tr.epsilon, "Adam epsilon");
    c_train->add_flag("--no-epoch-shuffle", tr.no_epoch_shuffle,
                      "keep batch order fixed across epochs");
    c_train->add_option("--seed", tr.seed, "run seed");
    c_train->add_option("--data-seed", tr.data_seed, "override split seed");
    c_train->add_option("--init-seed", tr.init_seed, "override init seed");
    c_train->add_option("--shuffle-seed", tr.shuffle_seed, "override shuffle seed");
    apply_pipeline_config(cfg, tr.pipeline);
    cfg_string(cfg, "out", tr.out);
    cfg_string(cfg, "trace", tr.trace);
    cfg_string(cfg, "family", tr.family);
    cfg_string(cfg, "layers", tr.layers);
    cfg_int(cfg, "units", tr.units);
    cfg_string(cfg, "lstm_mode", tr.lstm_mode);
    cfg_string(cfg, "loss", tr.loss);
    cfg_int(cfg, "epochs", tr.epochs);
    cfg_int(cfg, "batch", tr.batch);
    cfg_double(cfg, "lr", tr.lr);
    cfg_double(cfg, "beta1", tr.beta1);
    cfg_double(cfg, "beta2", tr.beta2);
    cfg_double(cfg, "epsilon", tr.epsilon);
    cfg_uint(cfg, "seed", tr.seed);

    EvalOpts ev;
    CLI::App* c_eval = app.add_subcommand("eval", "evaluate a model on labeled data");
    c_eval->add_option("--config", config_path, "key-value config file");
    c_eval->add_option("--model", ev.model, "model file")->required();
    c_eval->add_option("--data", ev.data, "labeled stream CSV file(s)")->required();
    c_eval->add_option("--out", ev.out, "report CSV path")->required();
    c_eval->add_flag("--all", ev.all, "evaluate every window, not just the test split");
    c_eval->add_flag("--allow-any-rate", ev.allow_any_rate, "skip the sample-rate check");

    DetectOpts det;
    CLI::App* c_detect = app.add_subcommand("detect", "detect puffs and sessions");
    c_detect->add_option("--config", config_path, "key-value config file");
    c_detect->add_option("--model", det.model, "model file")->required();
    c_detect->add_option("--data", det.data, "stream CSV file")->required();
    c_detect->add_option("--out", det.out, "events CSV path")->required();
    c_detect->add_option("--min-hol", det.min_hol, "min hand-on-lip duration (s)");
    c_detect->add_option("--max-hol", det.max_hol, "max hand-on-lip duration (s)");
    c_detect->add_flag("--strict-bounds", det.strict_bounds,
                       "exclusive duration bounds");
    c_detect->add_option("--tolerance", det.tolerance,
                         "non-smoking tokens tolerated inside a hand-on-lip run");
    c_detect->add_option("--min-puffs", det.min_puffs, "puffs needed to form a session");
    c_detect->add_option("--max-gap", det.max_gap, "max gap between session puffs (s)");
    c_detect->add_flag("--allow-any-rate", det.allow_any_rate,
                       "skip the sample-rate check");
    cfg_double(cfg, "min_hol", det.min_hol);
    cfg_double(cfg, "max_hol", det.max_hol);
    cfg_int(cfg, "tolerance", det.tolerance);
    cfg_int(cfg, "min_puffs", det.min_puffs);
    cfg_double(cfg, "max_gap", det.max_gap);

    SweepOpts sw;
    CLI::App* c_sweep = app.add_subcommand("sweep", "grid-train and rank architectures");
    c_sweep->add_option("--config", config_path, "key-value config file");
    add_pipeline_flags(c_sweep, sw.pipeline, true);
    c_sweep->add_option("--out", sw.out, "results CSV path")->required();
    c_sweep->add_option("--family", sw.family, "mlp | lstm")
        ->check(CLI::IsMember({"mlp", "lstm"}));
    c_sweep->add_option("--epochs", sw.epochs, "epoch grid, e.g. 100,200");
    c_sweep->add_option("--batches", sw.batches, "batch grid, e.g. 50,100");
    c_sweep->add_option("--layers", sw.layers, "mlp hidden-layer counts, e.g. 2,3,4");
    c_sweep->add_option("--units", sw.units, "lstm cell counts, e.g. 2,3,4");
    c_sweep->add_option("--lstm-mode", sw.lstm_mode, "stacked | wide")
        ->check(CLI::IsMember({"stacked", "wide"}));
    c_sweep->add_option("--loss", sw.loss, "bce | mse (default per family)")
        ->check(CLI::IsMember({"", "bce", "mse"}));
    c_sweep->add_option("--lr", sw.lr, "Adam learning rate");
    c_sweep->add_option("--beta1", sw.beta1, "Adam beta1");
    c_sweep->add_option("--beta2", sw.beta2, "Adam beta2");
    c_sweep->add_option("--epsilon", sw.epsilon, "Adam epsilon");
    c_sweep->add_option("--jobs", sw.jobs, "parallel workers");
    c_sweep->add_option("--seed", sw.seed, "run seed");
    apply_pipeline_config(cfg, sw.pipeline);
    cfg_string(cfg, "family", sw.family);
    cfg_string(cfg, "epochs", sw.epochs);
    cfg_string(cfg, "batches", sw.batches);
    cfg_string(cfg, "layers", sw.layers);
    cfg_string(cfg, "units", sw.units);
    cfg_int(cfg, "jobs", sw.jobs);
    cfg_uint(cfg, "seed", sw.seed);

    std::string manifest_path;
    CLI::App* c_rerun = app.add_subcommand("rerun", "re-execute a command from its manifest");
    c_rerun->add_option("manifest", manifest_path, "manifest file")->required();

    std::vector<const char*> argv;
    argv.push_back("smokegram");
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    }

    if (c_gen->parsed()) {
        return run_generate(gen);
    }
    if (c_train->parsed()) {
        return run_train(tr);
    }
    if (c_eval->parsed()) {
        return run_eval(ev);
    }
    if (c_detect->parsed()) {
        return run_detect(det);
    }
    if (c_sweep->parsed()) {
        return run_sweep(sw);
    }
    return run_rerun(manifest_path);
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run_cli(args);
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const MissingFileError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitMissingFile;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    } catch (const CompatibilityError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCompat;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitParse;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitParse;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
