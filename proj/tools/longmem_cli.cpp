// Command-line front end: generate sample paths, run estimators over series
// files (optionally in sliding windows), train and evaluate the CNN
// estimator, run stress scenarios, and benchmark the fGn generators.

#include "longmem/errors.hpp"
#include "longmem/estimators.hpp"
#include "longmem/experiment.hpp"
#include "longmem/fgn.hpp"
#include "longmem/io.hpp"
#include "longmem/nn.hpp"
#include "longmem/processes.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

std::string join_command(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i > 0) out.push_back(' ');
        out += argv[i];
    }
    return out;
}

void emit_manifest(const std::filesystem::path& artifact, const std::string& command,
                   std::uint64_t seed, const json& config) {
    std::filesystem::path m = artifact;
    m += ".manifest.json";
    longmem::write_manifest(m, command, seed, longmem::fnv1a_hex(config.dump()));
}

double elapsed(std::chrono::steady_clock::time_point from) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - from).count();
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    std::string process = "fbm";
    std::string prior_file;
    std::size_t n = 100;
    std::size_t count = 1;
    std::uint64_t seed = 1;
    std::string format = "auto";
    std::string out;
    std::optional<double> hurst, d, alpha, eta, mu, sigma, dt;
};

longmem::PriorSpec build_prior(const std::string& process, const std::string& prior_file,
                               const std::map<std::string, std::optional<double>>& pins) {
    bool any_pin = false;
    for (const auto& [k, v] : pins) {
        (void)k;
        any_pin = any_pin || v.has_value();
    }
    if (!prior_file.empty()) {
        if (any_pin) {
            throw longmem::ConfigError("--prior cannot be combined with parameter flags");
        }
        return longmem::load_prior_file(prior_file);
    }
    longmem::PriorSpec spec;
    const auto kind = longmem::process_kind_from_string(process);
    switch (kind) {
        case longmem::ProcessKind::fbm:
        case longmem::ProcessKind::fgn:
            spec = longmem::PriorSpec::fbm_default();
            spec.process = kind;
            break;
        case longmem::ProcessKind::arfima: spec = longmem::PriorSpec::arfima_default(); break;
        case longmem::ProcessKind::fou: spec = longmem::PriorSpec::fou_default(); break;
        default:
            throw longmem::ConfigError("process must be one of fbm, fgn, arfima, fou");
    }
    for (const auto& [name, v] : pins) {
        if (v) spec.params[name] = longmem::Dist::point(*v);
    }
    spec.validate();
    return spec;
}

// fGn series are the increments of the matching fBm draw, so reuse the fbm
// prior machinery and keep the stationary series.
longmem::Path draw_path(const longmem::PriorSpec& prior, std::size_t n, longmem::RngStream& rng) {
    if (prior.process != longmem::ProcessKind::fgn) {
        return longmem::generate_from_prior(prior, n, rng);
    }
    longmem::PriorSpec as_fbm = prior;
    as_fbm.process = longmem::ProcessKind::fbm;
    longmem::Path p = longmem::generate_from_prior(as_fbm, n, rng);
    p.values = longmem::diff(p.values);
    p.process = longmem::ProcessKind::fgn;
    return p;
}

int cmd_generate(const GenerateArgs& a, const std::string& command) {
    const longmem::PriorSpec prior =
        build_prior(a.process, a.prior_file,
                    {{"hurst", a.hurst}, {"d", a.d}, {"alpha", a.alpha}, {"eta", a.eta},
                     {"mu", a.mu}, {"sigma", a.sigma}, {"dt", a.dt}});
    if (a.count == 0) throw longmem::ConfigError("count must be positive");
    if (a.n == 0) throw longmem::ConfigError("n must be positive");

    std::vector<longmem::Path> paths;
    paths.reserve(a.count);
    std::vector<std::vector<double>> rows;
    rows.reserve(a.count);
    for (std::size_t i = 0; i < a.count; ++i) {
        longmem::RngStream rng(a.seed, i + 1);
        paths.push_back(draw_path(prior, a.n, rng));
        rows.push_back(paths.back().values);
    }

    const std::filesystem::path out(a.out);
    if (a.format == "bin" || (a.format == "auto" && out.extension() == ".bin")) {
        longmem::write_series_bin(out, rows);
    } else if (a.format == "csv" || a.format == "auto") {
        longmem::write_series_csv(out, rows);
    } else {
        throw longmem::ConfigError("format must be csv or bin");
    }

    std::filesystem::path truth = out;
    truth += ".truth.csv";
    longmem::write_truth_csv(truth, paths);

    json cfg{{"process", a.process}, {"prior", json::parse(longmem::prior_to_json(prior))},
             {"n", a.n}, {"count", a.count}, {"out", a.out}};
    emit_manifest(out, command, a.seed, cfg);
    return 0;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
    std::string method;
    std::string in;
    std::string out;
    std::string model;
    bool diff = false;
    std::size_t window = 0;
    std::optional<std::size_t> stride;
    std::optional<std::size_t> overlap;
};

int cmd_estimate(const EstimateArgs& a, const std::string& command) {
    const longmem::EstimatorMethod method = longmem::estimator_method_from_string(a.method);
    if (method == longmem::EstimatorMethod::cnn && a.model.empty()) {
        throw longmem::ConfigError("method cnn requires --model");
    }
    std::size_t stride = 0;
    if (a.window > 0) {
        if (a.stride && a.overlap) {
            throw longmem::ConfigError("give either --stride or --overlap, not both");
        }
        if (a.overlap) {
            if (*a.overlap >= a.window) {
                throw longmem::ConfigError("overlap must be smaller than the window");
            }
            stride = a.window - *a.overlap;
        } else {
            stride = a.stride.value_or(a.window);
        }
        if (stride == 0) throw longmem::ConfigError("stride must be positive");
    } else if (a.stride || a.overlap) {
        throw longmem::ConfigError("--stride/--overlap require --window");
    }

    const std::vector<std::vector<double>> series = longmem::read_series(a.in);

    std::optional<longmem::nn::Checkpoint> ckpt;
    std::unique_ptr<longmem::Evaluator> evaluator;
    if (method == longmem::EstimatorMethod::cnn) {
        ckpt.emplace(longmem::nn::load_checkpoint(a.model));
        evaluator = longmem::make_model_evaluator(ckpt->model);
    } else {
        evaluator = longmem::make_classical_evaluator(method);
    }

    // Cut windows on the raw rows, then difference each slice if asked; the
    // reported window_start always indexes the stored series.
    std::vector<longmem::WindowEstimate> table;
    std::vector<std::vector<double>> slices;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const std::vector<double>& row = series[s];
        std::vector<std::size_t> starts;
        if (a.window == 0) {
            starts.push_back(0);
        } else {
            for (std::size_t start = 0; start + a.window <= row.size(); start += stride) {
                starts.push_back(start);
            }
        }
        if (starts.empty() && !row.empty()) starts.push_back(0);  // short row: one failing slot
        for (std::size_t start : starts) {
            const std::size_t len = a.window == 0 ? row.size() : std::min(a.window, row.size());
            std::vector<double> slice(row.begin() + static_cast<std::ptrdiff_t>(start),
                                      row.begin() + static_cast<std::ptrdiff_t>(start + len));
            if (a.diff && slice.size() > 1) {
                for (std::size_t i = 0; i + 1 < slice.size(); ++i) slice[i] = slice[i + 1] - slice[i];
                slice.pop_back();
            }
            table.push_back({s, start, nan_v});
            slices.push_back(std::move(slice));
        }
    }

    const std::vector<double> values = evaluator->estimate(slices);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < table.size(); ++i) {
        table[i].estimate = values[i];
        if (std::isfinite(values[i])) ++ok;
    }

    const std::filesystem::path out(a.out);
    longmem::write_estimates_csv(out, table);
    json cfg{{"method", a.method}, {"in", a.in}, {"diff", a.diff},
             {"window", a.window}, {"stride", stride}, {"model", a.model}};
    emit_manifest(out, command, 0, cfg);

    if (!table.empty() && ok == 0) {
        std::cerr << "error: no window produced an estimate\n";
        return 1;
    }
    return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
    std::string config_file;
    std::string process = "fbm";
    std::string prior_file;
    std::size_t n = 100;
    std::size_t epochs = 20;
    std::size_t seqs_per_epoch = 100000;
    std::size_t batch = 32;
    double lr = 1e-4;
    double weight_decay = 0.01;
    std::uint64_t seed = 1;
    bool use_diff = false;
    std::string finetune;  // "200:1,400:1"
    std::string out = "model.ckpt";
    std::string trace_file;
};

longmem::PriorSpec default_prior(longmem::ProcessKind kind) {
    switch (kind) {
        case longmem::ProcessKind::fbm: return longmem::PriorSpec::fbm_default();
        case longmem::ProcessKind::arfima: return longmem::PriorSpec::arfima_default();
        case longmem::ProcessKind::fou: return longmem::PriorSpec::fou_default();
        default: throw longmem::ConfigError("training supports fbm, arfima, fou");
    }
}

std::vector<longmem::FinetuneStage> parse_finetune(const std::string& text) {
    std::vector<longmem::FinetuneStage> stages;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string item = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        const std::size_t colon = item.find(':');
        try {
            longmem::FinetuneStage stage;
            stage.seq_len = std::stoul(item.substr(0, colon));
            if (colon != std::string::npos) stage.epochs = std::stoul(item.substr(colon + 1));
            stages.push_back(stage);
        } catch (const std::exception&) {
            throw longmem::ConfigError("bad --finetune entry '" + item + "', want n or n:epochs");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return stages;
}

void apply_config_file(const TrainArgs& a, longmem::TrainConfig& cfg) {
    std::ifstream in(a.config_file);
    if (!in) throw longmem::IoError("cannot open " + a.config_file);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw longmem::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        if (j.contains("prior")) cfg.prior = longmem::prior_from_json(j["prior"].dump());
        if (j.contains("seq_len")) cfg.seq_len = j["seq_len"].get<std::size_t>();
        if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<std::size_t>();
        if (j.contains("epochs")) cfg.epochs = j["epochs"].get<std::size_t>();
        if (j.contains("seqs_per_epoch")) cfg.seqs_per_epoch = j["seqs_per_epoch"].get<std::size_t>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("adamw")) {
            const auto& o = j["adamw"];
            if (o.contains("lr")) cfg.adamw.lr = o["lr"].get<double>();
            if (o.contains("beta1")) cfg.adamw.beta1 = o["beta1"].get<double>();
            if (o.contains("beta2")) cfg.adamw.beta2 = o["beta2"].get<double>();
            if (o.contains("eps")) cfg.adamw.eps = o["eps"].get<double>();
            if (o.contains("weight_decay")) cfg.adamw.weight_decay = o["weight_decay"].get<double>();
        }
        if (j.contains("topology")) {
            const auto& o = j["topology"];
            if (o.contains("use_diff")) cfg.topology.use_diff = o["use_diff"].get<bool>();
            if (o.contains("use_standardize"))
                cfg.topology.use_standardize = o["use_standardize"].get<bool>();
        }
    } catch (const json::exception& e) {
        throw longmem::ConfigError(std::string("malformed train config: ") + e.what());
    }
}

int cmd_train(const TrainArgs& a, const std::string& command, const CLI::App* sub) {
    longmem::TrainConfig cfg;
    if (!a.config_file.empty()) apply_config_file(a, cfg);

    auto given = [&](const std::string& flag) { return sub->count(flag) > 0; };
    if (a.config_file.empty() || given("--process") || given("--prior")) {
        cfg.prior = a.prior_file.empty()
                        ? default_prior(longmem::process_kind_from_string(a.process))
                        : longmem::load_prior_file(a.prior_file);
    }
    if (a.config_file.empty() || given("--n")) cfg.seq_len = a.n;
    if (a.config_file.empty() || given("--epochs")) cfg.epochs = a.epochs;
    if (a.config_file.empty() || given("--seqs-per-epoch")) cfg.seqs_per_epoch = a.seqs_per_epoch;
    if (a.config_file.empty() || given("--batch")) cfg.batch_size = a.batch;
    if (a.config_file.empty() || given("--lr")) cfg.adamw.lr = a.lr;
    if (a.config_file.empty() || given("--weight-decay")) cfg.adamw.weight_decay = a.weight_decay;
    if (a.config_file.empty() || given("--seed")) cfg.seed = a.seed;
    if (given("--use-diff")) cfg.topology.use_diff = a.use_diff;
    cfg.validate();

    const std::vector<longmem::FinetuneStage> finetune = parse_finetune(a.finetune);

    // One stage list through a single draw counter: no sequence is ever
    // presented to the optimizer twice, including across fine-tune stages.
    std::vector<longmem::FinetuneStage> stages;
    stages.push_back({cfg.seq_len, cfg.epochs, cfg.seqs_per_epoch});
    stages.insert(stages.end(), finetune.begin(), finetune.end());

    longmem::nn::Model model(cfg.topology,
                             longmem::detail::mix64(cfg.seed ^ 0x696e6974ull));
    longmem::nn::AdamW opt(model.parameter_count(), cfg.adamw);

    const std::filesystem::path trace_path =
        a.trace_file.empty() ? std::filesystem::path(a.out + ".trace.csv")
                             : std::filesystem::path(a.trace_file);
    std::vector<longmem::EpochRecord> trace;
    std::uint64_t drawn = 0;
    try {
        longmem::finetune_model(model, opt, cfg.prior, stages, cfg.batch_size, cfg.seed,
                                trace, &drawn);
    } catch (const longmem::TrainingDiverged&) {
        longmem::write_trace_csv(trace_path, trace);  // keep the partial trace
        throw;
    }

    longmem::nn::save_checkpoint(a.out, model, opt);
    longmem::write_trace_csv(trace_path, trace);

    json cfg_json{{"prior", json::parse(longmem::prior_to_json(cfg.prior))},
                  {"seq_len", cfg.seq_len}, {"batch_size", cfg.batch_size},
                  {"epochs", cfg.epochs}, {"seqs_per_epoch", cfg.seqs_per_epoch},
                  {"lr", cfg.adamw.lr}, {"weight_decay", cfg.adamw.weight_decay},
                  {"finetune", a.finetune}, {"sequences_drawn", drawn}};
    emit_manifest(a.out, command, cfg.seed, cfg_json);
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string methods = "whittle-fgn";
    std::string process = "fbm";
    std::string prior_file;
    std::string model;
    std::size_t n = 100;
    std::size_t count = 10000;
    double epsilon = 0.025;
    std::uint64_t seed = 99;
    std::string out = "eval";
};

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string item = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

int cmd_evaluate(const EvaluateArgs& a, const std::string& command) {
    if (a.count < 100) throw longmem::ConfigError("count must be at least 100");
    const std::vector<std::string> methods = split_csv_list(a.methods);
    if (methods.empty()) throw longmem::ConfigError("no methods given");

    longmem::EvalConfig cfg;
    cfg.prior = a.prior_file.empty()
                    ? default_prior(longmem::process_kind_from_string(a.process))
                    : longmem::load_prior_file(a.prior_file);
    cfg.seq_len = a.n;
    cfg.count = a.count;
    cfg.epsilon = a.epsilon;
    cfg.seed = a.seed;

    std::optional<longmem::nn::Checkpoint> ckpt;
    std::vector<std::unique_ptr<longmem::Evaluator>> owned;
    std::vector<const longmem::Evaluator*> evaluators;
    for (const std::string& name : methods) {
        const longmem::EstimatorMethod m = longmem::estimator_method_from_string(name);
        if (m == longmem::EstimatorMethod::cnn) {
            if (a.model.empty()) throw longmem::ConfigError("method cnn requires --model");
            ckpt.emplace(longmem::nn::load_checkpoint(a.model));
            owned.push_back(longmem::make_model_evaluator(ckpt->model));
        } else {
            owned.push_back(longmem::make_classical_evaluator(m));
        }
        evaluators.push_back(owned.back().get());
    }

    const std::map<std::string, longmem::MetricBundle> bundles =
        longmem::evaluate_many(evaluators, cfg);

    std::filesystem::path table_path(a.out);
    if (table_path.extension() != ".csv") table_path += ".csv";
    std::ofstream table(table_path);
    if (!table) throw longmem::IoError("cannot open " + table_path.string() + " for writing");
    table << "method,n,count,mse,b_hat,sigma_hat,errors_excluded\n";
    for (const auto* ev : evaluators) {
        const longmem::MetricBundle& b = bundles.at(ev->name());
        table << ev->name() << ',' << a.n << ',' << b.count << ',' << b.mse << ','
              << b.b_hat << ',' << b.sigma_hat << ',' << b.errors_excluded << '\n';

        std::filesystem::path jp(a.out);
        jp += "." + ev->name() + ".json";
        std::ofstream jf(jp);
        if (!jf) throw longmem::IoError("cannot open " + jp.string() + " for writing");
        jf << longmem::metric_bundle_to_json(b) << '\n';
        if (!jf) throw longmem::IoError("write failed for " + jp.string());
    }
    table.flush();
    if (!table) throw longmem::IoError("write failed for " + table_path.string());

    json cfg_json{{"methods", methods}, {"prior", json::parse(longmem::prior_to_json(cfg.prior))},
                  {"n", a.n}, {"count", a.count}, {"epsilon", a.epsilon}, {"model", a.model}};
    emit_manifest(table_path, command, a.seed, cfg_json);
    return 0;
}

// ------------------------------------------------------------------ stress

struct StressArgs {
    std::string scenario;
    std::string method;
    std::string model;
    std::size_t count = 2000;
    std::size_t n = 1600;
    std::string knobs;
    double fixed_param = 0.2;
    std::uint64_t seed = 7;
    std::string out = "stress.csv";
};

int cmd_stress(const StressArgs& a, const std::string& command) {
    longmem::StressConfig cfg;
    cfg.scenario = longmem::stress_scenario_from_string(a.scenario);
    cfg.count = a.count;
    cfg.seq_len = a.n;
    cfg.fixed_param = a.fixed_param;
    cfg.seed = a.seed;
    for (const std::string& item : split_csv_list(a.knobs)) {
        try {
            cfg.knob_values.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw longmem::ConfigError("bad knob value '" + item + "'");
        }
    }

    if (a.method.empty() == a.model.empty()) {
        throw longmem::ConfigError("give exactly one of --method or --model");
    }
    std::optional<longmem::nn::Checkpoint> ckpt;
    std::unique_ptr<longmem::Evaluator> evaluator;
    if (!a.model.empty()) {
        ckpt.emplace(longmem::nn::load_checkpoint(a.model));
        evaluator = longmem::make_model_evaluator(ckpt->model);
    } else {
        evaluator = longmem::make_classical_evaluator(
            longmem::estimator_method_from_string(a.method));
    }

    const std::vector<longmem::StressRow> rows = longmem::run_stress(*evaluator, cfg);
    longmem::write_scatter_csv(a.out, rows);

    json cfg_json{{"scenario", a.scenario}, {"count", a.count}, {"n", a.n},
                  {"fixed_param", a.fixed_param}, {"knobs", a.knobs},
                  {"method", a.method}, {"model", a.model}};
    emit_manifest(a.out, command, a.seed, cfg_json);
    return 0;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
    std::string generator = "circulant-cached";
    std::size_t n = 100000;
    std::size_t count = 100;
    double hurst = 0.7;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_bench(const BenchArgs& a, const std::string& command) {
    if (a.count == 0 || a.n == 0) throw longmem::ConfigError("n and count must be positive");
    if (a.generator != "circulant-cached" && a.generator != "circulant-online" &&
        a.generator != "cholesky") {
        throw longmem::ConfigError(
            "generator must be circulant-cached, circulant-online, or cholesky");
    }
    if (a.generator == "cholesky" && a.n > longmem::max_cholesky_n()) {
        throw longmem::ConfigError("cholesky caps at n = " +
                                   std::to_string(longmem::max_cholesky_n()));
    }

    longmem::clear_fgn_caches();
    longmem::RngStream rng(a.seed, 1);
    longmem::FgnSampler sampler(rng.fork(2));

    double sink = 0.0;
    auto draw = [&]() {
        if (a.generator == "circulant-cached") {
            sink += sampler.next(a.n, a.hurst).values[0];
        } else if (a.generator == "circulant-online") {
            longmem::clear_fgn_caches();  // pay the embedding cost every time
            sink += longmem::sample_fgn_pair(a.n, a.hurst, rng).first.values[0];
        } else {
            sink += longmem::sample_fgn_cholesky(a.n, a.hurst, rng).values[0];
        }
    };

    const auto t0 = std::chrono::steady_clock::now();
    draw();
    const double first = elapsed(t0);
    for (std::size_t i = 1; i < a.count; ++i) draw();
    const double total = elapsed(t0);

    json report{{"generator", a.generator}, {"n", a.n}, {"count", a.count},
                {"hurst", a.hurst}, {"seed", a.seed},
                {"first_seconds", first}, {"total_seconds", total},
                {"mean_seconds_per_sequence", total / static_cast<double>(a.count)}};
    if (a.count > 1) {
        report["steady_seconds_per_sequence"] =
            (total - first) / static_cast<double>(a.count - 1);
    }
    volatile double keep = sink;  // the timing loop must not be elided
    (void)keep;

    if (a.out.empty()) {
        std::cout << report.dump(2) << '\n';
    } else {
        std::ofstream f(a.out);
        if (!f) throw longmem::IoError("cannot open " + a.out + " for writing");
        f << report.dump(2) << '\n';
        if (!f) throw longmem::IoError("write failed for " + a.out);
        emit_manifest(a.out, command, a.seed, report);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"long-memory processes: generation, estimation, training, evaluation"};
    app.require_subcommand(1);
    const std::string command = join_command(argc, argv);

    GenerateArgs g;
    CLI::App* gen = app.add_subcommand("generate", "sample paths from a process prior");
    gen->add_option("--process", g.process, "fbm | fgn | arfima | fou")->capture_default_str();
    gen->add_option("--prior", g.prior_file, "prior JSON file (replaces parameter flags)");
    gen->add_option("--n", g.n, "series length (fbm/fou paths get n+1 values)")->capture_default_str();
    gen->add_option("--count", g.count, "number of series")->capture_default_str();
    gen->add_option("--seed", g.seed, "RNG seed")->capture_default_str();
    gen->add_option("--format", g.format, "csv | bin (default: by extension)");
    gen->add_option("--out", g.out, "output file")->required();
    gen->add_option("--hurst", g.hurst, "pin the Hurst parameter");
    gen->add_option("--d", g.d, "pin the ARFIMA memory parameter");
    gen->add_option("--alpha", g.alpha, "pin the fOU mean reversion");
    gen->add_option("--eta", g.eta, "pin the fOU starting value");
    gen->add_option("--mu", g.mu, "pin the drift / long-run level");
    gen->add_option("--sigma", g.sigma, "pin the scale");
    gen->add_option("--dt", g.dt, "pin the fOU grid step");

    EstimateArgs e;
    CLI::App* est = app.add_subcommand("estimate", "run an estimator over a series file");
    est->add_option("--method", e.method,
                    "rs | variogram | higuchi | whittle-fgn | whittle-arfima | qgv | cnn")
        ->required();
    est->add_option("--in", e.in, "input series file (csv or bin)")->required();
    est->add_option("--out", e.out, "output CSV")->required();
    est->add_option("--model", e.model, "checkpoint for method cnn");
    est->add_flag("--diff", e.diff, "difference each series (or window) first");
    est->add_option("--window", e.window, "sliding window length (default: whole series)");
    est->add_option("--stride", e.stride, "window step (default: non-overlapping)");
    est->add_option("--overlap", e.overlap, "window overlap; stride = window - overlap");

    TrainArgs t;
    CLI::App* tr = app.add_subcommand("train", "train the CNN estimator");
    tr->add_option("--config", t.config_file, "JSON config (flags override it)");
    tr->add_option("--process", t.process, "fbm | arfima | fou")->capture_default_str();
    tr->add_option("--prior", t.prior_file, "prior JSON file");
    tr->add_option("--n", t.n, "training sequence length")->capture_default_str();
    tr->add_option("--epochs", t.epochs, "virtual epochs")->capture_default_str();
    tr->add_option("--seqs-per-epoch", t.seqs_per_epoch, "fresh sequences per epoch")
        ->capture_default_str();
    tr->add_option("--batch", t.batch, "batch size")->capture_default_str();
    tr->add_option("--lr", t.lr, "AdamW learning rate")->capture_default_str();
    tr->add_option("--weight-decay", t.weight_decay, "AdamW weight decay")->capture_default_str();
    tr->add_option("--seed", t.seed, "RNG seed")->capture_default_str();
    tr->add_flag("--use-diff", t.use_diff, "model differences its input internally");
    tr->add_option("--finetune", t.finetune, "extra stages, e.g. 200:1,400:1");
    tr->add_option("--out", t.out, "checkpoint file")->capture_default_str();
    tr->add_option("--trace", t.trace_file, "loss trace CSV (default: <out>.trace.csv)");

    EvaluateArgs v;
    CLI::App* ev = app.add_subcommand("evaluate", "metric bundles for estimators on a prior");
    ev->add_option("--methods", v.methods, "comma-separated estimator list")->capture_default_str();
    ev->add_option("--process", v.process, "fbm | arfima | fou")->capture_default_str();
    ev->add_option("--prior", v.prior_file, "prior JSON file");
    ev->add_option("--model", v.model, "checkpoint when methods include cnn");
    ev->add_option("--n", v.n, "series length")->capture_default_str();
    ev->add_option("--count", v.count, "number of paths (min 100)")->capture_default_str();
    ev->add_option("--epsilon", v.epsilon, "parameter-axis window half-width")
        ->capture_default_str();
    ev->add_option("--seed", v.seed, "RNG seed")->capture_default_str();
    ev->add_option("--out", v.out, "output prefix (<out>.csv, <out>.<method>.json)")
        ->capture_default_str();

    StressArgs s;
    CLI::App* st = app.add_subcommand("stress", "scatter table for a stress scenario");
    st->add_option("--scenario", s.scenario,
                   "cross-arfima | cross-fbm | ou-alpha-sweep | noise-sweep | smooth-sweep | "
                   "ar1-sweep | levy-sweep | fbm-sum | lambda-sweep")
        ->required();
    st->add_option("--method", s.method, "classical estimator to stress");
    st->add_option("--model", s.model, "checkpoint to stress");
    st->add_option("--count", s.count, "number of rows")->capture_default_str();
    st->add_option("--n", s.n, "series length")->capture_default_str();
    st->add_option("--knobs", s.knobs, "comma-separated knob grid (default per scenario)");
    st->add_option("--fixed-param", s.fixed_param, "secondary scenario parameter")
        ->capture_default_str();
    st->add_option("--seed", s.seed, "RNG seed")->capture_default_str();
    st->add_option("--out", s.out, "output CSV")->capture_default_str();

    BenchArgs b;
    CLI::App* be = app.add_subcommand("bench", "time the fGn generators");
    be->add_option("--generator", b.generator, "circulant-cached | circulant-online | cholesky")
        ->capture_default_str();
    be->add_option("--n", b.n, "sequence length")->capture_default_str();
    be->add_option("--count", b.count, "sequences to draw")->capture_default_str();
    be->add_option("--hurst", b.hurst, "Hurst parameter")->capture_default_str();
    be->add_option("--seed", b.seed, "RNG seed")->capture_default_str();
    be->add_option("--out", b.out, "JSON report file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_generate(g, command);
        if (est->parsed()) return cmd_estimate(e, command);
        if (tr->parsed()) return cmd_train(t, command, tr);
        if (ev->parsed()) return cmd_evaluate(v, command);
        if (st->parsed()) return cmd_stress(s, command);
        if (be->parsed()) return cmd_bench(b, command);
    } catch (const longmem::ConfigError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    } catch (const longmem::DomainError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    } catch (const longmem::StabilityError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    } catch (const longmem::IoError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 3;
    } catch (const longmem::TrainingDiverged& ex) {
        std::cerr << "error: training diverged: " << ex.what() << '\n';
        return 4;
    } catch (const longmem::Error& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
