#include "longmem/experiment.hpp"

#include "longmem/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

namespace longmem {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

// Loss ceiling above which a training batch counts as diverged.
constexpr double divergence_ceiling = 1e4;
constexpr std::size_t max_consecutive_failures = 5;
constexpr std::size_t max_prior_rejections = 1000;

void run_parallel(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = worker_count();
    if (workers <= 1 || end - begin < 2 * workers) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{begin};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= end) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}

std::size_t worker_count() {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("LONGMEM_THREADS")) {
        char* endp = nullptr;
        const long v = std::strtol(env, &endp, 10);
        if (endp != env && *endp == '\0' && v >= 1) {
            hw = std::min<std::size_t>(hw, static_cast<std::size_t>(v));
        }
    }
    return hw;
}

double Dist::sample(RngStream& rng) const {
    switch (kind) {
        case Kind::uniform: return rng.uniform(a, b);
        case Kind::exponential: return rng.exponential(a);
        case Kind::normal: return a + b * rng.normal();
        case Kind::point: return a;
    }
    throw ConfigError("unknown distribution kind");
}

Dist Dist::uniform(double lo, double hi) {
    if (!(lo < hi)) throw ConfigError("uniform prior needs lo < hi");
    return {Kind::uniform, lo, hi};
}

Dist Dist::exponential(double mean) {
    if (!(mean > 0.0)) throw ConfigError("exponential prior needs a positive mean");
    return {Kind::exponential, mean, 0.0};
}

Dist Dist::normal(double mean, double sd) {
    if (!(sd >= 0.0)) throw ConfigError("normal prior needs a non-negative sd");
    return {Kind::normal, mean, sd};
}

Dist Dist::point(double v) {
    if (!std::isfinite(v)) throw ConfigError("point prior needs a finite value");
    return {Kind::point, v, 0.0};
}

namespace {

// Parameter names each family accepts, in sampling order, with defaults.
// A slot without a fallback is only drawn when the prior pins it (fou "dt"
// follows the length-dependent schedule in default_fou_dt when absent).
struct ParamSlot {
    const char* name;
    std::optional<Dist> fallback;
};

std::vector<ParamSlot> param_slots(ProcessKind process) {
    switch (process) {
        case ProcessKind::fbm:
            return {{"hurst", Dist::uniform(0.0, 1.0)},
                    {"sigma", Dist::point(1.0)},
                    {"mu", Dist::point(0.0)}};
        case ProcessKind::fou:
            return {{"hurst", Dist::uniform(0.0, 1.0)},
                    {"alpha", Dist::exponential(100.0)},
                    {"eta", Dist::normal(0.0, 1.0)},
                    {"mu", Dist::point(0.0)},
                    {"sigma", Dist::point(1.0)},
                    {"dt", std::nullopt}};
        case ProcessKind::arfima:
            return {{"d", Dist::uniform(-0.5, 0.5)}};
        default:
            throw ConfigError("priors support the fbm, fou, and arfima families");
    }
}

}

void PriorSpec::validate() const {
    const auto slots = param_slots(process);
    for (const auto& [name, dist] : params) {
        const bool known = std::any_of(slots.begin(), slots.end(),
                                       [&](const ParamSlot& s) { return name == s.name; });
        if (!known) throw ConfigError("prior parameter '" + name + "' is not recognized");
        (void)dist;
    }
}

PriorSpec PriorSpec::fbm_default() {
    PriorSpec s;
    s.process = ProcessKind::fbm;
    s.params["hurst"] = Dist::uniform(0.0, 1.0);
    return s;
}

PriorSpec PriorSpec::arfima_default() {
    PriorSpec s;
    s.process = ProcessKind::arfima;
    s.params["d"] = Dist::uniform(-0.5, 0.5);
    return s;
}

PriorSpec PriorSpec::fou_default() {
    PriorSpec s;
    s.process = ProcessKind::fou;
    s.params["hurst"] = Dist::uniform(0.0, 1.0);
    s.params["alpha"] = Dist::exponential(100.0);
    s.params["eta"] = Dist::normal(0.0, 1.0);
    return s;
}

std::map<std::string, double> sample_prior(const PriorSpec& spec, RngStream& rng) {
    spec.validate();
    std::map<std::string, double> out;
    for (const ParamSlot& slot : param_slots(spec.process)) {
        const auto it = spec.params.find(slot.name);
        if (it != spec.params.end()) {
            out[slot.name] = it->second.sample(rng);
        } else if (slot.fallback) {
            out[slot.name] = slot.fallback->sample(rng);
        }
    }
    return out;
}

double default_fou_dt(std::size_t seq_len) {
    return 0.01 * std::pow(static_cast<double>(seq_len) / 100.0, -0.25);
}

Path generate_from_prior(const PriorSpec& spec, std::size_t seq_len, RngStream& rng) {
    for (std::size_t attempt = 0; attempt < max_prior_rejections; ++attempt) {
        const auto params = sample_prior(spec, rng);
        try {
            switch (spec.process) {
                case ProcessKind::fbm:
                    return sample_fbm(seq_len, params.at("hurst"), params.at("sigma"),
                                      params.at("mu"), 1.0, rng);
                case ProcessKind::fou: {
                    FouParams p;
                    p.eta = params.at("eta");
                    p.hurst = params.at("hurst");
                    p.alpha = params.at("alpha");
                    p.mu = params.at("mu");
                    p.sigma = params.at("sigma");
                    const auto dt_it = params.find("dt");
                    p.dt = dt_it != params.end() ? dt_it->second : default_fou_dt(seq_len);
                    return sample_fou(p, seq_len - 1, rng);
                }
                case ProcessKind::arfima:
                    return sample_arfima(seq_len, params.at("d"), rng);
                default:
                    throw ConfigError("priors support the fbm, fou, and arfima families");
            }
        } catch (const DomainError&) {
            // boundary draw (e.g. hurst exactly 0); redraw
        } catch (const StabilityError&) {
            // mean reversion too fast for this grid; redraw
        }
    }
    throw ConfigError("prior rejected too many consecutive draws");
}

double natural_target(ProcessKind process, const std::map<std::string, double>& params) {
    switch (process) {
        case ProcessKind::fbm:
        case ProcessKind::fou:
            return params.at("hurst");
        case ProcessKind::arfima:
            return params.at("d");
        default:
            throw DomainError("no scalar memory target for this process");
    }
}

SeriesForm training_input_form(ProcessKind process) {
    switch (process) {
        case ProcessKind::fbm:
        case ProcessKind::arfima:
            return SeriesForm::increments;
        case ProcessKind::fou:
            return SeriesForm::levels;
        default:
            throw DomainError("no training form for this process");
    }
}

LabelledBatch make_training_batch(const PriorSpec& spec, std::size_t seq_len, std::size_t count,
                                  RngStream& rng) {
    const SeriesForm form = training_input_form(spec.process);
    std::vector<std::vector<double>> rows;
    rows.reserve(count);
    LabelledBatch out;
    out.targets.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Path p = generate_from_prior(spec, seq_len, rng);
        rows.push_back(series_as(form, p));
        out.targets.push_back(natural_target(spec.process, p.truth));
    }
    out.inputs = nn::batch_from_rows(rows);
    return out;
}

void TrainConfig::validate() const {
    prior.validate();
    topology.validate();
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    if (seqs_per_epoch < batch_size) throw ConfigError("epoch smaller than one batch");
    const std::size_t min_len =
        topology.conv_channels.size() * (topology.kernel - 1) + 1 + (topology.use_diff ? 1 : 0);
    if (seq_len < min_len) throw ConfigError("sequence length below the receptive field");
}

namespace {

// One pass of epochs at a fixed sequence length, shared by initial training
// and fine-tuning.  Batch k draws from stream seed:k so results do not depend
// on how epochs are grouped into stages.
void run_stage(nn::Model& model, nn::AdamW& opt, const PriorSpec& prior, std::size_t seq_len,
               std::size_t batch_size, std::size_t epochs, std::size_t seqs_per_epoch,
               std::uint64_t seed, std::uint64_t& batch_counter, std::size_t& epoch_counter,
               std::vector<EpochRecord>& trace, std::uint64_t& sequences_drawn) {
    const std::size_t batches = std::max<std::size_t>(1, seqs_per_epoch / batch_size);
    std::vector<double> grad(model.parameter_count());
    for (std::size_t e = 0; e < epochs; ++e) {
        double acc = 0.0;
        std::size_t ok = 0;
        std::size_t consecutive_failures = 0;
        for (std::size_t b = 0; b < batches; ++b) {
            for (;;) {
                RngStream rng(seed, ++batch_counter);
                const LabelledBatch lb = make_training_batch(prior, seq_len, batch_size, rng);
                sequences_drawn += batch_size;
                bool failed = false;
                double loss = 0.0;
                try {
                    const nn::Batch prepared = model.preprocess(lb.inputs);
                    loss = model.loss_and_gradient(prepared, lb.targets, grad);
                    if (!std::isfinite(loss) || loss > divergence_ceiling) failed = true;
                } catch (const NonFiniteGradient&) {
                    failed = true;
                }
                if (failed) {
                    if (++consecutive_failures >= max_consecutive_failures) {
                        throw TrainingDiverged("training failed on " +
                                               std::to_string(consecutive_failures) +
                                               " consecutive batches");
                    }
                    continue;  // redraw from the next stream
                }
                consecutive_failures = 0;
                opt.step(model.parameters(), grad);
                acc += loss;
                ++ok;
                break;
            }
        }
        trace.push_back({++epoch_counter, seq_len, ok > 0 ? acc / static_cast<double>(ok) : nan_v});
    }
}

}

TrainResult train_model(const TrainConfig& cfg) {
    cfg.validate();
    nn::Model model(cfg.topology, detail::mix64(cfg.seed ^ 0x696e6974ull));
    nn::AdamW opt(model.parameter_count(), cfg.adamw);
    std::vector<EpochRecord> trace;
    std::uint64_t batch_counter = 0;
    std::size_t epoch_counter = 0;
    std::uint64_t drawn = 0;
    run_stage(model, opt, cfg.prior, cfg.seq_len, cfg.batch_size, cfg.epochs, cfg.seqs_per_epoch,
              cfg.seed, batch_counter, epoch_counter, trace, drawn);
    return {std::move(model), std::move(opt), std::move(trace), drawn};
}

void finetune_model(nn::Model& model, nn::AdamW& opt, const PriorSpec& prior,
                    std::span<const FinetuneStage> stages, std::size_t batch_size,
                    std::uint64_t seed, std::vector<EpochRecord>& trace,
                    std::uint64_t* sequences_drawn) {
    prior.validate();
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    std::uint64_t batch_counter = 0;
    std::size_t epoch_counter = trace.empty() ? 0 : trace.back().epoch;
    std::uint64_t drawn = 0;
    for (const FinetuneStage& stage : stages) {
        if (stage.seq_len == 0 || stage.epochs == 0) {
            throw ConfigError("fine-tune stages need a sequence length and epoch count");
        }
        run_stage(model, opt, prior, stage.seq_len, batch_size, stage.epochs,
                  stage.seqs_per_epoch, seed, batch_counter, epoch_counter, trace, drawn);
    }
    if (sequences_drawn) *sequences_drawn += drawn;
}

namespace {

class ClassicalEvaluator final : public Evaluator {
public:
    explicit ClassicalEvaluator(EstimatorMethod method) : method_(method) {}

    std::string name() const override { return to_string(method_); }
    SeriesForm consumes() const override { return method_input_form(method_); }

    std::vector<double> estimate(const std::vector<std::vector<double>>& series) const override {
        std::vector<double> out(series.size(), nan_v);
        run_parallel(0, series.size(), [&](std::size_t i) {
            try {
                out[i] = one(series[i]);
            } catch (const Error&) {
                // leave NaN: the method rejected this input
            }
        });
        return out;
    }

private:
    double one(std::span<const double> x) const {
        switch (method_) {
            case EstimatorMethod::rs: return rs_estimate(x).value;
            case EstimatorMethod::variogram: return variogram_estimate(x).value;
            case EstimatorMethod::higuchi: return higuchi_estimate(x).value;
            case EstimatorMethod::whittle_fgn: return whittle_estimate(x, WhittleFamily::fgn).value;
            case EstimatorMethod::whittle_arfima:
                return whittle_estimate(x, WhittleFamily::arfima).value;
            case EstimatorMethod::qgv: return qgv_estimate(x).value;
            case EstimatorMethod::cnn: break;
        }
        throw DomainError("neural estimates need a model evaluator");
    }

    EstimatorMethod method_;
};

class ModelEvaluator final : public Evaluator {
public:
    ModelEvaluator(const nn::Model& model, std::string name, SeriesForm consumes)
        : model_(model), name_(std::move(name)), consumes_(consumes) {}

    std::string name() const override { return name_; }
    SeriesForm consumes() const override { return consumes_; }

    std::vector<double> estimate(const std::vector<std::vector<double>>& series) const override {
        std::vector<double> out(series.size(), nan_v);
        // Group equal lengths so each group runs as one batch.
        std::map<std::size_t, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < series.size(); ++i) groups[series[i].size()].push_back(i);
        for (const auto& [len, idx] : groups) {
            nn::Batch batch;
            batch.count = idx.size();
            batch.len = len;
            batch.x.reserve(batch.count * len);
            for (std::size_t i : idx) {
                batch.x.insert(batch.x.end(), series[i].begin(), series[i].end());
            }
            try {
                const std::vector<double> pred = model_.infer(batch);
                for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] = pred[j];
            } catch (const Error&) {
                // leave NaN for the whole group (e.g. shorter than receptive field)
            }
        }
        return out;
    }

private:
    const nn::Model& model_;
    std::string name_;
    SeriesForm consumes_;
};

class ConstantEvaluator final : public Evaluator {
public:
    explicit ConstantEvaluator(double value) : value_(value) {}

    std::string name() const override { return "constant"; }
    SeriesForm consumes() const override { return SeriesForm::increments; }

    std::vector<double> estimate(const std::vector<std::vector<double>>& series) const override {
        return std::vector<double>(series.size(), value_);
    }

private:
    double value_;
};

}

std::unique_ptr<Evaluator> make_classical_evaluator(EstimatorMethod method) {
    if (method == EstimatorMethod::cnn) {
        throw DomainError("neural estimates need a model evaluator");
    }
    return std::make_unique<ClassicalEvaluator>(method);
}

std::unique_ptr<Evaluator> make_model_evaluator(const nn::Model& model, std::string name) {
    const SeriesForm form =
        model.topology().use_diff ? SeriesForm::levels : SeriesForm::increments;
    return std::make_unique<ModelEvaluator>(model, std::move(name), form);
}

std::unique_ptr<Evaluator> make_constant_evaluator(double value) {
    return std::make_unique<ConstantEvaluator>(value);
}

std::string metric_bundle_to_json(const MetricBundle& m) {
    nlohmann::json j;
    j["mse"] = m.mse;
    j["epsilon"] = m.epsilon;
    j["count"] = m.count;
    auto curve = [](const std::vector<std::optional<double>>& c) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& v : c) {
            if (v.has_value()) {
                arr.push_back(*v);
            } else {
                arr.push_back(nullptr);
            }
        }
        return arr;
    };
    j["bias_curve"] = curve(m.bias_curve);
    j["sigma_curve"] = curve(m.sigma_curve);
    j["b_hat"] = m.b_hat;
    j["sigma_hat"] = m.sigma_hat;
    j["errors_excluded"] = m.errors_excluded;
    return j.dump();
}

std::map<std::string, MetricBundle> evaluate_many(const std::vector<const Evaluator*>& ests,
                                                  const EvalConfig& cfg) {
    cfg.prior.validate();
    if (cfg.count == 0) throw ConfigError("evaluation needs at least one path");
    if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 0.5)) {
        throw ConfigError("epsilon must lie in (0, 1/2]");
    }
    const double offset = cfg.prior.process == ProcessKind::arfima ? 0.5 : 0.0;
    const std::size_t grid_len = static_cast<std::size_t>(std::floor(1.0 / cfg.epsilon)) + 1;

    std::vector<double> targets(cfg.count);
    std::vector<std::vector<double>> estimates(ests.size(),
                                               std::vector<double>(cfg.count, nan_v));

    const std::size_t chunk = 1000;
    std::vector<Path> paths;
    for (std::size_t begin = 0; begin < cfg.count; begin += chunk) {
        const std::size_t end = std::min(cfg.count, begin + chunk);
        paths.assign(end - begin, Path{});
        run_parallel(begin, end, [&](std::size_t i) {
            RngStream rng(cfg.seed, i + 1);
            Path p = generate_from_prior(cfg.prior, cfg.seq_len, rng);
            targets[i] = natural_target(cfg.prior.process, p.truth);
            paths[i - begin] = std::move(p);
        });
        for (std::size_t e = 0; e < ests.size(); ++e) {
            std::vector<std::vector<double>> series(end - begin);
            for (std::size_t i = begin; i < end; ++i) {
                series[i - begin] = series_as(ests[e]->consumes(), paths[i - begin]);
            }
            const std::vector<double> vals = ests[e]->estimate(series);
            std::copy(vals.begin(), vals.end(), estimates[e].begin() + begin);
        }
    }

    std::map<std::string, MetricBundle> out;
    for (std::size_t e = 0; e < ests.size(); ++e) {
        MetricBundle m;
        m.epsilon = cfg.epsilon;
        m.bias_curve.assign(grid_len, std::nullopt);
        m.sigma_curve.assign(grid_len, std::nullopt);
        double sse = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < cfg.count; ++i) {
            const double v = estimates[e][i];
            if (!std::isfinite(v)) continue;
            sse += (v - targets[i]) * (v - targets[i]);
            ++used;
        }
        m.count = used;
        m.errors_excluded = cfg.count - used;
        m.mse = used > 0 ? sse / static_cast<double>(used) : nan_v;
        for (std::size_t j = 0; j < grid_len; ++j) {
            const double x = cfg.epsilon * static_cast<double>(j) - offset;
            double sum = 0.0, sum2 = 0.0;
            std::size_t n = 0;
            for (std::size_t i = 0; i < cfg.count; ++i) {
                const double v = estimates[e][i];
                if (!std::isfinite(v)) continue;
                if (std::abs(targets[i] - x) <= cfg.epsilon + 1e-12) {
                    sum += v;
                    sum2 += v * v;
                    ++n;
                }
            }
            if (n == 0) continue;
            const double mean = sum / static_cast<double>(n);
            const double var = std::max(0.0, sum2 / static_cast<double>(n) - mean * mean);
            m.bias_curve[j] = mean - x;
            m.sigma_curve[j] = std::sqrt(var);
        }
        double bh = 0.0, sh = 0.0;
        for (std::size_t j = 0; j < grid_len; ++j) {
            if (m.bias_curve[j]) bh += std::abs(*m.bias_curve[j]);
            if (m.sigma_curve[j]) sh += *m.sigma_curve[j];
        }
        m.b_hat = cfg.epsilon * bh;
        m.sigma_hat = cfg.epsilon * sh;
        out[ests[e]->name()] = std::move(m);
    }
    return out;
}

MetricBundle evaluate_estimator(const Evaluator& est, const EvalConfig& cfg) {
    return evaluate_many({&est}, cfg).at(est.name());
}

const char* to_string(StressScenario s) {
    switch (s) {
        case StressScenario::cross_arfima: return "cross-arfima";
        case StressScenario::cross_fbm: return "cross-fbm";
        case StressScenario::ou_alpha_sweep: return "ou-alpha-sweep";
        case StressScenario::noise_sweep: return "noise-sweep";
        case StressScenario::smooth_sweep: return "smooth-sweep";
        case StressScenario::ar1_sweep: return "ar1-sweep";
        case StressScenario::levy_sweep: return "levy-sweep";
        case StressScenario::fbm_sum: return "fbm-sum";
        case StressScenario::lambda_sweep: return "lambda-sweep";
    }
    return "unknown";
}

StressScenario stress_scenario_from_string(std::string_view s) {
    if (s == "cross-arfima") return StressScenario::cross_arfima;
    if (s == "cross-fbm") return StressScenario::cross_fbm;
    if (s == "ou-alpha-sweep") return StressScenario::ou_alpha_sweep;
    if (s == "noise-sweep") return StressScenario::noise_sweep;
    if (s == "smooth-sweep") return StressScenario::smooth_sweep;
    if (s == "ar1-sweep") return StressScenario::ar1_sweep;
    if (s == "levy-sweep") return StressScenario::levy_sweep;
    if (s == "fbm-sum") return StressScenario::fbm_sum;
    if (s == "lambda-sweep") return StressScenario::lambda_sweep;
    throw DomainError("unknown stress scenario: " + std::string(s));
}

namespace {

std::vector<double> default_knobs(StressScenario s) {
    switch (s) {
        case StressScenario::ou_alpha_sweep: {
            std::vector<double> v;
            for (int i = 0; i <= 40; ++i) v.push_back(2.5 * i);
            return v;
        }
        case StressScenario::noise_sweep: return {0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
        case StressScenario::smooth_sweep: return {1, 2, 3, 5, 8, 12};
        case StressScenario::ar1_sweep: {
            std::vector<double> v;
            for (int i = -10; i <= 21; ++i) v.push_back(0.05 * i);
            return v;
        }
        case StressScenario::levy_sweep: return {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
        case StressScenario::lambda_sweep: return {0.01, 0.1, 1.0, 10.0, 100.0};
        default: return {};  // continuous-knob scenarios draw per row
    }
}

}

std::vector<StressRow> run_stress(const Evaluator& est, const StressConfig& cfg) {
    if (cfg.count == 0) throw ConfigError("stress run needs at least one row");
    if (cfg.seq_len < 32) throw ConfigError("stress sequences must have at least 32 steps");
    const std::vector<double> knobs =
        cfg.knob_values.empty() ? default_knobs(cfg.scenario) : cfg.knob_values;

    std::vector<StressRow> rows(cfg.count);
    std::vector<std::vector<double>> series(cfg.count);
    run_parallel(0, cfg.count, [&](std::size_t i) {
        RngStream rng(cfg.seed, i + 1);
        double knob = knobs.empty() ? 0.0 : knobs[i % knobs.size()];
        double truth = nan_v;
        Path p;
        switch (cfg.scenario) {
            case StressScenario::cross_arfima: {
                const double d = knobs.empty() ? rng.uniform(-0.49, 0.49) : knob;
                knob = d;
                truth = d + 0.5;
                p = sample_arfima(cfg.seq_len, d, rng);
                break;
            }
            case StressScenario::cross_fbm: {
                const double h = knobs.empty() ? rng.uniform(0.01, 0.99) : knob;
                knob = h;
                truth = h - 0.5;
                p = sample_fbm(cfg.seq_len, h, 1.0, 0.0, 1.0, rng);
                break;
            }
            case StressScenario::ou_alpha_sweep: {
                FouParams fp;
                fp.hurst = 0.5;
                fp.alpha = knob;
                fp.dt = default_fou_dt(cfg.seq_len);
                truth = 0.5;
                p = sample_fou(fp, cfg.seq_len - 1, rng);
                break;
            }
            case StressScenario::noise_sweep: {
                const double h = rng.uniform(0.01, 0.99);
                truth = h;
                p = add_noise(sample_fbm(cfg.seq_len, h, 1.0, 0.0, 1.0, rng), knob, rng);
                break;
            }
            case StressScenario::smooth_sweep: {
                const double h = rng.uniform(0.01, 0.99);
                truth = h;
                p = smooth_overlapping(sample_fbm(cfg.seq_len, h, 1.0, 0.0, 1.0, rng),
                                       static_cast<std::size_t>(knob));
                break;
            }
            case StressScenario::ar1_sweep:
                p = sample_ar1(cfg.seq_len, knob, rng);
                break;
            case StressScenario::levy_sweep:
                if (knob == 2.0) truth = 0.5;
                p = sample_stable_levy(cfg.seq_len, knob, rng);
                break;
            case StressScenario::fbm_sum: {
                const double h2 = knobs.empty() ? rng.uniform(0.01, 0.99) : knob;
                knob = h2;
                truth = std::max(cfg.fixed_param, h2);
                const Path a = sample_fbm(cfg.seq_len, cfg.fixed_param, 1.0, 0.0, 1.0, rng);
                const Path b = sample_fbm(cfg.seq_len, h2, 1.0, 0.0, 1.0, rng);
                p = sum_with(a, b);
                break;
            }
            case StressScenario::lambda_sweep: {
                const double h = rng.uniform(0.01, 0.99);
                truth = h;
                p = scale_path(sample_fbm(cfg.seq_len, h, 1.0, 0.0, 1.0, rng), knob);
                break;
            }
        }
        rows[i].knob = knob;
        rows[i].truth = truth;
        series[i] = series_as(est.consumes(), p);
    });

    const std::vector<double> vals = est.estimate(series);
    for (std::size_t i = 0; i < cfg.count; ++i) rows[i].estimate = vals[i];
    return rows;
}

}
