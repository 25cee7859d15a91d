#pragma once

#include "longmem/estimators.hpp"
#include "longmem/nn.hpp"
#include "longmem/processes.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace longmem {

// Prior over one scalar parameter.
struct Dist {
    enum class Kind { uniform, exponential, normal, point };

    Kind kind = Kind::point;
    double a = 0.0;  // uniform low | exponential mean | normal mean | point value
    double b = 0.0;  // uniform high | normal sd

    double sample(RngStream& rng) const;

    static Dist uniform(double lo, double hi);
    static Dist exponential(double mean);
    static Dist normal(double mean, double sd);
    static Dist point(double v);
};

// Process family plus priors for its parameters.  Missing optional parameters
// fall back to documented defaults; unknown names are rejected.
struct PriorSpec {
    ProcessKind process = ProcessKind::fbm;
    std::map<std::string, Dist> params;

    void validate() const;

    static PriorSpec fbm_default();     // hurst ~ U(0,1), sigma = 1, mu = 0
    static PriorSpec arfima_default();  // d ~ U(-0.5, 0.5)
    static PriorSpec fou_default();     // hurst ~ U(0,1), alpha ~ Exp(100), eta ~ N(0,1)
};

std::map<std::string, double> sample_prior(const PriorSpec& spec, RngStream& rng);

// Grid step used for fou experiment data unless the prior pins "dt": an
// in-fill + long-span schedule dt = 0.01 * (n/100)^(-1/4), so longer
// sequences refine the grid and extend the horizon at the same time.
double default_fou_dt(std::size_t seq_len);

// One path drawn from the prior; fou draws violating the Euler stability
// bound are rejected and redrawn.
Path generate_from_prior(const PriorSpec& spec, std::size_t seq_len, RngStream& rng);

// The label an estimator should recover: hurst for fbm/fou priors, d for
// arfima priors.
double natural_target(ProcessKind process, const std::map<std::string, double>& params);

// Model input form per process family: fbm models consume increments, fou
// models consume levels, arfima models consume the series itself.
SeriesForm training_input_form(ProcessKind process);

struct LabelledBatch {
    nn::Batch inputs;
    std::vector<double> targets;
};

LabelledBatch make_training_batch(const PriorSpec& spec, std::size_t seq_len, std::size_t count,
                                  RngStream& rng);

struct FinetuneStage {
    std::size_t seq_len = 0;
    std::size_t epochs = 1;
    std::size_t seqs_per_epoch = 5000;
};

struct TrainConfig {
    PriorSpec prior = PriorSpec::fbm_default();
    nn::Topology topology;       // defaults to the standard architecture
    std::size_t seq_len = 100;
    std::size_t batch_size = 32;
    std::size_t epochs = 20;
    std::size_t seqs_per_epoch = 100000;  // fresh draws each epoch
    nn::AdamWConfig adamw;
    std::uint64_t seed = 1;

    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based, cumulative across fine-tune stages
    std::size_t seq_len = 0;
    double mean_mse = 0.0;
};

struct TrainResult {
    nn::Model model;
    nn::AdamW opt;
    std::vector<EpochRecord> trace;
    std::uint64_t sequences_drawn = 0;
};

// Freshly sampled data every batch; a batch whose loss or gradient blows up
// is skipped and redrawn, and five consecutive failures raise
// TrainingDiverged.  Results are deterministic in (config, seed).
TrainResult train_model(const TrainConfig& cfg);

// Continue training an existing model through progressively different
// sequence lengths.  Appends to the trace with continuing epoch numbers.
void finetune_model(nn::Model& model, nn::AdamW& opt, const PriorSpec& prior,
                    std::span<const FinetuneStage> stages, std::size_t batch_size,
                    std::uint64_t seed, std::vector<EpochRecord>& trace,
                    std::uint64_t* sequences_drawn = nullptr);

// Uniform face for anything that maps series to a scalar memory estimate.
// estimate() receives series already in the representation consumes() names
// and returns NaN for inputs the underlying method rejects.
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual std::string name() const = 0;
    virtual SeriesForm consumes() const = 0;
    virtual std::vector<double> estimate(const std::vector<std::vector<double>>& series) const = 0;
};

std::unique_ptr<Evaluator> make_classical_evaluator(EstimatorMethod method);
std::unique_ptr<Evaluator> make_model_evaluator(const nn::Model& model, std::string name = "cnn");
std::unique_ptr<Evaluator> make_constant_evaluator(double value);

// Accuracy summary of an estimator against a prior: overall mean squared
// error plus bias and spread profiles along the parameter axis, on the grid
// x_j = epsilon * j (shifted by -1/2 for arfima priors).  Windows are
// [x_j - epsilon, x_j + epsilon]; empty windows stay unset.  b_hat and
// sigma_hat are the epsilon-weighted sums of |bias| and sigma.
struct MetricBundle {
    double mse = 0.0;
    double epsilon = 0.025;
    std::size_t count = 0;
    std::vector<std::optional<double>> bias_curve;
    std::vector<std::optional<double>> sigma_curve;
    double b_hat = 0.0;
    double sigma_hat = 0.0;
    std::size_t errors_excluded = 0;
};

std::string metric_bundle_to_json(const MetricBundle& m);

struct EvalConfig {
    PriorSpec prior = PriorSpec::fbm_default();
    std::size_t seq_len = 100;
    std::size_t count = 10000;
    double epsilon = 0.025;
    std::uint64_t seed = 99;
};

MetricBundle evaluate_estimator(const Evaluator& est, const EvalConfig& cfg);

// Same paths for every estimator, so comparisons are paired.
std::map<std::string, MetricBundle> evaluate_many(const std::vector<const Evaluator*>& ests,
                                                  const EvalConfig& cfg);

// Robustness probes: feed an estimator data that violates its modeling
// assumptions in a controlled way and record (knob, truth, estimate) rows.
enum class StressScenario {
    cross_arfima,   // arfima series under an fbm-calibrated estimator; knob d
    cross_fbm,      // fbm increments under an arfima-calibrated estimator; knob H
    ou_alpha_sweep, // fOU with H = 1/2, varying mean reversion; knob alpha
    noise_sweep,    // fbm plus white observation noise; knob noise sd
    smooth_sweep,   // fbm through a stride-1 moving average; knob window
    ar1_sweep,      // AR(1) series; knob coefficient
    levy_sweep,     // symmetric stable motion; knob tail index alpha
    fbm_sum,        // sum of two independent fbms, one H fixed; knob second H
    lambda_sweep,   // fbm scaled by a constant; knob scale
};

const char* to_string(StressScenario s);
StressScenario stress_scenario_from_string(std::string_view s);

struct StressRow {
    double knob = 0.0;
    double truth = 0.0;     // NaN when the scenario has no target parameter
    double estimate = 0.0;  // NaN when the estimator failed
};

struct StressConfig {
    StressScenario scenario = StressScenario::ou_alpha_sweep;
    std::size_t count = 2000;
    std::size_t seq_len = 1600;
    std::vector<double> knob_values;  // empty -> scenario default grid
    double fixed_param = 0.2;         // secondary parameter (fbm_sum: the fixed H)
    std::uint64_t seed = 7;
};

std::vector<StressRow> run_stress(const Evaluator& est, const StressConfig& cfg);

// Worker threads used by batch evaluation: hardware concurrency, capped by
// the LONGMEM_THREADS environment variable when set.
std::size_t worker_count();

}
