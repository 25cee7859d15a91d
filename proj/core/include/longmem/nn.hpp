#pragma once

#include "longmem/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace longmem::nn {

// Row-major batch of equal-length sequences.
struct Batch {
    std::size_t count = 0;
    std::size_t len = 0;
    std::vector<double> x;  // count * len values

    std::span<double> row(std::size_t i) { return {x.data() + i * len, len}; }
    std::span<const double> row(std::size_t i) const { return {x.data() + i * len, len}; }
};

Batch batch_from_rows(const std::vector<std::vector<double>>& rows);

// Per-sequence standardization: (x - mean) / sd with the population sd; a
// sequence with sd below 1e-12 maps to all zeros.
Batch standardize(const Batch& in);

// First differences along time; length shrinks by one.
Batch difference(const Batch& in);

// Mean squared error; the gradient of the mean with respect to prediction i
// is 2 (pred_i - target_i) / count, independent across items.
double mse(std::span<const double> pred, std::span<const double> target);

// Six kernel-4 valid convolutions with a learnable PReLU slope per layer,
// global average pooling over time, then a dense head whose first two layers
// also carry PReLU slopes.  use_diff / use_standardize describe the
// preprocessing the model expects, so a checkpoint is self-contained.
struct Topology {
    std::vector<std::size_t> conv_channels{64, 64, 128, 128, 128, 128};
    std::size_t kernel = 4;
    std::vector<std::size_t> head{128, 64, 1};
    bool use_diff = false;
    bool use_standardize = true;

    void validate() const;
};

struct TensorSpec {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
};

class Model {
public:
    // Random initialization: weights uniform on +-sqrt(1/fan_in), biases
    // zero, PReLU slopes 0.25.
    Model(Topology topo, std::uint64_t init_seed);

    // Adopt existing parameters (checkpoint restore).
    Model(Topology topo, std::vector<double> params);

    const Topology& topology() const { return topo_; }
    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }
    const std::vector<TensorSpec>& tensors() const { return tensors_; }
    std::size_t parameter_count() const { return params_.size(); }

    // Shortest raw input the model accepts, preprocessing included.
    std::size_t min_input_len() const;

    // The preprocessing steps the topology asks for (difference first).
    Batch preprocess(const Batch& raw) const;

    // Predictions for an already-preprocessed batch.
    std::vector<double> predict(const Batch& prepared) const;

    // preprocess + predict.
    std::vector<double> infer(const Batch& raw) const;
    double infer_one(std::span<const double> series) const;

    // Mean squared error plus its parameter gradient on a prepared batch,
    // streaming one sequence at a time so memory stays flat in the batch
    // size.  grad must hold parameter_count() entries; it is overwritten.
    // Throws NonFiniteGradient if any gradient entry is not finite.
    double loss_and_gradient(const Batch& prepared, std::span<const double> targets,
                             std::span<double> grad) const;

private:
    void build_layout();

    Topology topo_;
    std::vector<double> params_;
    std::vector<TensorSpec> tensors_;
};

struct AdamWConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// Decoupled weight decay: w <- w - lr * (mhat / (sqrt(vhat) + eps) + wd * w).
class AdamW {
public:
    explicit AdamW(std::size_t n_params, AdamWConfig cfg = {});
    AdamW(AdamWConfig cfg, std::uint64_t steps, std::vector<double> m, std::vector<double> v);

    void step(std::span<double> params, std::span<const double> grad);

    const AdamWConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }
    std::uint64_t steps() const { return steps_; }
    std::span<const double> first_moment() const { return m_; }
    std::span<const double> second_moment() const { return v_; }

private:
    AdamWConfig cfg_;
    std::uint64_t steps_ = 0;
    std::vector<double> m_, v_;
};

// Binary checkpoint: magic "LMNN", format version, a JSON topology/optimizer
// descriptor, then parameters and both moment vectors as little-endian f64.
void save_checkpoint(const std::filesystem::path& file, const Model& model, const AdamW& opt);

struct Checkpoint {
    Model model;
    AdamW opt;
};

Checkpoint load_checkpoint(const std::filesystem::path& file);

}
