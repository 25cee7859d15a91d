#include "longmem/nn.hpp"

#include "longmem/errors.hpp"

#include <json.hpp>

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace longmem::nn {

namespace {

constexpr char checkpoint_magic[4] = {'L', 'M', 'N', 'N'};
constexpr std::uint32_t checkpoint_version = 1;

void prelu_forward(std::span<const double> z, double slope, std::span<double> y) {
    for (std::size_t i = 0; i < z.size(); ++i) y[i] = z[i] > 0.0 ? z[i] : slope * z[i];
}

// dz = dy * f'(z); also accumulates the slope gradient sum dy * z over z <= 0.
double prelu_backward(std::span<const double> z, double slope, std::span<const double> dy,
                      std::span<double> dz) {
    double dslope = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] > 0.0) {
            dz[i] = dy[i];
        } else {
            dz[i] = slope * dy[i];
            dslope += dy[i] * z[i];
        }
    }
    return dslope;
}

// R[(c*k + dk), t] = x[c, t + dk] for a kernel-k valid convolution.
void im2col(std::span<const double> x, std::size_t channels, std::size_t t_in, std::size_t k,
            std::vector<double>& r) {
    const std::size_t t_out = t_in - k + 1;
    r.resize(channels * k * t_out);
    for (std::size_t c = 0; c < channels; ++c) {
        const double* src = x.data() + c * t_in;
        for (std::size_t dk = 0; dk < k; ++dk) {
            double* dst = r.data() + (c * k + dk) * t_out;
            std::memcpy(dst, src + dk, t_out * sizeof(double));
        }
    }
}

}

Batch batch_from_rows(const std::vector<std::vector<double>>& rows) {
    Batch out;
    out.count = rows.size();
    out.len = rows.empty() ? 0 : rows.front().size();
    out.x.reserve(out.count * out.len);
    for (const auto& r : rows) {
        if (r.size() != out.len) throw ShapeError("batch rows must share one length");
        out.x.insert(out.x.end(), r.begin(), r.end());
    }
    return out;
}

Batch standardize(const Batch& in) {
    Batch out = in;
    for (std::size_t i = 0; i < in.count; ++i) {
        auto row = out.row(i);
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= static_cast<double>(row.size());
        double var = 0.0;
        for (double v : row) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / static_cast<double>(row.size()));
        if (sd < 1e-12) {
            std::fill(row.begin(), row.end(), 0.0);
        } else {
            for (double& v : row) v = (v - mean) / sd;
        }
    }
    return out;
}

Batch difference(const Batch& in) {
    if (in.len < 2) throw ShapeError("differencing needs at least two time steps");
    Batch out;
    out.count = in.count;
    out.len = in.len - 1;
    out.x.resize(out.count * out.len);
    for (std::size_t i = 0; i < in.count; ++i) {
        auto src = in.row(i);
        double* dst = out.x.data() + i * out.len;
        for (std::size_t t = 0; t + 1 < in.len; ++t) dst[t] = src[t + 1] - src[t];
    }
    return out;
}

double mse(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size()) throw ShapeError("prediction/target length mismatch");
    if (pred.empty()) throw ShapeError("empty prediction");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - target[i];
        acc += e * e;
    }
    return acc / static_cast<double>(pred.size());
}

void Topology::validate() const {
    if (conv_channels.empty()) throw ConfigError("at least one convolution layer required");
    for (std::size_t c : conv_channels) {
        if (c == 0) throw ConfigError("conv channel counts must be positive");
    }
    if (kernel < 2) throw ConfigError("kernel must span at least two steps");
    if (head.empty() || head.back() != 1) throw ConfigError("head must end in a single output");
    for (std::size_t h : head) {
        if (h == 0) throw ConfigError("head widths must be positive");
    }
}

// Parameter layout, in declaration order: for each conv layer its weight
// (out x in x kernel), bias, PReLU slope; then each head layer's weight and
// bias, with a PReLU slope after every head layer except the last.
void Model::build_layout() {
    topo_.validate();
    tensors_.clear();
    std::size_t offset = 0;
    const auto push = [&](std::string name, std::size_t size) {
        tensors_.push_back({std::move(name), offset, size});
        offset += size;
    };
    std::size_t in_ch = 1;
    for (std::size_t l = 0; l < topo_.conv_channels.size(); ++l) {
        const std::size_t out_ch = topo_.conv_channels[l];
        const std::string base = "conv" + std::to_string(l + 1);
        push(base + ".weight", out_ch * in_ch * topo_.kernel);
        push(base + ".bias", out_ch);
        push(base + ".slope", 1);
        in_ch = out_ch;
    }
    std::size_t in_dim = topo_.conv_channels.back();
    for (std::size_t j = 0; j < topo_.head.size(); ++j) {
        const std::size_t out_dim = topo_.head[j];
        const std::string base = "head" + std::to_string(j + 1);
        push(base + ".weight", out_dim * in_dim);
        push(base + ".bias", out_dim);
        if (j + 1 < topo_.head.size()) push(base + ".slope", 1);
        in_dim = out_dim;
    }
    params_.resize(offset);
}

Model::Model(Topology topo, std::uint64_t init_seed) : topo_(std::move(topo)) {
    build_layout();
    RngStream rng(init_seed);
    std::size_t conv_in = 1, conv_idx = 0;
    std::size_t head_in = topo_.conv_channels.back(), head_idx = 0;
    for (const TensorSpec& t : tensors_) {
        double* dst = params_.data() + t.offset;
        if (t.name.ends_with(".slope")) {
            dst[0] = 0.25;
            continue;
        }
        if (t.name.ends_with(".bias")) {
            std::fill_n(dst, t.size, 0.0);
            continue;
        }
        std::size_t fan_in;
        if (t.name.starts_with("conv")) {
            fan_in = conv_in * topo_.kernel;
            conv_in = topo_.conv_channels[conv_idx++];
        } else {
            fan_in = head_in;
            head_in = topo_.head[head_idx++];
        }
        const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
        for (std::size_t i = 0; i < t.size; ++i) dst[i] = rng.uniform(-bound, bound);
    }
}

Model::Model(Topology topo, std::vector<double> params) : topo_(std::move(topo)) {
    build_layout();
    if (params.size() != params_.size()) {
        throw ShapeError("parameter vector does not match the topology");
    }
    params_ = std::move(params);
}

std::size_t Model::min_input_len() const {
    const std::size_t receptive = topo_.conv_channels.size() * (topo_.kernel - 1) + 1;
    return receptive + (topo_.use_diff ? 1 : 0);
}

Batch Model::preprocess(const Batch& raw) const {
    if (raw.len < min_input_len()) throw ShapeError("input shorter than the receptive field");
    Batch b = topo_.use_diff ? difference(raw) : raw;
    if (topo_.use_standardize) b = standardize(b);
    return b;
}

namespace {

// Offsets and shapes of one conv / dense layer inside the flat parameter
// vector; rebuilt cheaply from the tensor table when needed.
struct ConvMeta {
    std::size_t in, out, w, b, s;
};
struct DenseMeta {
    std::size_t in, out, w, b, s;
    bool prelu;
};

struct LayerViews {
    std::vector<ConvMeta> convs;
    std::vector<DenseMeta> dense;
};

LayerViews make_views(const Topology& topo, const std::vector<TensorSpec>& tensors) {
    LayerViews v;
    std::size_t idx = 0;
    std::size_t in_ch = 1;
    for (std::size_t out_ch : topo.conv_channels) {
        ConvMeta m{};
        m.in = in_ch;
        m.out = out_ch;
        m.w = tensors[idx++].offset;
        m.b = tensors[idx++].offset;
        m.s = tensors[idx++].offset;
        v.convs.push_back(m);
        in_ch = out_ch;
    }
    std::size_t in_dim = topo.conv_channels.back();
    for (std::size_t j = 0; j < topo.head.size(); ++j) {
        DenseMeta m{};
        m.in = in_dim;
        m.out = topo.head[j];
        m.prelu = j + 1 < topo.head.size();
        m.w = tensors[idx++].offset;
        m.b = tensors[idx++].offset;
        m.s = m.prelu ? tensors[idx++].offset : 0;
        v.dense.push_back(m);
        in_dim = m.out;
    }
    return v;
}

struct ItemTape {
    std::vector<std::vector<double>> conv_z;  // pre-activations per conv layer
    std::vector<double> input;                // prepared input sequence
    std::vector<double> gap;
    std::vector<std::vector<double>> dense_z;  // pre-activations per head layer
};

}

// Shared single-item forward; fills the tape when one is supplied.
static double forward_item(const Topology& topo, std::span<const double> params,
                           const LayerViews& views, std::span<const double> x0,
                           ItemTape* tape, std::vector<double>& scratch_r,
                           std::vector<double>& y_cur, std::vector<double>& y_next) {
    const std::size_t k = topo.kernel;
    std::size_t t_in = x0.size();
    y_cur.assign(x0.begin(), x0.end());
    if (tape) {
        tape->input.assign(x0.begin(), x0.end());
        tape->conv_z.resize(views.convs.size());
        tape->dense_z.resize(views.dense.size());
    }
    for (std::size_t l = 0; l < views.convs.size(); ++l) {
        const ConvMeta& m = views.convs[l];
        const std::size_t t_out = t_in - k + 1;
        im2col({y_cur.data(), m.in * t_in}, m.in, t_in, k, scratch_r);
        y_next.resize(m.out * t_out);
        cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<blasint>(m.out),
                    static_cast<blasint>(t_out), static_cast<blasint>(m.in * k), 1.0,
                    params.data() + m.w, static_cast<blasint>(m.in * k), scratch_r.data(),
                    static_cast<blasint>(t_out), 0.0, y_next.data(), static_cast<blasint>(t_out));
        for (std::size_t o = 0; o < m.out; ++o) {
            const double bias = params[m.b + o];
            double* rowp = y_next.data() + o * t_out;
            for (std::size_t t = 0; t < t_out; ++t) rowp[t] += bias;
        }
        if (tape) tape->conv_z[l] = y_next;
        prelu_forward(y_next, params[m.s], y_next);
        std::swap(y_cur, y_next);
        t_in = t_out;
    }
    // Global average pooling over time.
    const std::size_t channels = topo.conv_channels.back();
    std::vector<double> pooled(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        double acc = 0.0;
        const double* rowp = y_cur.data() + c * t_in;
        for (std::size_t t = 0; t < t_in; ++t) acc += rowp[t];
        pooled[c] = acc / static_cast<double>(t_in);
    }
    if (tape) tape->gap = pooled;

    std::vector<double> h = std::move(pooled);
    for (std::size_t j = 0; j < views.dense.size(); ++j) {
        const DenseMeta& m = views.dense[j];
        std::vector<double> z(m.out);
        std::copy_n(params.data() + m.b, m.out, z.data());
        cblas_dgemv(CblasRowMajor, CblasNoTrans, static_cast<blasint>(m.out),
                    static_cast<blasint>(m.in), 1.0, params.data() + m.w,
                    static_cast<blasint>(m.in), h.data(), 1, 1.0, z.data(), 1);
        if (tape) tape->dense_z[j] = z;
        if (m.prelu) prelu_forward(z, params[m.s], z);
        h = std::move(z);
    }
    return h[0];
}

std::vector<double> Model::predict(const Batch& prepared) const {
    if (prepared.len + (topo_.use_diff ? 1 : 0) < min_input_len()) {
        throw ShapeError("input shorter than the receptive field");
    }
    const LayerViews views = make_views(topo_, tensors_);
    std::vector<double> out(prepared.count);
    std::vector<double> r, a, b;
    for (std::size_t i = 0; i < prepared.count; ++i) {
        out[i] = forward_item(topo_, params_, views, prepared.row(i), nullptr, r, a, b);
    }
    return out;
}

std::vector<double> Model::infer(const Batch& raw) const { return predict(preprocess(raw)); }

double Model::infer_one(std::span<const double> series) const {
    Batch b;
    b.count = 1;
    b.len = series.size();
    b.x.assign(series.begin(), series.end());
    return infer(b)[0];
}

double Model::loss_and_gradient(const Batch& prepared, std::span<const double> targets,
                                std::span<double> grad) const {
    if (targets.size() != prepared.count) throw ShapeError("one target per sequence required");
    if (grad.size() != params_.size()) throw ShapeError("gradient buffer size mismatch");
    if (prepared.count == 0) throw ShapeError("empty batch");
    std::fill(grad.begin(), grad.end(), 0.0);

    const LayerViews views = make_views(topo_, tensors_);
    const std::size_t k = topo_.kernel;
    const double inv_b = 1.0 / static_cast<double>(prepared.count);

    double loss = 0.0;
    ItemTape tape;
    std::vector<double> r, a, b, dz, dy, dr, y_prev;
    for (std::size_t i = 0; i < prepared.count; ++i) {
        const double pred = forward_item(topo_, params_, views, prepared.row(i), &tape, r, a, b);
        const double err = pred - targets[i];
        loss += err * err * inv_b;
        // d(mean mse)/d(pred_i): independent of the other items in the batch.
        double upstream = 2.0 * err * inv_b;

        // Head backward, last layer first.
        std::vector<std::vector<double>> dense_h(views.dense.size());
        {
            // Recompute head activations from the taped pre-activations.
            std::vector<double> h = tape.gap;
            for (std::size_t j = 0; j < views.dense.size(); ++j) {
                std::vector<double> y = tape.dense_z[j];
                if (views.dense[j].prelu) prelu_forward(y, params_[views.dense[j].s], y);
                dense_h[j] = std::move(y);
            }
        }
        std::vector<double> dvec{upstream};
        for (std::size_t jj = views.dense.size(); jj-- > 0;) {
            const DenseMeta& m = views.dense[jj];
            // dvec currently holds the gradient w.r.t. this layer's output.
            std::vector<double> dzv = dvec;
            if (m.prelu) {
                grad[m.s] += prelu_backward(tape.dense_z[jj], params_[m.s], dvec, dzv);
            }
            const std::vector<double>& h_in = jj == 0 ? tape.gap : dense_h[jj - 1];
            cblas_dger(CblasRowMajor, static_cast<blasint>(m.out), static_cast<blasint>(m.in),
                       1.0, dzv.data(), 1, h_in.data(), 1, grad.data() + m.w,
                       static_cast<blasint>(m.in));
            for (std::size_t o = 0; o < m.out; ++o) grad[m.b + o] += dzv[o];
            std::vector<double> dprev(m.in);
            cblas_dgemv(CblasRowMajor, CblasTrans, static_cast<blasint>(m.out),
                        static_cast<blasint>(m.in), 1.0, params_.data() + m.w,
                        static_cast<blasint>(m.in), dzv.data(), 1, 0.0, dprev.data(), 1);
            dvec = std::move(dprev);
        }

        // Un-pool: spread the channel gradients evenly over time.
        const std::size_t last = views.convs.size() - 1;
        std::size_t t_out = tape.conv_z[last].size() / views.convs[last].out;
        dy.assign(tape.conv_z[last].size(), 0.0);
        for (std::size_t c = 0; c < views.convs[last].out; ++c) {
            const double g = dvec[c] / static_cast<double>(t_out);
            double* rowp = dy.data() + c * t_out;
            for (std::size_t t = 0; t < t_out; ++t) rowp[t] = g;
        }

        for (std::size_t l = views.convs.size(); l-- > 0;) {
            const ConvMeta& m = views.convs[l];
            const std::vector<double>& z = tape.conv_z[l];
            t_out = z.size() / m.out;
            const std::size_t t_in = t_out + k - 1;
            dz.resize(z.size());
            grad[m.s] += prelu_backward(z, params_[m.s], dy, dz);
            for (std::size_t o = 0; o < m.out; ++o) {
                double acc = 0.0;
                const double* rowp = dz.data() + o * t_out;
                for (std::size_t t = 0; t < t_out; ++t) acc += rowp[t];
                grad[m.b + o] += acc;
            }
            if (l > 0) {
                const ConvMeta& pm = views.convs[l - 1];
                y_prev.resize(tape.conv_z[l - 1].size());
                prelu_forward(tape.conv_z[l - 1], params_[pm.s], y_prev);
            } else {
                y_prev = tape.input;
            }
            im2col({y_prev.data(), m.in * t_in}, m.in, t_in, k, r);
            cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<blasint>(m.out),
                        static_cast<blasint>(m.in * k), static_cast<blasint>(t_out), 1.0,
                        dz.data(), static_cast<blasint>(t_out), r.data(),
                        static_cast<blasint>(t_out), 1.0, grad.data() + m.w,
                        static_cast<blasint>(m.in * k));
            if (l > 0) {
                dr.resize(m.in * k * t_out);
                cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans,
                            static_cast<blasint>(m.in * k), static_cast<blasint>(t_out),
                            static_cast<blasint>(m.out), 1.0, params_.data() + m.w,
                            static_cast<blasint>(m.in * k), dz.data(),
                            static_cast<blasint>(t_out), 0.0, dr.data(),
                            static_cast<blasint>(t_out));
                dy.assign(m.in * t_in, 0.0);
                for (std::size_t c = 0; c < m.in; ++c) {
                    for (std::size_t dk = 0; dk < k; ++dk) {
                        const double* src = dr.data() + (c * k + dk) * t_out;
                        double* dst = dy.data() + c * t_in + dk;
                        for (std::size_t t = 0; t < t_out; ++t) dst[t] += src[t];
                    }
                }
            }
        }
    }
    for (double g : grad) {
        if (!std::isfinite(g)) throw NonFiniteGradient("gradient has a non-finite entry");
    }
    return loss;
}

AdamW::AdamW(std::size_t n_params, AdamWConfig cfg)
    : cfg_(cfg), m_(n_params, 0.0), v_(n_params, 0.0) {}

AdamW::AdamW(AdamWConfig cfg, std::uint64_t steps, std::vector<double> m, std::vector<double> v)
    : cfg_(cfg), steps_(steps), m_(std::move(m)), v_(std::move(v)) {
    if (m_.size() != v_.size()) throw ShapeError("moment vectors must have equal length");
}

void AdamW::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw ShapeError("optimizer state does not match the parameter count");
    }
    ++steps_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        params[i] -= cfg_.lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * params[i]);
    }
}

namespace {

template <class T>
void write_raw(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void write_doubles(std::ofstream& out, std::span<const double> v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::ifstream& in, std::vector<double>& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw CheckpointError("checkpoint truncated");
}

}

void save_checkpoint(const std::filesystem::path& file, const Model& model, const AdamW& opt) {
    if (opt.first_moment().size() != model.parameter_count()) {
        throw ShapeError("optimizer state does not match the model");
    }
    const Topology& t = model.topology();
    nlohmann::json desc;
    desc["conv_channels"] = t.conv_channels;
    desc["kernel"] = t.kernel;
    desc["head"] = t.head;
    desc["use_diff"] = t.use_diff;
    desc["use_standardize"] = t.use_standardize;
    desc["param_count"] = model.parameter_count();
    desc["adamw"] = {{"lr", opt.config().lr},
                     {"beta1", opt.config().beta1},
                     {"beta2", opt.config().beta2},
                     {"eps", opt.config().eps},
                     {"weight_decay", opt.config().weight_decay},
                     {"steps", opt.steps()}};
    const std::string payload = desc.dump();

    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open checkpoint for writing: " + file.string());
    out.write(checkpoint_magic, 4);
    write_raw(out, checkpoint_version);
    write_raw(out, static_cast<std::uint32_t>(payload.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    write_doubles(out, model.parameters());
    write_doubles(out, opt.first_moment());
    write_doubles(out, opt.second_moment());
    if (!out) throw IoError("checkpoint write failed: " + file.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + file.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, checkpoint_magic, 4) != 0) {
        throw CheckpointError("not a model checkpoint (bad magic)");
    }
    std::uint32_t version = 0, desc_len = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&desc_len), 4);
    if (!in) throw CheckpointError("checkpoint truncated");
    if (version != checkpoint_version) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }
    std::string payload(desc_len, '\0');
    in.read(payload.data(), desc_len);
    if (!in) throw CheckpointError("checkpoint truncated");

    Topology topo;
    AdamWConfig cfg;
    std::uint64_t steps = 0;
    std::size_t param_count = 0;
    try {
        const nlohmann::json desc = nlohmann::json::parse(payload);
        topo.conv_channels = desc.at("conv_channels").get<std::vector<std::size_t>>();
        topo.kernel = desc.at("kernel").get<std::size_t>();
        topo.head = desc.at("head").get<std::vector<std::size_t>>();
        topo.use_diff = desc.at("use_diff").get<bool>();
        topo.use_standardize = desc.at("use_standardize").get<bool>();
        param_count = desc.at("param_count").get<std::size_t>();
        const auto& a = desc.at("adamw");
        cfg.lr = a.at("lr").get<double>();
        cfg.beta1 = a.at("beta1").get<double>();
        cfg.beta2 = a.at("beta2").get<double>();
        cfg.eps = a.at("eps").get<double>();
        cfg.weight_decay = a.at("weight_decay").get<double>();
        steps = a.at("steps").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("bad checkpoint descriptor: ") + e.what());
    }

    std::vector<double> params(param_count), m(param_count), v(param_count);
    read_doubles(in, params);
    read_doubles(in, m);
    read_doubles(in, v);
    in.peek();
    if (!in.eof()) throw CheckpointError("trailing bytes after checkpoint payload");

    try {
        Model model(topo, std::move(params));  // validates param_count against topology
        AdamW opt(cfg, steps, std::move(m), std::move(v));
        return {std::move(model), std::move(opt)};
    } catch (const ShapeError& e) {
        throw CheckpointError(std::string("inconsistent checkpoint: ") + e.what());
    } catch (const ConfigError& e) {
        throw CheckpointError(std::string("inconsistent checkpoint: ") + e.what());
    }
}

}
