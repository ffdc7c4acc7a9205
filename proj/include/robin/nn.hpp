#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "robin/errors.hpp"
#include "robin/rng.hpp"

namespace robin {

enum class OutputHead { Softmax, Sigmoid, Linear };

// Records proximity to non-smooth points (ReLU zeros, min/max ties, loss
// caps) during a forward pass, plus a hash of which branch each site took.
// The gradient checker skips coordinates whose +/- evaluations land on
// different branches: central differences are only valid on one smooth piece.
struct KinkTracker {
    double min_margin = std::numeric_limits<double>::infinity();
    std::uint64_t branch_hash = 0xcbf29ce484222325ULL;

    void record(double signed_distance) {
        double m = std::abs(signed_distance);
        if (m < min_margin) min_margin = m;
        branch_hash ^= signed_distance > 0.0 ? 0x9e3779b97f4a7c15ULL : 0x85ebca6b0f31d4c3ULL;
        branch_hash *= 0x100000001b3ULL;
    }
};

// Fully connected net with ReLU hidden units. Columns are examples
// throughout, so a batch forward is a chain of GEMMs.
struct DenseNet {
    std::vector<int> sizes;
    OutputHead head = OutputHead::Softmax;
    std::vector<Eigen::MatrixXd> weights;  // weights[l]: sizes[l+1] x sizes[l]
    std::vector<Eigen::VectorXd> biases;

    int input_size() const { return sizes.front(); }
    int output_size() const { return sizes.back(); }
    std::size_t num_layers() const { return weights.size(); }
};

inline DenseNet make_dense_net(const std::vector<int>& sizes, OutputHead head,
                               std::uint64_t seed) {
    if (sizes.size() < 2) throw ConfigError("net needs at least input and output sizes");
    DenseNet net;
    net.sizes = sizes;
    net.head = head;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l], fan_out = sizes[l + 1];
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) w(r, c) = (rng.next_double() * 2.0 - 1.0) * a;
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return net;
}

struct ForwardTrace {
    std::vector<Eigen::MatrixXd> pre;   // pre-activations per layer
    std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, acts.back() = output
};

inline Eigen::MatrixXd apply_head(OutputHead head, const Eigen::MatrixXd& z) {
    switch (head) {
        case OutputHead::Softmax: {
            Eigen::MatrixXd out(z.rows(), z.cols());
            for (Eigen::Index c = 0; c < z.cols(); ++c) {
                Eigen::VectorXd col = z.col(c);
                double mx = col.maxCoeff();
                Eigen::VectorXd e = (col.array() - mx).exp();
                out.col(c) = e / e.sum();
            }
            return out;
        }
        case OutputHead::Sigmoid:
            return (1.0 / (1.0 + (-z.array()).exp())).matrix();
        case OutputHead::Linear:
            return z;
    }
    return z;
}

inline Eigen::MatrixXd forward(const DenseNet& net, const Eigen::MatrixXd& x,
                               ForwardTrace* trace = nullptr,
                               KinkTracker* kinks = nullptr) {
    if (x.rows() != net.input_size())
        throw std::invalid_argument("forward: input has " + std::to_string(x.rows()) +
                                    " rows, net expects " +
                                    std::to_string(net.input_size()));
    if (trace) {
        trace->pre.clear();
        trace->acts.clear();
        trace->acts.push_back(x);
    }
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        Eigen::MatrixXd z = net.weights[l] * a;
        z.colwise() += net.biases[l];
        const bool last = l + 1 == net.num_layers();
        if (last) {
            if (trace) trace->pre.push_back(z);
            a = apply_head(net.head, z);
        } else {
            if (kinks)
                for (Eigen::Index i = 0; i < z.size(); ++i) kinks->record(z.data()[i]);
            if (trace) trace->pre.push_back(z);
            a = z.cwiseMax(0.0);
        }
        if (trace) trace->acts.push_back(a);
    }
    return a;
}

struct Gradients {
    std::vector<Eigen::MatrixXd> d_weights;
    std::vector<Eigen::VectorXd> d_biases;
    Eigen::MatrixXd d_input;
};

// Exact gradients of the composed forward. `d_output` is the upstream
// gradient with respect to the head output, so any differentiable loss can
// sit on top; the head Jacobian is applied here.
inline Gradients backward(const DenseNet& net, const ForwardTrace& trace,
                          const Eigen::MatrixXd& d_output) {
    const std::size_t L = net.num_layers();
    if (d_output.rows() != net.output_size() ||
        d_output.cols() != trace.acts.back().cols())
        throw std::invalid_argument("backward: upstream gradient shape mismatch");

    Gradients g;
    g.d_weights.resize(L);
    g.d_biases.resize(L);

    Eigen::MatrixXd dz;
    const Eigen::MatrixXd& y = trace.acts.back();
    switch (net.head) {
        case OutputHead::Softmax: {
            dz.resize(y.rows(), y.cols());
            for (Eigen::Index c = 0; c < y.cols(); ++c) {
                const double dot = y.col(c).dot(d_output.col(c));
                dz.col(c) = y.col(c).cwiseProduct(d_output.col(c)) - y.col(c) * dot;
            }
            break;
        }
        case OutputHead::Sigmoid:
            dz = d_output.cwiseProduct(
                y.cwiseProduct((1.0 - y.array()).matrix()));
            break;
        case OutputHead::Linear:
            dz = d_output;
            break;
    }

    for (std::size_t l = L; l-- > 0;) {
        g.d_weights[l] = dz * trace.acts[l].transpose();
        g.d_biases[l] = dz.rowwise().sum();
        Eigen::MatrixXd da = net.weights[l].transpose() * dz;
        if (l > 0) {
            dz = da.cwiseProduct(
                (trace.pre[l - 1].array() > 0.0).cast<double>().matrix());
        } else {
            g.d_input = std::move(da);
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

inline constexpr double kCrossEntropyEps = 1e-12;

inline double cross_entropy(const Eigen::VectorXd& probs, const Eigen::VectorXd& target) {
    if (probs.size() != target.size())
        throw std::invalid_argument("cross_entropy: size mismatch");
    return -(target.array() * (probs.array() + kCrossEntropyEps).log()).sum();
}

// Mean cross-entropy over columns.
inline double cross_entropy_mean(const Eigen::MatrixXd& probs,
                                 const Eigen::MatrixXd& targets) {
    double total = -(targets.array() * (probs.array() + kCrossEntropyEps).log()).sum();
    return total / static_cast<double>(probs.cols());
}

// d(mean CE)/d(probs).
inline Eigen::MatrixXd cross_entropy_mean_grad(const Eigen::MatrixXd& probs,
                                               const Eigen::MatrixXd& targets) {
    const double inv_b = 1.0 / static_cast<double>(probs.cols());
    return (-inv_b * targets.array() / (probs.array() + kCrossEntropyEps)).matrix();
}

inline int argmax_lowest(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

inline Eigen::VectorXd one_hot(int label, int classes) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(classes);
    v[label] = 1.0;
    return v;
}

// ---------------------------------------------------------------------------
// Parameter plumbing
// ---------------------------------------------------------------------------

inline std::size_t net_param_count(const DenseNet& net) {
    std::size_t n = 0;
    for (std::size_t l = 0; l < net.num_layers(); ++l)
        n += static_cast<std::size_t>(net.weights[l].size() + net.biases[l].size());
    return n;
}

inline Eigen::VectorXd net_params(const DenseNet& net) {
    Eigen::VectorXd out(net_param_count(net));
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const auto& w = net.weights[l];
        std::memcpy(out.data() + k, w.data(), sizeof(double) * w.size());
        k += w.size();
        const auto& b = net.biases[l];
        std::memcpy(out.data() + k, b.data(), sizeof(double) * b.size());
        k += b.size();
    }
    return out;
}

inline void set_net_params(DenseNet& net, const Eigen::VectorXd& params) {
    if (static_cast<std::size_t>(params.size()) != net_param_count(net))
        throw std::invalid_argument("set_net_params: size mismatch");
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        auto& w = net.weights[l];
        std::memcpy(w.data(), params.data() + k, sizeof(double) * w.size());
        k += w.size();
        auto& b = net.biases[l];
        std::memcpy(b.data(), params.data() + k, sizeof(double) * b.size());
        k += b.size();
    }
}

// Gradient tensors flattened in net_params order.
inline Eigen::VectorXd grads_to_vector(const DenseNet& net, const Gradients& g) {
    Eigen::VectorXd out(net_param_count(net));
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const auto& w = g.d_weights[l];
        std::memcpy(out.data() + k, w.data(), sizeof(double) * w.size());
        k += w.size();
        const auto& b = g.d_biases[l];
        std::memcpy(out.data() + k, b.data(), sizeof(double) * b.size());
        k += b.size();
    }
    return out;
}

inline std::uint64_t params_checksum(const DenseNet& net) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](const double* p, std::size_t count) {
        const unsigned char* bytes = reinterpret_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < count * sizeof(double); ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        mix(net.weights[l].data(), static_cast<std::size_t>(net.weights[l].size()));
        mix(net.biases[l].data(), static_cast<std::size_t>(net.biases[l].size()));
    }
    return h;
}

// ---------------------------------------------------------------------------
// Optimizers
// ---------------------------------------------------------------------------

enum class OptimizerKind { Sgd, Adam };

struct Optimizer {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    long step_count = 0;
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;

    void reset() {
        step_count = 0;
        m_w.clear();
        v_w.clear();
        m_b.clear();
        v_b.clear();
    }

    void step(DenseNet& net, const Gradients& g) {
        if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
        if (kind == OptimizerKind::Adam && m_w.empty()) {
            for (std::size_t l = 0; l < net.num_layers(); ++l) {
                m_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(),
                                                    net.weights[l].cols()));
                v_w.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(),
                                                    net.weights[l].cols()));
                m_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
                v_b.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
            }
        }
        ++step_count;
        for (std::size_t l = 0; l < net.num_layers(); ++l) {
            if (kind == OptimizerKind::Sgd) {
                net.weights[l] -= learning_rate * g.d_weights[l];
                net.biases[l] -= learning_rate * g.d_biases[l];
            } else {
                const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
                const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
                m_w[l] = beta1 * m_w[l] + (1.0 - beta1) * g.d_weights[l];
                v_w[l] = beta2 * v_w[l] +
                         (1.0 - beta2) * g.d_weights[l].cwiseProduct(g.d_weights[l]);
                m_b[l] = beta1 * m_b[l] + (1.0 - beta1) * g.d_biases[l];
                v_b[l] = beta2 * v_b[l] +
                         (1.0 - beta2) * g.d_biases[l].cwiseProduct(g.d_biases[l]);
                net.weights[l] -=
                    (learning_rate * (m_w[l] / bc1).array() /
                     ((v_w[l] / bc2).array().sqrt() + eps))
                        .matrix();
                net.biases[l] -= (learning_rate * (m_b[l] / bc1).array() /
                                  ((v_b[l] / bc2).array().sqrt() + eps))
                                     .matrix();
            }
            if (!net.weights[l].allFinite() || !net.biases[l].allFinite())
                throw TrainError("non-finite parameters after optimizer step " +
                                 std::to_string(step_count));
        }
    }
};

// ---------------------------------------------------------------------------
// Finite-difference gradient checking
// ---------------------------------------------------------------------------

struct GradCheckResult {
    double max_rel_error = 0.0;
    int tested = 0;
    int skipped = 0;
};

// loss_fn(params, tracker) evaluates the loss at `params`, recording kink
// margins and branch choices into `tracker` when non-null. grad_fn returns
// the analytic gradient. Coordinates whose +/- probes land on different
// smooth pieces, or come within 1e-6 of a kink, are excluded.
inline GradCheckResult gradient_check(
    const std::function<double(const Eigen::VectorXd&, KinkTracker*)>& loss_fn,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad_fn,
    const Eigen::VectorXd& params, double eps = 1e-5, int num_coords = 200,
    std::uint64_t seed = 0) {
    const Eigen::VectorXd analytic = grad_fn(params);
    Rng rng(seed);

    std::vector<std::size_t> coords;
    const std::size_t dim = static_cast<std::size_t>(params.size());
    if (dim <= static_cast<std::size_t>(num_coords)) {
        for (std::size_t i = 0; i < dim; ++i) coords.push_back(i);
    } else {
        coords = rng.sample_without_replacement(dim, static_cast<std::size_t>(num_coords));
    }

    GradCheckResult result;
    Eigen::VectorXd probe = params;
    for (std::size_t i : coords) {
        KinkTracker plus_t, minus_t;
        probe[i] = params[i] + eps;
        const double lp = loss_fn(probe, &plus_t);
        probe[i] = params[i] - eps;
        const double lm = loss_fn(probe, &minus_t);
        probe[i] = params[i];

        // Invalid when the probes straddle a kink (branch pattern differs) or
        // sit within 1e-6 of one that this coordinate actually moves. Ties
        // the coordinate cannot influence leave both probes bit-identical and
        // are safe.
        const bool near_moving_kink =
            std::min(plus_t.min_margin, minus_t.min_margin) < 1e-6 &&
            plus_t.min_margin != minus_t.min_margin;
        if (plus_t.branch_hash != minus_t.branch_hash || near_moving_kink) {
            ++result.skipped;
            continue;
        }
        const double numeric = (lp - lm) / (2.0 * eps);
        const double ga = analytic[static_cast<Eigen::Index>(i)];
        const double denom = std::max(std::abs(ga) + std::abs(numeric), 1e-8);
        const double rel = std::abs(ga - numeric) / denom;
        if (rel > result.max_rel_error) result.max_rel_error = rel;
        ++result.tested;
    }
    return result;
}

}  // namespace robin
