#include "osl/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "osl/rng.hpp"
#include "json.hpp"

namespace osl {

namespace {

void check_shapes(std::span<const LayerShape> shapes) {
    if (shapes.empty()) throw std::invalid_argument("network needs at least one layer");
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (shapes[i].in_dim <= 0 || shapes[i].out_dim <= 0)
            throw std::invalid_argument("layer dims must be positive");
        if (i > 0 && shapes[i].in_dim != shapes[i - 1].out_dim)
            throw std::invalid_argument("consecutive layer dims do not match");
    }
}

double apply_activation(Activation a, double z) {
    return (a == Activation::ReLU && z < 0.0) ? 0.0 : z;
}

/// Forward pass keeping pre-activations per layer; used by backprop.
void forward_trace(const Network& net, const Vec& x, std::vector<Vec>& acts,
                   std::vector<Vec>& pre) {
    acts.assign(net.shapes.size() + 1, {});
    pre.assign(net.shapes.size(), {});
    acts[0] = x;
    std::size_t offset = 0;
    for (std::size_t l = 0; l < net.shapes.size(); ++l) {
        const auto& s = net.shapes[l];
        const double* w = net.params.data() + offset;
        const double* b = w + static_cast<std::size_t>(s.in_dim) * s.out_dim;
        pre[l].resize(s.out_dim);
        acts[l + 1].resize(s.out_dim);
        for (int j = 0; j < s.out_dim; ++j) {
            double z = b[j];
            const double* row = w + static_cast<std::size_t>(j) * s.in_dim;
            for (int i = 0; i < s.in_dim; ++i) z += row[i] * acts[l][i];
            pre[l][j] = z;
            acts[l + 1][j] = apply_activation(s.activation, z);
        }
        offset += static_cast<std::size_t>(s.in_dim) * s.out_dim + s.out_dim;
    }
}

/// Stable log-softmax denominator: log sum exp(z_j - zmax).
double log_sum_exp(const Vec& z, double zmax) {
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    return std::log(sum);
}

int class_target(const Sample& s, int out_dim) {
    if (s.y.size() != 1)
        throw std::invalid_argument("cross-entropy target must be a single class index");
    const double raw = s.y[0];
    const int label = static_cast<int>(raw);
    if (raw != static_cast<double>(label) || label < 0 || label >= out_dim)
        throw std::invalid_argument("cross-entropy target out of range or non-integer");
    return label;
}

}  // namespace

std::size_t param_count(std::span<const LayerShape> shapes) {
    std::size_t total = 0;
    for (const auto& s : shapes)
        total += static_cast<std::size_t>(s.in_dim) * s.out_dim + s.out_dim;
    return total;
}

std::vector<LayerShape> dense_shapes(std::span<const int> dims) {
    if (dims.size() < 2) throw std::invalid_argument("dense_shapes needs at least two dims");
    std::vector<LayerShape> shapes;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        const bool last = (i + 2 == dims.size());
        shapes.push_back({dims[i], dims[i + 1], last ? Activation::Identity : Activation::ReLU});
    }
    return shapes;
}

Network init_network(std::span<const LayerShape> shapes, std::uint64_t seed) {
    check_shapes(shapes);
    Network net;
    net.shapes.assign(shapes.begin(), shapes.end());
    net.seed = seed;
    net.params.resize(param_count(shapes));
    Rng rng(seed);
    std::size_t offset = 0;
    for (const auto& s : shapes) {
        const double limit = std::sqrt(6.0 / (s.in_dim + s.out_dim));
        const std::size_t nw = static_cast<std::size_t>(s.in_dim) * s.out_dim;
        for (std::size_t i = 0; i < nw; ++i) net.params[offset + i] = rng.uniform(-limit, limit);
        for (int j = 0; j < s.out_dim; ++j) net.params[offset + nw + j] = 0.0;
        offset += nw + s.out_dim;
    }
    return net;
}

Vec forward(const Network& net, const Vec& x) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw std::invalid_argument("forward: input dim mismatch");
    std::vector<Vec> acts, pre;
    forward_trace(net, x, acts, pre);
    return acts.back();
}

double batch_loss(const Network& net, std::span<const Sample> batch, LossKind loss) {
    if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
    double total = 0.0;
    for (const auto& s : batch) {
        const Vec h = forward(net, s.x);
        if (loss == LossKind::SquaredError) {
            if (h.size() != s.y.size())
                throw std::invalid_argument("squared error: output/target dim mismatch");
            for (std::size_t j = 0; j < h.size(); ++j) {
                const double r = h[j] - s.y[j];
                total += r * r;
            }
        } else {
            const int label = class_target(s, net.output_dim());
            const double zmax = *std::max_element(h.begin(), h.end());
            total += log_sum_exp(h, zmax) + zmax - h[label];
        }
    }
    const double value = total / static_cast<double>(batch.size());
    if (!std::isfinite(value)) throw std::runtime_error("batch_loss: non-finite loss");
    return value;
}

LossGrad loss_and_grad(const Network& net, std::span<const Sample> batch, LossKind loss) {
    if (batch.empty()) throw std::invalid_argument("loss_and_grad: empty batch");
    LossGrad out;
    out.grad.assign(net.params.size(), 0.0);

    std::vector<Vec> acts, pre;
    for (const auto& sample : batch) {
        if (static_cast<int>(sample.x.size()) != net.input_dim())
            throw std::invalid_argument("loss_and_grad: input dim mismatch");
        forward_trace(net, sample.x, acts, pre);
        const Vec& h = acts.back();

        // Seed the backward pass with dLoss/dOutput for this sample.
        Vec delta(h.size());
        if (loss == LossKind::SquaredError) {
            if (h.size() != sample.y.size())
                throw std::invalid_argument("squared error: output/target dim mismatch");
            for (std::size_t j = 0; j < h.size(); ++j) {
                const double r = h[j] - sample.y[j];
                out.loss += r * r;
                delta[j] = 2.0 * r;
            }
        } else {
            const int label = class_target(sample, net.output_dim());
            const double zmax = *std::max_element(h.begin(), h.end());
            const double lse = log_sum_exp(h, zmax);
            out.loss += lse + zmax - h[label];
            for (std::size_t j = 0; j < h.size(); ++j)
                delta[j] = std::exp(h[j] - zmax - lse);
            delta[label] -= 1.0;
        }

        // Walk layers backwards accumulating weight/bias gradients.
        std::size_t offset = net.params.size();
        for (int l = static_cast<int>(net.shapes.size()) - 1; l >= 0; --l) {
            const auto& s = net.shapes[l];
            const std::size_t nw = static_cast<std::size_t>(s.in_dim) * s.out_dim;
            offset -= nw + s.out_dim;
            if (s.activation == Activation::ReLU)
                for (int j = 0; j < s.out_dim; ++j)
                    if (pre[l][j] <= 0.0) delta[j] = 0.0;
            double* gw = out.grad.data() + offset;
            double* gb = gw + nw;
            const double* w = net.params.data() + offset;
            for (int j = 0; j < s.out_dim; ++j) {
                gb[j] += delta[j];
                double* grow = gw + static_cast<std::size_t>(j) * s.in_dim;
                for (int i = 0; i < s.in_dim; ++i) grow[i] += delta[j] * acts[l][i];
            }
            if (l > 0) {
                Vec next(s.in_dim, 0.0);
                for (int j = 0; j < s.out_dim; ++j) {
                    const double* row = w + static_cast<std::size_t>(j) * s.in_dim;
                    for (int i = 0; i < s.in_dim; ++i) next[i] += row[i] * delta[j];
                }
                delta = std::move(next);
            }
        }
    }

    const double inv = 1.0 / static_cast<double>(batch.size());
    out.loss *= inv;
    for (double& g : out.grad) g *= inv;
    if (!std::isfinite(out.loss))
        throw std::runtime_error("loss_and_grad: non-finite loss");
    for (double g : out.grad)
        if (!std::isfinite(g)) throw std::runtime_error("loss_and_grad: non-finite gradient");
    return out;
}

void sgd_step(Network& net, std::span<const double> grad, const SgdConfig& cfg, Vec& velocity) {
    if (grad.size() != net.params.size() || velocity.size() != net.params.size())
        throw std::invalid_argument("sgd_step: grad/velocity length mismatch");
    if (!(cfg.step_size > 0.0)) throw std::invalid_argument("sgd_step: step_size must be positive");
    for (std::size_t i = 0; i < net.params.size(); ++i) {
        velocity[i] = cfg.momentum * velocity[i] + grad[i] + cfg.weight_decay * net.params[i];
        net.params[i] -= cfg.step_size * velocity[i];
    }
}

const char* to_string(Activation a) {
    return a == Activation::ReLU ? "relu" : "identity";
}

const char* to_string(LossKind l) {
    return l == LossKind::SquaredError ? "squared_error" : "cross_entropy";
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::ReLU;
    if (s == "identity") return Activation::Identity;
    throw std::invalid_argument("unknown activation: " + s);
}

LossKind loss_from_string(const std::string& s) {
    if (s == "squared_error") return LossKind::SquaredError;
    if (s == "cross_entropy") return LossKind::CrossEntropy;
    throw std::invalid_argument("unknown loss: " + s);
}

std::string network_to_json(const Network& net) {
    nlohmann::json j;
    j["seed"] = net.seed;
    auto& shapes = j["shapes"] = nlohmann::json::array();
    for (const auto& s : net.shapes)
        shapes.push_back({{"in", s.in_dim}, {"out", s.out_dim}, {"activation", to_string(s.activation)}});
    j["params"] = net.params;  // nlohmann emits shortest round-trip decimals
    return j.dump();
}

Network network_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    Network net;
    net.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& s : j.at("shapes")) {
        net.shapes.push_back({s.at("in").get<int>(), s.at("out").get<int>(),
                              activation_from_string(s.at("activation").get<std::string>())});
    }
    check_shapes(net.shapes);
    net.params = j.at("params").get<Vec>();
    if (net.params.size() != param_count(net.shapes))
        throw std::invalid_argument("checkpoint params length does not match shapes");
    return net;
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << network_to_json(net) << '\n';
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for read: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return network_from_json(ss.str());
}

}  // namespace osl
