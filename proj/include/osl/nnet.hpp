#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace osl {

using Vec = std::vector<double>;

/// One labeled sample. For regression y holds the target vector; for
/// classification y is a single element holding the integer class index.
struct Sample {
    Vec x;
    Vec y;
};

using Batch = std::vector<Sample>;

enum class Activation { ReLU, Identity };

enum class LossKind { SquaredError, CrossEntropy };

struct LayerShape {
    int in_dim = 0;
    int out_dim = 0;
    Activation activation = Activation::Identity;
};

/// Dense feed-forward network. Parameters live in one flat vector laid out
/// per layer as the row-major weight matrix followed by the bias vector.
struct Network {
    std::vector<LayerShape> shapes;
    Vec params;
    std::uint64_t seed = 0;

    int input_dim() const { return shapes.front().in_dim; }
    int output_dim() const { return shapes.back().out_dim; }
};

struct SgdConfig {
    double step_size = 0.005;
    double momentum = 0.9;
    double weight_decay = 1e-4;
};

struct LossGrad {
    double loss = 0.0;
    Vec grad;
};

/// Total parameter count for a layer chain: sum of in*out + out per layer.
std::size_t param_count(std::span<const LayerShape> shapes);

/// Convenience builder: dims {d0, d1, ..., dL} with ReLU on hidden layers
/// and an Identity output layer.
std::vector<LayerShape> dense_shapes(std::span<const int> dims);

/// Weights drawn from uniform(-sqrt(6/(in+out)), +sqrt(6/(in+out))) per
/// layer, biases zero. Deterministic for a given seed.
Network init_network(std::span<const LayerShape> shapes, std::uint64_t seed);

Vec forward(const Network& net, const Vec& x);

/// Mean loss over the batch, forward pass only.
double batch_loss(const Network& net, std::span<const Sample> batch, LossKind loss);

/// Mean loss over the batch plus its exact gradient with respect to every
/// parameter (reverse mode). SquaredError sums squared residuals over output
/// components; CrossEntropy applies softmax to the logits internally and
/// expects y = {class index}.
LossGrad loss_and_grad(const Network& net, std::span<const Sample> batch, LossKind loss);

/// velocity <- momentum*velocity + grad + weight_decay*params;
/// params <- params - step_size*velocity.
void sgd_step(Network& net, std::span<const double> grad, const SgdConfig& cfg, Vec& velocity);

/// Checkpoint round-trip. JSON object {shapes, params, seed}; params are
/// serialized so that the decimal text parses back to the identical doubles.
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

const char* to_string(Activation a);
const char* to_string(LossKind l);
Activation activation_from_string(const std::string& s);
LossKind loss_from_string(const std::string& s);

}  // namespace osl
