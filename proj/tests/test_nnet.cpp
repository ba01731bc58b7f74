#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>

#include "osl/nnet.hpp"
#include "osl/rng.hpp"

using namespace osl;

namespace {

Network manual_net(std::vector<LayerShape> shapes, Vec params) {
    Network net;
    net.shapes = std::move(shapes);
    net.params = std::move(params);
    return net;
}

// Central finite differences, the independent oracle for loss_and_grad.
Vec fd_gradient(const Network& net, const Batch& batch, LossKind loss, double h = 1e-6) {
    Vec grad(net.params.size());
    Network probe = net;
    for (std::size_t i = 0; i < net.params.size(); ++i) {
        probe.params[i] = net.params[i] + h;
        const double up = batch_loss(probe, batch, loss);
        probe.params[i] = net.params[i] - h;
        const double down = batch_loss(probe, batch, loss);
        probe.params[i] = net.params[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

double max_rel_error(const Vec& a, const Vec& b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-8});
        worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
    }
    return worst;
}

Batch random_batch(Rng& rng, int in_dim, int out_dim, int size, LossKind loss) {
    Batch batch;
    for (int b = 0; b < size; ++b) {
        Sample s;
        for (int i = 0; i < in_dim; ++i) s.x.push_back(rng.uniform(-2.0, 2.0));
        if (loss == LossKind::SquaredError)
            for (int j = 0; j < out_dim; ++j) s.y.push_back(rng.uniform(-2.0, 2.0));
        else
            s.y.push_back(static_cast<double>(rng.uniform_index(static_cast<std::uint64_t>(out_dim))));
        batch.push_back(std::move(s));
    }
    return batch;
}

}  // namespace

TEST_CASE("init is deterministic per seed and zeroes biases") {
    const auto shapes = dense_shapes(std::array<int, 2>{1, 1});
    const Network a = init_network(shapes, 42);
    const Network b = init_network(shapes, 42);
    CHECK(a.params == b.params);
    const Network c = init_network(shapes, 43);
    CHECK(a.params != c.params);
    // 1->1 layer stores [w, b]; bias is zero by the init rule.
    CHECK(a.params.size() == 2);
    CHECK(a.params[1] == 0.0);
    const double limit = std::sqrt(6.0 / 2.0);
    CHECK(std::abs(a.params[0]) <= limit);
}

TEST_CASE("parameter count of the five-layer regression net") {
    const auto shapes = dense_shapes(std::array<int, 6>{1, 32, 32, 32, 32, 1});
    CHECK(param_count(shapes) == 3265);
    CHECK(init_network(shapes, 7).params.size() == 3265);
}

TEST_CASE("mismatched layer chain is rejected") {
    std::vector<LayerShape> bad = {{1, 8, Activation::ReLU}, {4, 1, Activation::Identity}};
    CHECK_THROWS_AS(init_network(bad, 0), std::invalid_argument);
    CHECK_THROWS_AS(init_network(std::vector<LayerShape>{{0, 3, Activation::ReLU}}, 0),
                    std::invalid_argument);
}

TEST_CASE("forward: identity net, zero-weight net, dimension checks") {
    const Network ident = manual_net({{1, 1, Activation::Identity}}, {1.0, 0.0});
    CHECK(forward(ident, {0.5})[0] == 0.5);

    const Network biased = manual_net({{2, 2, Activation::Identity}}, {0, 0, 0, 0, 0.25, -1.5});
    const Vec out = forward(biased, {3.0, -7.0});
    CHECK(out[0] == 0.25);
    CHECK(out[1] == -1.5);

    CHECK_THROWS_AS(forward(ident, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("forward matches an independent affine+relu evaluation") {
    // 2 -> 3 relu -> 1 identity, fixed parameters.
    const Vec params = {0.5, -1.0, 2.0, 0.25, -0.75, 1.5,  // W1 (3x2 row-major)
                        0.1, -0.2, 0.3,                    // b1
                        1.0, -2.0, 0.5,                    // W2 (1x3)
                        -0.4};                             // b2
    const Network net =
        manual_net({{2, 3, Activation::ReLU}, {3, 1, Activation::Identity}}, params);
    const Vec x = {0.7, -0.3};
    // Hand evaluation, written out without the library's loops.
    const double z0 = 0.5 * 0.7 + -1.0 * -0.3 + 0.1;
    const double z1 = 2.0 * 0.7 + 0.25 * -0.3 + -0.2;
    const double z2 = -0.75 * 0.7 + 1.5 * -0.3 + 0.3;
    const double a0 = z0 > 0 ? z0 : 0, a1 = z1 > 0 ? z1 : 0, a2 = z2 > 0 ? z2 : 0;
    const double expect = 1.0 * a0 + -2.0 * a1 + 0.5 * a2 - 0.4;
    CHECK(forward(net, x)[0] == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("squared-error loss and gradient on the 1->1 example") {
    const Network net = manual_net({{1, 1, Activation::Identity}}, {1.0, 0.0});
    Batch batch = {{{1.0}, {2.0}}};
    const LossGrad lg = loss_and_grad(net, batch, LossKind::SquaredError);
    CHECK(lg.loss == doctest::Approx(1.0));
    CHECK(lg.grad[0] == doctest::Approx(-2.0));  // d/dw (w*x+b-y)^2 = 2(h-y)x
    CHECK(lg.grad[1] == doctest::Approx(-2.0));

    // Exact fit: zero loss, zero gradient for identity-activation nets.
    Batch fit = {{{1.0}, {1.0}}, {{-0.5}, {-0.5}}};
    const LossGrad zero = loss_and_grad(net, fit, LossKind::SquaredError);
    CHECK(zero.loss == 0.0);
    for (double g : zero.grad) CHECK(g == 0.0);
}

TEST_CASE("empty batch is rejected") {
    const Network net = manual_net({{1, 1, Activation::Identity}}, {1.0, 0.0});
    Batch empty;
    CHECK_THROWS_AS(loss_and_grad(net, empty, LossKind::SquaredError), std::invalid_argument);
    CHECK_THROWS_AS(batch_loss(net, empty, LossKind::SquaredError), std::invalid_argument);
}

TEST_CASE("cross-entropy target validation") {
    const Network net = init_network(dense_shapes(std::array<int, 3>{2, 4, 3}), 5);
    Batch bad_label = {{{0.1, 0.2}, {3.0}}};  // only classes 0..2 exist
    CHECK_THROWS_AS(loss_and_grad(net, bad_label, LossKind::CrossEntropy), std::invalid_argument);
    Batch frac = {{{0.1, 0.2}, {0.5}}};
    CHECK_THROWS_AS(loss_and_grad(net, frac, LossKind::CrossEntropy), std::invalid_argument);
}

TEST_CASE("gradients match central finite differences") {
    Rng rng(2024);
    double worst = 0.0;
    for (int rep = 0; rep < 60; ++rep) {
        const int layers = 1 + static_cast<int>(rng.uniform_index(3));
        std::vector<int> dims;
        dims.push_back(1 + static_cast<int>(rng.uniform_index(8)));
        for (int l = 0; l < layers; ++l) dims.push_back(1 + static_cast<int>(rng.uniform_index(8)));
        const LossKind loss = (rep % 2 == 0) ? LossKind::SquaredError : LossKind::CrossEntropy;
        if (loss == LossKind::CrossEntropy && dims.back() < 2) dims.back() = 2;
        const Network net = init_network(dense_shapes(dims), rng.next_u64());
        const Batch batch = random_batch(rng, dims.front(), dims.back(),
                                         1 + static_cast<int>(rng.uniform_index(4)), loss);
        const LossGrad lg = loss_and_grad(net, batch, loss);
        worst = std::max(worst, max_rel_error(lg.grad, fd_gradient(net, batch, loss)));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("losses are non-negative") {
    Rng rng(77);
    for (int rep = 0; rep < 40; ++rep) {
        const Network net = init_network(dense_shapes(std::array<int, 3>{3, 5, 4}), rng.next_u64());
        const Batch sq = random_batch(rng, 3, 4, 3, LossKind::SquaredError);
        CHECK(batch_loss(net, sq, LossKind::SquaredError) >= 0.0);
        const Batch ce = random_batch(rng, 3, 4, 3, LossKind::CrossEntropy);
        CHECK(batch_loss(net, ce, LossKind::CrossEntropy) >= 0.0);
    }
}

TEST_CASE("sgd_step: no-op, plain descent and the hand-computed update") {
    const auto shapes = dense_shapes(std::array<int, 2>{1, 1});
    Network net = manual_net({shapes[0]}, {0.5, -0.25});
    Vec velocity(2, 0.0);

    SgdConfig frozen{0.1, 0.9, 0.0};
    sgd_step(net, Vec{0.0, 0.0}, frozen, velocity);
    CHECK(net.params == Vec{0.5, -0.25});

    // momentum 0, decay 0: plain gradient descent.
    SgdConfig plain{0.1, 0.0, 0.0};
    sgd_step(net, Vec{1.0, -2.0}, plain, velocity);
    CHECK(net.params[0] == doctest::Approx(0.5 - 0.1));
    CHECK(net.params[1] == doctest::Approx(-0.25 + 0.2));

    // full update, arithmetic oracle: v' = 0.9 v + g + 1e-4 p; p' = p - 0.1 v'.
    Network one = manual_net({shapes[0]}, {0.5, 0.0});
    Vec vel = {0.1, 0.0};
    SgdConfig cfg{0.1, 0.9, 1e-4};
    sgd_step(one, Vec{0.2, 0.0}, cfg, vel);
    const double v1 = 0.9 * 0.1 + 0.2 + 1e-4 * 0.5;
    CHECK(vel[0] == doctest::Approx(v1).epsilon(1e-15));
    CHECK(one.params[0] == doctest::Approx(0.5 - 0.1 * v1).epsilon(1e-15));

    Vec short_grad(1, 0.0);
    CHECK_THROWS_AS(sgd_step(one, short_grad, cfg, vel), std::invalid_argument);
}

TEST_CASE("checkpoint json round-trips parameters exactly") {
    const Network net = init_network(dense_shapes(std::array<int, 4>{2, 7, 5, 3}), 12345);
    const Network back = network_from_json(network_to_json(net));
    CHECK(back.seed == net.seed);
    REQUIRE(back.shapes.size() == net.shapes.size());
    for (std::size_t i = 0; i < net.shapes.size(); ++i) {
        CHECK(back.shapes[i].in_dim == net.shapes[i].in_dim);
        CHECK(back.shapes[i].out_dim == net.shapes[i].out_dim);
        CHECK(back.shapes[i].activation == net.shapes[i].activation);
    }
    REQUIRE(back.params.size() == net.params.size());
    for (std::size_t i = 0; i < net.params.size(); ++i) {
        CHECK(std::memcmp(&back.params[i], &net.params[i], sizeof(double)) == 0);
    }
}
