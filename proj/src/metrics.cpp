#include "osl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace osl {

namespace {

int predicted_class(const Network& net, const Vec& x) {
    const Vec z = forward(net, x);
    return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

}  // namespace

double sub_err(const HypothesisSet& H, const Domain& d, int n_d, int decision_batch_size,
               Rng& rng) {
    if (n_d < 1 || decision_batch_size < 1)
        throw std::invalid_argument("sub_err: n_d and decision_batch_size must be >= 1");
    std::vector<int> counts(static_cast<std::size_t>(H.size()), 0);
    Batch unit(static_cast<std::size_t>(decision_batch_size));
    for (int j = 0; j < n_d; ++j) {
        for (auto& s : unit) s = d.draw(rng);
        counts[static_cast<std::size_t>(empirical_subjective(H, unit).chosen)]++;
    }
    const int top = *std::max_element(counts.begin(), counts.end());
    return 1.0 - static_cast<double>(top) / static_cast<double>(n_d);
}

double mod_err(const HypothesisSet& H, const Domain& d, std::span<const Vec> test_inputs) {
    if (test_inputs.empty()) throw std::invalid_argument("mod_err: no test inputs");
    double best = 0.0;
    for (int k = 0; k < H.size(); ++k) {
        double total = 0.0;
        for (const Vec& x : test_inputs) {
            const Vec y = d.target(x);
            if (d.task_kind == TaskKind::Regression) {
                const Vec h = forward(H.members[static_cast<std::size_t>(k)], x);
                if (h.size() != y.size())
                    throw std::invalid_argument("mod_err: output dim mismatch");
                for (std::size_t j = 0; j < h.size(); ++j)
                    total += (h[j] - y[j]) * (h[j] - y[j]);
            } else {
                const int label = static_cast<int>(y[0]);
                total += predicted_class(H.members[static_cast<std::size_t>(k)], x) == label ? 0.0 : 1.0;
            }
        }
        const double mean = total / static_cast<double>(test_inputs.size());
        if (k == 0 || mean < best) best = mean;
    }
    return best;
}

double global_empirical_error(const HypothesisSet& H, const OpenDataset& data) {
    if (data.episodes.empty()) throw std::invalid_argument("global_empirical_error: empty dataset");
    double total = 0.0;
    for (const Episode& ep : data.episodes) {
        const Allocation a = empirical_subjective(H, ep.samples);
        total += a.episodic_losses[static_cast<std::size_t>(a.chosen)];
    }
    return total / static_cast<double>(data.episodes.size());
}

double expected_global_error_estimate(const HypothesisSet& H, const DomainSet& ds,
                                      int samples_per_domain, Rng& rng) {
    if (samples_per_domain < 1)
        throw std::invalid_argument("expected_global_error_estimate: samples_per_domain must be >= 1");
    double total = 0.0;
    for (std::size_t i = 0; i < ds.domains.size(); ++i) {
        const Allocation a = expected_subjective_estimate(H, ds.domains[i], samples_per_domain, rng);
        total += ds.weights[i] * a.episodic_losses[static_cast<std::size_t>(a.chosen)];
    }
    return total;
}

std::vector<Vec> regression_grid(int points) {
    if (points < 1) throw std::invalid_argument("regression_grid: points must be >= 1");
    std::vector<Vec> grid;
    grid.reserve(static_cast<std::size_t>(points));
    const double width = 4.0 / static_cast<double>(points);
    for (int i = 0; i < points; ++i)
        grid.push_back({-2.0 + (static_cast<double>(i) + 0.5) * width});
    return grid;
}

}  // namespace osl
