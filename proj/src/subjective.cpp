#include "osl/subjective.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace osl {

HypothesisSet make_hypothesis_set(std::vector<Network> members, LossKind loss,
                                  std::vector<double> prior) {
    if (members.empty()) throw std::invalid_argument("hypothesis set must have K >= 1 members");
    if (prior.empty())
        prior.assign(members.size(), 1.0 / static_cast<double>(members.size()));
    if (prior.size() != members.size())
        throw std::invalid_argument("prior size does not match member count");
    double total = 0.0;
    for (double p : prior) {
        if (!(p > 0.0)) throw std::invalid_argument("prior entries must be positive");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("prior must sum to 1");
    return HypothesisSet{std::move(members), loss, std::move(prior)};
}

Allocation empirical_subjective(const HypothesisSet& H, std::span<const Sample> batch,
                                int episode_index) {
    if (batch.empty()) throw std::invalid_argument("empirical_subjective: empty batch");
    Allocation a;
    a.episode_index = episode_index;
    a.episodic_losses.resize(H.members.size());
    for (std::size_t k = 0; k < H.members.size(); ++k)
        a.episodic_losses[k] = batch_loss(H.members[k], batch, H.loss);
    a.chosen = 0;
    for (std::size_t k = 1; k < a.episodic_losses.size(); ++k)
        if (a.episodic_losses[k] < a.episodic_losses[a.chosen]) a.chosen = static_cast<int>(k);
    return a;
}

Allocation expected_subjective_estimate(const HypothesisSet& H, const Domain& d, int n_eval,
                                        Rng& rng) {
    if (n_eval < 1) throw std::invalid_argument("expected_subjective_estimate: n_eval must be >= 1");
    Batch batch;
    batch.reserve(static_cast<std::size_t>(n_eval));
    for (int j = 0; j < n_eval; ++j) batch.push_back(d.draw(rng));
    return empirical_subjective(H, batch);
}

int gaussian_posterior_argmax(const HypothesisSet& H, const Vec& x, const Vec& y,
                              double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    int best = 0;
    double best_loglik = 0.0;
    for (int k = 0; k < H.size(); ++k) {
        const Vec h = forward(H.members[k], x);
        if (h.size() != y.size())
            throw std::invalid_argument("gaussian_posterior_argmax: output dim mismatch");
        double sq = 0.0;
        for (std::size_t j = 0; j < h.size(); ++j) sq += (y[j] - h[j]) * (y[j] - h[j]);
        const double loglik = -sq / (2.0 * epsilon * epsilon);
        if (k == 0 || loglik > best_loglik) {
            best = k;
            best_loglik = loglik;
        }
    }
    return best;
}

Vec class_probabilities(const Network& net, const Vec& x) {
    const Vec z = forward(net, x);
    const double zmax = *std::max_element(z.begin(), z.end());
    Vec p(z.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
        p[j] = std::exp(z[j] - zmax);
        sum += p[j];
    }
    for (double& v : p) v /= sum;
    return p;
}

int categorical_posterior_argmax(const HypothesisSet& H, const Vec& x, int label) {
    int best = 0;
    double best_loglik = 0.0;
    for (int k = 0; k < H.size(); ++k) {
        const Vec p = class_probabilities(H.members[k], x);
        if (label < 0 || label >= static_cast<int>(p.size()))
            throw std::invalid_argument("categorical_posterior_argmax: label out of range");
        double total = 0.0;
        for (double v : p) total += v;
        if (std::abs(total - 1.0) > 1e-9)
            throw std::invalid_argument("categorical_posterior_argmax: probabilities do not sum to 1");
        // prod_j p_j^{y_j} with one-hot y, in log space.
        double loglik = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double yj = (static_cast<int>(j) == label) ? 1.0 : 0.0;
            if (yj != 0.0) loglik += yj * std::log(p[j]);
        }
        if (k == 0 || loglik > best_loglik) {
            best = k;
            best_loglik = loglik;
        }
    }
    return best;
}

std::string hypothesis_set_to_json(const HypothesisSet& H) {
    nlohmann::json j;
    j["loss"] = to_string(H.loss);
    j["prior"] = H.prior;
    auto& members = j["members"] = nlohmann::json::array();
    for (const auto& net : H.members)
        members.push_back(nlohmann::json::parse(network_to_json(net)));
    return j.dump();
}

HypothesisSet hypothesis_set_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    std::vector<Network> members;
    for (const auto& mj : j.at("members"))
        members.push_back(network_from_json(mj.dump()));
    std::vector<double> prior;
    if (j.contains("prior")) prior = j.at("prior").get<std::vector<double>>();
    return make_hypothesis_set(std::move(members),
                               loss_from_string(j.at("loss").get<std::string>()),
                               std::move(prior));
}

void save_hypothesis_set(const HypothesisSet& H, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << hypothesis_set_to_json(H) << '\n';
}

HypothesisSet load_hypothesis_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for read: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return hypothesis_set_from_json(ss.str());
}

}  // namespace osl
