#pragma once

#include <span>
#include <vector>

#include "osl/data.hpp"
#include "osl/nnet.hpp"

namespace osl {

/// K candidate networks plus the loss used to arbitrate between them.
/// The prior over members is kept for bookkeeping; selection assumes it
/// uniform and never re-estimates it.
struct HypothesisSet {
    std::vector<Network> members;
    LossKind loss = LossKind::SquaredError;
    std::vector<double> prior;

    int size() const { return static_cast<int>(members.size()); }
};

HypothesisSet make_hypothesis_set(std::vector<Network> members, LossKind loss,
                                  std::vector<double> prior = {});

/// Result of one selection: the winning member plus every member's mean
/// batch loss (kept for allocation-consistency metrics).
struct Allocation {
    int episode_index = -1;
    int chosen = 0;
    std::vector<double> episodic_losses;
};

/// Picks the member with the smallest mean loss on the batch; exact ties go
/// to the lowest index.
Allocation empirical_subjective(const HypothesisSet& H, std::span<const Sample> batch,
                                int episode_index = -1);

/// Monte-Carlo stand-in for the infinite-sample selector: draws n_eval fresh
/// samples from the domain and runs the empirical rule on them.
Allocation expected_subjective_estimate(const HypothesisSet& H, const Domain& d, int n_eval,
                                        Rng& rng);

/// Member with the highest Gaussian likelihood exp(-|y - h(x)|^2 / (2 eps^2)),
/// evaluated in log space. Coincides with the squared-error argmin for every
/// eps > 0.
int gaussian_posterior_argmax(const HypothesisSet& H, const Vec& x, const Vec& y,
                              double epsilon = 1.0);

/// Member with the highest categorical likelihood prod_j p_j^{y_j} where p is
/// the softmax of the member's logits and y is the one-hot label. Coincides
/// with the cross-entropy argmin.
int categorical_posterior_argmax(const HypothesisSet& H, const Vec& x, int label);

/// Softmax of a member's logits at x.
Vec class_probabilities(const Network& net, const Vec& x);

/// Checkpoint round-trip: JSON object {loss, prior, members: [network...]}
/// with each member in the network checkpoint format.
std::string hypothesis_set_to_json(const HypothesisSet& H);
HypothesisSet hypothesis_set_from_json(const std::string& text);
void save_hypothesis_set(const HypothesisSet& H, const std::string& path);
HypothesisSet load_hypothesis_set(const std::string& path);

}  // namespace osl
