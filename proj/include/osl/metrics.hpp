#pragma once

#include <span>
#include <vector>

#include "osl/data.hpp"
#include "osl/subjective.hpp"

namespace osl {

struct DomainEval {
    int domain_id = 0;
    double sub_err = 0.0;
    double mod_err = 0.0;
    int n_d = 0;
    int decision_batch_size = 1;
};

/// Rate of inconsistent allocations for one domain: draws n_d decision units
/// of decision_batch_size samples each, allocates every unit with the
/// empirical subjective function and returns 1 - (max member frequency).
double sub_err(const HypothesisSet& H, const Domain& d, int n_d, int decision_batch_size,
               Rng& rng);

/// Best member's mean prediction error on the domain's labels over the given
/// inputs: squared error for regression, 0/1 error for classification.
double mod_err(const HypothesisSet& H, const Domain& d, std::span<const Vec> test_inputs);

/// Mean selected-member episodic loss over the dataset (the training
/// objective value of a hypothesis set on fixed data).
double global_empirical_error(const HypothesisSet& H, const OpenDataset& data);

/// Q-weighted sum over domains of the mean loss of the member picked by the
/// Monte-Carlo expected subjective function with samples_per_domain draws.
double expected_global_error_estimate(const HypothesisSet& H, const DomainSet& ds,
                                      int samples_per_domain, Rng& rng);

/// Fixed evaluation grid over [-2, 2]: midpoints of `points` equal cells.
std::vector<Vec> regression_grid(int points = 200);

}  // namespace osl
