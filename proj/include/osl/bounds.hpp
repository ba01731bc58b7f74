#pragma once

#include <vector>

namespace osl {

/// Inputs to the generalization-bound evaluator. VC dimensions are accepted
/// as positive reals so surrogate complexity measures can be plugged in.
struct BoundInputs {
    double vc_s = 1.0;     // sample-wise error class
    double vc_sbar = 1.0;  // domain-wise error class
    long long m = 1;       // episodes
    long long n = 1;       // samples per episode
    long long num_domains = 1;
    std::vector<long long> m_counts;  // per-domain episode counts, sums to m
    double delta = 0.05;
};

struct BoundBreakdown {
    double domain_term = 0.0;
    double instance_term = 0.0;
    double subjective_term = 0.0;
    double total = 0.0;
};

void validate(const BoundInputs& b);

/// sqrt((vc_sbar*(ln(2m/vc_sbar) + 1) - ln(delta/12)) / m) + 1/m
double domain_term(const BoundInputs& b);

/// sum over domains with m_k > 0 of
///   (m_k/m) * sqrt((vc_s*(ln(2*m_k*n/vc_s) + 1) - ln(delta/(12N))) / (m_k*n)) + 1/(m*n);
/// unsampled domains (m_k = 0) are skipped entirely.
double instance_term(const BoundInputs& b);

/// 2*sqrt((vc_s*(ln(2n/vc_s) + 1) - ln(delta/(24m))) / n) + 2/n
double subjective_term(const BoundInputs& b);

/// total = empirical_error + the three terms above.
BoundBreakdown total_bound(double empirical_error, const BoundInputs& b);

}  // namespace osl
