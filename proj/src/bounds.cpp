#include "osl/bounds.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace osl {

namespace {

double checked_sqrt(double radicand, const char* term) {
    if (radicand < 0.0)
        throw std::domain_error(std::string(term) +
                                ": negative radicand, inputs outside the bound's regime");
    return std::sqrt(radicand);
}

}  // namespace

void validate(const BoundInputs& b) {
    if (!(b.vc_s > 0.0) || !(b.vc_sbar > 0.0))
        throw std::invalid_argument("VC terms must be positive");
    if (b.m < 1 || b.n < 1 || b.num_domains < 1)
        throw std::invalid_argument("m, n and N must be positive");
    if (!(b.delta > 0.0) || b.delta > 1.0)
        throw std::invalid_argument("delta must lie in (0, 1]");
    if (!b.m_counts.empty()) {
        if (static_cast<long long>(b.m_counts.size()) != b.num_domains)
            throw std::invalid_argument("m_counts size must equal N");
        long long total = 0;
        for (long long c : b.m_counts) {
            if (c < 0) throw std::invalid_argument("m_counts entries must be non-negative");
            total += c;
        }
        if (total != b.m) throw std::invalid_argument("m_counts must sum to m");
    }
}

double domain_term(const BoundInputs& b) {
    validate(b);
    const double m = static_cast<double>(b.m);
    const double radicand =
        (b.vc_sbar * (std::log(2.0 * m / b.vc_sbar) + 1.0) - std::log(b.delta / 12.0)) / m;
    return checked_sqrt(radicand, "domain_term") + 1.0 / m;
}

double instance_term(const BoundInputs& b) {
    validate(b);
    std::vector<long long> counts = b.m_counts;
    if (counts.empty()) {
        if (b.num_domains != 1)
            throw std::invalid_argument("m_counts required when N > 1");
        counts.assign(1, b.m);
    }
    const double m = static_cast<double>(b.m);
    const double n = static_cast<double>(b.n);
    const double num_domains = static_cast<double>(b.num_domains);
    double total = 0.0;
    for (long long mk_ll : counts) {
        if (mk_ll == 0) continue;
        const double mk = static_cast<double>(mk_ll);
        const double radicand = (b.vc_s * (std::log(2.0 * mk * n / b.vc_s) + 1.0) -
                                 std::log(b.delta / (12.0 * num_domains))) /
                                (mk * n);
        total += (mk / m) * checked_sqrt(radicand, "instance_term") + 1.0 / (m * n);
    }
    return total;
}

double subjective_term(const BoundInputs& b) {
    validate(b);
    const double m = static_cast<double>(b.m);
    const double n = static_cast<double>(b.n);
    const double radicand =
        (b.vc_s * (std::log(2.0 * n / b.vc_s) + 1.0) - std::log(b.delta / (24.0 * m))) / n;
    return 2.0 * checked_sqrt(radicand, "subjective_term") + 2.0 / n;
}

BoundBreakdown total_bound(double empirical_error, const BoundInputs& b) {
    if (empirical_error < 0.0)
        throw std::invalid_argument("empirical_error must be non-negative");
    BoundBreakdown out;
    out.domain_term = domain_term(b);
    out.instance_term = instance_term(b);
    out.subjective_term = subjective_term(b);
    out.total = empirical_error + out.domain_term + out.instance_term + out.subjective_term;
    return out;
}

}  // namespace osl
