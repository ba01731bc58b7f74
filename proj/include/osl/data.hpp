#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "osl/nnet.hpp"
#include "osl/rng.hpp"

namespace osl {

enum class TaskKind { Regression, Classification };

/// A distribution over inputs paired with a deterministic target function.
struct Domain {
    int id = 0;
    TaskKind task_kind = TaskKind::Regression;
    std::function<Vec(Rng&)> input_sampler;
    std::function<Vec(const Vec&)> target;

    Sample draw(Rng& rng) const {
        Sample s;
        s.x = input_sampler(rng);
        s.y = target(s.x);
        return s;
    }
};

/// N domains plus a sampling distribution over them.
struct DomainSet {
    std::vector<Domain> domains;
    std::vector<double> weights;

    std::size_t size() const { return domains.size(); }
};

/// Validates the weight vector (positive entries summing to 1 within 1e-12)
/// or fills it with the uniform distribution when empty.
DomainSet make_domain_set(std::vector<Domain> domains, std::vector<double> weights = {});

/// One batch of n samples drawn from a single domain. domain_id is the
/// generator's identity, kept for oracle metrics only; training never reads it.
struct Episode {
    std::vector<Sample> samples;
    int domain_id = -1;
};

struct OpenDataset {
    std::vector<Episode> episodes;
    int m = 0;  // episode count
    int n = 0;  // samples per episode

    std::size_t sample_count() const { return static_cast<std::size_t>(m) * n; }
};

/// Draws a domain from the set's weights, then n i.i.d. samples from it.
Episode sample_episode(const DomainSet& ds, int n, Rng& rng);

OpenDataset sample_dataset(const DomainSet& ds, int m, int n, Rng& rng);

/// The three-function regression suite: 2|x|-2, 2 sin(3x + pi/2) and
/// 1.5 ln(-x + 5/2) - 1 on uniform inputs over [-2, 2].
DomainSet regression_suite();

/// Synthetic two-domain classification suite. Inputs are one-hot shape and
/// color blocks concatenated, with additive Gaussian noise on every entry;
/// one domain labels by the shape block argmax, the other by the color block
/// argmax. Labels from the two domains share the same integer range, so the
/// combined data conflicts whenever shape and color indices differ.
DomainSet toy_classification_suite(int num_shapes, int num_colors, double noise_std = 0.05);

/// Minimal number of single-valued functions needed to cover all pairs,
/// computed as the largest count of distinct outputs attached to any single
/// input. Input/output equality is exact bit equality.
int mapping_rank(std::span<const Sample> z);

struct ConflictEntry {
    Vec input;
    int distinct_outputs = 0;
};

/// Per-input distinct-output multiplicities; the maximum over entries equals
/// mapping_rank. Entries are ordered by input bit pattern.
std::vector<ConflictEntry> conflict_profile(std::span<const Sample> z);

/// JSON-lines round trip, one episode per line:
///   {"domain_id": int, "samples": [[[x...],[y...]], ...]}
void write_jsonl(const OpenDataset& data, std::ostream& out);
void write_jsonl(const OpenDataset& data, const std::string& path);
OpenDataset read_jsonl(std::istream& in);
OpenDataset read_jsonl_file(const std::string& path);

}  // namespace osl
