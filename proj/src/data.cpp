#include "osl/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace osl {

namespace {

std::vector<std::uint64_t> bit_key(const Vec& v) {
    std::vector<std::uint64_t> k(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) k[i] = std::bit_cast<std::uint64_t>(v[i]);
    return k;
}

Vec one_hot_pair(int shape, int num_shapes, int color, int num_colors) {
    Vec x(static_cast<std::size_t>(num_shapes) + num_colors, 0.0);
    x[static_cast<std::size_t>(shape)] = 1.0;
    x[static_cast<std::size_t>(num_shapes) + color] = 1.0;
    return x;
}

int block_argmax(const Vec& x, std::size_t begin, std::size_t end) {
    std::size_t best = begin;
    for (std::size_t i = begin + 1; i < end; ++i)
        if (x[i] > x[best]) best = i;
    return static_cast<int>(best - begin);
}

}  // namespace

DomainSet make_domain_set(std::vector<Domain> domains, std::vector<double> weights) {
    if (domains.empty()) throw std::invalid_argument("domain set must be non-empty");
    if (weights.empty())
        weights.assign(domains.size(), 1.0 / static_cast<double>(domains.size()));
    if (weights.size() != domains.size())
        throw std::invalid_argument("weights size does not match domain count");
    double total = 0.0;
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("domain weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("domain weights must sum to 1");
    return DomainSet{std::move(domains), std::move(weights)};
}

Episode sample_episode(const DomainSet& ds, int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_episode: n must be >= 1");
    const std::size_t di = rng.discrete(ds.weights);
    const Domain& d = ds.domains[di];
    Episode ep;
    ep.domain_id = d.id;
    ep.samples.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) ep.samples.push_back(d.draw(rng));
    return ep;
}

OpenDataset sample_dataset(const DomainSet& ds, int m, int n, Rng& rng) {
    if (m < 1) throw std::invalid_argument("sample_dataset: m must be >= 1");
    OpenDataset data;
    data.m = m;
    data.n = n;
    data.episodes.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) data.episodes.push_back(sample_episode(ds, n, rng));
    return data;
}

DomainSet regression_suite() {
    auto uniform_input = [](Rng& rng) { return Vec{rng.uniform(-2.0, 2.0)}; };
    std::vector<Domain> domains(3);
    domains[0] = {0, TaskKind::Regression, uniform_input,
                  [](const Vec& x) { return Vec{2.0 * std::abs(x[0]) - 2.0}; }};
    domains[1] = {1, TaskKind::Regression, uniform_input,
                  [](const Vec& x) { return Vec{2.0 * std::sin(3.0 * x[0] + 1.5707963267948966)}; }};
    domains[2] = {2, TaskKind::Regression, uniform_input,
                  [](const Vec& x) { return Vec{1.5 * std::log(-x[0] + 2.5) - 1.0}; }};
    return make_domain_set(std::move(domains));
}

DomainSet toy_classification_suite(int num_shapes, int num_colors, double noise_std) {
    if (num_shapes < 2 || num_colors < 2)
        throw std::invalid_argument("toy suite needs at least two shapes and two colors");
    if (noise_std < 0.0) throw std::invalid_argument("noise_std must be non-negative");

    auto sampler = [num_shapes, num_colors, noise_std](Rng& rng) {
        const int shape = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(num_shapes)));
        const int color = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(num_colors)));
        Vec x = one_hot_pair(shape, num_shapes, color, num_colors);
        if (noise_std > 0.0)
            for (double& v : x) v += rng.normal(0.0, noise_std);
        return x;
    };
    const std::size_t ns = static_cast<std::size_t>(num_shapes);
    const std::size_t nc = static_cast<std::size_t>(num_colors);

    std::vector<Domain> domains(2);
    domains[0] = {0, TaskKind::Classification, sampler,
                  [ns](const Vec& x) { return Vec{static_cast<double>(block_argmax(x, 0, ns))}; }};
    domains[1] = {1, TaskKind::Classification, sampler,
                  [ns, nc](const Vec& x) {
                      return Vec{static_cast<double>(block_argmax(x, ns, ns + nc))};
                  }};
    return make_domain_set(std::move(domains));
}

int mapping_rank(std::span<const Sample> z) {
    const auto profile = conflict_profile(z);
    int rank = 0;
    for (const auto& e : profile) rank = std::max(rank, e.distinct_outputs);
    return rank;
}

std::vector<ConflictEntry> conflict_profile(std::span<const Sample> z) {
    if (z.empty()) throw std::invalid_argument("conflict_profile: empty dataset");
    std::map<std::vector<std::uint64_t>, std::pair<Vec, std::set<std::vector<std::uint64_t>>>> groups;
    for (const auto& s : z) {
        auto& slot = groups[bit_key(s.x)];
        if (slot.second.empty()) slot.first = s.x;
        slot.second.insert(bit_key(s.y));
    }
    std::vector<ConflictEntry> profile;
    profile.reserve(groups.size());
    for (auto& [key, slot] : groups)
        profile.push_back({std::move(slot.first), static_cast<int>(slot.second.size())});
    return profile;
}

void write_jsonl(const OpenDataset& data, std::ostream& out) {
    for (const auto& ep : data.episodes) {
        nlohmann::json j;
        j["domain_id"] = ep.domain_id;
        auto& samples = j["samples"] = nlohmann::json::array();
        for (const auto& s : ep.samples) samples.push_back({s.x, s.y});
        out << j.dump() << '\n';
    }
}

void write_jsonl(const OpenDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    write_jsonl(data, out);
}

OpenDataset read_jsonl(std::istream& in) {
    OpenDataset data;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
        }
        Episode ep;
        ep.domain_id = j.at("domain_id").get<int>();
        for (const auto& s : j.at("samples")) {
            if (!s.is_array() || s.size() != 2)
                throw std::runtime_error("line " + std::to_string(lineno) +
                                         ": sample must be a [x, y] pair of arrays");
            ep.samples.push_back({s[0].get<Vec>(), s[1].get<Vec>()});
        }
        if (ep.samples.empty())
            throw std::runtime_error("line " + std::to_string(lineno) + ": episode has no samples");
        data.episodes.push_back(std::move(ep));
    }
    if (data.episodes.empty()) throw std::runtime_error("dataset is empty");
    data.m = static_cast<int>(data.episodes.size());
    data.n = static_cast<int>(data.episodes.front().samples.size());
    for (const auto& ep : data.episodes)
        if (static_cast<int>(ep.samples.size()) != data.n)
            throw std::runtime_error("episodes disagree on samples per episode");
    return data;
}

OpenDataset read_jsonl_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for read: " + path);
    return read_jsonl(in);
}

}  // namespace osl
