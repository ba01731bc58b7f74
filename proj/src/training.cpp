#include "osl/training.hpp"

#include <cmath>
#include <stdexcept>

namespace osl {

namespace {

void check_config(const TrainConfig& cfg) {
    if (cfg.K < 1 || cfg.m < 1 || cfg.n < 1 || cfg.epochs < 1)
        throw std::invalid_argument("train config counts must be >= 1");
    if (cfg.shapes.empty()) throw std::invalid_argument("train config needs network shapes");
}

HypothesisSet init_members(const TrainConfig& cfg) {
    std::vector<Network> members;
    members.reserve(static_cast<std::size_t>(cfg.K));
    // Distinct per-member seeds; identical inits would tie every selection.
    for (int k = 0; k < cfg.K; ++k)
        members.push_back(init_network(cfg.shapes, mix_seed(cfg.seed, static_cast<std::uint64_t>(k) + 1)));
    return make_hypothesis_set(std::move(members), cfg.loss);
}

/// Shared loop. `oracle` (when set) replaces subjective selection by a fixed
/// domain-id lookup; `source` (when set) enables per-epoch resampling.
TrainResult run_training(const DomainSet* source, OpenDataset data, const TrainConfig& cfg,
                         const std::function<int(int)>* oracle) {
    check_config(cfg);
    if (cfg.resample_each_epoch && source == nullptr)
        throw std::invalid_argument("resampling requires a domain set");

    TrainResult result;
    result.hypotheses = init_members(cfg);
    HypothesisSet& H = result.hypotheses;

    std::vector<Vec> velocity(static_cast<std::size_t>(cfg.K),
                              Vec(H.members[0].params.size(), 0.0));
    Rng data_rng(mix_seed(cfg.seed, 0));
    if (data.episodes.empty()) {
        if (source == nullptr) throw std::invalid_argument("no dataset and no domain set");
        data = sample_dataset(*source, cfg.m, cfg.n, data_rng);
    }

    auto select = [&](const Episode& ep) -> int {
        if (oracle != nullptr) {
            const int k = (*oracle)(ep.domain_id);
            if (k < 0 || k >= cfg.K)
                throw std::out_of_range("oracle returned member index out of range");
            return k;
        }
        return empirical_subjective(H, ep.samples).chosen;
    };

    result.report.epochs.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.resample_each_epoch && epoch > 0)
            data = sample_dataset(*source, cfg.m, cfg.n, data_rng);

        EpochStats stats;
        stats.allocation_counts.assign(static_cast<std::size_t>(cfg.K), 0);
        for (std::size_t i = 0; i < data.episodes.size(); ++i) {
            const Episode& ep = data.episodes[i];
            try {
                const int k = select(ep);
                stats.allocation_counts[static_cast<std::size_t>(k)]++;
                auto& hist = stats.domain_allocations[ep.domain_id];
                if (hist.empty()) hist.assign(static_cast<std::size_t>(cfg.K), 0);
                hist[static_cast<std::size_t>(k)]++;

                const LossGrad lg = loss_and_grad(H.members[static_cast<std::size_t>(k)],
                                                  ep.samples, cfg.loss);
                if (!std::isfinite(lg.loss) || lg.loss > cfg.divergence_limit)
                    throw std::runtime_error("episodic loss " + std::to_string(lg.loss) +
                                             " exceeds divergence limit");
                sgd_step(H.members[static_cast<std::size_t>(k)], lg.grad, cfg.sgd,
                         velocity[static_cast<std::size_t>(k)]);
            } catch (const std::runtime_error& e) {
                throw TrainingDiverged("epoch " + std::to_string(epoch) + " episode " +
                                       std::to_string(i) + ": " + e.what());
            }
        }

        // Empirical global error over this epoch's episodes with end-of-epoch
        // parameters: mean selected-member episodic loss.
        double total = 0.0;
        for (const Episode& ep : data.episodes) {
            const int k = select(ep);
            total += episodic_error(H.members[static_cast<std::size_t>(k)], ep.samples, cfg.loss);
        }
        stats.global_error = total / static_cast<double>(data.episodes.size());
        result.report.epochs.push_back(std::move(stats));
    }
    return result;
}

}  // namespace

double episodic_error(const Network& net, std::span<const Sample> batch, LossKind loss) {
    return batch_loss(net, batch, loss);
}

TrainResult osl_train(const DomainSet& ds, const TrainConfig& cfg) {
    return run_training(&ds, {}, cfg, nullptr);
}

TrainResult osl_train_dataset(const OpenDataset& data, const TrainConfig& cfg) {
    if (data.episodes.empty()) throw std::invalid_argument("osl_train_dataset: empty dataset");
    if (cfg.resample_each_epoch)
        throw std::invalid_argument("osl_train_dataset: cannot resample a fixed dataset");
    TrainConfig fixed = cfg;
    fixed.m = data.m;
    fixed.n = data.n;
    return run_training(nullptr, data, fixed, nullptr);
}

VanillaResult vanilla_train(const DomainSet& ds, const TrainConfig& cfg) {
    TrainConfig single = cfg;
    single.K = 1;
    TrainResult r = osl_train(ds, single);
    return VanillaResult{std::move(r.hypotheses.members[0]), std::move(r.report)};
}

TrainResult oracle_mtl_train(const DomainSet& ds, const TrainConfig& cfg,
                             const std::function<int(int)>& oracle) {
    if (!oracle) throw std::invalid_argument("oracle_mtl_train: oracle is required");
    return run_training(&ds, {}, cfg, &oracle);
}

}  // namespace osl
