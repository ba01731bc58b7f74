#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "osl/data.hpp"
#include "osl/nnet.hpp"
#include "osl/subjective.hpp"

namespace osl {

struct TrainConfig {
    int K = 3;
    int m = 250;
    int n = 2;
    int epochs = 400;
    SgdConfig sgd{};
    LossKind loss = LossKind::SquaredError;
    std::uint64_t seed = 0;
    std::vector<LayerShape> shapes;
    /// When true, a fresh dataset is drawn before every epoch (streaming
    /// regime). Default keeps one fixed dataset for the whole run.
    bool resample_each_epoch = false;
    double divergence_limit = 1e6;
};

struct EpochStats {
    /// Mean selected-member episodic loss over the epoch's episodes,
    /// re-evaluated with the parameters at the end of the epoch.
    double global_error = 0.0;
    /// Training-time selections per member; sums to m.
    std::vector<int> allocation_counts;
    /// Training-time selections keyed by generating domain (oracle view).
    std::map<int, std::vector<int>> domain_allocations;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    /// Path of the saved hypothesis-set checkpoint, filled by callers that
    /// persist the result.
    std::string checkpoint;

    double final_global_error() const { return epochs.back().global_error; }
};

struct TrainResult {
    HypothesisSet hypotheses;
    TrainReport report;
};

/// Thrown when an episodic loss goes non-finite or past the divergence
/// limit; the message carries the epoch and episode indices.
struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mean loss of one hypothesis over a batch.
double episodic_error(const Network& net, std::span<const Sample> batch, LossKind loss);

/// The full training loop: per epoch, per episode, select a member with the
/// empirical subjective function and apply one SGD step to it alone.
TrainResult osl_train(const DomainSet& ds, const TrainConfig& cfg);

/// Same loop on a pre-materialized dataset (resampling unavailable).
TrainResult osl_train_dataset(const OpenDataset& data, const TrainConfig& cfg);

/// Single-model ERM baseline; identical to osl_train with K = 1.
struct VanillaResult {
    Network model;
    TrainReport report;
};
VanillaResult vanilla_train(const DomainSet& ds, const TrainConfig& cfg);

/// Multi-task oracle baseline: selection is bypassed by a fixed
/// domain-id -> member map.
TrainResult oracle_mtl_train(const DomainSet& ds, const TrainConfig& cfg,
                             const std::function<int(int)>& oracle);

}  // namespace osl
