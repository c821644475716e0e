#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "somrel/codebook.hpp"
#include "somrel/dataset.hpp"
#include "somrel/topology.hpp"
#include "somrel/training.hpp"

namespace somrel {

// How each replicate's training is initialized:
//   common          - fresh seeded initialization per replicate
//   local           - one shared initialization drawn from the original data
//   local_perturbed - the shared initialization plus seeded Gaussian noise
enum class BootstrapMode { common, local, local_perturbed };

// Where a replicate's distortion is evaluated: on its own bootstrap sample
// (its training data) or on the original dataset.
enum class SsEvalTarget { bootstrap_sample, original };

struct BootstrapPlan {
    int replicates = 100;
    BootstrapMode mode = BootstrapMode::local;
    double perturbation_scale = 0.0;  // fraction of per-column data stddev, LPB only
    std::uint64_t master_seed = 0;
    SsEvalTarget eval_target = SsEvalTarget::bootstrap_sample;
};

void validate_plan(const BootstrapPlan& plan);

struct Replicate {
    std::uint32_t index = 0;
    std::vector<std::uint32_t> sample_indices;  // sorted multiset, exactly N entries
    Codebook codebook;
    double ss_intra_value = 0.0;
    // BMU of each original observation present in the sample; -1 when absent.
    std::vector<std::int32_t> bmu_of_original;

    bool contains(std::size_t i) const { return bmu_of_original[i] >= 0; }
};

struct ReplicateSet {
    BootstrapPlan plan;
    MapTopology topology;
    TrainingSchedule schedule;
    Dataset data;
    std::optional<Codebook> initial_codebook;  // shared init (absent for common bootstrap)
    std::vector<Replicate> replicates;
};

// n uniform draws with replacement from [0, n), returned sorted.
std::vector<std::uint32_t> draw_bootstrap_sample(std::size_t n, std::uint64_t seed);

// The RNG stream of replicate b. Pure function of (master_seed, b), so
// replicates may be computed in any order, or in parallel, with identical
// results.
std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint32_t b);

// Trains plan.replicates SOMs, one per bootstrap sample, and collects the
// per-replicate codebooks, distortions and BMU assignments.
ReplicateSet run_replicates(const Dataset& data, const MapTopology& topology,
                            const TrainingSchedule& schedule, const BootstrapPlan& plan,
                            int workers = 1);

// Directory serialization: manifest.json plus full-precision CSV arrays.
// save followed by load reproduces the set bit for bit, so expensive
// training runs can be cached and statistics recomputed later.
void save_replicate_set(const ReplicateSet& set, const std::filesystem::path& dir);
ReplicateSet load_replicate_set(const std::filesystem::path& dir);

}  // namespace somrel
