#include "somrel/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "somrel/rng.hpp"
#include "somrel/stats.hpp"

namespace somrel {

namespace {

// Sub-streams of one replicate's seed.
enum ReplicateStream : std::uint64_t {
    stream_sample = 0,
    stream_training = 1,
    stream_init = 2,
    stream_perturbation = 3,
};

}  // namespace

void validate_plan(const BootstrapPlan& plan) {
    if (plan.replicates < 1) throw std::invalid_argument("bootstrap plan needs replicates >= 1");
    if (plan.perturbation_scale < 0.0)
        throw std::invalid_argument("perturbation_scale must be >= 0");
}

std::vector<std::uint32_t> draw_bootstrap_sample(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("bootstrap sample size must be >= 1");
    std::mt19937_64 gen(seed);
    std::vector<std::uint32_t> indices(n);
    for (auto& idx : indices) idx = static_cast<std::uint32_t>(uniform_index(gen, n));
    std::sort(indices.begin(), indices.end());
    return indices;
}

std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint32_t b) {
    return derive_seed(master_seed, 1 + static_cast<std::uint64_t>(b));
}

namespace {

Dataset gather_rows(const Dataset& data, const std::vector<std::uint32_t>& indices) {
    Dataset out;
    out.dim = data.dim;
    out.values.reserve(indices.size() * static_cast<std::size_t>(data.dim));
    for (std::uint32_t idx : indices) {
        const auto r = data.row(idx);
        out.values.insert(out.values.end(), r.begin(), r.end());
    }
    return out;
}

std::vector<double> column_stddevs(const Dataset& data) {
    const std::size_t n = data.size();
    std::vector<double> stds(static_cast<std::size_t>(data.dim), 0.0);
    if (n < 2) return stds;
    std::vector<double> column(n);
    for (int k = 0; k < data.dim; ++k) {
        for (std::size_t i = 0; i < n; ++i) column[i] = data.row(i)[static_cast<std::size_t>(k)];
        stds[static_cast<std::size_t>(k)] = sample_stddev(column);
    }
    return stds;
}

}  // namespace

ReplicateSet run_replicates(const Dataset& data, const MapTopology& topology,
                            const TrainingSchedule& schedule, const BootstrapPlan& plan,
                            int workers) {
    data.validate();
    validate_plan(plan);
    validate_schedule(schedule);
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");

    const std::size_t n = data.size();
    const bool perturbed = plan.mode == BootstrapMode::local_perturbed &&
                           plan.perturbation_scale > 0.0;

    ReplicateSet set;
    set.plan = plan;
    set.topology = topology;
    set.schedule = schedule;
    set.data = data;
    if (plan.mode != BootstrapMode::common)
        set.initial_codebook = init_codebook(data, topology, derive_seed(plan.master_seed, 0));

    const std::vector<double> col_std = perturbed ? column_stddevs(data) : std::vector<double>{};

    set.replicates.resize(static_cast<std::size_t>(plan.replicates));
    const auto make_replicate = [&](std::uint32_t b) {
        const std::uint64_t rep_seed = replicate_seed(plan.master_seed, b);
        Replicate rep;
        rep.index = b;
        rep.sample_indices = draw_bootstrap_sample(n, derive_seed(rep_seed, stream_sample));
        const Dataset sample = gather_rows(data, rep.sample_indices);

        Codebook init;
        if (plan.mode == BootstrapMode::common) {
            init = init_codebook(sample, topology, derive_seed(rep_seed, stream_init));
        } else {
            init = *set.initial_codebook;
            if (perturbed) {
                std::mt19937_64 gen(derive_seed(rep_seed, stream_perturbation));
                for (int u = 0; u < topology.units(); ++u) {
                    auto c = init.centroid(u);
                    for (int k = 0; k < init.dim; ++k)
                        c[static_cast<std::size_t>(k)] +=
                            plan.perturbation_scale * col_std[static_cast<std::size_t>(k)] *
                            normal_deviate(gen);
                }
            }
        }

        rep.codebook = train_som(sample, init, schedule, derive_seed(rep_seed, stream_training));
        rep.ss_intra_value = plan.eval_target == SsEvalTarget::bootstrap_sample
                                 ? ss_intra(rep.codebook, sample)
                                 : ss_intra(rep.codebook, data);

        rep.bmu_of_original.assign(n, -1);
        for (std::size_t i = 0; i < rep.sample_indices.size(); ++i) {
            const std::uint32_t idx = rep.sample_indices[i];
            if (i > 0 && idx == rep.sample_indices[i - 1]) continue;  // sorted: skip duplicates
            rep.bmu_of_original[idx] =
                static_cast<std::int32_t>(best_matching_unit(rep.codebook, data.row(idx)));
        }
        set.replicates[b] = std::move(rep);
    };

    const int b_total = plan.replicates;
    const int n_threads = std::min<int>(workers, b_total);
    if (n_threads <= 1) {
        for (std::uint32_t b = 0; b < static_cast<std::uint32_t>(b_total); ++b) make_replicate(b);
    } else {
        std::atomic<std::uint32_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&] {
            for (;;) {
                const std::uint32_t b = next.fetch_add(1);
                if (b >= static_cast<std::uint32_t>(b_total)) return;
                try {
                    make_replicate(b);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }
    return set;
}

}  // namespace somrel
