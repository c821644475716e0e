#include "somrel/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "somrel/rng.hpp"

namespace somrel {

void validate_schedule(const TrainingSchedule& s) {
    if (s.total_steps < 1) throw std::invalid_argument("schedule needs total_steps >= 1");
    if (!(s.alpha_start >= 0.0 && s.alpha_start <= 1.0) ||
        !(s.alpha_end >= 0.0 && s.alpha_end <= 1.0))
        throw std::invalid_argument("learning rates must lie in [0, 1]");
    if (s.alpha_start < s.alpha_end)
        throw std::invalid_argument("alpha_start must be >= alpha_end");
    if (s.radius_end < 0 || s.radius_start < s.radius_end)
        throw std::invalid_argument("radii must satisfy radius_start >= radius_end >= 0");
}

TrainingSchedule default_schedule(std::size_t observations, const MapTopology& topology) {
    TrainingSchedule s;
    s.total_steps = 50ll * static_cast<long long>(observations);
    s.alpha_start = 0.5;
    s.alpha_end = 0.01;
    s.radius_start = (std::max(topology.rows, topology.cols) + 1) / 2;
    s.radius_end = 0;
    return s;
}

double learning_rate_at(const TrainingSchedule& s, long long step) {
    if (s.total_steps <= 1) return s.alpha_start;
    const double f = static_cast<double>(step) / static_cast<double>(s.total_steps - 1);
    return s.alpha_start + (s.alpha_end - s.alpha_start) * f;
}

int radius_at(const TrainingSchedule& s, long long step) {
    if (s.radius_start == s.radius_end) return s.radius_end;
    // Stepwise-linear decay over the first half of the run; radius_end holds
    // from step total_steps/2 onward.
    const long long half = std::max<long long>(1, s.total_steps / 2);
    if (step >= half) return s.radius_end;
    const double remaining = static_cast<double>(half - step) / static_cast<double>(half);
    return s.radius_end +
           static_cast<int>(std::ceil((s.radius_start - s.radius_end) * remaining));
}

Codebook train_som(const Dataset& data, const Codebook& initial, const TrainingSchedule& schedule,
                   std::uint64_t seed) {
    data.validate();
    initial.validate();
    validate_schedule(schedule);
    if (initial.dim != data.dim)
        throw std::invalid_argument("train_som: codebook and dataset dimensions differ");

    Codebook cb = initial;
    const MapTopology& top = cb.topology;
    const int dim = cb.dim;
    const std::size_t n = data.size();
    std::mt19937_64 gen(seed);

    for (long long t = 0; t < schedule.total_steps; ++t) {
        const auto x = data.row(uniform_index(gen, n));
        const double alpha = learning_rate_at(schedule, t);
        if (alpha == 0.0) continue;
        const int radius = radius_at(schedule, t);
        const int bmu = best_matching_unit(cb, x);

        const int r0 = std::max(0, top.row_of(bmu) - radius);
        const int r1 = std::min(top.rows - 1, top.row_of(bmu) + radius);
        const int c0 = std::max(0, top.col_of(bmu) - radius);
        const int c1 = std::min(top.cols - 1, top.col_of(bmu) + radius);
        for (int row = r0; row <= r1; ++row)
            for (int col = c0; col <= c1; ++col) {
                double* c = cb.centroid(row * top.cols + col).data();
                for (int k = 0; k < dim; ++k)
                    c[k] += alpha * (x[static_cast<std::size_t>(k)] - c[k]);
            }
    }
    return cb;
}

}  // namespace somrel
