#pragma once

#include <cstdint>

#include "somrel/codebook.hpp"
#include "somrel/dataset.hpp"
#include "somrel/topology.hpp"

namespace somrel {

// Convergence parameters of the online training run. The learning rate
// interpolates linearly from alpha_start to alpha_end over total_steps; the
// neighborhood radius shrinks in integer steps and reaches radius_end no
// later than half of the run, so the tail of the run is pure quantization
// when radius_end is 0.
struct TrainingSchedule {
    long long total_steps = 0;
    double alpha_start = 0.5;
    double alpha_end = 0.01;
    int radius_start = 0;
    int radius_end = 0;
};

void validate_schedule(const TrainingSchedule& schedule);

// 50 steps per observation, alpha 0.5 -> 0.01, initial radius half the
// larger map extent, final radius 0.
TrainingSchedule default_schedule(std::size_t observations, const MapTopology& topology);

double learning_rate_at(const TrainingSchedule& schedule, long long step);
int radius_at(const TrainingSchedule& schedule, long long step);

// Online Kohonen training: per step, draw one observation uniformly at
// random, find its best matching unit, and pull every centroid within the
// current radius toward it by the current learning rate. Deterministic
// given identical inputs and seed.
Codebook train_som(const Dataset& data, const Codebook& initial, const TrainingSchedule& schedule,
                   std::uint64_t seed);

}  // namespace somrel
