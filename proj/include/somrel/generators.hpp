#pragma once

#include <cstdint>
#include <vector>

#include "somrel/dataset.hpp"

namespace somrel {

struct GaussCluster {
    std::vector<double> center;
    std::vector<double> sigma;  // per-axis standard deviation, all > 0
    std::size_t count = 0;
};

struct GaussSpec {
    int dim = 0;
    std::vector<GaussCluster> clusters;
};

// Generated points plus the cluster index each point came from. The labels
// are test-side metadata only; nothing in training ever reads them.
struct GaussSample {
    Dataset data;
    std::vector<int> labels;
};

GaussSample gen_gauss(const GaussSpec& spec, std::uint64_t seed);

// 2-D presets: one isotropic cluster; three equal-variance clusters with
// some overlap (centers 4 sigma apart); three clusters of unequal variance
// (sigma ratio 1:2:3) separated far beyond any overlap.
GaussSpec gauss1_spec(std::size_t points_per_cluster = 500);
GaussSpec gauss2_spec(std::size_t points_per_cluster = 500);
GaussSpec gauss3_spec(std::size_t points_per_cluster = 500);

// Folded 2-surface in 3-space: a U-shaped profile (two straight flanks
// joined by a half circle) in the x-z plane, extruded along y. With zero
// noise every point lies exactly on the surface; noise displaces points
// along the surface normal.
struct HorseshoeSpec {
    std::size_t count = 0;
    double noise = 0.0;
    double flank_length = 1.0;
    double bend_radius = 0.5;
    double width = 2.0;
};

Dataset gen_horseshoe(const HorseshoeSpec& spec, std::uint64_t seed);

// i.i.d. uniform on [0,1]^dim.
Dataset gen_uniform_cube(std::size_t count, int dim, std::uint64_t seed);

}  // namespace somrel
