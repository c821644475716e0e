#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "somrel/dataset.hpp"
#include "somrel/topology.hpp"

namespace somrel {

// One centroid (code vector) per map unit, stored row-major.
struct Codebook {
    MapTopology topology;
    int dim = 0;
    std::vector<double> centroids;  // units() * dim

    std::span<const double> centroid(int u) const {
        return {centroids.data() + static_cast<std::size_t>(u) * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }
    std::span<double> centroid(int u) {
        return {centroids.data() + static_cast<std::size_t>(u) * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }

    void validate() const;
};

// Index of the centroid nearest to x in squared Euclidean distance.
// Ties go to the lowest unit index.
int best_matching_unit(const Codebook& codebook, std::span<const double> x);

// Empirical distortion: sum over observations of the squared distance to
// the nearest centroid.
double ss_intra(const Codebook& codebook, const Dataset& data);

// Centroids drawn uniformly from the data, without replacement when the
// dataset is large enough, with replacement otherwise. Deterministic in seed.
Codebook init_codebook(const Dataset& data, const MapTopology& topology, std::uint64_t seed);

}  // namespace somrel
