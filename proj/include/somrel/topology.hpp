#pragma once

#include <cstdint>
#include <string>

namespace somrel {

enum class MapKind { String, Grid };

// Arrangement of SOM units: a 1-D string of length L or a 2-D grid of
// R x C units. A string is stored as a single row so unit coordinates and
// inter-unit distances share one code path; the kind still matters because
// the nominal neighborhood volume v differs between strings and grids.
struct MapTopology {
    MapKind kind = MapKind::String;
    int rows = 1;
    int cols = 1;

    static MapTopology string_map(int length);
    static MapTopology grid(int rows, int cols);

    int units() const { return rows * cols; }
    int row_of(int u) const { return u / cols; }
    int col_of(int u) const { return u % cols; }

    // Nominal neighborhood size v for radius r, ignoring edge effects:
    // 2r+1 on a string, (2r+1)^2 on a grid.
    long long neighborhood_volume(int radius) const;

    std::string label() const;  // "string:9" or "grid:7x7"

    friend bool operator==(const MapTopology&, const MapTopology&) = default;
};

// Chebyshev distance between units u and v on the map.
int grid_distance(const MapTopology& topology, int u, int v);

// Sum over all units of the exact number of units within Chebyshev radius r
// (the unit itself included). Integer-exact; the edge-corrected neighbor
// probability is this sum divided by U^2.
std::uint64_t neighborhood_count_sum(const MapTopology& topology, int radius);

// Probability that two independently, uniformly placed observations land on
// units within Chebyshev distance r of each other. Accounts for clipped
// neighborhoods at the map border, so it never exceeds v/U.
double edge_corrected_p(const MapTopology& topology, int radius);

// Neighborhood quantities for one (topology, radius) pair.
struct NeighborhoodSpec {
    int radius = 0;
    long long volume = 1;   // v, uncorrected
    double p_plain = 0.0;   // min(1, v/U)
    double p_edge = 0.0;    // edge-corrected probability

    static NeighborhoodSpec make(const MapTopology& topology, int radius);
};

}  // namespace somrel
