#include "somrel/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace somrel {

MapTopology MapTopology::string_map(int length) {
    if (length < 1) throw std::invalid_argument("string topology needs length >= 1");
    return MapTopology{MapKind::String, 1, length};
}

MapTopology MapTopology::grid(int rows, int cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("grid topology needs rows, cols >= 1");
    return MapTopology{MapKind::Grid, rows, cols};
}

long long MapTopology::neighborhood_volume(int radius) const {
    if (radius < 0) throw std::invalid_argument("neighborhood radius must be >= 0");
    const long long side = 2ll * radius + 1;
    return kind == MapKind::String ? side : side * side;
}

std::string MapTopology::label() const {
    if (kind == MapKind::String) return "string:" + std::to_string(cols);
    return "grid:" + std::to_string(rows) + "x" + std::to_string(cols);
}

int grid_distance(const MapTopology& topology, int u, int v) {
    const int n = topology.units();
    if (u < 0 || u >= n || v < 0 || v >= n)
        throw std::invalid_argument("grid_distance: unit index out of range");
    const int dr = std::abs(topology.row_of(u) - topology.row_of(v));
    const int dc = std::abs(topology.col_of(u) - topology.col_of(v));
    return std::max(dr, dc);
}

std::uint64_t neighborhood_count_sum(const MapTopology& topology, int radius) {
    if (radius < 0) throw std::invalid_argument("neighborhood radius must be >= 0");
    // |N_r(u)| factorizes into (row span) x (col span), so the sum over all
    // units is the product of the per-axis span sums.
    auto span_sum = [radius](int extent) {
        std::uint64_t sum = 0;
        for (int i = 0; i < extent; ++i) {
            const int lo = std::max(0, i - radius);
            const int hi = std::min(extent - 1, i + radius);
            sum += static_cast<std::uint64_t>(hi - lo + 1);
        }
        return sum;
    };
    return span_sum(topology.rows) * span_sum(topology.cols);
}

double edge_corrected_p(const MapTopology& topology, int radius) {
    const double u = static_cast<double>(topology.units());
    return static_cast<double>(neighborhood_count_sum(topology, radius)) / (u * u);
}

NeighborhoodSpec NeighborhoodSpec::make(const MapTopology& topology, int radius) {
    NeighborhoodSpec spec;
    spec.radius = radius;
    spec.volume = topology.neighborhood_volume(radius);
    spec.p_plain = std::min(1.0, static_cast<double>(spec.volume) / topology.units());
    spec.p_edge = edge_corrected_p(topology, radius);
    return spec;
}

}  // namespace somrel
