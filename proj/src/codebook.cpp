#include "somrel/codebook.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "somrel/rng.hpp"

namespace somrel {

void Codebook::validate() const {
    if (dim < 1) throw std::invalid_argument("codebook dimension must be >= 1");
    if (centroids.size() != static_cast<std::size_t>(topology.units()) * static_cast<std::size_t>(dim))
        throw std::invalid_argument("codebook centroid count does not match the topology");
    for (double v : centroids)
        if (!std::isfinite(v)) throw std::invalid_argument("codebook contains a non-finite value");
}

int best_matching_unit(const Codebook& codebook, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(codebook.dim))
        throw std::invalid_argument("best_matching_unit: observation dimension mismatch");
    const int units = codebook.topology.units();
    const int dim = codebook.dim;
    const double* c = codebook.centroids.data();
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int u = 0; u < units; ++u, c += dim) {
        double d2 = 0.0;
        for (int k = 0; k < dim; ++k) {
            const double diff = x[static_cast<std::size_t>(k)] - c[k];
            d2 += diff * diff;
        }
        if (d2 < best_d2) {
            best_d2 = d2;
            best = u;
        }
    }
    return best;
}

double ss_intra(const Codebook& codebook, const Dataset& data) {
    if (codebook.dim != data.dim)
        throw std::invalid_argument("ss_intra: codebook and dataset dimensions differ");
    const int units = codebook.topology.units();
    const int dim = codebook.dim;
    double total = 0.0;
    for (std::size_t j = 0; j < data.size(); ++j) {
        const auto x = data.row(j);
        const double* c = codebook.centroids.data();
        double min_d2 = std::numeric_limits<double>::infinity();
        for (int u = 0; u < units; ++u, c += dim) {
            double d2 = 0.0;
            for (int k = 0; k < dim; ++k) {
                const double diff = x[static_cast<std::size_t>(k)] - c[k];
                d2 += diff * diff;
            }
            if (d2 < min_d2) min_d2 = d2;
        }
        total += min_d2;
    }
    return total;
}

Codebook init_codebook(const Dataset& data, const MapTopology& topology, std::uint64_t seed) {
    data.validate();
    const std::size_t n = data.size();
    const std::size_t units = static_cast<std::size_t>(topology.units());
    std::mt19937_64 gen(seed);

    std::vector<std::size_t> picks(units);
    if (n >= units) {
        // Partial Fisher-Yates: the first `units` entries are a uniform
        // sample without replacement.
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < units; ++i) {
            const std::size_t j = i + uniform_index(gen, n - i);
            std::swap(idx[i], idx[j]);
            picks[i] = idx[i];
        }
    } else {
        for (std::size_t i = 0; i < units; ++i) picks[i] = uniform_index(gen, n);
    }

    Codebook cb;
    cb.topology = topology;
    cb.dim = data.dim;
    cb.centroids.resize(units * static_cast<std::size_t>(data.dim));
    for (std::size_t u = 0; u < units; ++u) {
        const auto src = data.row(picks[u]);
        std::copy(src.begin(), src.end(), cb.centroid(static_cast<int>(u)).begin());
    }
    return cb;
}

}  // namespace somrel
