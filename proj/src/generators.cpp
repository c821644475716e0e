#include "somrel/generators.hpp"

#include <cmath>
#include <stdexcept>

#include "somrel/rng.hpp"

namespace somrel {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

GaussSample gen_gauss(const GaussSpec& spec, std::uint64_t seed) {
    if (spec.dim < 1) throw std::invalid_argument("gauss spec needs dim >= 1");
    if (spec.clusters.empty()) throw std::invalid_argument("gauss spec needs at least one cluster");
    for (const auto& c : spec.clusters) {
        if (c.center.size() != static_cast<std::size_t>(spec.dim) ||
            c.sigma.size() != static_cast<std::size_t>(spec.dim))
            throw std::invalid_argument("gauss cluster center/sigma dimension mismatch");
        if (c.count < 1) throw std::invalid_argument("gauss cluster needs count >= 1");
        for (double s : c.sigma)
            if (!(s > 0.0)) throw std::invalid_argument("gauss cluster sigma must be > 0");
    }

    std::mt19937_64 gen(seed);
    GaussSample out;
    out.data.dim = spec.dim;
    for (std::size_t ci = 0; ci < spec.clusters.size(); ++ci) {
        const auto& c = spec.clusters[ci];
        for (std::size_t i = 0; i < c.count; ++i) {
            for (int k = 0; k < spec.dim; ++k)
                out.data.values.push_back(c.center[static_cast<std::size_t>(k)] +
                                          c.sigma[static_cast<std::size_t>(k)] * normal_deviate(gen));
            out.labels.push_back(static_cast<int>(ci));
        }
    }
    out.data.validate();
    return out;
}

GaussSpec gauss1_spec(std::size_t points_per_cluster) {
    return GaussSpec{2, {{{0.0, 0.0}, {1.0, 1.0}, points_per_cluster}}};
}

GaussSpec gauss2_spec(std::size_t points_per_cluster) {
    // Equilateral triangle with side 4 = 4 sigma: tails overlap.
    return GaussSpec{2,
                     {{{0.0, 0.0}, {1.0, 1.0}, points_per_cluster},
                      {{4.0, 0.0}, {1.0, 1.0}, points_per_cluster},
                      {{2.0, 3.4641016151377544}, {1.0, 1.0}, points_per_cluster}}};
}

GaussSpec gauss3_spec(std::size_t points_per_cluster) {
    // Sigma ratio 1:2:3; every pair of centers is at least
    // 10 * (sigma_i + sigma_j) apart, so the clusters do not overlap.
    return GaussSpec{2,
                     {{{0.0, 0.0}, {0.5, 0.5}, points_per_cluster},
                      {{25.0, 0.0}, {1.0, 1.0}, points_per_cluster},
                      {{12.5, 30.0}, {1.5, 1.5}, points_per_cluster}}};
}

Dataset gen_horseshoe(const HorseshoeSpec& spec, std::uint64_t seed) {
    if (spec.count < 1) throw std::invalid_argument("horseshoe spec needs count >= 1");
    if (spec.noise < 0.0) throw std::invalid_argument("horseshoe noise must be >= 0");
    if (!(spec.flank_length > 0.0) || !(spec.bend_radius > 0.0) || !(spec.width > 0.0))
        throw std::invalid_argument("horseshoe flank_length, bend_radius, width must be > 0");

    const double flank = spec.flank_length;
    const double radius = spec.bend_radius;
    const double arc_length = 2.0 * flank + kPi * radius;

    std::mt19937_64 gen(seed);
    Dataset out;
    out.dim = 3;
    out.values.reserve(spec.count * 3);
    for (std::size_t i = 0; i < spec.count; ++i) {
        const double s = uniform_unit(gen) * arc_length;
        const double y = uniform_unit(gen) * spec.width;
        double x, z, nx, nz;  // position and unit normal in the x-z plane
        if (s < flank) {
            x = -radius;
            z = flank - s;
            nx = -1.0;
            nz = 0.0;
        } else if (s < flank + kPi * radius) {
            const double theta = kPi + (s - flank) / radius;
            nx = std::cos(theta);
            nz = std::sin(theta);
            x = radius * nx;
            z = radius * nz;
        } else {
            x = radius;
            z = s - flank - kPi * radius;
            nx = 1.0;
            nz = 0.0;
        }
        if (spec.noise > 0.0) {
            const double e = spec.noise * normal_deviate(gen);
            x += e * nx;
            z += e * nz;
        }
        out.values.push_back(x);
        out.values.push_back(y);
        out.values.push_back(z);
    }
    out.validate();
    return out;
}

Dataset gen_uniform_cube(std::size_t count, int dim, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("cube needs count >= 1");
    if (dim < 1) throw std::invalid_argument("cube needs dim >= 1");
    std::mt19937_64 gen(seed);
    Dataset out;
    out.dim = dim;
    out.values.reserve(count * static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < count; ++i)
        for (int k = 0; k < dim; ++k) out.values.push_back(uniform_unit(gen));
    out.validate();
    return out;
}

}  // namespace somrel
