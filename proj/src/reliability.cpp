#include "somrel/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "somrel/rng.hpp"
#include "somrel/stats.hpp"

namespace somrel {

CvReport cv_ss_intra(std::vector<double> values) {
    if (values.size() < 2) throw std::invalid_argument("cv_ss_intra needs at least 2 values");
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("cv_ss_intra values must be finite and >= 0");

    CvReport report;
    report.mean = somrel::mean(values);
    if (report.mean == 0.0)
        throw DegenerateDistortionError("all replicates reached zero distortion; CV undefined");
    report.stddev = sample_stddev(values);
    report.cv = 100.0 * report.stddev / report.mean;
    report.values = std::move(values);
    return report;
}

namespace {

std::vector<double> ss_values(const ReplicateSet& set) {
    std::vector<double> values;
    values.reserve(set.replicates.size());
    for (const auto& rep : set.replicates) values.push_back(rep.ss_intra_value);
    return values;
}

}  // namespace

std::vector<CvSweepPoint> cv_sweep(const Dataset& data, const std::vector<MapTopology>& sizes,
                                   const std::optional<TrainingSchedule>& schedule,
                                   const BootstrapPlan& plan, int workers) {
    if (sizes.empty()) throw std::invalid_argument("cv_sweep needs at least one topology");
    std::vector<CvSweepPoint> points;
    points.reserve(sizes.size());
    for (const auto& topology : sizes) {
        const TrainingSchedule sched =
            schedule ? *schedule : default_schedule(data.size(), topology);
        ReplicateSet set = run_replicates(data, topology, sched, plan, workers);
        points.push_back({topology, cv_ss_intra(ss_values(set))});
    }
    return points;
}

double cv_for_plan(const Dataset& data, const MapTopology& topology,
                   const std::optional<TrainingSchedule>& schedule, int replicates,
                   std::uint64_t master_seed, int workers) {
    BootstrapPlan plan;
    plan.replicates = replicates;
    plan.master_seed = master_seed;
    const TrainingSchedule sched = schedule ? *schedule : default_schedule(data.size(), topology);
    ReplicateSet set = run_replicates(data, topology, sched, plan, workers);
    return cv_ss_intra(ss_values(set)).cv;
}

std::vector<BSufficiencyPoint> b_sufficiency(const Dataset& data, const MapTopology& topology,
                                             const std::optional<TrainingSchedule>& schedule,
                                             const std::vector<int>& b_values, int repeats,
                                             std::uint64_t seed, int workers) {
    if (b_values.empty()) throw std::invalid_argument("b_sufficiency needs at least one B value");
    if (repeats < 2) throw std::invalid_argument("b_sufficiency needs repeats >= 2");

    std::vector<BSufficiencyPoint> points;
    points.reserve(b_values.size());
    for (std::size_t bi = 0; bi < b_values.size(); ++bi) {
        BSufficiencyPoint point;
        point.replicates = b_values[bi];
        point.cv_values.reserve(static_cast<std::size_t>(repeats));
        for (int m = 0; m < repeats; ++m) {
            const std::uint64_t trial_seed = derive_seed(derive_seed(seed, bi), static_cast<std::uint64_t>(m));
            point.trial_seeds.push_back(trial_seed);
            point.cv_values.push_back(
                cv_for_plan(data, topology, schedule, point.replicates, trial_seed, workers));
        }
        point.sigma_cv = sample_stddev(point.cv_values);
        points.push_back(std::move(point));
    }
    return points;
}

Neigh neigh(const Replicate& replicate, std::size_t i, std::size_t j, int radius) {
    const std::size_t n = replicate.bmu_of_original.size();
    if (i >= n || j >= n) throw std::invalid_argument("neigh: observation index out of range");
    if (i == j) throw std::invalid_argument("neigh: observation indices must differ");
    if (radius < 0) throw std::invalid_argument("neigh: radius must be >= 0");
    const std::int32_t bi = replicate.bmu_of_original[i];
    const std::int32_t bj = replicate.bmu_of_original[j];
    if (bi < 0 || bj < 0) return Neigh::absent;
    return grid_distance(replicate.codebook.topology, bi, bj) <= radius ? Neigh::neighbor
                                                                        : Neigh::not_neighbor;
}

bool gaussian_conditions(int trials, double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("gaussian_conditions: probability must be in (0, 1)");
    const double b = static_cast<double>(trials);
    return trials > 30 && b * p > 10.0 && b * (1.0 - p) > 10.0;
}

Verdict gaussian_significance(int successes, int trials, double p, double level) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("significance: probability must be in (0, 1)");
    if (successes < 0 || successes > trials)
        throw std::invalid_argument("significance: successes must lie in [0, trials]");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("significance: bad test level");
    // 1.96 is the conventional two-sided 5% bound; other levels use the
    // exact normal quantile.
    const double z = level == 0.05 ? 1.96 : normal_quantile(1.0 - level / 2.0);
    const double mu = trials * p;
    const double sd = std::sqrt(trials * p * (1.0 - p));
    if (successes < mu - z * sd) return Verdict::significant_non_neighbor;
    if (successes > mu + z * sd) return Verdict::significant_neighbor;
    return Verdict::not_significant;
}

Verdict exact_binomial_significance(int successes, int trials, double p, double level) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("significance: probability must be in (0, 1)");
    if (successes < 0 || successes > trials)
        throw std::invalid_argument("significance: successes must lie in [0, trials]");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("significance: bad test level");
    if (trials == 0) return Verdict::not_significant;
    // Equal-tail test: each tail at level/2, direction from the sign of
    // successes - trials*p.
    const double mu = trials * p;
    if (successes < mu && binomial_cdf(successes, trials, p) <= level / 2.0)
        return Verdict::significant_non_neighbor;
    if (successes > mu && binomial_upper_tail(successes, trials, p) <= level / 2.0)
        return Verdict::significant_neighbor;
    return Verdict::not_significant;
}

Verdict significance(int successes, int trials, double p, double level) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("significance: probability must be in (0, 1)");
    if (trials == 0) return Verdict::not_significant;
    return gaussian_conditions(trials, p) ? gaussian_significance(successes, trials, p, level)
                                          : exact_binomial_significance(successes, trials, p, level);
}

PairStability stab(const ReplicateSet& set, std::size_t i, std::size_t j, int radius,
                   const SignificanceOptions& options) {
    PairStability pair;
    pair.i = static_cast<std::uint32_t>(i);
    pair.j = static_cast<std::uint32_t>(j);
    pair.radius = radius;
    for (const auto& rep : set.replicates) {
        const Neigh result = neigh(rep, i, j, radius);
        if (result == Neigh::absent) continue;
        ++pair.b_ij;
        if (result == Neigh::neighbor) ++pair.successes;
    }
    if (pair.b_ij == 0) {
        pair.verdict = Verdict::undetermined;
        return pair;
    }
    pair.stab = static_cast<double>(pair.successes) / static_cast<double>(pair.b_ij);

    const NeighborhoodSpec spec = NeighborhoodSpec::make(set.topology, radius);
    const double p = options.edge_corrected ? spec.p_edge : spec.p_plain;
    // A neighborhood covering the full map makes every pair a neighbor under
    // the null; no rejection is possible.
    pair.verdict = p >= 1.0 ? Verdict::not_significant
                            : significance(pair.successes, pair.b_ij, p, options.level);
    return pair;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> draw_pair_subsample(std::size_t n,
                                                                         std::size_t count,
                                                                         std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("pair subsample needs at least 2 observations");
    if (count < 1) throw std::invalid_argument("pair subsample needs count >= 1");
    const std::size_t total = n * (n - 1) / 2;

    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    if (count >= total) {
        pairs.reserve(total);
        for (std::uint32_t i = 0; i + 1 < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        return pairs;
    }

    std::mt19937_64 gen(seed);
    std::unordered_set<std::uint64_t> seen;
    pairs.reserve(count);
    while (pairs.size() < count) {
        std::uint32_t i = static_cast<std::uint32_t>(uniform_index(gen, n));
        std::uint32_t j = static_cast<std::uint32_t>(uniform_index(gen, n));
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        const std::uint64_t key = static_cast<std::uint64_t>(i) * n + j;
        if (seen.insert(key).second) pairs.emplace_back(i, j);
    }
    return pairs;
}

std::vector<double> reference_histogram(double b_bar, double p, int bins) {
    if (!(b_bar >= 1.0)) throw std::invalid_argument("reference_histogram needs b_bar >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("reference_histogram probability must be in (0, 1)");
    if (bins < 1) throw std::invalid_argument("reference_histogram needs bins >= 1");

    const int trials = static_cast<int>(std::llround(b_bar));
    const auto pmf = binomial_pmf(trials, p);
    std::vector<double> mass(static_cast<std::size_t>(bins), 0.0);
    for (int k = 0; k <= trials; ++k) {
        const double x = static_cast<double>(k) / static_cast<double>(trials);
        const int bin = std::min(bins - 1, static_cast<int>(x * bins));
        mass[static_cast<std::size_t>(bin)] += pmf[static_cast<std::size_t>(k)];
    }
    std::vector<double> cumulative(static_cast<std::size_t>(bins), 0.0);
    double acc = 0.0;
    for (int b = 0; b < bins; ++b) {
        acc += mass[static_cast<std::size_t>(b)];
        cumulative[static_cast<std::size_t>(b)] = acc;
    }
    return cumulative;
}

StabHistogram stab_histogram(const ReplicateSet& set, int radius, int bins,
                             const std::optional<PairSubsample>& subsample) {
    if (bins < 1) throw std::invalid_argument("stab_histogram needs bins >= 1");
    if (radius < 0) throw std::invalid_argument("stab_histogram radius must be >= 0");
    const std::size_t n = set.data.size();
    if (n < 2) throw std::invalid_argument("stab_histogram needs at least 2 observations");

    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    if (subsample) {
        pairs = draw_pair_subsample(n, subsample->count, subsample->seed);
    } else {
        pairs.reserve(n * (n - 1) / 2);
        for (std::uint32_t i = 0; i + 1 < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }

    StabHistogram hist;
    hist.radius = radius;
    hist.bins = bins;
    hist.counts.assign(static_cast<std::size_t>(bins), 0);
    if (subsample) {
        hist.pair_subsample = subsample->count;
        hist.subsample_below_recommended =
            pairs.size() < 10 * static_cast<std::size_t>(set.topology.units());
    }

    const MapTopology& top = set.topology;
    std::uint64_t b_ij_sum = 0;
    for (const auto& [i, j] : pairs) {
        int b_ij = 0;
        int successes = 0;
        for (const auto& rep : set.replicates) {
            const std::int32_t bi = rep.bmu_of_original[i];
            const std::int32_t bj = rep.bmu_of_original[j];
            if (bi < 0 || bj < 0) continue;
            ++b_ij;
            const int dr = std::abs(top.row_of(bi) - top.row_of(bj));
            const int dc = std::abs(top.col_of(bi) - top.col_of(bj));
            if (std::max(dr, dc) <= radius) ++successes;
        }
        if (b_ij == 0) {
            ++hist.pairs_undetermined;
            continue;
        }
        ++hist.pairs_evaluated;
        b_ij_sum += static_cast<std::uint64_t>(b_ij);
        const double value = static_cast<double>(successes) / static_cast<double>(b_ij);
        const int bin = std::min(bins - 1, static_cast<int>(value * bins));
        ++hist.counts[static_cast<std::size_t>(bin)];
    }
    if (hist.pairs_evaluated == 0)
        throw std::invalid_argument("stab_histogram: no pair occurs in any replicate");

    hist.cumulative.assign(static_cast<std::size_t>(bins), 0.0);
    double acc = 0.0;
    for (int b = 0; b < bins; ++b) {
        acc += static_cast<double>(hist.counts[static_cast<std::size_t>(b)]) /
               static_cast<double>(hist.pairs_evaluated);
        hist.cumulative[static_cast<std::size_t>(b)] = acc;
    }

    hist.mean_b = static_cast<int>(std::llround(static_cast<double>(b_ij_sum) /
                                                static_cast<double>(hist.pairs_evaluated)));
    hist.p_edge = edge_corrected_p(top, radius);
    if (hist.p_edge >= 1.0) {
        // Neighborhood covers the map: the null is a point mass at stab = 1.
        hist.reference_cumulative.assign(static_cast<std::size_t>(bins), 0.0);
        hist.reference_cumulative.back() = 1.0;
    } else {
        hist.reference_cumulative = reference_histogram(hist.mean_b, hist.p_edge, bins);
    }
    return hist;
}

double ks_distance(const StabHistogram& histogram) {
    double max_diff = 0.0;
    for (std::size_t b = 0; b < histogram.cumulative.size(); ++b)
        max_diff = std::max(max_diff,
                            std::abs(histogram.cumulative[b] - histogram.reference_cumulative[b]));
    return max_diff;
}

SignificantFraction significant_fraction(const std::vector<PairStability>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("significant_fraction needs at least one pair");
    const int radius = pairs.front().radius;
    SignificantFraction out;
    std::size_t neighbors = 0;
    std::size_t non_neighbors = 0;
    for (const auto& pair : pairs) {
        if (pair.radius != radius)
            throw std::invalid_argument("significant_fraction: pairs mix different radii");
        if (pair.verdict == Verdict::undetermined) {
            ++out.undetermined;
            continue;
        }
        ++out.evaluated;
        if (pair.verdict == Verdict::significant_neighbor) ++neighbors;
        if (pair.verdict == Verdict::significant_non_neighbor) ++non_neighbors;
    }
    if (out.evaluated == 0)
        throw std::invalid_argument("significant_fraction: all pairs undetermined");
    out.frac_neighbor = static_cast<double>(neighbors) / static_cast<double>(out.evaluated);
    out.frac_non_neighbor = static_cast<double>(non_neighbors) / static_cast<double>(out.evaluated);
    out.frac_marked = out.frac_neighbor + out.frac_non_neighbor;
    return out;
}

}  // namespace somrel
