#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "somrel/bootstrap.hpp"
#include "somrel/topology.hpp"

namespace somrel {

// Raised by cv_ss_intra when every replicate reached zero distortion, which
// leaves the coefficient of variation undefined.
struct DegenerateDistortionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Coefficient of variation of the distortion across bootstrap replicates,
// in percent. Low values mean the quantization error is reproducible.
struct CvReport {
    std::vector<double> values;
    double mean = 0.0;
    double stddev = 0.0;  // sample, n-1 denominator
    double cv = 0.0;      // 100 * stddev / mean
};

CvReport cv_ss_intra(std::vector<double> values);

struct CvSweepPoint {
    MapTopology topology;
    CvReport report;
};

// Runs the full bootstrap per topology and reports CV(SSIntra) in size
// order. A sudden rise in the curve flags unstable centroid placement, so
// the curve doubles as a map-size diagnostic. When no schedule is given,
// each topology gets the default schedule for the dataset.
std::vector<CvSweepPoint> cv_sweep(const Dataset& data, const std::vector<MapTopology>& sizes,
                                   const std::optional<TrainingSchedule>& schedule,
                                   const BootstrapPlan& plan, int workers = 1);

// One CV(SSIntra) estimate for a given replicate count and master seed.
double cv_for_plan(const Dataset& data, const MapTopology& topology,
                   const std::optional<TrainingSchedule>& schedule, int replicates,
                   std::uint64_t master_seed, int workers = 1);

struct BSufficiencyPoint {
    int replicates = 0;
    double sigma_cv = 0.0;
    std::vector<double> cv_values;
    std::vector<std::uint64_t> trial_seeds;  // master seed of each repeat
};

// For each candidate B, estimates CV(SSIntra) `repeats` times with
// independent master seeds and reports the spread of those estimates.
// The curve flattening out marks a sufficient replicate count.
std::vector<BSufficiencyPoint> b_sufficiency(const Dataset& data, const MapTopology& topology,
                                             const std::optional<TrainingSchedule>& schedule,
                                             const std::vector<int>& b_values, int repeats,
                                             std::uint64_t seed, int workers = 1);

// Per-replicate neighborhood indicator for a pair of observations:
// absent when either observation is missing from the replicate's sample.
enum class Neigh { absent, not_neighbor, neighbor };

Neigh neigh(const Replicate& replicate, std::size_t i, std::size_t j, int radius);

enum class Verdict { significant_neighbor, significant_non_neighbor, not_significant, undetermined };

struct SignificanceOptions {
    double level = 0.05;
    bool edge_corrected = false;  // use the edge-corrected null probability per pair
};

// Stability of one pair's neighborhood relation over the replicates that
// contain both observations.
struct PairStability {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    int radius = 0;
    int b_ij = 0;       // replicates containing both observations
    int successes = 0;  // of those, replicates where the pair is neighbors
    std::optional<double> stab;  // successes / b_ij; absent when b_ij = 0
    Verdict verdict = Verdict::undetermined;
};

PairStability stab(const ReplicateSet& set, std::size_t i, std::size_t j, int radius,
                   const SignificanceOptions& options = {});

// Classical conditions under which Binomial(trials, p) is well approximated
// by a Gaussian: trials > 30, trials*p > 10 and trials*(1-p) > 10.
bool gaussian_conditions(int trials, double p);

// H0: the pair is neighbors only by chance (success probability p).
// Gaussian branch: reject outside trials*p -/+ z*sqrt(trials*p*(1-p)),
// z = 1.96 at the 5% level. Exact branch: equal-tail binomial test.
Verdict gaussian_significance(int successes, int trials, double p, double level = 0.05);
Verdict exact_binomial_significance(int successes, int trials, double p, double level = 0.05);
Verdict significance(int successes, int trials, double p, double level = 0.05);

// Uniformly random unordered pairs (i < j), distinct, deterministic in seed.
std::vector<std::pair<std::uint32_t, std::uint32_t>> draw_pair_subsample(std::size_t n,
                                                                         std::size_t count,
                                                                         std::uint64_t seed);

struct PairSubsample {
    std::size_t count = 0;
    std::uint64_t seed = 0;
};

// Distribution of stab values over pairs of observations, against the
// unorganized-map reference. Pairs with no co-occurrence are excluded from
// the histogram and counted separately.
struct StabHistogram {
    int radius = 0;
    int bins = 0;
    std::vector<std::uint64_t> counts;
    std::vector<double> cumulative;            // organized map
    std::vector<double> reference_cumulative;  // unorganized-map model
    std::size_t pairs_evaluated = 0;
    std::size_t pairs_undetermined = 0;
    int mean_b = 0;       // rounded mean of B_ij over evaluated pairs
    double p_edge = 0.0;  // null probability used for the reference
    std::optional<std::size_t> pair_subsample;
    bool subsample_below_recommended = false;  // subsample < 10 * units
};

StabHistogram stab_histogram(const ReplicateSet& set, int radius, int bins = 51,
                             const std::optional<PairSubsample>& subsample = {});

// Cumulative curve of Binomial(round(b_bar), p) with support rescaled to
// [0, 1], accumulated on the same bin grid as stab_histogram.
std::vector<double> reference_histogram(double b_bar, double p, int bins);

// Kolmogorov-Smirnov distance between the organized and reference curves.
double ks_distance(const StabHistogram& histogram);

struct SignificantFraction {
    double frac_neighbor = 0.0;
    double frac_non_neighbor = 0.0;
    double frac_marked = 0.0;
    std::size_t evaluated = 0;
    std::size_t undetermined = 0;
};

// Fraction of pairs with a significant verdict, excluding undetermined
// pairs from the denominator. All pairs must share one radius.
SignificantFraction significant_fraction(const std::vector<PairStability>& pairs);

}  // namespace somrel
