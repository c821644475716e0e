#include <doctest.h>

#include <cmath>
#include <set>

#include "somrel/generators.hpp"
#include "somrel/reliability.hpp"
#include "somrel/rng.hpp"
#include "somrel/stats.hpp"

using namespace somrel;

namespace {

// Replicate set with hand-picked BMU assignments, enough for the
// neighborhood statistics (no training involved).
ReplicateSet synthetic_set(const MapTopology& top, std::size_t n,
                           const std::vector<std::vector<std::int32_t>>& assignments) {
    ReplicateSet set;
    set.topology = top;
    set.plan.replicates = static_cast<int>(assignments.size());
    set.data.dim = 1;
    set.data.values.assign(n, 0.0);
    for (std::size_t b = 0; b < assignments.size(); ++b) {
        Replicate rep;
        rep.index = static_cast<std::uint32_t>(b);
        rep.codebook.topology = top;
        rep.bmu_of_original = assignments[b];
        set.replicates.push_back(std::move(rep));
    }
    return set;
}

TrainingSchedule quick_schedule(std::size_t n, const MapTopology& top) {
    auto s = default_schedule(n, top);
    s.total_steps = static_cast<long long>(10 * n);
    return s;
}

}  // namespace

TEST_CASE("cv_ss_intra examples") {
    CHECK(cv_ss_intra({10.0, 10.0, 10.0}).cv == 0.0);

    const auto report = cv_ss_intra({9.0, 11.0});
    CHECK(report.mean == 10.0);
    CHECK(report.cv == doctest::Approx(100.0 * std::sqrt(2.0) / 10.0).epsilon(1e-12));

    CHECK_THROWS_AS(cv_ss_intra({5.0}), std::invalid_argument);
    CHECK_THROWS_AS(cv_ss_intra({0.0, 0.0, 0.0}), DegenerateDistortionError);
    CHECK_THROWS_AS(cv_ss_intra({1.0, -2.0}), std::invalid_argument);
}

TEST_CASE("cv is invariant under positive scaling") {
    std::mt19937_64 gen(3);
    std::vector<double> values;
    for (int i = 0; i < 50; ++i) values.push_back(1.0 + uniform_unit(gen));
    const double base = cv_ss_intra(values).cv;

    // Power-of-two scaling is error-free, so the CV matches bit for bit.
    std::vector<double> doubled = values;
    for (double& v : doubled) v *= 1024.0;
    CHECK(cv_ss_intra(doubled).cv == base);

    std::vector<double> scaled = values;
    for (double& v : scaled) v *= 3.7;
    CHECK(cv_ss_intra(scaled).cv == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("cv_sweep composes run_replicates and cv_ss_intra") {
    const auto sample = gen_gauss(gauss1_spec(30), 2);
    const auto top = MapTopology::string_map(3);
    const auto sched = quick_schedule(sample.data.size(), top);
    BootstrapPlan plan;
    plan.replicates = 8;
    plan.master_seed = 5;

    const auto points = cv_sweep(sample.data, {top}, sched, plan);
    REQUIRE(points.size() == 1);

    const auto set = run_replicates(sample.data, top, sched, plan);
    std::vector<double> values;
    for (const auto& rep : set.replicates) values.push_back(rep.ss_intra_value);
    CHECK(points[0].report.cv == cv_ss_intra(values).cv);

    CHECK_THROWS_AS(cv_sweep(sample.data, {}, sched, plan), std::invalid_argument);
}

TEST_CASE("identical master seeds give identical CV estimates") {
    const auto sample = gen_gauss(gauss1_spec(25), 7);
    const auto top = MapTopology::string_map(3);
    const auto sched = quick_schedule(sample.data.size(), top);

    const double a = cv_for_plan(sample.data, top, sched, 6, 123);
    const double b = cv_for_plan(sample.data, top, sched, 6, 123);
    CHECK(a == b);
    CHECK(sample_stddev(std::vector<double>{a, b}) == 0.0);
}

TEST_CASE("b_sufficiency shape contract") {
    const auto sample = gen_gauss(gauss1_spec(25), 9);
    const auto top = MapTopology::string_map(3);
    const auto sched = quick_schedule(sample.data.size(), top);

    const std::vector<int> b_values{4, 8, 6};
    const auto points = b_sufficiency(sample.data, top, sched, b_values, 3, 77);
    REQUIRE(points.size() == 3);
    for (std::size_t i = 0; i < b_values.size(); ++i) {
        CHECK(points[i].replicates == b_values[i]);
        CHECK(points[i].cv_values.size() == 3);
        CHECK(points[i].sigma_cv >= 0.0);
    }
    CHECK_THROWS_AS(b_sufficiency(sample.data, top, sched, b_values, 1, 77),
                    std::invalid_argument);
    CHECK_THROWS_AS(b_sufficiency(sample.data, top, sched, {}, 3, 77), std::invalid_argument);
}

TEST_CASE("neigh on the 4x5 example map") {
    // x1, x2 on unit (1,1); x3 on (0,3); x4 on (1,4).
    const auto top = MapTopology::grid(4, 5);
    const std::int32_t u11 = 1 * 5 + 1;
    const std::int32_t u03 = 3;
    const std::int32_t u14 = 1 * 5 + 4;
    const std::vector<std::int32_t> bmu{u11, u11, u03, u14};
    const auto set = synthetic_set(top, 4, {bmu});
    const auto& rep = set.replicates[0];

    // same unit: neighbors at every radius
    CHECK(neigh(rep, 0, 1, 0) == Neigh::neighbor);
    for (int r = 0; r <= 4; ++r) CHECK(neigh(rep, 0, 1, r) == Neigh::neighbor);

    // distance 1: not at r = 0, yes from r = 1
    CHECK(neigh(rep, 2, 3, 0) == Neigh::not_neighbor);
    CHECK(neigh(rep, 2, 3, 1) == Neigh::neighbor);

    // distance 2: not at r = 1, yes from r = 2
    CHECK(neigh(rep, 0, 2, 1) == Neigh::not_neighbor);
    CHECK(neigh(rep, 0, 2, 2) == Neigh::neighbor);

    CHECK_THROWS_AS(neigh(rep, 1, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(neigh(rep, 0, 9, 0), std::invalid_argument);
    CHECK_THROWS_AS(neigh(rep, 0, 1, -1), std::invalid_argument);
}

TEST_CASE("neigh reports absent observations") {
    const auto top = MapTopology::string_map(4);
    const auto set = synthetic_set(top, 3, {{0, -1, 2}});
    CHECK(neigh(set.replicates[0], 0, 1, 3) == Neigh::absent);
    CHECK(neigh(set.replicates[0], 0, 2, 3) == Neigh::neighbor);
}

TEST_CASE("gaussian_conditions") {
    CHECK(gaussian_conditions(100, 9.0 / 49.0));        // 100>30, 18.4>10, 81.6>10
    CHECK(!gaussian_conditions(100, 1.0 / 49.0));       // 100/49 ~ 2 < 10
    CHECK(!gaussian_conditions(30, 0.5));               // boundary excluded
    CHECK(gaussian_conditions(31, 0.5));
    CHECK_THROWS_AS(gaussian_conditions(100, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_conditions(100, 1.0), std::invalid_argument);
}

TEST_CASE("significance in the Gaussian regime") {
    const double p = 9.0 / 49.0;  // bounds approximately [10.78, 25.96]
    CHECK(significance(70, 100, p) == Verdict::significant_neighbor);
    CHECK(significance(0, 100, p) == Verdict::significant_non_neighbor);
    CHECK(significance(18, 100, p) == Verdict::not_significant);
    CHECK(significance(26, 100, p) == Verdict::significant_neighbor);
    CHECK(significance(10, 100, p) == Verdict::significant_non_neighbor);
    CHECK(significance(11, 100, p) == Verdict::not_significant);

    CHECK_THROWS_AS(significance(5, 4, p), std::invalid_argument);
    CHECK_THROWS_AS(significance(-1, 4, p), std::invalid_argument);
    CHECK_THROWS_AS(significance(1, 4, 0.0), std::invalid_argument);
}

TEST_CASE("significance falls back to the exact binomial test") {
    // p = 1/49 fails the Gaussian conditions at B = 100.
    const double p = 1.0 / 49.0;
    REQUIRE(!gaussian_conditions(100, p));
    // P(X >= 6 | Binomial(100, 1/49)) = 0.0169 <= 0.025, P(X >= 5) = 0.0545
    CHECK(significance(6, 100, p) == Verdict::significant_neighbor);
    CHECK(significance(5, 100, p) == Verdict::not_significant);
    // lower tail: P(X = 0) = (48/49)^100 = 0.127 > 0.025, never significant
    CHECK(significance(0, 100, p) == Verdict::not_significant);
    CHECK(exact_binomial_significance(0, 0, p) == Verdict::not_significant);
}

TEST_CASE("stab over synthetic replicates") {
    const auto top = MapTopology::string_map(3);
    // observations 0,1 always share unit 0; observation 2 sits on unit 2;
    // observation 3 appears in no replicate.
    std::vector<std::vector<std::int32_t>> assignments(20, {0, 0, 2, -1});
    const auto set = synthetic_set(top, 4, assignments);

    const auto always = stab(set, 0, 1, 0);
    CHECK(always.b_ij == 20);
    CHECK(always.successes == 20);
    REQUIRE(always.stab.has_value());
    CHECK(*always.stab == 1.0);

    const auto never = stab(set, 0, 2, 0);
    REQUIRE(never.stab.has_value());
    CHECK(*never.stab == 0.0);

    const auto missing = stab(set, 0, 3, 0);
    CHECK(missing.b_ij == 0);
    CHECK(!missing.stab.has_value());
    CHECK(missing.verdict == Verdict::undetermined);
}

TEST_CASE("stab symmetry and monotonicity in r on real replicates") {
    const auto sample = gen_gauss(gauss2_spec(20), 31);
    const auto top = MapTopology::grid(3, 3);
    BootstrapPlan plan;
    plan.replicates = 15;
    plan.master_seed = 33;
    const auto set =
        run_replicates(sample.data, top, quick_schedule(sample.data.size(), top), plan);

    for (std::size_t i = 0; i < 12; i += 3)
        for (std::size_t j = i + 1; j < 12; j += 2) {
            std::optional<double> previous;
            for (int r = 0; r <= 3; ++r) {
                const auto forward = stab(set, i, j, r);
                const auto backward = stab(set, j, i, r);
                CHECK(forward.b_ij == backward.b_ij);
                CHECK(forward.successes == backward.successes);
                CHECK(forward.stab == backward.stab);
                if (forward.stab) {
                    CHECK(*forward.stab >= 0.0);
                    CHECK(*forward.stab <= 1.0);
                    if (previous) CHECK(*forward.stab >= *previous);
                    previous = forward.stab;
                }
            }
        }
}

TEST_CASE("pairs on the same unit are neighbors at every radius") {
    const auto top = MapTopology::grid(3, 3);
    const auto set = synthetic_set(top, 2, {{4, 4}});
    for (int r = 0; r <= 2; ++r) CHECK(neigh(set.replicates[0], 0, 1, r) == Neigh::neighbor);
}

TEST_CASE("draw_pair_subsample") {
    const auto pairs = draw_pair_subsample(100, 50, 17);
    CHECK(pairs.size() == 50);
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const auto& [i, j] : pairs) {
        CHECK(i < j);
        CHECK(j < 100);
        seen.insert({i, j});
    }
    CHECK(seen.size() == 50);
    CHECK(draw_pair_subsample(100, 50, 17) == pairs);

    // requesting more pairs than exist falls back to full enumeration
    CHECK(draw_pair_subsample(5, 1000, 1).size() == 10);
    CHECK_THROWS_AS(draw_pair_subsample(1, 5, 1), std::invalid_argument);
    CHECK_THROWS_AS(draw_pair_subsample(10, 0, 1), std::invalid_argument);
}

TEST_CASE("reference_histogram") {
    // Bernoulli when b_bar = 1: mass 1-p at 0, p at 1.
    const auto bern = reference_histogram(1.0, 0.3, 10);
    CHECK(bern.front() == doctest::Approx(0.7).epsilon(1e-12));
    for (std::size_t b = 0; b + 1 < bern.size(); ++b)
        CHECK(bern[b] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(bern.back() == doctest::Approx(1.0).epsilon(1e-12));

    // Binomial(40, 0.1503): the cumulative value at x = 0.25 equals the CDF
    // at k = 10, which evaluates to 0.969682...
    const int bins = 51;
    const auto curve = reference_histogram(40.0, 0.1503, bins);
    const int bin_of_quarter = static_cast<int>(0.25 * bins);
    CHECK(curve[static_cast<std::size_t>(bin_of_quarter)] ==
          doctest::Approx(0.9696823126687).epsilon(1e-9));
    CHECK(curve.back() == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t b = 1; b < curve.size(); ++b) CHECK(curve[b] >= curve[b - 1]);

    // median crossing sits near p
    const auto mid = reference_histogram(100.0, 0.4, 101);
    int crossing = 0;
    while (mid[static_cast<std::size_t>(crossing)] < 0.5) ++crossing;
    CHECK(std::abs(crossing / 101.0 - 0.4) < 0.05);

    CHECK_THROWS_AS(reference_histogram(0.5, 0.3, 10), std::invalid_argument);
    CHECK_THROWS_AS(reference_histogram(10.0, 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(reference_histogram(10.0, 0.3, 0), std::invalid_argument);
}

TEST_CASE("stab_histogram of a perfectly stable map") {
    const auto top = MapTopology::string_map(3);
    // two rigid groups: observations 0-3 on unit 0, 4-7 on unit 2
    std::vector<std::vector<std::int32_t>> assignments(25, {0, 0, 0, 0, 2, 2, 2, 2});
    const auto set = synthetic_set(top, 8, assignments);

    const auto hist = stab_histogram(set, 0, 51);
    CHECK(hist.pairs_evaluated == 28);
    CHECK(hist.counts.front() == 16);  // 4 x 4 cross-group pairs at stab 0
    CHECK(hist.counts.back() == 12);   // 2 x C(4,2) within-group pairs at stab 1
    for (std::size_t b = 1; b + 1 < hist.counts.size(); ++b) CHECK(hist.counts[b] == 0);
    CHECK(hist.cumulative.back() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hist.mean_b == 25);
}

TEST_CASE("stab_histogram under random assignments stays near the reference") {
    const auto top = MapTopology::grid(7, 7);
    const std::size_t n = 150;  // 11175 pairs
    const int b = 40;
    std::mt19937_64 gen(71);
    std::vector<std::vector<std::int32_t>> assignments(
        static_cast<std::size_t>(b), std::vector<std::int32_t>(n));
    for (auto& rep : assignments)
        for (auto& unit : rep)
            unit = static_cast<std::int32_t>(uniform_index(gen, static_cast<std::uint64_t>(top.units())));
    const auto set = synthetic_set(top, n, assignments);

    const auto hist = stab_histogram(set, 1, 51);
    CHECK(hist.pairs_evaluated == 11175);
    CHECK(hist.p_edge == doctest::Approx(361.0 / 2401.0).epsilon(1e-12));
    CHECK(ks_distance(hist) < 0.05);
}

TEST_CASE("stab_histogram separates an organized map from the reference") {
    const auto sample = gen_gauss(gauss3_spec(60), 83);
    const auto top = MapTopology::string_map(3);
    BootstrapPlan plan;
    plan.replicates = 30;
    plan.master_seed = 87;
    const auto set =
        run_replicates(sample.data, top, quick_schedule(sample.data.size(), top), plan);

    const auto hist = stab_histogram(set, 0, 51);
    CHECK(ks_distance(hist) > 0.5);
}

TEST_CASE("stab_histogram subsampling and undetermined handling") {
    const auto top = MapTopology::string_map(3);
    std::vector<std::vector<std::int32_t>> assignments(10, {0, 1, 2, -1});
    const auto set = synthetic_set(top, 4, assignments);

    const auto hist = stab_histogram(set, 0, 11);
    CHECK(hist.pairs_evaluated == 3);     // pairs among 0,1,2
    CHECK(hist.pairs_undetermined == 3);  // pairs touching observation 3

    PairSubsample sub{2, 5};
    const auto sub_hist = stab_histogram(set, 0, 11, sub);
    CHECK(sub_hist.pair_subsample == 2);
    CHECK(sub_hist.subsample_below_recommended);  // 2 < 10 * 3 units

    // all observations absent: no evaluable pair
    const auto empty = synthetic_set(top, 3, {{-1, -1, -1}});
    CHECK_THROWS_AS(stab_histogram(empty, 0, 11), std::invalid_argument);
}

TEST_CASE("significant_fraction") {
    std::vector<PairStability> pairs;
    for (int i = 0; i < 10; ++i) {
        PairStability p;
        p.radius = 1;
        p.verdict = Verdict::not_significant;
        pairs.push_back(p);
    }
    auto fraction = significant_fraction(pairs);
    CHECK(fraction.frac_marked == 0.0);
    CHECK(fraction.evaluated == 10);

    pairs[0].verdict = Verdict::significant_neighbor;
    pairs[1].verdict = Verdict::significant_non_neighbor;
    pairs[2].verdict = Verdict::undetermined;
    fraction = significant_fraction(pairs);
    CHECK(fraction.evaluated == 9);
    CHECK(fraction.undetermined == 1);
    CHECK(fraction.frac_neighbor == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    CHECK(fraction.frac_non_neighbor == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    CHECK(fraction.frac_marked == doctest::Approx(2.0 / 9.0).epsilon(1e-12));

    pairs[3].radius = 2;
    CHECK_THROWS_AS(significant_fraction(pairs), std::invalid_argument);
    CHECK_THROWS_AS(significant_fraction({}), std::invalid_argument);
}
