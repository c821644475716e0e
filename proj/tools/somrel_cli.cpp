// somrel command-line front end: train, cv-sweep, stab, stab-hist and
// b-sufficiency subcommands over generated or CSV datasets. Every command
// writes a resolved_config.json sufficient to re-execute it bit-identically.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "somrel/bootstrap.hpp"
#include "somrel/dataset.hpp"
#include "somrel/generators.hpp"
#include "somrel/reliability.hpp"
#include "somrel/rng.hpp"
#include "somrel/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct DatasetConfig {
    std::string kind = "gauss1";  // gauss1|gauss2|gauss3|horseshoe|cube|csv
    std::size_t points_per_cluster = 500;
    std::size_t count = 1000;
    int cube_dim = 3;
    double noise = 0.0;
    std::uint64_t seed = 1;
    std::string csv_path;
    bool csv_header = false;
    std::string csv_delimiter = ",";
    std::string csv_columns;  // "0,2-5"; empty selects all
    bool apply_zscore = false;
};

struct ScheduleConfig {
    long long steps = 0;     // 0: auto (50 per observation)
    double alpha_start = 0.5;
    double alpha_end = 0.01;
    int radius_start = -1;   // -1: auto (half the larger map extent)
    int radius_end = 0;
};

struct PlanConfig {
    int replicates = 100;
    std::string mode = "lb";  // cb|lb|lpb
    double perturbation_scale = 0.0;
    std::uint64_t seed = 1;
    std::string eval_target = "bootstrap-sample";  // or "original"
};

struct RunConfig {
    std::string command;
    DatasetConfig dataset;
    std::string topology = "string:9";
    std::vector<std::string> topologies;  // cv-sweep only
    ScheduleConfig schedule;
    PlanConfig plan;
    std::vector<int> radii{0, 1, 2};
    int bins = 51;
    double level = 0.05;
    bool edge_corrected_pairs = false;
    std::string pairs = "all";  // "all" | "subsample" | explicit "i:j,k:l"
    std::size_t pair_subsample = 0;
    std::uint64_t subsample_seed = 1;
    std::vector<int> b_values{20, 40, 60, 80, 100, 120, 140, 160, 180, 200};
    int repeats = 30;
    std::string out_dir;
    std::string replicates_dir;
    int workers = 0;  // 0: hardware concurrency
};

json to_json(const DatasetConfig& d) {
    return json{{"kind", d.kind},
                {"points_per_cluster", d.points_per_cluster},
                {"count", d.count},
                {"cube_dim", d.cube_dim},
                {"noise", d.noise},
                {"seed", d.seed},
                {"csv_path", d.csv_path},
                {"csv_header", d.csv_header},
                {"csv_delimiter", d.csv_delimiter},
                {"csv_columns", d.csv_columns},
                {"zscore", d.apply_zscore}};
}

DatasetConfig dataset_from_json(const json& j) {
    DatasetConfig d;
    d.kind = j.at("kind").get<std::string>();
    d.points_per_cluster = j.at("points_per_cluster").get<std::size_t>();
    d.count = j.at("count").get<std::size_t>();
    d.cube_dim = j.at("cube_dim").get<int>();
    d.noise = j.at("noise").get<double>();
    d.seed = j.at("seed").get<std::uint64_t>();
    d.csv_path = j.at("csv_path").get<std::string>();
    d.csv_header = j.at("csv_header").get<bool>();
    d.csv_delimiter = j.at("csv_delimiter").get<std::string>();
    d.csv_columns = j.at("csv_columns").get<std::string>();
    d.apply_zscore = j.at("zscore").get<bool>();
    return d;
}

json to_json(const ScheduleConfig& s) {
    return json{{"steps", s.steps},
                {"alpha_start", s.alpha_start},
                {"alpha_end", s.alpha_end},
                {"radius_start", s.radius_start},
                {"radius_end", s.radius_end}};
}

ScheduleConfig schedule_from_json(const json& j) {
    ScheduleConfig s;
    s.steps = j.at("steps").get<long long>();
    s.alpha_start = j.at("alpha_start").get<double>();
    s.alpha_end = j.at("alpha_end").get<double>();
    s.radius_start = j.at("radius_start").get<int>();
    s.radius_end = j.at("radius_end").get<int>();
    return s;
}

json to_json(const PlanConfig& p) {
    return json{{"replicates", p.replicates},
                {"mode", p.mode},
                {"perturbation_scale", p.perturbation_scale},
                {"seed", p.seed},
                {"eval_target", p.eval_target}};
}

PlanConfig plan_from_json(const json& j) {
    PlanConfig p;
    p.replicates = j.at("replicates").get<int>();
    p.mode = j.at("mode").get<std::string>();
    p.perturbation_scale = j.at("perturbation_scale").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.eval_target = j.at("eval_target").get<std::string>();
    return p;
}

json to_json(const RunConfig& c) {
    return json{{"schema_version", kSchemaVersion},
                {"command", c.command},
                {"dataset", to_json(c.dataset)},
                {"topology", c.topology},
                {"topologies", c.topologies},
                {"schedule", to_json(c.schedule)},
                {"plan", to_json(c.plan)},
                {"radii", c.radii},
                {"bins", c.bins},
                {"level", c.level},
                {"edge_corrected_pairs", c.edge_corrected_pairs},
                {"pairs", c.pairs},
                {"pair_subsample", c.pair_subsample},
                {"subsample_seed", c.subsample_seed},
                {"b_values", c.b_values},
                {"repeats", c.repeats},
                {"out_dir", c.out_dir},
                {"replicates_dir", c.replicates_dir},
                {"workers", c.workers}};
}

RunConfig config_from_json(const json& j) {
    if (j.at("schema_version").get<int>() != kSchemaVersion)
        throw std::invalid_argument("unsupported config schema version");
    RunConfig c;
    c.command = j.at("command").get<std::string>();
    c.dataset = dataset_from_json(j.at("dataset"));
    c.topology = j.at("topology").get<std::string>();
    c.topologies = j.at("topologies").get<std::vector<std::string>>();
    c.schedule = schedule_from_json(j.at("schedule"));
    c.plan = plan_from_json(j.at("plan"));
    c.radii = j.at("radii").get<std::vector<int>>();
    c.bins = j.at("bins").get<int>();
    c.level = j.at("level").get<double>();
    c.edge_corrected_pairs = j.at("edge_corrected_pairs").get<bool>();
    c.pairs = j.at("pairs").get<std::string>();
    c.pair_subsample = j.at("pair_subsample").get<std::size_t>();
    c.subsample_seed = j.at("subsample_seed").get<std::uint64_t>();
    c.b_values = j.at("b_values").get<std::vector<int>>();
    c.repeats = j.at("repeats").get<int>();
    c.out_dir = j.at("out_dir").get<std::string>();
    c.replicates_dir = j.at("replicates_dir").get<std::string>();
    c.workers = j.at("workers").get<int>();
    return c;
}

// ---------------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------------

somrel::MapTopology parse_topology(const std::string& token) {
    const auto colon = token.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("topology must look like string:9 or grid:7x7");
    const std::string kind = token.substr(0, colon);
    const std::string rest = token.substr(colon + 1);
    try {
        if (kind == "string") return somrel::MapTopology::string_map(std::stoi(rest));
        if (kind == "grid") {
            const auto x = rest.find('x');
            if (x == std::string::npos) throw std::invalid_argument("");
            return somrel::MapTopology::grid(std::stoi(rest.substr(0, x)),
                                             std::stoi(rest.substr(x + 1)));
        }
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("bad topology '" + token + "'");
    }
    throw std::invalid_argument("unknown topology kind '" + kind + "'");
}

// "string:3..15" expands to string:3, string:4, ..., string:15;
// "grid:4x4..9x9" walks the diagonal 4x4, 5x5, ..., 9x9.
std::vector<somrel::MapTopology> parse_topologies(const std::vector<std::string>& tokens) {
    std::vector<somrel::MapTopology> out;
    for (const auto& token : tokens) {
        const auto dots = token.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_topology(token));
            continue;
        }
        const auto first = parse_topology(token.substr(0, dots));
        const std::string tail = token.substr(dots + 2);
        if (first.kind == somrel::MapKind::String) {
            const int last = std::stoi(tail);
            if (last < first.cols) throw std::invalid_argument("empty topology range '" + token + "'");
            for (int n = first.cols; n <= last; ++n)
                out.push_back(somrel::MapTopology::string_map(n));
        } else {
            const auto x = tail.find('x');
            if (x == std::string::npos) throw std::invalid_argument("bad topology range '" + token + "'");
            const int last_rows = std::stoi(tail.substr(0, x));
            const int last_cols = std::stoi(tail.substr(x + 1));
            if (last_rows - first.rows != last_cols - first.cols || last_rows < first.rows)
                throw std::invalid_argument("grid ranges must walk the diagonal, e.g. 4x4..9x9");
            for (int i = 0; i <= last_rows - first.rows; ++i)
                out.push_back(somrel::MapTopology::grid(first.rows + i, first.cols + i));
        }
    }
    return out;
}

std::vector<int> parse_columns(const std::string& text) {
    std::vector<int> columns;
    if (text.empty()) return columns;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        const std::string part = text.substr(start, end - start);
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            columns.push_back(std::stoi(part));
        } else {
            const int lo = std::stoi(part.substr(0, dash));
            const int hi = std::stoi(part.substr(dash + 1));
            if (hi < lo) throw std::invalid_argument("bad column range '" + part + "'");
            for (int c = lo; c <= hi; ++c) columns.push_back(c);
        }
        start = end + 1;
        if (end == text.size()) break;
    }
    return columns;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> parse_pair_list(const std::string& text,
                                                                     std::size_t n) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        const std::string part = text.substr(start, end - start);
        const auto colon = part.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("pair list entries must look like i:j");
        const long long i = std::stoll(part.substr(0, colon));
        const long long j = std::stoll(part.substr(colon + 1));
        if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n)
            throw std::invalid_argument("pair index out of range in '" + part + "'");
        if (i == j) throw std::invalid_argument("pair indices must differ in '" + part + "'");
        pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        start = end + 1;
        if (end == text.size()) break;
    }
    if (pairs.empty()) throw std::invalid_argument("empty pair list");
    return pairs;
}

// ---------------------------------------------------------------------------
// Resolution
// ---------------------------------------------------------------------------

somrel::Dataset build_dataset(const DatasetConfig& cfg) {
    somrel::Dataset data;
    if (cfg.kind == "gauss1")
        data = somrel::gen_gauss(somrel::gauss1_spec(cfg.points_per_cluster), cfg.seed).data;
    else if (cfg.kind == "gauss2")
        data = somrel::gen_gauss(somrel::gauss2_spec(cfg.points_per_cluster), cfg.seed).data;
    else if (cfg.kind == "gauss3")
        data = somrel::gen_gauss(somrel::gauss3_spec(cfg.points_per_cluster), cfg.seed).data;
    else if (cfg.kind == "horseshoe")
        data = somrel::gen_horseshoe({.count = cfg.count, .noise = cfg.noise}, cfg.seed);
    else if (cfg.kind == "cube")
        data = somrel::gen_uniform_cube(cfg.count, cfg.cube_dim, cfg.seed);
    else if (cfg.kind == "csv") {
        if (cfg.csv_path.empty()) throw std::invalid_argument("csv dataset needs --csv-path");
        if (cfg.csv_delimiter.size() != 1)
            throw std::invalid_argument("csv delimiter must be a single character");
        somrel::CsvOptions opts;
        opts.header = cfg.csv_header;
        opts.delimiter = cfg.csv_delimiter[0];
        opts.columns = parse_columns(cfg.csv_columns);
        data = somrel::load_csv(cfg.csv_path, opts);
    } else {
        throw std::invalid_argument("unknown dataset kind '" + cfg.kind + "'");
    }
    if (cfg.apply_zscore) data = somrel::zscore(data);
    return data;
}

somrel::TrainingSchedule resolve_schedule(const ScheduleConfig& cfg, std::size_t n,
                                          const somrel::MapTopology& topology) {
    somrel::TrainingSchedule s = somrel::default_schedule(n, topology);
    if (cfg.steps > 0) s.total_steps = cfg.steps;
    s.alpha_start = cfg.alpha_start;
    s.alpha_end = cfg.alpha_end;
    if (cfg.radius_start >= 0) s.radius_start = cfg.radius_start;
    s.radius_end = cfg.radius_end;
    somrel::validate_schedule(s);
    return s;
}

somrel::BootstrapPlan resolve_plan(const PlanConfig& cfg) {
    somrel::BootstrapPlan plan;
    plan.replicates = cfg.replicates;
    if (cfg.mode == "cb")
        plan.mode = somrel::BootstrapMode::common;
    else if (cfg.mode == "lb")
        plan.mode = somrel::BootstrapMode::local;
    else if (cfg.mode == "lpb")
        plan.mode = somrel::BootstrapMode::local_perturbed;
    else
        throw std::invalid_argument("bootstrap mode must be cb, lb or lpb");
    plan.perturbation_scale = cfg.perturbation_scale;
    plan.master_seed = cfg.seed;
    if (cfg.eval_target == "bootstrap-sample")
        plan.eval_target = somrel::SsEvalTarget::bootstrap_sample;
    else if (cfg.eval_target == "original")
        plan.eval_target = somrel::SsEvalTarget::original;
    else
        throw std::invalid_argument("eval target must be bootstrap-sample or original");
    somrel::validate_plan(plan);
    return plan;
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw somrel::DataError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw somrel::DataError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_resolved_config(const RunConfig& cfg) {
    write_json(fs::path(cfg.out_dir) / "resolved_config.json", to_json(cfg));
}

json schedule_report(const somrel::TrainingSchedule& s) {
    return json{{"total_steps", s.total_steps},
                {"alpha_start", s.alpha_start},
                {"alpha_end", s.alpha_end},
                {"radius_start", s.radius_start},
                {"radius_end", s.radius_end}};
}

std::string verdict_suffix(somrel::Verdict v) {
    switch (v) {
        case somrel::Verdict::significant_neighbor: return "*1";
        case somrel::Verdict::significant_non_neighbor: return "*0";
        default: return "";
    }
}

std::string verdict_name(somrel::Verdict v) {
    switch (v) {
        case somrel::Verdict::significant_neighbor: return "significant-neighbor";
        case somrel::Verdict::significant_non_neighbor: return "significant-non-neighbor";
        case somrel::Verdict::not_significant: return "not-significant";
        case somrel::Verdict::undetermined: return "undetermined";
    }
    return "unknown";
}

// Reuse a cached replicate set when one is present and compatible;
// otherwise run the bootstrap and cache it if a cache directory is set.
somrel::ReplicateSet obtain_replicates(const RunConfig& cfg, const somrel::Dataset& data,
                                       const somrel::MapTopology& topology,
                                       const somrel::TrainingSchedule& schedule,
                                       const somrel::BootstrapPlan& plan) {
    const bool cache = !cfg.replicates_dir.empty();
    const fs::path dir = cfg.replicates_dir;
    if (cache && fs::exists(dir / "manifest.json")) {
        somrel::ReplicateSet set = somrel::load_replicate_set(dir);
        if (!(set.topology == topology) || set.plan.replicates != plan.replicates ||
            set.plan.master_seed != plan.master_seed || set.plan.mode != plan.mode ||
            set.plan.perturbation_scale != plan.perturbation_scale ||
            set.plan.eval_target != plan.eval_target ||
            set.schedule.total_steps != schedule.total_steps ||
            set.data.values != data.values)
            throw std::invalid_argument("cached replicate set in '" + dir.string() +
                                        "' does not match the requested configuration");
        return set;
    }
    somrel::ReplicateSet set =
        somrel::run_replicates(data, topology, schedule, plan, resolve_workers(cfg.workers));
    if (cache) somrel::save_replicate_set(set, dir);
    return set;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_train(const RunConfig& cfg) {
    const somrel::Dataset data = build_dataset(cfg.dataset);
    const auto topology = parse_topology(cfg.topology);
    const auto schedule = resolve_schedule(cfg.schedule, data.size(), topology);
    fs::create_directories(cfg.out_dir);

    const auto initial = somrel::init_codebook(data, topology, somrel::derive_seed(cfg.plan.seed, 0));
    const auto trained = somrel::train_som(data, initial, schedule, somrel::derive_seed(cfg.plan.seed, 1));
    const double distortion = somrel::ss_intra(trained, data);

    somrel::save_csv(data, fs::path(cfg.out_dir) / "dataset.csv");
    {
        somrel::Dataset centroids;
        centroids.dim = trained.dim;
        centroids.values = trained.centroids;
        somrel::save_csv(centroids, fs::path(cfg.out_dir) / "codebook.csv");
    }
    {
        std::string text;
        for (std::size_t i = 0; i < data.size(); ++i) {
            text += std::to_string(i);
            text += ',';
            text += std::to_string(somrel::best_matching_unit(trained, data.row(i)));
            text += '\n';
        }
        write_text(fs::path(cfg.out_dir) / "assignments.csv", text);
    }
    write_json(fs::path(cfg.out_dir) / "train_report.json",
               json{{"schema_version", kSchemaVersion},
                    {"topology", topology.label()},
                    {"units", topology.units()},
                    {"observations", data.size()},
                    {"dim", data.dim},
                    {"schedule", schedule_report(schedule)},
                    {"seed", cfg.plan.seed},
                    {"ss_intra", distortion}});
    write_resolved_config(cfg);
    std::cout << "ss_intra " << format_double(distortion) << "\n";
    return kExitOk;
}

int cmd_cv_sweep(const RunConfig& cfg) {
    const somrel::Dataset data = build_dataset(cfg.dataset);
    const auto topologies =
        parse_topologies(cfg.topologies.empty() ? std::vector<std::string>{cfg.topology}
                                                : cfg.topologies);
    const auto plan = resolve_plan(cfg.plan);
    fs::create_directories(cfg.out_dir);

    std::string tsv = "units\ttopology\tcv_percent\tmean_ss_intra\tstddev_ss_intra\n";
    json points = json::array();
    for (const auto& topology : topologies) {
        const auto schedule = resolve_schedule(cfg.schedule, data.size(), topology);
        const auto sweep = somrel::cv_sweep(data, {topology}, schedule, plan,
                                            resolve_workers(cfg.workers));
        const auto& report = sweep[0].report;
        tsv += std::to_string(topology.units()) + "\t" + topology.label() + "\t" +
               format_double(report.cv) + "\t" + format_double(report.mean) + "\t" +
               format_double(report.stddev) + "\n";
        points.push_back(json{{"topology", topology.label()},
                              {"units", topology.units()},
                              {"cv_percent", report.cv},
                              {"mean_ss_intra", report.mean},
                              {"stddev_ss_intra", report.stddev},
                              {"ss_intra_values", report.values},
                              {"schedule", schedule_report(schedule)}});
    }

    std::vector<std::uint64_t> replicate_seeds;
    for (int b = 0; b < plan.replicates; ++b)
        replicate_seeds.push_back(somrel::replicate_seed(plan.master_seed, static_cast<std::uint32_t>(b)));

    write_text(fs::path(cfg.out_dir) / "cv_sweep.tsv", tsv);
    write_json(fs::path(cfg.out_dir) / "cv_sweep.json",
               json{{"schema_version", kSchemaVersion},
                    {"config", to_json(cfg)},
                    {"replicate_seeds", replicate_seeds},
                    {"points", points}});
    write_resolved_config(cfg);
    std::cout << "cv-sweep: " << topologies.size() << " map sizes written to " << cfg.out_dir
              << "\n";
    return kExitOk;
}

int cmd_stab(const RunConfig& cfg) {
    const somrel::Dataset data = build_dataset(cfg.dataset);
    const auto topology = parse_topology(cfg.topology);
    const auto schedule = resolve_schedule(cfg.schedule, data.size(), topology);
    const auto plan = resolve_plan(cfg.plan);
    if (cfg.radii.empty()) throw std::invalid_argument("stab needs at least one radius");
    fs::create_directories(cfg.out_dir);

    const auto set = obtain_replicates(cfg, data, topology, schedule, plan);

    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    if (cfg.pairs == "all") {
        const std::size_t n = data.size();
        for (std::uint32_t i = 0; i + 1 < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    } else if (cfg.pairs == "subsample") {
        if (cfg.pair_subsample == 0)
            throw std::invalid_argument("--pairs subsample needs --pair-subsample > 0");
        pairs = somrel::draw_pair_subsample(data.size(), cfg.pair_subsample, cfg.subsample_seed);
        if (pairs.size() < 10 * static_cast<std::size_t>(topology.units()))
            std::cerr << "warning: pair subsample " << pairs.size()
                      << " is below 10x the unit count (" << 10 * topology.units() << ")\n";
    } else {
        pairs = parse_pair_list(cfg.pairs, data.size());
    }

    const somrel::SignificanceOptions options{cfg.level, cfg.edge_corrected_pairs};

    std::string tsv = "pair\ti\tj\tb_ij";
    for (int r : cfg.radii) tsv += "\tstab_r" + std::to_string(r);
    tsv += "\n";
    json rows = json::array();
    std::vector<std::vector<somrel::PairStability>> per_radius(cfg.radii.size());
    for (const auto& [i, j] : pairs) {
        std::string line = std::to_string(i) + ":" + std::to_string(j) + "\t" + std::to_string(i) +
                           "\t" + std::to_string(j);
        json row{{"i", i}, {"j", j}};
        json by_radius = json::array();
        bool first = true;
        for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
            const auto pair = somrel::stab(set, i, j, cfg.radii[ri], options);
            per_radius[ri].push_back(pair);
            if (first) {
                line += "\t" + std::to_string(pair.b_ij);
                row["b_ij"] = pair.b_ij;
                first = false;
            }
            line += "\t" + (pair.stab ? format_double(*pair.stab) + verdict_suffix(pair.verdict)
                                      : std::string("NA"));
            by_radius.push_back(json{{"r", cfg.radii[ri]},
                                     {"stab", pair.stab ? json(*pair.stab) : json()},
                                     {"successes", pair.successes},
                                     {"verdict", verdict_name(pair.verdict)}});
        }
        row["by_radius"] = std::move(by_radius);
        rows.push_back(std::move(row));
        tsv += line + "\n";
    }

    json fractions = json::array();
    for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
        const auto fraction = somrel::significant_fraction(per_radius[ri]);
        fractions.push_back(json{{"r", cfg.radii[ri]},
                                 {"frac_marked", fraction.frac_marked},
                                 {"frac_neighbor", fraction.frac_neighbor},
                                 {"frac_non_neighbor", fraction.frac_non_neighbor},
                                 {"evaluated", fraction.evaluated},
                                 {"undetermined", fraction.undetermined}});
    }

    write_text(fs::path(cfg.out_dir) / "stab_pairs.tsv", tsv);
    write_json(fs::path(cfg.out_dir) / "stab_pairs.json",
               json{{"schema_version", kSchemaVersion},
                    {"config", to_json(cfg)},
                    {"significant_fractions", fractions},
                    {"pairs", rows}});
    write_resolved_config(cfg);
    std::cout << "stab: " << pairs.size() << " pairs x " << cfg.radii.size()
              << " radii written to " << cfg.out_dir << "\n";
    return kExitOk;
}

int cmd_stab_hist(const RunConfig& cfg) {
    const somrel::Dataset data = build_dataset(cfg.dataset);
    const auto topology = parse_topology(cfg.topology);
    const auto schedule = resolve_schedule(cfg.schedule, data.size(), topology);
    const auto plan = resolve_plan(cfg.plan);
    if (cfg.radii.empty()) throw std::invalid_argument("stab-hist needs at least one radius");
    fs::create_directories(cfg.out_dir);

    const auto set = obtain_replicates(cfg, data, topology, schedule, plan);

    std::optional<somrel::PairSubsample> subsample;
    if (cfg.pair_subsample > 0)
        subsample = somrel::PairSubsample{cfg.pair_subsample, cfg.subsample_seed};

    json summaries = json::array();
    for (int r : cfg.radii) {
        const auto hist = somrel::stab_histogram(set, r, cfg.bins, subsample);
        if (hist.subsample_below_recommended)
            std::cerr << "warning: pair subsample is below 10x the unit count\n";

        std::string tsv = "bin_low\tbin_high\tcount\tcumulative_organized\tcumulative_reference\n";
        for (int b = 0; b < hist.bins; ++b) {
            const double lo = static_cast<double>(b) / hist.bins;
            const double hi = static_cast<double>(b + 1) / hist.bins;
            tsv += format_double(lo) + "\t" + format_double(hi) + "\t" +
                   std::to_string(hist.counts[static_cast<std::size_t>(b)]) + "\t" +
                   format_double(hist.cumulative[static_cast<std::size_t>(b)]) + "\t" +
                   format_double(hist.reference_cumulative[static_cast<std::size_t>(b)]) + "\n";
        }
        write_text(fs::path(cfg.out_dir) / ("stab_hist_r" + std::to_string(r) + ".tsv"), tsv);

        summaries.push_back(json{{"r", r},
                                 {"bins", hist.bins},
                                 {"pairs_evaluated", hist.pairs_evaluated},
                                 {"pairs_undetermined", hist.pairs_undetermined},
                                 {"mean_b", hist.mean_b},
                                 {"p_edge", hist.p_edge},
                                 {"ks_distance", somrel::ks_distance(hist)},
                                 {"pair_subsample",
                                  hist.pair_subsample ? json(*hist.pair_subsample) : json()}});
    }

    write_json(fs::path(cfg.out_dir) / "stab_hist.json",
               json{{"schema_version", kSchemaVersion},
                    {"config", to_json(cfg)},
                    {"histograms", summaries}});
    write_resolved_config(cfg);
    std::cout << "stab-hist: " << cfg.radii.size() << " radii written to " << cfg.out_dir << "\n";
    return kExitOk;
}

int cmd_b_sufficiency(const RunConfig& cfg) {
    const somrel::Dataset data = build_dataset(cfg.dataset);
    const auto topology = parse_topology(cfg.topology);
    const auto schedule = resolve_schedule(cfg.schedule, data.size(), topology);
    if (cfg.b_values.empty()) throw std::invalid_argument("b-sufficiency needs --b-values");
    fs::create_directories(cfg.out_dir);

    const auto points =
        somrel::b_sufficiency(data, topology, schedule, cfg.b_values, cfg.repeats, cfg.plan.seed,
                              resolve_workers(cfg.workers));

    std::string tsv = "b\tsigma_cv\n";
    json rows = json::array();
    for (const auto& point : points) {
        tsv += std::to_string(point.replicates) + "\t" + format_double(point.sigma_cv) + "\n";
        rows.push_back(json{{"b", point.replicates},
                            {"sigma_cv", point.sigma_cv},
                            {"cv_values", point.cv_values},
                            {"trial_seeds", point.trial_seeds}});
    }
    write_text(fs::path(cfg.out_dir) / "b_sufficiency.tsv", tsv);
    write_json(fs::path(cfg.out_dir) / "b_sufficiency.json",
               json{{"schema_version", kSchemaVersion},
                    {"config", to_json(cfg)},
                    {"points", rows}});
    write_resolved_config(cfg);
    std::cout << "b-sufficiency: " << points.size() << " B values written to " << cfg.out_dir
              << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// Wiring
// ---------------------------------------------------------------------------

struct CommandState {
    CLI::App* app = nullptr;
    std::string config_path;
    CLI::Option* config_option = nullptr;
};

void add_dataset_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--dataset", cfg.dataset.kind,
                    "dataset kind: gauss1|gauss2|gauss3|horseshoe|cube|csv");
    cmd->add_option("--points-per-cluster", cfg.dataset.points_per_cluster,
                    "points per cluster for gauss datasets");
    cmd->add_option("--count", cfg.dataset.count, "point count for horseshoe/cube");
    cmd->add_option("--cube-dim", cfg.dataset.cube_dim, "dimension for the cube dataset");
    cmd->add_option("--noise", cfg.dataset.noise, "transverse noise for the horseshoe");
    cmd->add_option("--data-seed", cfg.dataset.seed, "generation seed");
    cmd->add_option("--csv-path", cfg.dataset.csv_path, "CSV file to load");
    cmd->add_flag("--csv-header", cfg.dataset.csv_header, "skip a header row");
    cmd->add_option("--csv-delimiter", cfg.dataset.csv_delimiter, "CSV delimiter character");
    cmd->add_option("--csv-columns", cfg.dataset.csv_columns,
                    "columns to keep, e.g. 1-7 or 0,2,5 (default all)");
    cmd->add_flag("--zscore", cfg.dataset.apply_zscore, "standardize columns before use");
}

void add_schedule_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--steps", cfg.schedule.steps, "training steps (0 = 50 per observation)");
    cmd->add_option("--alpha-start", cfg.schedule.alpha_start, "initial learning rate");
    cmd->add_option("--alpha-end", cfg.schedule.alpha_end, "final learning rate");
    cmd->add_option("--radius-start", cfg.schedule.radius_start,
                    "initial neighborhood radius (-1 = half the map extent)");
    cmd->add_option("--radius-end", cfg.schedule.radius_end, "final neighborhood radius");
}

void add_plan_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--b", cfg.plan.replicates, "bootstrap replicates");
    cmd->add_option("--mode", cfg.plan.mode, "bootstrap mode: cb|lb|lpb");
    cmd->add_option("--perturbation-scale", cfg.plan.perturbation_scale,
                    "LPB noise as a fraction of per-column stddev");
    cmd->add_option("--seed", cfg.plan.seed, "master seed");
    cmd->add_option("--eval-target", cfg.plan.eval_target,
                    "where SSIntra is evaluated: bootstrap-sample|original");
}

void add_common_options(CLI::App* cmd, RunConfig& cfg, CommandState& state) {
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--workers", cfg.workers, "worker threads (0 = hardware)");
    cmd->add_option("--replicates-dir", cfg.replicates_dir,
                    "cache directory for trained replicate sets");
    state.config_option =
        cmd->add_option("--config", state.config_path, "re-execute from a resolved config file");
}

// With --config, every value comes from the file; mixing it with other
// options is rejected so there is never an ambiguous resolution.
void apply_config_file(CommandState& state, RunConfig& cfg, const std::string& expected_command) {
    if (state.config_path.empty()) {
        if (cfg.out_dir.empty()) throw std::invalid_argument("--out is required");
        return;
    }
    for (const CLI::Option* opt : state.app->get_options())
        if (opt != state.config_option && opt->count() > 0 && opt->get_name() != "--help")
            throw std::invalid_argument("--config cannot be combined with other options");
    std::ifstream in(state.config_path);
    if (!in) throw somrel::DataError("cannot open config '" + state.config_path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw somrel::DataError("config parse error: " + std::string(e.what()));
    }
    try {
        cfg = config_from_json(j);
    } catch (const json::exception& e) {
        throw std::invalid_argument("config field error: " + std::string(e.what()));
    }
    if (cfg.command != expected_command)
        throw std::invalid_argument("config file was emitted by '" + cfg.command +
                                    "', not by '" + expected_command + "'");
    if (cfg.out_dir.empty()) throw std::invalid_argument("config lacks out_dir");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reliability statistics for self-organizing maps"};
    app.require_subcommand(1);

    RunConfig cfg;
    CommandState train_state, sweep_state, stab_state, hist_state, bsuff_state;

    CLI::App* train = app.add_subcommand("train", "train one SOM and report its distortion");
    train->add_option("--topology", cfg.topology, "map layout, e.g. string:9 or grid:7x7");
    add_dataset_options(train, cfg);
    add_schedule_options(train, cfg);
    train->add_option("--seed", cfg.plan.seed, "training seed");
    train_state.app = train;
    add_common_options(train, cfg, train_state);

    CLI::App* sweep = app.add_subcommand("cv-sweep", "CV(SSIntra) against the number of units");
    sweep->add_option("--topologies", cfg.topologies,
                      "topology list; ranges allowed, e.g. string:3..15")
        ->delimiter(',');
    add_dataset_options(sweep, cfg);
    add_schedule_options(sweep, cfg);
    add_plan_options(sweep, cfg);
    sweep_state.app = sweep;
    add_common_options(sweep, cfg, sweep_state);

    CLI::App* stab_cmd = app.add_subcommand("stab", "pair neighborhood stability table");
    stab_cmd->add_option("--topology", cfg.topology, "map layout");
    stab_cmd->add_option("--radii", cfg.radii, "neighborhood radii")->delimiter(',');
    stab_cmd->add_option("--pairs", cfg.pairs, "\"all\", \"subsample\" or explicit i:j,k:l");
    stab_cmd->add_option("--pair-subsample", cfg.pair_subsample, "pair count when subsampling");
    stab_cmd->add_option("--subsample-seed", cfg.subsample_seed, "pair subsample seed");
    stab_cmd->add_option("--level", cfg.level, "significance level");
    stab_cmd->add_flag("--edge-corrected-pairs", cfg.edge_corrected_pairs,
                       "use the edge-corrected null probability per pair");
    add_dataset_options(stab_cmd, cfg);
    add_schedule_options(stab_cmd, cfg);
    add_plan_options(stab_cmd, cfg);
    stab_state.app = stab_cmd;
    add_common_options(stab_cmd, cfg, stab_state);

    CLI::App* hist = app.add_subcommand("stab-hist", "stability histograms vs the unorganized map");
    hist->add_option("--topology", cfg.topology, "map layout");
    hist->add_option("--radii", cfg.radii, "neighborhood radii")->delimiter(',');
    hist->add_option("--bins", cfg.bins, "histogram bins on [0,1]");
    hist->add_option("--pair-subsample", cfg.pair_subsample,
                     "evaluate only this many random pairs (0 = all)");
    hist->add_option("--subsample-seed", cfg.subsample_seed, "pair subsample seed");
    add_dataset_options(hist, cfg);
    add_schedule_options(hist, cfg);
    add_plan_options(hist, cfg);
    hist_state.app = hist;
    add_common_options(hist, cfg, hist_state);

    CLI::App* bsuff = app.add_subcommand("b-sufficiency", "spread of CV(SSIntra) against B");
    bsuff->add_option("--topology", cfg.topology, "map layout");
    bsuff->add_option("--b-values", cfg.b_values, "replicate counts to probe")->delimiter(',');
    bsuff->add_option("--m", cfg.repeats, "repeats per B value");
    bsuff->add_option("--seed", cfg.plan.seed, "base seed");
    add_dataset_options(bsuff, cfg);
    add_schedule_options(bsuff, cfg);
    bsuff_state.app = bsuff;
    add_common_options(bsuff, cfg, bsuff_state);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (train->parsed()) {
            cfg.command = "train";
            apply_config_file(train_state, cfg, "train");
            return cmd_train(cfg);
        }
        if (sweep->parsed()) {
            cfg.command = "cv-sweep";
            apply_config_file(sweep_state, cfg, "cv-sweep");
            return cmd_cv_sweep(cfg);
        }
        if (stab_cmd->parsed()) {
            cfg.command = "stab";
            apply_config_file(stab_state, cfg, "stab");
            return cmd_stab(cfg);
        }
        if (hist->parsed()) {
            cfg.command = "stab-hist";
            apply_config_file(hist_state, cfg, "stab-hist");
            return cmd_stab_hist(cfg);
        }
        if (bsuff->parsed()) {
            cfg.command = "b-sufficiency";
            apply_config_file(bsuff_state, cfg, "b-sufficiency");
            return cmd_b_sufficiency(cfg);
        }
        std::cerr << "error: no command selected\n";
        return kExitConfig;
    } catch (const somrel::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const somrel::DegenerateDistortionError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
