#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "somrel/codebook.hpp"
#include "somrel/dataset.hpp"

using namespace somrel;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("somrel_cli_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SOMREL_CLI_PATH) + " " + args + " >/dev/null 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

json slurp_json(const fs::path& p) { return json::parse(slurp(p)); }

std::size_t line_count(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

// Small shared arguments: tiny dataset and schedule so each invocation is
// quick.
const std::string kTinyData = "--dataset gauss1 --points-per-cluster 40 --data-seed 3";
const std::string kTinySchedule = "--steps 2000";

}  // namespace

TEST_CASE("train writes its artifacts and reruns byte-identically") {
    TempDir tmp;
    const auto out = tmp.path / "run1";
    const std::string base = "train " + kTinyData + " --topology string:4 " + kTinySchedule +
                             " --seed 7 --out ";

    REQUIRE(run_cli(base + out.string()) == 0);

    // assignments: one row per observation
    const auto assignments = slurp(out / "assignments.csv");
    CHECK(line_count(assignments) == 40);

    // reported distortion matches a recomputation from the written files
    const auto report = slurp_json(out / "train_report.json");
    const auto dataset = load_csv(out / "dataset.csv");
    const auto centroids = load_csv(out / "codebook.csv");
    Codebook cb;
    cb.topology = MapTopology::string_map(4);
    cb.dim = centroids.dim;
    cb.centroids = centroids.values;
    CHECK(report.at("ss_intra").get<double>() ==
          doctest::Approx(ss_intra(cb, dataset)).epsilon(1e-9));

    const std::vector<std::string> files{"dataset.csv", "codebook.csv", "assignments.csv",
                                         "train_report.json", "resolved_config.json"};
    std::vector<std::string> snapshot;
    for (const auto& name : files) snapshot.push_back(slurp(out / name));

    // a rerun from the emitted config reproduces every file byte for byte
    REQUIRE(run_cli("train --config " + (out / "resolved_config.json").string()) == 0);
    for (std::size_t i = 0; i < files.size(); ++i) CHECK(slurp(out / files[i]) == snapshot[i]);
}

TEST_CASE("cv-sweep single topology yields a single-row TSV") {
    TempDir tmp;
    const auto out = tmp.path / "sweep";
    REQUIRE(run_cli("cv-sweep " + kTinyData + " --topologies string:3 " + kTinySchedule +
                    " --b 6 --seed 5 --out " + out.string()) == 0);

    const auto tsv = slurp(out / "cv_sweep.tsv");
    CHECK(line_count(tsv) == 2);  // header + one row
    CHECK(tsv.rfind("units\ttopology\tcv_percent", 0) == 0);

    const auto report = slurp_json(out / "cv_sweep.json");
    CHECK(report.at("replicate_seeds").size() == 6);
    CHECK(report.at("points").size() == 1);
    CHECK(report.at("config").at("command") == "cv-sweep");
}

TEST_CASE("cv-sweep expands topology ranges") {
    TempDir tmp;
    const auto out = tmp.path / "sweep_range";
    REQUIRE(run_cli("cv-sweep " + kTinyData + " --topologies string:3..5 " + kTinySchedule +
                    " --b 4 --seed 5 --out " + out.string()) == 0);
    CHECK(line_count(slurp(out / "cv_sweep.tsv")) == 4);  // header + 3 sizes
}

TEST_CASE("stab emits a pair table with verdict markers") {
    TempDir tmp;
    const auto out = tmp.path / "stab";
    REQUIRE(run_cli("stab --dataset gauss3 --points-per-cluster 30 --data-seed 11"
                    " --topology string:3 --steps 2000 --b 60 --seed 9"
                    " --radii 0,1 --pairs 0:1,0:45,45:60 --out " +
                    out.string()) == 0);

    const auto tsv = slurp(out / "stab_pairs.tsv");
    CHECK(line_count(tsv) == 4);  // header + 3 pairs
    CHECK(tsv.rfind("pair\ti\tj\tb_ij\tstab_r0\tstab_r1", 0) == 0);

    // co-cluster pair (0,1) must be a significant neighbor at r = 0;
    // cross-cluster pair (0,45) must be a significant non-neighbor.
    std::istringstream lines(tsv);
    std::string header, row_01, row_045;
    std::getline(lines, header);
    std::getline(lines, row_01);
    std::getline(lines, row_045);
    CHECK(row_01.find("*1") != std::string::npos);
    CHECK(row_045.find("*0") != std::string::npos);

    const auto report = slurp_json(out / "stab_pairs.json");
    CHECK(report.at("pairs").size() == 3);
    CHECK(report.at("significant_fractions").size() == 2);
}

TEST_CASE("stab with a single pair produces a one-row table") {
    TempDir tmp;
    const auto out = tmp.path / "stab1";
    REQUIRE(run_cli("stab " + kTinyData + " --topology string:3 " + kTinySchedule +
                    " --b 10 --seed 13 --radii 0 --pairs 2:7 --out " + out.string()) == 0);
    const auto tsv = slurp(out / "stab_pairs.tsv");
    CHECK(line_count(tsv) == 2);
    CHECK(tsv.find("2:7\t2\t7\t") != std::string::npos);
}

TEST_CASE("stab-hist cumulative columns end at one") {
    TempDir tmp;
    const auto out = tmp.path / "hist";
    REQUIRE(run_cli("stab-hist " + kTinyData + " --topology string:3 " + kTinySchedule +
                    " --b 10 --seed 15 --radii 0,1 --bins 21 --out " + out.string()) == 0);

    for (int r : {0, 1}) {
        const auto tsv = slurp(out / ("stab_hist_r" + std::to_string(r) + ".tsv"));
        CHECK(line_count(tsv) == 22);  // header + 21 bins
        std::istringstream lines(tsv);
        std::string line, last;
        std::getline(lines, line);  // header
        while (std::getline(lines, line))
            if (!line.empty()) last = line;
        std::istringstream cells(last);
        std::string lo, hi, count, cum_org, cum_ref;
        std::getline(cells, lo, '\t');
        std::getline(cells, hi, '\t');
        std::getline(cells, count, '\t');
        std::getline(cells, cum_org, '\t');
        std::getline(cells, cum_ref, '\t');
        CHECK(std::abs(std::stod(cum_org) - 1.0) < 1e-9);
        CHECK(std::abs(std::stod(cum_ref) - 1.0) < 1e-9);
    }

    const auto report = slurp_json(out / "stab_hist.json");
    CHECK(report.at("histograms").size() == 2);
}

TEST_CASE("replicate cache is shared between stab and stab-hist") {
    TempDir tmp;
    const auto cache = tmp.path / "cache";
    const auto out1 = tmp.path / "stab";
    const auto out2 = tmp.path / "hist";
    const std::string shared = kTinyData + " --topology string:3 " + kTinySchedule +
                               " --b 8 --seed 21 --replicates-dir " + cache.string();

    REQUIRE(run_cli("stab " + shared + " --radii 0 --pairs 0:1 --out " + out1.string()) == 0);
    REQUIRE(fs::exists(cache / "manifest.json"));
    REQUIRE(run_cli("stab-hist " + shared + " --radii 0 --out " + out2.string()) == 0);

    // a conflicting configuration must be rejected, not silently retrained
    CHECK(run_cli("stab-hist " + kTinyData + " --topology string:3 " + kTinySchedule +
                  " --b 9 --seed 21 --replicates-dir " + cache.string() + " --radii 0 --out " +
                  (tmp.path / "boom").string()) == 2);
}

TEST_CASE("b-sufficiency output shape") {
    TempDir tmp;
    const auto out = tmp.path / "bsuff";
    REQUIRE(run_cli("b-sufficiency " + kTinyData + " --topology string:3 " + kTinySchedule +
                    " --b-values 4,6 --m 3 --seed 23 --out " + out.string()) == 0);
    const auto tsv = slurp(out / "b_sufficiency.tsv");
    CHECK(line_count(tsv) == 3);  // header + 2 B values
    CHECK(tsv.rfind("b\tsigma_cv", 0) == 0);
    const auto report = slurp_json(out / "b_sufficiency.json");
    CHECK(report.at("points").size() == 2);
    CHECK(report.at("points")[0].at("cv_values").size() == 3);
    CHECK(report.at("points")[0].at("trial_seeds").size() == 3);
}

TEST_CASE("exit codes distinguish config, data and parse errors") {
    TempDir tmp;
    // unknown flag: CLI parse error
    CHECK(run_cli("train --no-such-flag") == 2);
    // config error: bad topology
    CHECK(run_cli("train " + kTinyData + " --topology blob:4 --out " +
                  (tmp.path / "a").string()) == 2);
    // config error: missing --out
    CHECK(run_cli("train " + kTinyData + " --topology string:3") == 2);
    // data error: missing csv file
    CHECK(run_cli("train --dataset csv --csv-path " + (tmp.path / "absent.csv").string() +
                  " --topology string:3 --out " + (tmp.path / "b").string()) == 3);
    // config error: --config mixed with other options
    const auto out = tmp.path / "c";
    REQUIRE(run_cli("train " + kTinyData + " --topology string:3 " + kTinySchedule +
                    " --seed 1 --out " + out.string()) == 0);
    CHECK(run_cli("train --config " + (out / "resolved_config.json").string() +
                  " --topology string:4") == 2);
    // config error: config from a different command
    CHECK(run_cli("stab --config " + (out / "resolved_config.json").string()) == 2);
}

TEST_CASE("outputs are independent of the worker count") {
    TempDir tmp;
    const auto out1 = tmp.path / "w1";
    const auto out2 = tmp.path / "w4";
    const std::string base = "cv-sweep " + kTinyData + " --topologies string:3,string:5 " +
                             kTinySchedule + " --b 6 --seed 29 ";
    REQUIRE(run_cli(base + "--workers 1 --out " + out1.string()) == 0);
    REQUIRE(run_cli(base + "--workers 4 --out " + out2.string()) == 0);
    CHECK(slurp(out1 / "cv_sweep.tsv") == slurp(out2 / "cv_sweep.tsv"));
}
