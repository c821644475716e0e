#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "somrel/bootstrap.hpp"

namespace somrel {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

std::string mode_name(BootstrapMode mode) {
    switch (mode) {
        case BootstrapMode::common: return "cb";
        case BootstrapMode::local: return "lb";
        case BootstrapMode::local_perturbed: return "lpb";
    }
    throw std::invalid_argument("unknown bootstrap mode");
}

BootstrapMode mode_from_name(const std::string& name) {
    if (name == "cb") return BootstrapMode::common;
    if (name == "lb") return BootstrapMode::local;
    if (name == "lpb") return BootstrapMode::local_perturbed;
    throw DataError("manifest: unknown bootstrap mode '" + name + "'");
}

void write_matrix_csv(const std::filesystem::path& path, const double* values, std::size_t rows,
                      std::size_t cols) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    std::string line;
    char buf[32];
    for (std::size_t i = 0; i < rows; ++i) {
        line.clear();
        for (std::size_t k = 0; k < cols; ++k) {
            if (k > 0) line.push_back(',');
            const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), values[i * cols + k]);
            (void)ec;
            line.append(buf, ptr);
        }
        line.push_back('\n');
        out << line;
    }
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::vector<double> read_matrix_csv(const std::filesystem::path& path, std::size_t cols) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t start = 0;
        std::size_t fields = 0;
        while (start <= line.size()) {
            std::size_t end = line.find(',', start);
            if (end == std::string::npos) end = line.size();
            std::string_view cell(line.data() + start, end - start);
            while (!cell.empty() && cell.back() == '\r') cell.remove_suffix(1);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size())
                throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad numeric cell");
            values.push_back(v);
            ++fields;
            start = end + 1;
            if (end == line.size()) break;
        }
        if (fields != cols)
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(cols) + " fields");
    }
    return values;
}

void write_codebook_csv(const std::filesystem::path& path, const Codebook& cb) {
    write_matrix_csv(path, cb.centroids.data(), static_cast<std::size_t>(cb.topology.units()),
                     static_cast<std::size_t>(cb.dim));
}

Codebook read_codebook_csv(const std::filesystem::path& path, const MapTopology& topology, int dim) {
    Codebook cb;
    cb.topology = topology;
    cb.dim = dim;
    cb.centroids = read_matrix_csv(path, static_cast<std::size_t>(dim));
    cb.validate();
    return cb;
}

json topology_to_json(const MapTopology& t) {
    return json{{"kind", t.kind == MapKind::String ? "string" : "grid"},
                {"rows", t.rows},
                {"cols", t.cols}};
}

MapTopology topology_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "string") return MapTopology::string_map(j.at("cols").get<int>());
    if (kind == "grid") return MapTopology::grid(j.at("rows").get<int>(), j.at("cols").get<int>());
    throw DataError("manifest: unknown topology kind '" + kind + "'");
}

std::string replicate_stem(std::uint32_t b) {
    std::ostringstream name;
    name << "rep_" << std::setw(5) << std::setfill('0') << b;
    return name.str();
}

}  // namespace

void save_replicate_set(const ReplicateSet& set, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    save_csv(set.data, dir / "dataset.csv");
    if (set.initial_codebook)
        write_codebook_csv(dir / "initial_codebook.csv", *set.initial_codebook);

    json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["plan"] = json{
        {"replicates", set.plan.replicates},
        {"mode", mode_name(set.plan.mode)},
        {"perturbation_scale", set.plan.perturbation_scale},
        {"master_seed", set.plan.master_seed},
        {"eval_target",
         set.plan.eval_target == SsEvalTarget::bootstrap_sample ? "bootstrap-sample" : "original"},
    };
    manifest["topology"] = topology_to_json(set.topology);
    manifest["schedule"] = json{
        {"total_steps", set.schedule.total_steps},
        {"alpha_start", set.schedule.alpha_start},
        {"alpha_end", set.schedule.alpha_end},
        {"radius_start", set.schedule.radius_start},
        {"radius_end", set.schedule.radius_end},
    };
    manifest["dataset"] = json{{"file", "dataset.csv"},
                               {"dim", set.data.dim},
                               {"count", set.data.size()}};
    if (set.data.standardization) {
        manifest["dataset"]["standardization"] = json{
            {"means", set.data.standardization->means},
            {"stddevs", set.data.standardization->stddevs}};
    }
    if (set.initial_codebook) manifest["initial_codebook"] = "initial_codebook.csv";

    json reps = json::array();
    for (const auto& rep : set.replicates) {
        const std::string stem = replicate_stem(rep.index);
        write_codebook_csv(dir / (stem + "_codebook.csv"), rep.codebook);

        {
            std::ofstream out(dir / (stem + "_sample.csv"));
            if (!out) throw DataError("cannot write sample file for replicate " + stem);
            for (std::uint32_t idx : rep.sample_indices) out << idx << '\n';
        }
        {
            std::ofstream out(dir / (stem + "_assign.csv"));
            if (!out) throw DataError("cannot write assignment file for replicate " + stem);
            for (std::size_t i = 0; i < rep.bmu_of_original.size(); ++i)
                if (rep.bmu_of_original[i] >= 0) out << i << ',' << rep.bmu_of_original[i] << '\n';
        }

        reps.push_back(json{{"index", rep.index},
                            {"seed", replicate_seed(set.plan.master_seed, rep.index)},
                            {"ss_intra", rep.ss_intra_value},
                            {"codebook", stem + "_codebook.csv"},
                            {"sample", stem + "_sample.csv"},
                            {"assignments", stem + "_assign.csv"}});
    }
    manifest["replicates"] = std::move(reps);

    std::ofstream out(dir / "manifest.json");
    if (!out) throw DataError("cannot write manifest in '" + dir.string() + "'");
    out << manifest.dump(2) << '\n';
    if (!out) throw DataError("write failed for manifest in '" + dir.string() + "'");
}

ReplicateSet load_replicate_set(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw DataError("cannot open manifest in '" + dir.string() + "'");
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw DataError("manifest parse error in '" + dir.string() + "': " + e.what());
    }

    try {
        if (manifest.at("format_version").get<int>() != kFormatVersion)
            throw DataError("unsupported replicate-set format version");

        ReplicateSet set;
        const json& plan = manifest.at("plan");
        set.plan.replicates = plan.at("replicates").get<int>();
        set.plan.mode = mode_from_name(plan.at("mode").get<std::string>());
        set.plan.perturbation_scale = plan.at("perturbation_scale").get<double>();
        set.plan.master_seed = plan.at("master_seed").get<std::uint64_t>();
        set.plan.eval_target = plan.at("eval_target").get<std::string>() == "original"
                                   ? SsEvalTarget::original
                                   : SsEvalTarget::bootstrap_sample;

        set.topology = topology_from_json(manifest.at("topology"));
        const json& sched = manifest.at("schedule");
        set.schedule.total_steps = sched.at("total_steps").get<long long>();
        set.schedule.alpha_start = sched.at("alpha_start").get<double>();
        set.schedule.alpha_end = sched.at("alpha_end").get<double>();
        set.schedule.radius_start = sched.at("radius_start").get<int>();
        set.schedule.radius_end = sched.at("radius_end").get<int>();

        const json& ds = manifest.at("dataset");
        CsvOptions opts;
        set.data = load_csv(dir / ds.at("file").get<std::string>(), opts);
        if (set.data.dim != ds.at("dim").get<int>() ||
            set.data.size() != ds.at("count").get<std::size_t>())
            throw DataError("dataset file does not match manifest shape");
        if (ds.contains("standardization")) {
            Standardization st;
            st.means = ds.at("standardization").at("means").get<std::vector<double>>();
            st.stddevs = ds.at("standardization").at("stddevs").get<std::vector<double>>();
            set.data.standardization = std::move(st);
        }

        if (manifest.contains("initial_codebook"))
            set.initial_codebook = read_codebook_csv(
                dir / manifest.at("initial_codebook").get<std::string>(), set.topology, set.data.dim);

        const std::size_t n = set.data.size();
        for (const json& r : manifest.at("replicates")) {
            Replicate rep;
            rep.index = r.at("index").get<std::uint32_t>();
            rep.ss_intra_value = r.at("ss_intra").get<double>();
            rep.codebook =
                read_codebook_csv(dir / r.at("codebook").get<std::string>(), set.topology, set.data.dim);

            {
                std::ifstream sample_in(dir / r.at("sample").get<std::string>());
                if (!sample_in) throw DataError("cannot open sample file of replicate");
                std::uint64_t idx;
                while (sample_in >> idx) {
                    if (idx >= n) throw DataError("sample index out of range in replicate file");
                    rep.sample_indices.push_back(static_cast<std::uint32_t>(idx));
                }
                if (rep.sample_indices.size() != n)
                    throw DataError("replicate sample size does not match the dataset");
            }
            {
                rep.bmu_of_original.assign(n, -1);
                std::ifstream assign_in(dir / r.at("assignments").get<std::string>());
                if (!assign_in) throw DataError("cannot open assignment file of replicate");
                std::string line;
                while (std::getline(assign_in, line)) {
                    if (line.empty()) continue;
                    const std::size_t comma = line.find(',');
                    if (comma == std::string::npos)
                        throw DataError("malformed assignment line in replicate file");
                    const std::size_t i = std::stoull(line.substr(0, comma));
                    const int bmu = std::stoi(line.substr(comma + 1));
                    if (i >= n || bmu < 0 || bmu >= set.topology.units())
                        throw DataError("assignment out of range in replicate file");
                    rep.bmu_of_original[i] = bmu;
                }
            }
            set.replicates.push_back(std::move(rep));
        }
        if (set.replicates.size() != static_cast<std::size_t>(set.plan.replicates))
            throw DataError("replicate count does not match the plan");
        return set;
    } catch (const json::exception& e) {
        throw DataError("manifest field error in '" + dir.string() + "': " + e.what());
    }
}

}  // namespace somrel
