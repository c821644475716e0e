#include "somrel/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "somrel/stats.hpp"

namespace somrel {

void Dataset::validate() const {
    if (dim < 1) throw std::invalid_argument("dataset dimension must be >= 1");
    if (values.empty()) throw std::invalid_argument("dataset must contain at least one observation");
    if (values.size() % static_cast<std::size_t>(dim) != 0)
        throw std::invalid_argument("dataset value count is not a multiple of the dimension");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("dataset contains a non-finite value");
    if (standardization) {
        if (standardization->means.size() != static_cast<std::size_t>(dim) ||
            standardization->stddevs.size() != static_cast<std::size_t>(dim))
            throw std::invalid_argument("standardization metadata does not match the dimension");
    }
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_cell(std::string_view cell, const std::filesystem::path& path, std::size_t line_no,
                  std::size_t col_no) {
    const std::string_view t = trim(cell);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        std::ostringstream msg;
        msg << path.string() << ":" << line_no << ": column " << col_no << ": '" << std::string(cell)
            << "' is not numeric";
        throw DataError(msg.str());
    }
    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << path.string() << ":" << line_no << ": column " << col_no << ": non-finite value";
        throw DataError(msg.str());
    }
    return value;
}

std::vector<std::string_view> split_fields(std::string_view line, char delimiter,
                                           std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");

    Dataset data;
    std::string line;
    std::vector<std::string_view> fields;
    std::size_t line_no = 0;
    std::size_t expected_fields = 0;
    bool skipped_header = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (options.header && !skipped_header) {
            skipped_header = true;
            continue;
        }
        split_fields(line, options.delimiter, fields);
        if (expected_fields == 0) {
            expected_fields = fields.size();
            const std::size_t selected =
                options.columns.empty() ? expected_fields : options.columns.size();
            if (selected == 0) throw DataError(path.string() + ": no columns selected");
            data.dim = static_cast<int>(selected);
            for (int c : options.columns)
                if (c < 0 || static_cast<std::size_t>(c) >= expected_fields) {
                    std::ostringstream msg;
                    msg << path.string() << ": selected column " << c << " out of range (row has "
                        << expected_fields << " fields)";
                    throw DataError(msg.str());
                }
        } else if (fields.size() != expected_fields) {
            std::ostringstream msg;
            msg << path.string() << ":" << line_no << ": row has " << fields.size()
                << " fields, expected " << expected_fields;
            throw DataError(msg.str());
        }

        if (options.columns.empty()) {
            for (std::size_t c = 0; c < fields.size(); ++c)
                data.values.push_back(parse_cell(fields[c], path, line_no, c));
        } else {
            for (int c : options.columns)
                data.values.push_back(
                    parse_cell(fields[static_cast<std::size_t>(c)], path, line_no,
                               static_cast<std::size_t>(c)));
        }
    }

    if (data.values.empty()) throw DataError(path.string() + ": no data rows");
    data.validate();
    return data;
}

namespace {

void format_double(std::string& out, double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
    (void)ec;
}

}  // namespace

void save_csv(const Dataset& data, const std::filesystem::path& path) {
    data.validate();
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    std::string line;
    for (std::size_t i = 0; i < data.size(); ++i) {
        line.clear();
        const auto r = data.row(i);
        for (int k = 0; k < data.dim; ++k) {
            if (k > 0) line.push_back(',');
            format_double(line, r[static_cast<std::size_t>(k)]);
        }
        line.push_back('\n');
        out << line;
    }
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

Dataset zscore(const Dataset& data) {
    data.validate();
    if (data.standardization)
        throw std::invalid_argument("dataset is already standardized");
    const std::size_t n = data.size();
    if (n < 2) throw std::invalid_argument("zscore needs at least 2 observations");

    Standardization st;
    st.means.resize(static_cast<std::size_t>(data.dim));
    st.stddevs.resize(static_cast<std::size_t>(data.dim));
    std::vector<double> column(n);
    for (int k = 0; k < data.dim; ++k) {
        for (std::size_t i = 0; i < n; ++i) column[i] = data.row(i)[static_cast<std::size_t>(k)];
        const double m = mean(column);
        const double s = sample_stddev(column);
        if (s == 0.0) {
            std::ostringstream msg;
            msg << "zscore: column " << k << " is constant (standard deviation 0)";
            throw DataError(msg.str());
        }
        st.means[static_cast<std::size_t>(k)] = m;
        st.stddevs[static_cast<std::size_t>(k)] = s;
    }

    Dataset out;
    out.dim = data.dim;
    out.values.resize(data.values.size());
    for (std::size_t i = 0; i < n; ++i)
        for (int k = 0; k < data.dim; ++k) {
            const std::size_t idx = i * static_cast<std::size_t>(data.dim) + static_cast<std::size_t>(k);
            out.values[idx] = (data.values[idx] - st.means[static_cast<std::size_t>(k)]) /
                              st.stddevs[static_cast<std::size_t>(k)];
        }
    out.standardization = std::move(st);
    return out;
}

Dataset zscore_inverse(const Dataset& data) {
    data.validate();
    if (!data.standardization)
        throw std::invalid_argument("dataset carries no standardization to invert");
    const auto& st = *data.standardization;
    Dataset out;
    out.dim = data.dim;
    out.values.resize(data.values.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        for (int k = 0; k < data.dim; ++k) {
            const std::size_t idx = i * static_cast<std::size_t>(data.dim) + static_cast<std::size_t>(k);
            out.values[idx] = data.values[idx] * st.stddevs[static_cast<std::size_t>(k)] +
                              st.means[static_cast<std::size_t>(k)];
        }
    return out;
}

}  // namespace somrel
