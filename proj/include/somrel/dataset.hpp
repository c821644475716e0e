#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace somrel {

// Raised for problems with input data (unreadable file, non-numeric cell,
// ragged rows, constant column under standardization). Distinct from
// std::invalid_argument, which flags API contract violations.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-column affine transform recorded by zscore() so it can be undone.
struct Standardization {
    std::vector<double> means;
    std::vector<double> stddevs;
};

// N observations of dimension dim, stored row-major.
struct Dataset {
    int dim = 0;
    std::vector<double> values;
    std::optional<Standardization> standardization;

    std::size_t size() const { return dim > 0 ? values.size() / static_cast<std::size_t>(dim) : 0; }

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }

    // Throws std::invalid_argument unless the dataset is non-empty, shaped
    // consistently, and all-finite.
    void validate() const;
};

struct CsvOptions {
    bool header = false;
    char delimiter = ',';
    std::vector<int> columns;  // empty selects all columns
};

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

// Full-precision export; load_csv(save_csv(d)) reproduces d bit for bit.
void save_csv(const Dataset& data, const std::filesystem::path& path);

// Subtracts per-column means and divides by per-column sample standard
// deviations, recording both in the result's standardization field.
Dataset zscore(const Dataset& data);

// Undoes zscore using the recorded transform.
Dataset zscore_inverse(const Dataset& data);

}  // namespace somrel
