#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oca/potts.hpp"

namespace oca::io {

/// Malformed or unreadable input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T>
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<T> values;  // row-major
};

/// Comma-separated reals, one grid row per line. Cells that are empty or
/// "NA" read as nullopt.
Grid<std::optional<double>> read_optional_grid(const std::filesystem::path& path);
Grid<double> read_real_grid(const std::filesystem::path& path);

/// Label CSV with 1-based labels; returned labels are 0-based. `k` of 0 takes
/// the largest label present (at least 2).
Grid<int> read_label_grid(const std::filesystem::path& path);
LabelField to_field(const Grid<int>& grid, int k = 0);

/// Plain-text portable graymap (P2); gray levels are returned unscaled.
Grid<double> read_pgm(const std::filesystem::path& path);

/// Reads `path` as PGM when it ends in .pgm, as a real CSV grid otherwise.
Grid<double> read_observations(const std::filesystem::path& path);

void write_label_grid(const std::filesystem::path& path, const LabelField& field, int rows,
                      int cols);
void write_real_grid(const std::filesystem::path& path, const std::vector<double>& values,
                     int rows, int cols);

/// Opens `path` for writing, throwing InputError when that fails.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace oca::io
