#include "oca/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace oca::io {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  return in;
}

}  // namespace

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

Grid<std::optional<double>> read_optional_grid(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  Grid<std::optional<double>> grid;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::stringstream cells(line);
    std::string cell;
    int cols = 0;
    while (std::getline(cells, cell, ',')) {
      cell = trim(cell);
      if (cell.empty() || cell == "NA") {
        grid.values.emplace_back(std::nullopt);
      } else {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
          throw InputError(path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                           cell + "'");
        }
        grid.values.emplace_back(v);
      }
      ++cols;
    }
    if (!line.empty() && line.back() == ',') {
      grid.values.emplace_back(std::nullopt);
      ++cols;
    }
    if (grid.rows > 0 && cols != grid.cols) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(grid.cols) + " columns, found " + std::to_string(cols));
    }
    grid.cols = cols;
    ++grid.rows;
  }
  if (grid.rows == 0) throw InputError(path.string() + ": empty grid");
  return grid;
}

Grid<double> read_real_grid(const std::filesystem::path& path) {
  const auto raw = read_optional_grid(path);
  Grid<double> grid{raw.rows, raw.cols, {}};
  grid.values.reserve(raw.values.size());
  for (const auto& v : raw.values) {
    if (!v) throw InputError(path.string() + ": missing value in a real-valued grid");
    grid.values.push_back(*v);
  }
  return grid;
}

Grid<int> read_label_grid(const std::filesystem::path& path) {
  const auto real = read_real_grid(path);
  Grid<int> grid{real.rows, real.cols, {}};
  for (double v : real.values) {
    if (v != std::floor(v) || v < 1.0) {
      throw InputError(path.string() + ": labels must be positive integers");
    }
    grid.values.push_back(static_cast<int>(v) - 1);
  }
  return grid;
}

LabelField to_field(const Grid<int>& grid, int k) {
  int top = 1;
  for (int v : grid.values) top = std::max(top, v);
  if (k == 0) k = top + 1;
  if (top >= k) throw InputError("label " + std::to_string(top + 1) + " exceeds k");
  return LabelField(k, grid.values);
}

Grid<double> read_pgm(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
  }
  if (tokens.size() < 4 || tokens[0] != "P2") throw InputError(path.string() + ": not a P2 graymap");
  try {
    Grid<double> grid;
    grid.cols = std::stoi(tokens[1]);
    grid.rows = std::stoi(tokens[2]);
    const double max_gray = std::stod(tokens[3]);
    const auto expected = static_cast<std::size_t>(grid.rows) * static_cast<std::size_t>(grid.cols);
    if (grid.rows < 1 || grid.cols < 1 || max_gray <= 0 || tokens.size() != 4 + expected) {
      throw InputError(path.string() + ": inconsistent graymap header");
    }
    for (std::size_t j = 4; j < tokens.size(); ++j) grid.values.push_back(std::stod(tokens[j]));
    return grid;
  } catch (const std::logic_error&) {
    throw InputError(path.string() + ": malformed graymap");
  }
}

Grid<double> read_observations(const std::filesystem::path& path) {
  if (path.extension() == ".pgm") return read_pgm(path);
  return read_real_grid(path);
}

void write_label_grid(const std::filesystem::path& path, const LabelField& field, int rows,
                      int cols) {
  auto out = open_output(path);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c > 0) out << ',';
      out << field[r * cols + c] + 1;
    }
    out << '\n';
  }
}

void write_real_grid(const std::filesystem::path& path, const std::vector<double>& values,
                     int rows, int cols) {
  auto out = open_output(path);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c > 0) out << ',';
      out << values[static_cast<std::size_t>(r * cols + c)];
    }
    out << '\n';
  }
}

}  // namespace oca::io
