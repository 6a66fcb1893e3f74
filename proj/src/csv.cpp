#include "fairclust/csv.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fairclust {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // Trim surrounding whitespace and a trailing CR from Windows files.
    std::size_t a = cell.find_first_not_of(" \t\r");
    std::size_t b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& group_column,
                 const std::vector<std::string>& feature_columns) {
  std::ifstream in(path);
  if (!in) throw ValidationError("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.empty())
    throw ValidationError("load_csv: " + path + " is empty");
  std::vector<std::string> header = split_line(line);

  auto col_of = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ValidationError("load_csv: column '" + name + "' not found in " + path);
    return static_cast<int>(it - header.begin());
  };
  int gcol = col_of(group_column);
  std::vector<int> fcols;
  for (const std::string& f : feature_columns) fcols.push_back(col_of(f));
  if (fcols.empty()) throw ValidationError("load_csv: no feature columns given");

  std::vector<Vector> points;
  std::vector<std::string> labels;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() < header.size())
      throw ValidationError("load_csv: row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(header.size()));
    Vector v;
    for (std::size_t i = 0; i < fcols.size(); ++i) {
      const std::string& cell = cells[fcols[i]];
      char* end = nullptr;
      double x = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size())
        throw ValidationError("load_csv: non-numeric cell '" + cell + "' at row " +
                              std::to_string(row) + ", column '" + feature_columns[i] + "'");
      v.push_back(x);
    }
    points.push_back(std::move(v));
    labels.push_back(cells[gcol]);
  }
  if (points.empty()) throw ValidationError("load_csv: " + path + " has no data rows");
  return build_dataset(std::move(points), std::move(labels));
}

}  // namespace fairclust
