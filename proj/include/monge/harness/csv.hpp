#pragma once

// Headered numeric CSV. Values are written with 17 significant digits so they
// parse back to the same doubles.

#include "monge/error.hpp"
#include "monge/geo.hpp"
#include "monge/nn/tensor.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace monge::harness {

struct CsvTable {
  std::vector<std::string> header;
  Tensor values;
};

inline void write_csv(const std::string& path, const std::vector<std::string>& header, const Tensor& values) {
  require(static_cast<Eigen::Index>(header.size()) == values.cols(), ErrorCode::kDimensionMismatch,
          "csv header has " + std::to_string(header.size()) + " columns, data has " + std::to_string(values.cols()));
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << values(i, j);
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorCode::kIo, "write failed for " + path);
}

/// Default column names x0, x1, ...
inline std::vector<std::string> numbered_header(const std::string& prefix, Eigen::Index cols) {
  std::vector<std::string> h;
  for (Eigen::Index j = 0; j < cols; ++j) h.push_back(prefix + std::to_string(j));
  return h;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path);
  CsvTable t;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::kEmpty, path + " is empty");
  t.header = geo::detail::split_csv(line);
  std::vector<double> flat;
  std::size_t rows = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = geo::detail::split_csv(line);
    require(cells.size() == t.header.size(), ErrorCode::kParse,
            path + ":" + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) + " fields");
    for (const auto& c : cells) flat.push_back(geo::detail::parse_number(c, path, line_no));
    ++rows;
  }
  t.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < t.header.size(); ++j)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * t.header.size() + j];
  return t;
}

}  // namespace monge::harness
