#include "knewton/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "knewton/rng.hpp"

namespace knewton {

namespace {

std::string basename_of(const std::string& path) {
  const auto pos = path.find_last_of("/\\");
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

// Locale-independent full-token double parse; tolerates one leading '+'.
bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_index(std::string_view tok, long long& out) {
  if (tok.empty()) return false;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

// Maps the two distinct raw labels (sorted ascending) to -1/+1 in place.
void map_labels(Vector& y, const char* who) {
  std::set<double> distinct(y.data(), y.data() + y.size());
  if (distinct.size() != 2)
    throw MoreThanTwoClasses(std::string(who) + ": expected exactly two "
                             "distinct labels, found " +
                             std::to_string(distinct.size()));
  const double lo = *distinct.begin();
  for (Index i = 0; i < y.size(); ++i) y[i] = y[i] == lo ? -1.0 : 1.0;
}

}  // namespace

Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_libsvm: cannot open '" + path + "'");
  std::vector<double> labels;
  std::vector<std::vector<std::pair<Index, double>>> rows;
  Index d = 0;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok))
      throw ParseError("load_libsvm: line " + std::to_string(line_no) +
                       ": missing label");
    double label = 0.0;
    if (!parse_double(tok, label))
      throw ParseError("load_libsvm: line " + std::to_string(line_no) +
                       ": bad label '" + tok + "'");
    std::vector<std::pair<Index, double>> row;
    Index prev_idx = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 ||
          colon == tok.size() - 1)
        throw ParseError("load_libsvm: line " + std::to_string(line_no) +
                         ": bad feature token '" + tok + "'");
      long long raw_idx = 0;
      double value = 0.0;
      if (!parse_index(std::string_view(tok).substr(0, colon), raw_idx) ||
          raw_idx < 1)
        throw ParseError("load_libsvm: line " + std::to_string(line_no) +
                         ": bad feature index in '" + tok + "'");
      if (!parse_double(std::string_view(tok).substr(colon + 1), value))
        throw ParseError("load_libsvm: line " + std::to_string(line_no) +
                         ": bad feature value in '" + tok + "'");
      const Index idx = static_cast<Index>(raw_idx);
      if (idx <= prev_idx)
        throw ParseError("load_libsvm: line " + std::to_string(line_no) +
                         ": feature indices must be strictly ascending");
      prev_idx = idx;
      d = std::max(d, idx);
      row.emplace_back(idx - 1, value);
    }
    labels.push_back(label);
    rows.push_back(std::move(row));
  }
  if (labels.empty())
    throw ParseError("load_libsvm: '" + path + "' contains no data rows");
  Dataset ds;
  const Index n = static_cast<Index>(labels.size());
  ds.x = Matrix::Zero(n, d);
  ds.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    ds.y[i] = labels[static_cast<std::size_t>(i)];
    for (const auto& [j, v] : rows[static_cast<std::size_t>(i)])
      ds.x(i, j) = v;
  }
  map_labels(ds.y, "load_libsvm");
  ds.name = basename_of(path);
  ds.source = "libsvm:" + path;
  return ds;
}

Dataset load_csv(const std::string& path, Index label_column,
                 bool has_header) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_csv: cannot open '" + path + "'");
  std::string line;
  long long line_no = 0;
  if (has_header) {
    if (!std::getline(in, line))
      throw ParseError("load_csv: '" + path + "' is empty");
    ++line_no;
  }
  std::vector<std::vector<double>> table;
  Index ncols = -1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    std::vector<double> cells;
    std::size_t start = 0;
    Index col = 0;
    while (true) {
      const auto comma = line.find(',', start);
      std::string cell = comma == std::string::npos
                             ? line.substr(start)
                             : line.substr(start, comma - start);
      // trim surrounding blanks
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      cell = b == std::string::npos ? std::string() : cell.substr(b, e - b + 1);
      double v = 0.0;
      if (!parse_double(cell, v))
        throw ParseError("load_csv: row " + std::to_string(line_no) +
                         ", col " + std::to_string(col) +
                         ": non-numeric cell '" + cell + "'");
      cells.push_back(v);
      ++col;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (ncols < 0) {
      ncols = static_cast<Index>(cells.size());
    } else if (static_cast<Index>(cells.size()) != ncols) {
      throw RaggedRows("load_csv: row " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(ncols));
    }
    table.push_back(std::move(cells));
  }
  if (table.empty())
    throw ParseError("load_csv: '" + path + "' contains no data rows");
  if (label_column < 0 || label_column >= ncols)
    throw ArgumentOutOfRange("load_csv: label column out of range");
  const Index n = static_cast<Index>(table.size());
  Dataset ds;
  ds.x.resize(n, ncols - 1);
  ds.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = table[static_cast<std::size_t>(i)];
    ds.y[i] = row[static_cast<std::size_t>(label_column)];
    Index out = 0;
    for (Index j = 0; j < ncols; ++j) {
      if (j == label_column) continue;
      ds.x(i, out++) = row[static_cast<std::size_t>(j)];
    }
  }
  map_labels(ds.y, "load_csv");
  ds.name = basename_of(path);
  ds.source = "csv:" + path;
  return ds;
}

Dataset standardize(const Dataset& ds, std::vector<Index>* zero_variance_out) {
  if (ds.n() < 2) throw TooFewRows("standardize: need n >= 2");
  Dataset out = ds;
  if (zero_variance_out) zero_variance_out->clear();
  const double n = static_cast<double>(ds.n());
  for (Index j = 0; j < ds.d(); ++j) {
    const double mean = out.x.col(j).mean();
    Vector centered = out.x.col(j).array() - mean;
    const double sd = std::sqrt(centered.squaredNorm() / n);
    if (sd == 0.0) {
      if (zero_variance_out) zero_variance_out->push_back(j);
      continue;
    }
    out.x.col(j) = centered / sd;
  }
  out.source = ds.source + "|standardized";
  return out;
}

Dataset subsample(const Dataset& ds, Index n_keep, std::uint64_t seed) {
  if (n_keep > ds.n())
    throw TooFewRows("subsample: n_keep exceeds dataset size");
  if (n_keep < 0) throw ArgumentOutOfRange("subsample: n_keep < 0");
  Rng rng(seed);
  std::vector<Index> keep = sample_index_subset<Index>(ds.n(), n_keep, rng);
  Dataset out;
  out.x.resize(n_keep, ds.d());
  out.y.resize(n_keep);
  for (Index i = 0; i < n_keep; ++i) {
    out.x.row(i) = ds.x.row(keep[static_cast<std::size_t>(i)]);
    out.y[i] = ds.y[keep[static_cast<std::size_t>(i)]];
  }
  out.name = ds.name;
  out.source =
      ds.source + "|subsample:" + std::to_string(n_keep) + "@" +
      std::to_string(seed);
  return out;
}

Dataset synth_two_gaussians(Index n, Index d, double separation,
                            std::uint64_t seed) {
  if (n < 2 || n % 2 != 0)
    throw ArgumentOutOfRange("synth_two_gaussians: n must be even and >= 2");
  if (d < 1) throw ArgumentOutOfRange("synth_two_gaussians: d must be >= 1");
  if (!(separation >= 0.0) || !std::isfinite(separation))
    throw ArgumentOutOfRange(
        "synth_two_gaussians: separation must be finite and >= 0");
  Rng rng(seed);
  Dataset ds;
  ds.x.resize(n, d);
  ds.y.resize(n);
  const Index half = n / 2;
  // row-by-row draw order, first the +1 class at +sep/2 e1, then the -1 class
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) ds.x(i, j) = rng.gaussian();
    const bool pos = i < half;
    ds.x(i, 0) += (pos ? 0.5 : -0.5) * separation;
    ds.y[i] = pos ? 1.0 : -1.0;
  }
  ds.name = "synth-two-gaussians";
  ds.source = "synth:n=" + std::to_string(n) + ",d=" + std::to_string(d) +
              ",sep=" + std::to_string(separation) +
              ",seed=" + std::to_string(seed);
  return ds;
}

}  // namespace knewton
