#pragma once

// Dataset ingestion (sparse libsvm text, CSV), standardization, seeded
// subsampling, and a two-Gaussians synthetic generator for small instances.

#include <cstdint>
#include <string>
#include <vector>

#include "knewton/errors.hpp"
#include "knewton/types.hpp"

namespace knewton {

struct Dataset {
  Matrix x;  // n x d
  Vector y;  // n, entries in {-1, +1}
  std::string name;
  std::string source;

  Index n() const { return y.size(); }
  Index d() const { return x.cols(); }
};

// Sparse libsvm text: `label idx:val ...`, 1-based ascending indices. The
// two distinct raw labels, sorted ascending, map to (-1, +1).
Dataset load_libsvm(const std::string& path);

// Numeric CSV; the label column is extracted and mapped as above, the
// remaining columns form X in order.
Dataset load_csv(const std::string& path, Index label_column,
                 bool has_header);

// Column-wise zero mean, unit standard deviation (population convention,
// divide by n). Zero-variance columns pass through unchanged; their indices
// are returned through zero_variance_out when given.
Dataset standardize(const Dataset& ds,
                    std::vector<Index>* zero_variance_out = nullptr);

// Uniform subsample without replacement, order-stable by original index.
Dataset subsample(const Dataset& ds, Index n_keep, std::uint64_t seed);

// n/2 points per class from N(+-(separation/2) e1, I); labels -1/+1.
Dataset synth_two_gaussians(Index n, Index d, double separation,
                            std::uint64_t seed);

}  // namespace knewton
