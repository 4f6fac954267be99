#pragma once

// CSV serialization for optimizer traces, benchmark aggregates, and the
// diagnostic sweeps. All files: UTF-8, LF endings, '.' decimal separator,
// a schema-version comment line, then a header row. Doubles are written via
// std::to_chars (shortest round-trip form, locale independent).

#include <string>
#include <vector>

#include "knewton/optimize.hpp"
#include "knewton/types.hpp"

namespace knewton {

inline constexpr const char* kCsvSchemaLine = "# kernel-newton csv schema 1";

// One row per executed step plus a terminal row carrying the final loss and
// gradient norm (step, backtracks and m_or_samples are zero there). With
// zero_timings the three timing columns are written as 0 everywhere, which
// is what deterministic mode uses to make files byte-comparable.
std::string trace_to_csv(const OptimizerTrace& trace, bool zero_timings);

struct BenchRow {
  std::string method;
  Index iter = 0;
  double loss_mean = 0.0;
  double loss_se = 0.0;
  double time_mean_s = 0.0;
  double time_se_s = 0.0;
  Index repeats_used = 0;  // carried in memory, not a CSV column
};

std::string bench_to_csv(const std::vector<BenchRow>& rows,
                         bool zero_timings);

struct SweepRow {
  double sweep_value = 0.0;
  Index iter = 0;
  double mean_loss = 0.0;
};

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

struct SpectralRow {
  Index m = 0;
  Index trial = 0;
  double spectral_error = 0.0;
  double relative_error = 0.0;
};

std::string spectral_to_csv(const std::vector<SpectralRow>& rows);

struct ContainmentRow {
  Index m = 0;
  double pass_rate = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
};

std::string containment_to_csv(const std::vector<ContainmentRow>& rows);

// Writes content to path via a same-directory temp file and rename, so an
// interrupted write never leaves a partial CSV behind.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace knewton
