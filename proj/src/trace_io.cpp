#include "knewton/trace_io.hpp"

#include <charconv>
#include <cstdio>
#include <system_error>

#include "knewton/errors.hpp"

namespace knewton {

namespace {

void append_double(std::string& s, double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, static_cast<std::size_t>(p - buf));
}

void append_index(std::string& s, Index v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(v));
  s.append(buf, static_cast<std::size_t>(p - buf));
}

}  // namespace

std::string trace_to_csv(const OptimizerTrace& trace, bool zero_timings) {
  std::string out;
  out += kCsvSchemaLine;
  out += '\n';
  out +=
      "iter,loss,grad_norm,step,backtracks,m_or_samples,direction_time_s,"
      "linesearch_time_s,cumulative_time_s\n";
  double cum = 0.0;
  auto row = [&](Index iter, double loss, double grad_norm, double step,
                 int backtracks, Index m, double dt, double lt, double ct) {
    append_index(out, iter);
    out += ',';
    append_double(out, loss);
    out += ',';
    append_double(out, grad_norm);
    out += ',';
    append_double(out, step);
    out += ',';
    append_index(out, backtracks);
    out += ',';
    append_index(out, m);
    out += ',';
    append_double(out, zero_timings ? 0.0 : dt);
    out += ',';
    append_double(out, zero_timings ? 0.0 : lt);
    out += ',';
    append_double(out, zero_timings ? 0.0 : ct);
    out += '\n';
  };
  for (const IterationRecord& r : trace.records) {
    row(r.iter, r.loss, r.grad_norm, r.step, r.backtracks, r.m_or_samples,
        r.direction_time_s, r.linesearch_time_s, r.cumulative_time_s);
    cum = r.cumulative_time_s;
  }
  // terminal state row: the converged (or capped) point itself
  row(static_cast<Index>(trace.records.size()), trace.final_loss,
      trace.final_grad_norm, 0.0, 0, 0, 0.0, 0.0, cum);
  return out;
}

std::string bench_to_csv(const std::vector<BenchRow>& rows,
                         bool zero_timings) {
  std::string out;
  out += kCsvSchemaLine;
  out += '\n';
  out += "method,iter,loss_mean,loss_se,time_mean_s,time_se_s\n";
  for (const BenchRow& r : rows) {
    out += r.method;
    out += ',';
    append_index(out, r.iter);
    out += ',';
    append_double(out, r.loss_mean);
    out += ',';
    append_double(out, r.loss_se);
    out += ',';
    append_double(out, zero_timings ? 0.0 : r.time_mean_s);
    out += ',';
    append_double(out, zero_timings ? 0.0 : r.time_se_s);
    out += '\n';
  }
  return out;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out;
  out += kCsvSchemaLine;
  out += '\n';
  out += "sweep_value,iter,mean_loss\n";
  for (const SweepRow& r : rows) {
    append_double(out, r.sweep_value);
    out += ',';
    append_index(out, r.iter);
    out += ',';
    append_double(out, r.mean_loss);
    out += '\n';
  }
  return out;
}

std::string spectral_to_csv(const std::vector<SpectralRow>& rows) {
  std::string out;
  out += kCsvSchemaLine;
  out += '\n';
  out += "m,trial,spectral_error,relative_error\n";
  for (const SpectralRow& r : rows) {
    append_index(out, r.m);
    out += ',';
    append_index(out, r.trial);
    out += ',';
    append_double(out, r.spectral_error);
    out += ',';
    append_double(out, r.relative_error);
    out += '\n';
  }
  return out;
}

std::string containment_to_csv(const std::vector<ContainmentRow>& rows) {
  std::string out;
  out += kCsvSchemaLine;
  out += '\n';
  out += "m,pass_rate,wilson_lo,wilson_hi\n";
  for (const ContainmentRow& r : rows) {
    append_index(out, r.m);
    out += ',';
    append_double(out, r.pass_rate);
    out += ',';
    append_double(out, r.wilson_lo);
    out += ',';
    append_double(out, r.wilson_hi);
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) throw Error("cannot open '" + tmp + "' for writing");
  const std::size_t written = std::fwrite(content.data(), 1, content.size(), f);
  const bool flushed = std::fclose(f) == 0;
  if (written != content.size() || !flushed) {
    std::remove(tmp.c_str());
    throw Error("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

}  // namespace knewton
