#pragma once

#include <chrono>
#include <cmath>
#include <string>

#include "gpk/linop.hpp"
#include "gpk/solve_report.hpp"

namespace gpk::detail {

/// Appends convergence rows to a report and timestamps them. Rows are
/// reserved up front so recording never allocates inside the loop.
class Recorder {
 public:
  Recorder(SolveReport& report, const SolveOptions& opts)
      : rep_(report), opts_(opts), start_(std::chrono::steady_clock::now()) {
    rep_.record.rows.reserve(opts.maxit + 2);
  }

  void push(std::size_t k, double est, double true_res, bool transfer) {
    const double t =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    rep_.record.rows.push_back({k, est, true_res, transfer, t});
    rep_.iterations = k;
    if (opts_.observer) opts_.observer(rep_.record.rows.back());
  }

  void finish(Termination t, const std::string& detail = {}) {
    rep_.termination = t;
    rep_.record.reason = to_string(t);
    if (!detail.empty()) {
      rep_.message = detail;
      rep_.record.reason += ": " + detail;
    }
  }

 private:
  SolveReport& rep_;
  const SolveOptions& opts_;
  std::chrono::steady_clock::time_point start_;
};

/// ||[b; c] - K [x; y]|| using caller-provided scratch of lengths m and n.
inline double explicit_residual(const PartitionedSystem& sys, std::span<const double> x,
                                std::span<const double> y, std::span<double> sx,
                                std::span<double> sy) {
  apply_partitioned(sys, x, y, sx, sy);
  double s = 0.0;
  for (std::size_t i = 0; i < sx.size(); ++i) {
    const double d = sys.b[i] - sx[i];
    s += d * d;
  }
  for (std::size_t i = 0; i < sy.size(); ++i) {
    const double d = sys.c[i] - sy[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double rhs_norm(const PartitionedSystem& sys) {
  return std::hypot(norm2(sys.b), norm2(sys.c));
}

std::string describe(const BreakdownReport& r);

}  // namespace gpk::detail
