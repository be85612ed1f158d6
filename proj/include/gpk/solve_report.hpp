#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpk/linop.hpp"
#include "gpk/reduction.hpp"

namespace gpk {

enum class Method { gpbilq, gpbicg, gpqmr, gpmr, gpmr_restarted };
enum class Termination { converged, max_iterations, breakdown };
enum class ResidualPolicy { estimate, explicit_residual };

const char* to_string(Method m);
const char* to_string(Termination t);
std::optional<Method> method_from_string(std::string_view name);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct IterationRecord {
  std::size_t k = 0;
  double est_residual = kNaN;   // the stopping quantity of the method
  double true_residual = kNaN;  // only filled under the explicit policy
  bool transfer_defined = false;
  double elapsed_s = 0.0;
};

struct ConvergenceRecord {
  std::vector<IterationRecord> rows;
  std::string reason;  // empty until the solve finishes
};

struct SolveOptions {
  double tol = 1e-6;  // absolute, on the residual norm
  std::size_t maxit = 1000;
  ResidualPolicy residual = ResidualPolicy::estimate;
  std::size_t restart = 9;  // GPMR(r) cycle length
  // GPBiLQ only: also form the GPBiCG iterate after the last step when it exists.
  bool keep_bicg_iterate = true;
  // Called after each recorded row, including k = 0.
  std::function<void(const IterationRecord&)> observer;
};

struct SolveReport {
  Method method = Method::gpbilq;
  Vector x;
  Vector y;
  // GPBiLQ: the GPBiCG iterate at the final step, if it exists and was requested.
  std::optional<Vector> x_bicg;
  std::optional<Vector> y_bicg;
  // GPBiCG: false when the final step had no Galerkin iterate and (x, y) is
  // the GPBiLQ iterate instead. GPBiLQ: true when the solve stopped on the
  // Galerkin iterate, which then is (x, y).
  bool bicg_defined = false;
  Termination termination = Termination::max_iterations;
  BreakdownReport breakdown;
  bool singular_window = false;
  std::string message;
  std::size_t iterations = 0;
  double residual = kNaN;  // last stopping quantity
  ConvergenceRecord record;
};

}  // namespace gpk
