#include "gpk/solve_report.hpp"

#include <string>

#include "solve_common.hpp"

namespace gpk {

const char* to_string(Method m) {
  switch (m) {
    case Method::gpbilq: return "gpbilq";
    case Method::gpbicg: return "gpbicg";
    case Method::gpqmr: return "gpqmr";
    case Method::gpmr: return "gpmr";
    case Method::gpmr_restarted: return "gpmr_restarted";
  }
  return "unknown";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iterations: return "max_iterations";
    case Termination::breakdown: return "breakdown";
  }
  return "unknown";
}

std::optional<Method> method_from_string(std::string_view name) {
  for (Method m : {Method::gpbilq, Method::gpbicg, Method::gpqmr, Method::gpmr,
                   Method::gpmr_restarted}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

namespace detail {

std::string describe(const BreakdownReport& r) {
  std::string s = std::string(to_string(r.kind)) + (r.lucky ? " lucky" : " serious") +
                  " breakdown at vector " + std::to_string(r.iteration);
  return s;
}

}  // namespace detail

}  // namespace gpk
