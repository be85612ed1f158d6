#include "gpk.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "gpk/baselines.hpp"
#include "gpk/check.hpp"
#include "gpk/error.hpp"
#include "gpk/io.hpp"
#include "gpk/random_systems.hpp"

struct gpk_matrix {
  gpk::SparseMatrix M;
};

struct gpk_system {
  gpk::PartitionedSystem sys;
};

struct gpk_result {
  gpk::SolveReport report;
};

namespace {

thread_local std::string last_error;

gpk_status fail(gpk_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

// Runs body, translating exceptions into status codes.
template <class F>
gpk_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return GPK_OK;
  } catch (const gpk::SizeGuardError& e) {
    return fail(GPK_ERR_SIZE_GUARD, e.what());
  } catch (const gpk::DimensionError& e) {
    return fail(GPK_ERR_DIMENSION, e.what());
  } catch (const gpk::UsageError& e) {
    return fail(GPK_ERR_USAGE, e.what());
  } catch (const gpk::ParseError& e) {
    return fail(GPK_ERR_PARSE, e.what());
  } catch (const gpk::IoError& e) {
    return fail(GPK_ERR_IO, e.what());
  } catch (const gpk::RankError& e) {
    return fail(GPK_ERR_NUMERIC, e.what());
  } catch (const gpk::SingularWindowError& e) {
    return fail(GPK_ERR_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GPK_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GPK_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GPK_ERR_INTERNAL, "unknown error");
  }
}

#define GPK_REQUIRE(ptr)                                        \
  do {                                                          \
    if (!(ptr)) return fail(GPK_ERR_NULL, #ptr " is NULL");     \
  } while (0)

gpk::Method to_method(gpk_method m) {
  switch (m) {
    case GPK_METHOD_GPBILQ: return gpk::Method::gpbilq;
    case GPK_METHOD_GPBICG: return gpk::Method::gpbicg;
    case GPK_METHOD_GPQMR: return gpk::Method::gpqmr;
    case GPK_METHOD_GPMR: return gpk::Method::gpmr;
    case GPK_METHOD_GPMR_RESTARTED: return gpk::Method::gpmr_restarted;
  }
  throw gpk::UsageError("unknown method code " + std::to_string(static_cast<int>(m)));
}

gpk_method from_method(gpk::Method m) {
  switch (m) {
    case gpk::Method::gpbilq: return GPK_METHOD_GPBILQ;
    case gpk::Method::gpbicg: return GPK_METHOD_GPBICG;
    case gpk::Method::gpqmr: return GPK_METHOD_GPQMR;
    case gpk::Method::gpmr: return GPK_METHOD_GPMR;
    case gpk::Method::gpmr_restarted: return GPK_METHOD_GPMR_RESTARTED;
  }
  return GPK_METHOD_GPBILQ;
}

gpk::Vector copy_vec(const double* p, std::size_t n) { return gpk::Vector(p, p + n); }

std::vector<gpk::NamedRecord> named(const gpk_result* const* results, const char* const* names,
                                    std::size_t count) {
  std::vector<gpk::NamedRecord> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (!results[i] || !names[i]) throw gpk::UsageError("NULL result or name in series");
    out.push_back({names[i], &results[i]->report.record});
  }
  return out;
}

}  // namespace

extern "C" {

const char* gpk_version(void) { return "1.0.0"; }

const char* gpk_last_error(void) { return last_error.c_str(); }

const char* gpk_status_string(gpk_status status) {
  switch (status) {
    case GPK_OK: return "ok";
    case GPK_ERR_NULL: return "null pointer";
    case GPK_ERR_USAGE: return "usage error";
    case GPK_ERR_DIMENSION: return "dimension mismatch";
    case GPK_ERR_SIZE_GUARD: return "size guard exceeded";
    case GPK_ERR_PARSE: return "parse error";
    case GPK_ERR_IO: return "i/o error";
    case GPK_ERR_NUMERIC: return "numerical error";
    case GPK_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* gpk_method_name(gpk_method method) {
  try {
    return gpk::to_string(to_method(method));
  } catch (...) {
    return "unknown";
  }
}

gpk_status gpk_method_parse(const char* name, gpk_method* out, size_t* restart) {
  GPK_REQUIRE(name);
  GPK_REQUIRE(out);
  return guarded([&] {
    std::string s(name);
    if (s.rfind("gpmr(", 0) == 0 && s.size() > 6 && s.back() == ')') {
      const std::string digits = s.substr(5, s.size() - 6);
      char* end = nullptr;
      const unsigned long long r = std::strtoull(digits.c_str(), &end, 10);
      if (digits.empty() || *end != '\0' || r == 0 || digits[0] == '-')
        throw gpk::UsageError("bad restart length in '" + s + "'");
      *out = GPK_METHOD_GPMR_RESTARTED;
      if (restart) *restart = static_cast<size_t>(r);
      return;
    }
    const auto m = gpk::method_from_string(s);
    if (!m) throw gpk::UsageError("unknown method '" + s + "'");
    *out = from_method(*m);
  });
}

void gpk_solve_options_init(gpk_solve_options* opts) {
  if (!opts) return;
  const gpk::SolveOptions d;
  opts->tol = d.tol;
  opts->maxit = d.maxit;
  opts->residual = GPK_RESIDUAL_ESTIMATE;
  opts->restart = d.restart;
}

gpk_status gpk_matrix_from_triplets(size_t rows, size_t cols, size_t nnz, const size_t* row,
                                    const size_t* col, const double* val, gpk_matrix** out) {
  GPK_REQUIRE(out);
  if (nnz > 0) {
    GPK_REQUIRE(row);
    GPK_REQUIRE(col);
    GPK_REQUIRE(val);
  }
  return guarded([&] {
    std::vector<gpk::Triplet> t(nnz);
    for (size_t i = 0; i < nnz; ++i) {
      if (row[i] >= rows || col[i] >= cols)
        throw gpk::DimensionError("entry " + std::to_string(i) + " out of bounds");
      t[i] = {row[i], col[i], val[i]};
    }
    *out = new gpk_matrix{gpk::SparseMatrix(rows, cols, std::move(t))};
  });
}

gpk_status gpk_matrix_from_dense(size_t rows, size_t cols, const double* col_major,
                                 gpk_matrix** out) {
  GPK_REQUIRE(out);
  if (rows * cols > 0) GPK_REQUIRE(col_major);
  return guarded([&] {
    const Eigen::Map<const Eigen::MatrixXd> D(col_major, static_cast<Eigen::Index>(rows),
                                              static_cast<Eigen::Index>(cols));
    *out = new gpk_matrix{gpk::SparseMatrix::from_dense(D)};
  });
}

gpk_status gpk_matrix_read_mtx(const char* path, gpk_matrix** out) {
  GPK_REQUIRE(path);
  GPK_REQUIRE(out);
  return guarded([&] { *out = new gpk_matrix{gpk::read_matrix_market(path)}; });
}

gpk_status gpk_matrix_write_mtx(const gpk_matrix* M, const char* path) {
  GPK_REQUIRE(M);
  GPK_REQUIRE(path);
  return guarded([&] { gpk::write_matrix_market(M->M, path); });
}

gpk_status gpk_matrix_transpose(const gpk_matrix* M, gpk_matrix** out) {
  GPK_REQUIRE(M);
  GPK_REQUIRE(out);
  return guarded([&] { *out = new gpk_matrix{M->M.transposed()}; });
}

size_t gpk_matrix_rows(const gpk_matrix* M) { return M ? M->M.rows() : 0; }
size_t gpk_matrix_cols(const gpk_matrix* M) { return M ? M->M.cols() : 0; }
size_t gpk_matrix_nnz(const gpk_matrix* M) { return M ? M->M.nonzeros() : 0; }

gpk_status gpk_matrix_to_dense(const gpk_matrix* M, double* buf, size_t len) {
  GPK_REQUIRE(M);
  GPK_REQUIRE(buf);
  return guarded([&] {
    if (len != M->M.rows() * M->M.cols()) throw gpk::DimensionError("buffer length mismatch");
    const Eigen::MatrixXd D = M->M.to_dense();
    std::memcpy(buf, D.data(), len * sizeof(double));
  });
}

void gpk_matrix_free(gpk_matrix* M) { delete M; }

gpk_status gpk_system_create(const gpk_matrix* A, const gpk_matrix* B, double lambda, double mu,
                             const double* b, const double* c, const double* f, const double* g,
                             gpk_system** out) {
  GPK_REQUIRE(A);
  GPK_REQUIRE(B);
  GPK_REQUIRE(b);
  GPK_REQUIRE(c);
  GPK_REQUIRE(out);
  return guarded([&] {
    const size_t m = A->M.rows(), n = A->M.cols();
    if (B->M.rows() != n || B->M.cols() != m)
      throw gpk::DimensionError("B must be " + std::to_string(n) + " x " + std::to_string(m));
    std::optional<gpk::Vector> fv, gv;
    if (f) fv = copy_vec(f, m);
    if (g) gv = copy_vec(g, n);
    *out = new gpk_system{gpk::PartitionedSystem::make(
        gpk::Operator::sparse(A->M), gpk::Operator::sparse(B->M), lambda, mu, copy_vec(b, m),
        copy_vec(c, n), std::move(fv), std::move(gv))};
  });
}

gpk_status gpk_system_unit_solution(const gpk_matrix* A, const gpk_matrix* B, double lambda,
                                    double mu, gpk_system** out) {
  GPK_REQUIRE(A);
  GPK_REQUIRE(B);
  GPK_REQUIRE(out);
  return guarded(
      [&] { *out = new gpk_system{gpk::system_with_unit_solution(A->M, B->M, lambda, mu)}; });
}

gpk_status gpk_system_random(size_t m, size_t n, double lambda, double mu, uint64_t seed,
                             int symmetric_coupling, gpk_system** out) {
  GPK_REQUIRE(out);
  return guarded([&] {
    gpk::RandomSystemOptions o;
    o.m = m;
    o.n = n;
    o.lambda = lambda;
    o.mu = mu;
    o.seed = seed;
    o.symmetric_coupling = symmetric_coupling != 0;
    if (m == 0 || n == 0) throw gpk::UsageError("random system dimensions must be positive");
    *out = new gpk_system{gpk::random_system(o)};
  });
}

gpk_status gpk_system_experiment(const char* name, const char* dir, double lambda, double mu,
                                 gpk_system** out) {
  GPK_REQUIRE(name);
  GPK_REQUIRE(dir);
  GPK_REQUIRE(out);
  return guarded([&] {
    std::optional<double> l, u;
    if (!std::isnan(lambda)) l = lambda;
    if (!std::isnan(mu)) u = mu;
    *out = new gpk_system{gpk::load_experiment(name, dir, l, u)};
  });
}

gpk_status gpk_system_set_shadows(gpk_system* sys, const double* f, const double* g) {
  GPK_REQUIRE(sys);
  return guarded([&] {
    gpk::PartitionedSystem next = sys->sys;
    if (f) next.f = copy_vec(f, next.m());
    if (g) next.g = copy_vec(g, next.n());
    next.validate();
    sys->sys = std::move(next);
  });
}

size_t gpk_system_m(const gpk_system* sys) { return sys ? sys->sys.m() : 0; }
size_t gpk_system_n(const gpk_system* sys) { return sys ? sys->sys.n() : 0; }

gpk_status gpk_system_residual_norm(const gpk_system* sys, const double* x, const double* y,
                                    double* out) {
  GPK_REQUIRE(sys);
  GPK_REQUIRE(x);
  GPK_REQUIRE(y);
  GPK_REQUIRE(out);
  return guarded([&] {
    *out = gpk::residual_norm(sys->sys, {x, sys->sys.m()}, {y, sys->sys.n()});
  });
}

void gpk_system_free(gpk_system* sys) { delete sys; }

gpk_status gpk_solve(const gpk_system* sys, gpk_method method, const gpk_solve_options* opts,
                     gpk_result** out) {
  GPK_REQUIRE(sys);
  GPK_REQUIRE(out);
  return guarded([&] {
    gpk::SolveOptions o;
    if (opts) {
      if (!(opts->tol >= 0.0)) throw gpk::UsageError("tol must be nonnegative");
      o.tol = opts->tol;
      o.maxit = opts->maxit;
      o.residual = opts->residual == GPK_RESIDUAL_EXPLICIT ? gpk::ResidualPolicy::explicit_residual
                                                           : gpk::ResidualPolicy::estimate;
      o.restart = opts->restart;
    }
    *out = new gpk_result{gpk::solve(to_method(method), sys->sys, o)};
  });
}

gpk_method gpk_result_method(const gpk_result* r) {
  return r ? from_method(r->report.method) : GPK_METHOD_GPBILQ;
}

gpk_termination gpk_result_termination(const gpk_result* r) {
  if (!r) return GPK_BREAKDOWN;
  switch (r->report.termination) {
    case gpk::Termination::converged: return GPK_CONVERGED;
    case gpk::Termination::max_iterations: return GPK_MAX_ITERATIONS;
    case gpk::Termination::breakdown: return GPK_BREAKDOWN;
  }
  return GPK_BREAKDOWN;
}

size_t gpk_result_iterations(const gpk_result* r) { return r ? r->report.iterations : 0; }
double gpk_result_residual(const gpk_result* r) { return r ? r->report.residual : gpk::kNaN; }
int gpk_result_bicg_defined(const gpk_result* r) { return r && r->report.bicg_defined ? 1 : 0; }
const char* gpk_result_reason(const gpk_result* r) {
  return r ? r->report.record.reason.c_str() : "";
}

gpk_status gpk_result_solution(const gpk_result* r, double* x, size_t m, double* y, size_t n) {
  GPK_REQUIRE(r);
  return guarded([&] {
    if (m != r->report.x.size() || n != r->report.y.size())
      throw gpk::DimensionError("solution buffers must have lengths " +
                                std::to_string(r->report.x.size()) + " and " +
                                std::to_string(r->report.y.size()));
    if ((m && !x) || (n && !y)) throw gpk::UsageError("NULL solution buffer");
    std::copy(r->report.x.begin(), r->report.x.end(), x);
    std::copy(r->report.y.begin(), r->report.y.end(), y);
  });
}

size_t gpk_result_history_length(const gpk_result* r) {
  return r ? r->report.record.rows.size() : 0;
}

gpk_status gpk_result_history(const gpk_result* r, size_t i, gpk_iteration* out) {
  GPK_REQUIRE(r);
  GPK_REQUIRE(out);
  if (i >= r->report.record.rows.size()) return fail(GPK_ERR_USAGE, "history index out of range");
  const auto& row = r->report.record.rows[i];
  *out = {row.k, row.est_residual, row.true_residual, row.transfer_defined ? 1 : 0, row.elapsed_s};
  return GPK_OK;
}

gpk_status gpk_result_write_csv(const gpk_result* r, const char* path) {
  GPK_REQUIRE(r);
  GPK_REQUIRE(path);
  return guarded([&] { gpk::write_convergence_csv(r->report.record, path); });
}

void gpk_result_free(gpk_result* r) { delete r; }

gpk_status gpk_write_wide_csv(const gpk_result* const* results, const char* const* names,
                              size_t count, const char* path) {
  GPK_REQUIRE(path);
  if (count) {
    GPK_REQUIRE(results);
    GPK_REQUIRE(names);
  }
  return guarded([&] { gpk::write_wide_csv(named(results, names, count), path); });
}

gpk_status gpk_write_svg(const gpk_result* const* results, const char* const* names, size_t count,
                         const char* title, const char* path) {
  GPK_REQUIRE(path);
  if (count) {
    GPK_REQUIRE(results);
    GPK_REQUIRE(names);
  }
  return guarded([&] {
    gpk::write_convergence_svg(named(results, names, count), std::filesystem::path(path),
                               title ? title : "");
  });
}

gpk_status gpk_check_run(size_t size, uint64_t seed, int force_breakdown, int* all_passed,
                         char** table) {
  GPK_REQUIRE(all_passed);
  return guarded([&] {
    gpk::CheckOptions o;
    o.size = size;
    o.seed = seed;
    o.force_breakdown = force_breakdown != 0;
    const gpk::CheckReport rep = gpk::run_invariant_suite(o);
    *all_passed = rep.passed() ? 1 : 0;
    if (table) {
      std::ostringstream s;
      gpk::print_check_table(rep, s);
      const std::string text = s.str();
      char* buf = static_cast<char*>(std::malloc(text.size() + 1));
      if (!buf) throw std::bad_alloc();
      std::memcpy(buf, text.c_str(), text.size() + 1);
      *table = buf;
    }
  });
}

void gpk_string_free(char* s) { std::free(s); }

}  // extern "C"
