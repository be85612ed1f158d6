#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpk/linop.hpp"
#include "gpk/solve_report.hpp"
#include "gpk/sparse.hpp"

namespace gpk {

/// Reads a real Matrix Market file in coordinate or array format. Symmetric
/// and skew-symmetric storage is expanded; duplicates are summed.
/// Throws IoError when the file cannot be opened and ParseError otherwise.
SparseMatrix read_matrix_market(const std::filesystem::path& path);
SparseMatrix parse_matrix_market(std::istream& in, const std::string& source = "<stream>");

/// Coordinate real general, shortest round-trip decimal values.
void write_matrix_market(const SparseMatrix& M, const std::filesystem::path& path);
void write_matrix_market(const SparseMatrix& M, std::ostream& out);

/// One of the four benchmark systems built from SuiteSparse matrices.
struct ExperimentSpec {
  std::string name;
  // Collection names of the files to load, in order.
  std::vector<std::string> matrices;
  double lambda = 1.0;
  double mu = -1.0;
  // true: A = first^T, B = second. false: A = first, B = first^T.
  bool transpose_first = false;
};

const std::vector<ExperimentSpec>& experiments();
std::optional<ExperimentSpec> find_experiment(std::string_view name);

/// Right-hand sides chosen so that x = 1, y = 1 is the exact solution; f = b, g = c.
PartitionedSystem system_with_unit_solution(SparseMatrix A, SparseMatrix B, double lambda,
                                            double mu);

/// Assembles a named experiment from already-loaded matrices. lambda and mu
/// default to the experiment's values. Throws DimensionError on shape mismatch.
PartitionedSystem build_experiment(std::string_view name, const std::vector<SparseMatrix>& matrices,
                                   std::optional<double> lambda = std::nullopt,
                                   std::optional<double> mu = std::nullopt);

/// Looks up <dir>/<name>.mtx or <dir>/<name>/<name>.mtx.
std::filesystem::path locate_matrix(const std::filesystem::path& dir, const std::string& name);

/// Loads the experiment's matrices from dir and builds the system.
PartitionedSystem load_experiment(std::string_view name, const std::filesystem::path& dir,
                                  std::optional<double> lambda = std::nullopt,
                                  std::optional<double> mu = std::nullopt);

/// CSV with header k,est_residual,true_residual,transfer_defined,elapsed_s.
/// NaN becomes an empty field; the termination reason is a trailing '#' line.
void write_convergence_csv(const ConvergenceRecord& record, std::ostream& out);
void write_convergence_csv(const ConvergenceRecord& record, const std::filesystem::path& path);
ConvergenceRecord parse_convergence_csv(std::istream& in);
ConvergenceRecord read_convergence_csv(const std::filesystem::path& path);

struct NamedRecord {
  std::string name;
  const ConvergenceRecord* record = nullptr;
};

/// k followed by one est_residual column per series; blank past a series' end.
void write_wide_csv(const std::vector<NamedRecord>& series, std::ostream& out);
void write_wide_csv(const std::vector<NamedRecord>& series, const std::filesystem::path& path);

/// Log-scale residual against iteration, one polyline per series.
void write_convergence_svg(const std::vector<NamedRecord>& series, std::ostream& out,
                           const std::string& title = {});
void write_convergence_svg(const std::vector<NamedRecord>& series,
                           const std::filesystem::path& path, const std::string& title = {});

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace gpk
