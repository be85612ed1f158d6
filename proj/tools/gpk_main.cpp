// Command-line driver over the C interface: solve, compare, check, experiments.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gpk.h"

namespace {

enum Exit { kConverged = 0, kUsage = 1, kMaxit = 2, kBreakdown = 3, kCheckFailed = 4 };

struct Failure {
  int code;
  std::string message;
};

void require(gpk_status s, const std::string& what) {
  if (s != GPK_OK)
    throw Failure{kUsage, what + ": " + gpk_status_string(s) + ": " + gpk_last_error()};
}

struct MatrixDeleter {
  void operator()(gpk_matrix* m) const { gpk_matrix_free(m); }
};
struct SystemDeleter {
  void operator()(gpk_system* s) const { gpk_system_free(s); }
};
struct ResultDeleter {
  void operator()(gpk_result* r) const { gpk_result_free(r); }
};
using MatrixPtr = std::unique_ptr<gpk_matrix, MatrixDeleter>;
using SystemPtr = std::unique_ptr<gpk_system, SystemDeleter>;
using ResultPtr = std::unique_ptr<gpk_result, ResultDeleter>;

MatrixPtr read_matrix(const std::string& path) {
  gpk_matrix* m = nullptr;
  require(gpk_matrix_read_mtx(path.c_str(), &m), "reading " + path);
  return MatrixPtr(m);
}

std::vector<double> read_vector(const std::string& path, std::size_t len) {
  MatrixPtr m = read_matrix(path);
  const std::size_t r = gpk_matrix_rows(m.get()), c = gpk_matrix_cols(m.get());
  if (r * c != len || (r != 1 && c != 1))
    throw Failure{kUsage, path + ": expected a vector of length " + std::to_string(len)};
  std::vector<double> v(len);
  require(gpk_matrix_to_dense(m.get(), v.data(), len), "reading " + path);
  return v;
}

// How the system is obtained: Matrix Market files, a named experiment, or a seeded random draw.
struct SystemConfig {
  std::string a_path, b_path;
  bool b_is_at = false;
  std::string experiment;
  std::string data_dir;
  std::size_t random_m = 0, random_n = 0;
  std::uint64_t seed = 7;
  std::optional<double> lambda, mu;
  std::string rhs_b, rhs_c;
  std::string fg = "equal_bc";
  std::string f_path, g_path;
};

void add_system_options(CLI::App& cmd, SystemConfig& s) {
  cmd.add_option("--a", s.a_path, "Matrix Market file for A (m x n)");
  cmd.add_option("--b", s.b_path, "Matrix Market file for B (n x m)");
  cmd.add_flag("--b-is-at", s.b_is_at, "use B = A^T");
  cmd.add_option("--experiment", s.experiment, "named benchmark system (see 'experiments')");
  cmd.add_option("--data-dir", s.data_dir,
                 "directory with SuiteSparse .mtx files (default $GPK_SUITESPARSE_DIR)");
  cmd.add_option("--random", s.random_m, "seeded random system with m = n = N")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--random-n", s.random_n, "n for the random system (default m)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--seed", s.seed, "seed for the random system");
  cmd.add_option("--lambda", s.lambda, "diagonal shift of the first block");
  cmd.add_option("--mu", s.mu, "diagonal shift of the second block");
  cmd.add_option("--rhs-b", s.rhs_b, "vector file for b (default: exact solution of ones)");
  cmd.add_option("--rhs-c", s.rhs_c, "vector file for c");
  cmd.add_option("--fg", s.fg, "shadow vectors: equal_bc or files")
      ->check(CLI::IsMember({"equal_bc", "files"}));
  cmd.add_option("--f", s.f_path, "vector file for f (with --fg files)");
  cmd.add_option("--g", s.g_path, "vector file for g (with --fg files)");
}

SystemPtr build_system(const SystemConfig& s) {
  const int sources = (!s.a_path.empty() ? 1 : 0) + (!s.experiment.empty() ? 1 : 0) +
                      (s.random_m > 0 ? 1 : 0);
  if (sources != 1)
    throw Failure{kUsage, "give exactly one of --a, --experiment or --random"};
  gpk_system* sys = nullptr;

  if (!s.experiment.empty()) {
    std::string dir = s.data_dir;
    if (dir.empty()) {
      const char* env = std::getenv("GPK_SUITESPARSE_DIR");
      if (!env)
        throw Failure{kUsage, "--experiment needs --data-dir or GPK_SUITESPARSE_DIR"};
      dir = env;
    }
    require(gpk_system_experiment(s.experiment.c_str(), dir.c_str(), s.lambda.value_or(NAN),
                                  s.mu.value_or(NAN), &sys),
            "experiment " + s.experiment);
  } else if (s.random_m > 0) {
    require(gpk_system_random(s.random_m, s.random_n ? s.random_n : s.random_m,
                              s.lambda.value_or(1.0), s.mu.value_or(-0.1), s.seed, 0, &sys),
            "random system");
  } else {
    if (s.b_path.empty() == !s.b_is_at)
      throw Failure{kUsage, "give exactly one of --b or --b-is-at together with --a"};
    MatrixPtr A = read_matrix(s.a_path);
    MatrixPtr B;
    if (s.b_is_at) {
      gpk_matrix* t = nullptr;
      require(gpk_matrix_transpose(A.get(), &t), "transposing A");
      B.reset(t);
    } else {
      B = read_matrix(s.b_path);
    }
    const std::size_t m = gpk_matrix_rows(A.get()), n = gpk_matrix_cols(A.get());
    if (gpk_matrix_rows(B.get()) != n || gpk_matrix_cols(B.get()) != m)
      throw Failure{kUsage, "malformed pair: A is " + std::to_string(m) + " x " +
                                std::to_string(n) + " so B must be " + std::to_string(n) +
                                " x " + std::to_string(m)};
    const double lambda = s.lambda.value_or(1.0), mu = s.mu.value_or(-0.1);
    if (s.rhs_b.empty() != s.rhs_c.empty())
      throw Failure{kUsage, "--rhs-b and --rhs-c go together"};
    if (s.rhs_b.empty()) {
      require(gpk_system_unit_solution(A.get(), B.get(), lambda, mu, &sys), "building system");
    } else {
      const auto b = read_vector(s.rhs_b, m), c = read_vector(s.rhs_c, n);
      require(gpk_system_create(A.get(), B.get(), lambda, mu, b.data(), c.data(), nullptr,
                                nullptr, &sys),
              "building system");
    }
  }
  SystemPtr out(sys);

  if (s.fg == "files") {
    if (s.f_path.empty() || s.g_path.empty())
      throw Failure{kUsage, "--fg files needs --f and --g"};
    const auto f = read_vector(s.f_path, gpk_system_m(sys));
    const auto g = read_vector(s.g_path, gpk_system_n(sys));
    require(gpk_system_set_shadows(sys, f.data(), g.data()), "setting shadow vectors");
  } else if (!s.f_path.empty() || !s.g_path.empty()) {
    throw Failure{kUsage, "--f and --g need --fg files"};
  }
  return out;
}

struct SolveConfig {
  double tol = 1e-6;
  std::size_t maxit = 1000;
  std::string residual = "estimate";
  std::size_t restart = 9;
};

void add_solve_options(CLI::App& cmd, SolveConfig& c) {
  if (const char* env = std::getenv("GPK_TOL")) c.tol = std::atof(env);
  cmd.add_option("--tol", c.tol, "absolute tolerance on the residual norm (default $GPK_TOL or 1e-6)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--maxit", c.maxit, "iteration limit");
  cmd.add_option("--residual", c.residual, "stopping quantity: estimate or explicit")
      ->check(CLI::IsMember({"estimate", "explicit"}));
  cmd.add_option("--restart", c.restart, "GPMR(r) cycle length")->check(CLI::PositiveNumber);
}

gpk_solve_options solve_options(const SolveConfig& c, std::size_t restart) {
  gpk_solve_options o;
  gpk_solve_options_init(&o);
  o.tol = c.tol;
  o.maxit = c.maxit;
  o.residual = c.residual == "explicit" ? GPK_RESIDUAL_EXPLICIT : GPK_RESIDUAL_ESTIMATE;
  o.restart = restart;
  return o;
}

struct MethodChoice {
  std::string label;
  gpk_method method;
  std::size_t restart;
};

MethodChoice parse_method(const std::string& name, std::size_t default_restart) {
  MethodChoice m{name, GPK_METHOD_GPBILQ, default_restart};
  if (gpk_method_parse(name.c_str(), &m.method, &m.restart) != GPK_OK)
    throw Failure{kUsage, std::string(gpk_last_error()) +
                              " (methods: gpbilq, gpbicg, gpqmr, gpmr, gpmr_restarted, gpmr(r))"};
  return m;
}

int exit_code(gpk_termination t) {
  switch (t) {
    case GPK_CONVERGED: return kConverged;
    case GPK_MAX_ITERATIONS: return kMaxit;
    case GPK_BREAKDOWN: return kBreakdown;
  }
  return kBreakdown;
}

void print_summary(const std::string& label, const gpk_result* r) {
  std::printf("%-16s iterations %-6zu residual %-12.4e %s\n", label.c_str(),
              gpk_result_iterations(r), gpk_result_residual(r), gpk_result_reason(r));
}

ResultPtr run(const gpk_system* sys, const MethodChoice& m, const SolveConfig& c) {
  const gpk_solve_options o = solve_options(c, m.restart);
  gpk_result* r = nullptr;
  require(gpk_solve(sys, m.method, &o, &r), "solving with " + m.label);
  return ResultPtr(r);
}

std::string file_label(const std::string& label) {
  std::string s;
  for (char ch : label) s += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_') ? ch : '_';
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Krylov solvers for partitioned systems [lambda I, A; B, mu I][x; y] = [b; c]"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gpk_version());

  SystemConfig sys_cfg;
  SolveConfig solve_cfg;

  auto* solve = app.add_subcommand("solve", "run one method and write its convergence CSV");
  std::string method = "gpqmr", output = "convergence.csv", svg;
  solve->add_option("--method", method, "gpbilq, gpbicg, gpqmr, gpmr, gpmr_restarted or gpmr(r)");
  solve->add_option("--output", output, "convergence CSV path");
  solve->add_option("--svg", svg, "optional SVG convergence plot");
  add_system_options(*solve, sys_cfg);
  add_solve_options(*solve, solve_cfg);

  auto* compare = app.add_subcommand("compare", "run several methods on one system");
  std::vector<std::string> methods{"gpbilq", "gpbicg", "gpqmr", "gpmr", "gpmr(9)"};
  std::string out_dir = ".", compare_svg, title;
  compare->add_option("--methods", methods, "comma-separated method list")->delimiter(',');
  compare->add_option("--output-dir", out_dir, "directory for the CSV files");
  compare->add_option("--svg", compare_svg, "optional SVG plot with one series per method");
  compare->add_option("--title", title, "plot title");
  add_system_options(*compare, sys_cfg);
  add_solve_options(*compare, solve_cfg);

  auto* check = app.add_subcommand("check", "run the invariant suite on seeded random systems");
  std::size_t check_size = 12;
  std::uint64_t check_seed = 7;
  bool force_breakdown = false;
  check->add_option("--size", check_size, "m = n of the random systems");
  check->add_option("--seed", check_seed, "first seed");
  check->add_flag("--force-breakdown", force_breakdown, "use f orthogonal to b");

  auto* exps = app.add_subcommand("experiments", "list the benchmark systems and their files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*exps) {
      std::puts("well1033    A = well1033^T, B = illc1033, lambda = 1, mu = -0.1");
      std::puts("well1850    A = well1850^T, B = illc1850, lambda = 1, mu = -0.05");
      std::puts("lp_osa_07   A = lp_osa_07, B = A^T, lambda = 1, mu = -1");
      std::puts("lpi_klein3  A = lpi_klein3, B = A^T, lambda = 1, mu = -1");
      std::puts("Download <name>.mtx from the SuiteSparse Matrix Collection into --data-dir.");
      return 0;
    }

    if (*check) {
      int passed = 0;
      char* table = nullptr;
      const gpk_status s = gpk_check_run(check_size, check_seed, force_breakdown ? 1 : 0,
                                         &passed, &table);
      if (s != GPK_OK) {
        std::fprintf(stderr, "check: %s\n", gpk_last_error());
        return kUsage;
      }
      std::fputs(table, stdout);
      gpk_string_free(table);
      return passed ? 0 : kCheckFailed;
    }

    if (*solve) {
      const MethodChoice m = parse_method(method, solve_cfg.restart);
      SystemPtr sys = build_system(sys_cfg);
      ResultPtr r = run(sys.get(), m, solve_cfg);
      require(gpk_result_write_csv(r.get(), output.c_str()), "writing " + output);
      if (!svg.empty()) {
        const gpk_result* rs[] = {r.get()};
        const char* names[] = {m.label.c_str()};
        require(gpk_write_svg(rs, names, 1, m.label.c_str(), svg.c_str()), "writing " + svg);
      }
      print_summary(m.label, r.get());
      return exit_code(gpk_result_termination(r.get()));
    }

    if (*compare) {
      if (methods.empty()) throw Failure{kUsage, "--methods is empty"};
      std::vector<MethodChoice> choices;
      for (const auto& name : methods) choices.push_back(parse_method(name, solve_cfg.restart));
      SystemPtr sys = build_system(sys_cfg);
      std::filesystem::create_directories(out_dir);

      std::vector<ResultPtr> results;
      for (const auto& m : choices) {
        results.push_back(run(sys.get(), m, solve_cfg));
        const auto path = std::filesystem::path(out_dir) / (file_label(m.label) + ".csv");
        require(gpk_result_write_csv(results.back().get(), path.string().c_str()),
                "writing " + path.string());
        print_summary(m.label, results.back().get());
      }
      std::vector<const gpk_result*> rs;
      std::vector<const char*> names;
      for (std::size_t i = 0; i < choices.size(); ++i) {
        rs.push_back(results[i].get());
        names.push_back(choices[i].label.c_str());
      }
      const auto wide = (std::filesystem::path(out_dir) / "compare.csv").string();
      require(gpk_write_wide_csv(rs.data(), names.data(), rs.size(), wide.c_str()),
              "writing " + wide);
      if (!compare_svg.empty())
        require(gpk_write_svg(rs.data(), names.data(), rs.size(), title.c_str(),
                              compare_svg.c_str()),
                "writing " + compare_svg);

      int code = kConverged;
      for (const auto& r : results) {
        const int c = exit_code(gpk_result_termination(r.get()));
        if (c == kBreakdown) code = kBreakdown;
        else if (c == kMaxit && code == kConverged) code = kMaxit;
      }
      return code;
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
