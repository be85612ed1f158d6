#include "gpk/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "gpk/error.hpp"

namespace gpk {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool blank_or_comment(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '%';
}

double parse_value(const std::string& tok, const std::string& where) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = first + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError(where + ": bad numeric value '" + tok + "'");
  return v;
}

std::size_t parse_index(const std::string& tok, const std::string& where) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(where + ": bad integer '" + tok + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void check_written(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

SparseMatrix parse_matrix_market(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": empty file");
  const auto head = split_ws(line);
  if (head.size() != 5 || head[0] != "%%MatrixMarket" || lower(head[1]) != "matrix")
    throw ParseError(source + ": malformed header '" + line + "'");
  const std::string format = lower(head[2]);
  const std::string field = lower(head[3]);
  const std::string symmetry = lower(head[4]);

  if (format != "coordinate" && format != "array")
    throw ParseError(source + ": unknown format '" + head[2] + "'");
  if (field == "complex")
    throw ParseError(source + ": complex matrices are not supported (real values required)");
  if (field == "pattern")
    throw ParseError(source + ": pattern matrices carry no values (real values required)");
  if (field != "real" && field != "double" && field != "integer")
    throw ParseError(source + ": unknown field '" + head[3] + "'");
  bool symmetric = false, skew = false;
  if (symmetry == "symmetric" || symmetry == "hermitian") {
    symmetric = true;
  } else if (symmetry == "skew-symmetric") {
    skew = true;
  } else if (symmetry != "general") {
    throw ParseError(source + ": unknown symmetry '" + head[4] + "'");
  }

  std::size_t lineno = 1;
  auto where = [&] { return source + ":" + std::to_string(lineno); };
  bool have_size = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!blank_or_comment(line)) {
      have_size = true;
      break;
    }
  }
  if (!have_size) throw ParseError(source + ": missing size line");
  const auto size = split_ws(line);
  const bool coord = format == "coordinate";
  if (size.size() != (coord ? 3u : 2u)) throw ParseError(where() + ": malformed size line");
  const std::size_t rows = parse_index(size[0], where());
  const std::size_t cols = parse_index(size[1], where());
  if ((symmetric || skew) && rows != cols)
    throw ParseError(where() + ": symmetric storage requires a square matrix");

  std::vector<Triplet> entries;
  auto add = [&](std::size_t i, std::size_t j, double v) {
    entries.push_back({i, j, v});
    if (i != j) {
      if (symmetric) entries.push_back({j, i, v});
      if (skew) entries.push_back({j, i, -v});
    }
  };

  if (coord) {
    const std::size_t nnz = parse_index(size[2], where());
    entries.reserve(symmetric || skew ? 2 * nnz : nnz);
    std::size_t seen = 0;
    while (seen < nnz && std::getline(in, line)) {
      ++lineno;
      if (blank_or_comment(line)) continue;
      const auto tok = split_ws(line);
      if (tok.size() != 3) throw ParseError(where() + ": expected 'row col value'");
      const std::size_t i = parse_index(tok[0], where());
      const std::size_t j = parse_index(tok[1], where());
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw ParseError(where() + ": index (" + tok[0] + ", " + tok[1] + ") out of bounds for " +
                         std::to_string(rows) + " x " + std::to_string(cols));
      if (skew && i == j) throw ParseError(where() + ": diagonal entry in skew-symmetric file");
      add(i - 1, j - 1, parse_value(tok[2], where()));
      ++seen;
    }
    if (seen < nnz)
      throw ParseError(source + ": expected " + std::to_string(nnz) + " entries, found " +
                       std::to_string(seen));
  } else {
    // Column-major; symmetric storage lists the lower triangle only.
    std::size_t i = 0, j = 0;
    if (skew) i = 1;
    if (i >= rows) j = cols;
    const bool triangular = symmetric || skew;
    auto done = [&] { return j >= cols || rows == 0; };
    while (!done() && std::getline(in, line)) {
      ++lineno;
      if (blank_or_comment(line)) continue;
      for (const auto& tok : split_ws(line)) {
        if (done()) throw ParseError(where() + ": too many values");
        const double v = parse_value(tok, where());
        if (v != 0.0) add(i, j, v);
        if (++i == rows) {
          ++j;
          i = triangular ? j + (skew ? 1 : 0) : 0;
          if (i >= rows) j = cols;  // the trailing columns of a triangle are empty
        }
      }
    }
    if (!done()) throw ParseError(source + ": array data ended early");
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (!blank_or_comment(line)) throw ParseError(where() + ": unexpected trailing data");
  }
  return SparseMatrix(rows, cols, std::move(entries));
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_matrix_market(in, path.string());
}

void write_matrix_market(const SparseMatrix& M, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << M.rows() << ' ' << M.cols() << ' ' << M.nonzeros() << '\n';
  const auto ptr = M.row_ptr();
  const auto col = M.col_index();
  const auto val = M.values();
  for (std::size_t i = 0; i < M.rows(); ++i)
    for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p)
      out << (i + 1) << ' ' << (col[p] + 1) << ' ' << format_double(val[p]) << '\n';
}

void write_matrix_market(const SparseMatrix& M, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_matrix_market(M, out);
  check_written(out, path);
}

const std::vector<ExperimentSpec>& experiments() {
  static const std::vector<ExperimentSpec> list = {
      {"well1033", {"well1033", "illc1033"}, 1.0, -0.1, true},
      {"well1850", {"well1850", "illc1850"}, 1.0, -0.05, true},
      {"lp_osa_07", {"lp_osa_07"}, 1.0, -1.0, false},
      {"lpi_klein3", {"lpi_klein3"}, 1.0, -1.0, false},
  };
  return list;
}

std::optional<ExperimentSpec> find_experiment(std::string_view name) {
  for (const auto& e : experiments())
    if (e.name == name) return e;
  return std::nullopt;
}

PartitionedSystem system_with_unit_solution(SparseMatrix A, SparseMatrix B, double lambda,
                                            double mu) {
  if (A.rows() != B.cols() || A.cols() != B.rows())
    throw DimensionError("A is " + std::to_string(A.rows()) + " x " + std::to_string(A.cols()) +
                         " but B is " + std::to_string(B.rows()) + " x " +
                         std::to_string(B.cols()));
  const Vector ones_n(A.cols(), 1.0), ones_m(A.rows(), 1.0);
  Vector b(A.rows(), lambda), c(B.rows(), mu);
  A.multiply(ones_n, b, 1.0, 1.0);
  B.multiply(ones_m, c, 1.0, 1.0);
  return PartitionedSystem::make(Operator::sparse(std::move(A)), Operator::sparse(std::move(B)),
                                 lambda, mu, std::move(b), std::move(c));
}

PartitionedSystem build_experiment(std::string_view name, const std::vector<SparseMatrix>& matrices,
                                   std::optional<double> lambda, std::optional<double> mu) {
  const auto spec = find_experiment(name);
  if (!spec) throw UsageError("unknown experiment '" + std::string(name) + "'");
  if (matrices.size() != spec->matrices.size())
    throw UsageError("experiment '" + spec->name + "' needs " +
                     std::to_string(spec->matrices.size()) + " matrices");
  const double l = lambda.value_or(spec->lambda);
  const double u = mu.value_or(spec->mu);
  if (spec->transpose_first) return system_with_unit_solution(matrices[0].transposed(), matrices[1], l, u);
  return system_with_unit_solution(matrices[0], matrices[0].transposed(), l, u);
}

std::filesystem::path locate_matrix(const std::filesystem::path& dir, const std::string& name) {
  for (const auto& p : {dir / (name + ".mtx"), dir / name / (name + ".mtx")})
    if (std::filesystem::is_regular_file(p)) return p;
  throw IoError("matrix '" + name + "' not found under '" + dir.string() +
                "' (expected " + name + ".mtx from the SuiteSparse Matrix Collection)");
}

PartitionedSystem load_experiment(std::string_view name, const std::filesystem::path& dir,
                                  std::optional<double> lambda, std::optional<double> mu) {
  const auto spec = find_experiment(name);
  if (!spec) throw UsageError("unknown experiment '" + std::string(name) + "'");
  std::vector<SparseMatrix> mats;
  for (const auto& m : spec->matrices) mats.push_back(read_matrix_market(locate_matrix(dir, m)));
  return build_experiment(name, mats, lambda, mu);
}

namespace {

std::string csv_field(double v) { return std::isnan(v) ? std::string() : format_double(v); }

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

constexpr const char* kCsvHeader = "k,est_residual,true_residual,transfer_defined,elapsed_s";

}  // namespace

void write_convergence_csv(const ConvergenceRecord& record, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : record.rows)
    out << r.k << ',' << csv_field(r.est_residual) << ',' << csv_field(r.true_residual) << ','
        << (r.transfer_defined ? 1 : 0) << ',' << csv_field(r.elapsed_s) << '\n';
  if (!record.reason.empty()) out << "# " << record.reason << '\n';
}

void write_convergence_csv(const ConvergenceRecord& record, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_convergence_csv(record, out);
  check_written(out, path);
}

ConvergenceRecord parse_convergence_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("convergence CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ParseError("convergence CSV: unexpected header '" + line + "'");
  ConvergenceRecord rec;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "convergence CSV line " + std::to_string(lineno);
    if (line[0] == '#') {
      rec.reason = line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
      continue;
    }
    const auto f = split_commas(line);
    if (f.size() != 5) throw ParseError(where + ": expected 5 fields");
    auto num = [&](const std::string& s) { return s.empty() ? kNaN : parse_value(s, where); };
    IterationRecord r;
    r.k = parse_index(f[0], where);
    r.est_residual = num(f[1]);
    r.true_residual = num(f[2]);
    if (f[3] != "0" && f[3] != "1") throw ParseError(where + ": transfer_defined must be 0 or 1");
    r.transfer_defined = f[3] == "1";
    r.elapsed_s = num(f[4]);
    if (!rec.rows.empty() && r.k <= rec.rows.back().k)
      throw ParseError(where + ": k must be strictly increasing");
    rec.rows.push_back(r);
  }
  return rec;
}

ConvergenceRecord read_convergence_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_convergence_csv(in);
}

void write_wide_csv(const std::vector<NamedRecord>& series, std::ostream& out) {
  std::size_t kmax = 0;
  bool any = false;
  out << 'k';
  for (const auto& s : series) {
    out << ',' << s.name;
    if (!s.record->rows.empty()) {
      any = true;
      kmax = std::max(kmax, s.record->rows.back().k);
    }
  }
  out << '\n';
  if (!any) return;
  std::vector<std::size_t> cursor(series.size(), 0);
  for (std::size_t k = 0; k <= kmax; ++k) {
    std::ostringstream row;
    bool hit = false;
    for (std::size_t i = 0; i < series.size(); ++i) {
      const auto& rows = series[i].record->rows;
      auto& c = cursor[i];
      while (c < rows.size() && rows[c].k < k) ++c;
      row << ',';
      if (c < rows.size() && rows[c].k == k) {
        const auto& r = rows[c];
        row << csv_field(std::isnan(r.true_residual) ? r.est_residual : r.true_residual);
        hit = true;
      }
    }
    if (hit) out << k << row.str() << '\n';
  }
}

void write_wide_csv(const std::vector<NamedRecord>& series, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_wide_csv(series, out);
  check_written(out, path);
}

void write_convergence_svg(const std::vector<NamedRecord>& series, std::ostream& out,
                           const std::string& title) {
  constexpr double W = 720, H = 480, L = 70, R = 150, T = 40, Bm = 50;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  auto value = [](const IterationRecord& r) {
    return std::isnan(r.true_residual) ? r.est_residual : r.true_residual;
  };

  std::size_t kmax = 1;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : series)
    for (const auto& r : s.record->rows) {
      kmax = std::max(kmax, r.k);
      const double v = value(r);
      if (v > 0 && std::isfinite(v)) {
        lo = std::min(lo, std::log10(v));
        hi = std::max(hi, std::log10(v));
      }
    }
  if (!(lo <= hi)) lo = -1, hi = 1;
  lo = std::floor(lo);
  hi = std::ceil(hi);
  if (hi == lo) hi = lo + 1;

  auto px = [&](double k) { return L + (W - L - R) * k / static_cast<double>(kmax); };
  auto py = [&](double lg) { return T + (H - T - Bm) * (hi - lg) / (hi - lo); };

  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title
        << "</text>\n";
  out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
      << H - T - Bm << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(lo); e <= static_cast<int>(hi); ++e) {
    const double y = py(e);
    out << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << y << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << e
        << "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double k = std::round(kmax * t / 4.0);
    out << "<text x=\"" << px(k) << "\" y=\"" << H - Bm + 18 << "\" text-anchor=\"middle\">" << k
        << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\">iteration</text>\n";
  out << "<text transform=\"translate(18," << (T + H - Bm) / 2
      << ") rotate(-90)\" text-anchor=\"middle\">residual norm</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = palette[i % std::size(palette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& r : series[i].record->rows) {
      const double v = value(r);
      if (!(v > 0) || !std::isfinite(v)) continue;
      out << px(static_cast<double>(r.k)) << ',' << py(std::log10(v)) << ' ';
    }
    out << "\"/>\n";
    const double ly = T + 10 + 18 * static_cast<double>(i);
    out << "<line x1=\"" << W - R + 10 << "\" x2=\"" << W - R + 30 << "\" y1=\"" << ly
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << W - R + 35 << "\" y=\"" << ly + 4 << "\">" << series[i].name
        << "</text>\n";
  }
  out << "</svg>\n";
}

void write_convergence_svg(const std::vector<NamedRecord>& series,
                           const std::filesystem::path& path, const std::string& title) {
  auto out = open_out(path);
  write_convergence_svg(series, out, title);
  check_written(out, path);
}

}  // namespace gpk
