#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "qszasz/cli.hpp"
#include "qszasz/errors.hpp"
#include "qszasz/moments.hpp"
#include "qszasz/operator.hpp"

namespace qszasz::cli {

namespace {

enum class LogLevel { quiet, info, debug };

class Failure : public std::runtime_error {
 public:
  Failure(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

LogLevel log_level_from_env() {
  const char* raw = std::getenv("QSZASZ_LOG");
  if (raw == nullptr || *raw == '\0') return LogLevel::info;
  const std::string v(raw);
  if (v == "quiet") return LogLevel::quiet;
  if (v == "info") return LogLevel::info;
  if (v == "debug") return LogLevel::debug;
  throw Failure(ExitCode::usage, "QSZASZ_LOG must be quiet, info or debug, got '" + v + "'");
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

const char* code_name(ExitCode code) {
  switch (code) {
    case ExitCode::usage:
      return "usage";
    case ExitCode::numerical:
      return "numerical";
    case ExitCode::assertion:
      return "assertion";
    default:
      return "ok";
  }
}

struct Options {
  double q = std::nan("");
  int n = 1;
  std::vector<double> xs;
  std::string f;
  int p = -1;
  int nmin = 1;
  int nmax = 12;
  double x_max = 10.0;
  int count = 2001;
  bool classical = false;
  bool serial = false;
  int mmax = 4;
  int rmax = 4;
  int order = 2;
  std::vector<double> deltas;
  std::vector<double> hs{0.4, 0.2, 0.1};
  int quad = 64;
  std::string mode;
  bool assert_bound = false;

  double tol = SeriesPolicy{}.rel_tol;
  int max_terms = SeriesPolicy{}.max_terms;
  bool json = false;
  bool csv = false;
  std::string out;
};

struct Outcome {
  Table table;
  std::vector<std::string> summary;  // info lines for the error stream
  std::optional<Failure> failure;    // reported after the table is written
};

QContext context(const Options& o) {
  if (std::isnan(o.q)) throw Failure(ExitCode::usage, "--q is required");
  if (!(o.q >= 1.0 + QContext::min_q_gap)) {
    throw Failure(ExitCode::usage, "q must exceed 1 (got " + format_number(o.q) +
                                       "); the classical operator is selected with --classical");
  }
  return QContext(o.q, o.n);
}

SeriesPolicy policy(const Options& o) {
  SeriesPolicy p{o.tol, o.max_terms};
  p.validate();
  return p;
}

WeightedFunction function(const Options& o) {
  if (o.f.empty()) throw Failure(ExitCode::usage, "--f is required");
  auto wf = make_weighted_function(parse_function_spec(o.f), o.p);
  wf.validate();
  return wf;
}

GridSpec grid(const Options& o) {
  GridSpec g{o.x_max, o.count};
  g.validate();
  return g;
}

Execution exec(const Options& o) { return o.serial ? Execution::serial : Execution::parallel; }

const std::vector<double>& points(const Options& o) {
  if (o.xs.empty()) throw Failure(ExitCode::usage, "--x is required");
  return o.xs;
}

void flag_row_failures(const ExperimentReport& report, Outcome& outcome) {
  for (const auto& row : report.rows) {
    if (!row.failure.empty()) {
      outcome.failure.emplace(ExitCode::numerical,
                              "n=" + std::to_string(row.n) + " " + row.failure);
      return;
    }
  }
}

Outcome cmd_weights(const Options& o) {
  const auto ctx = context(o);
  const auto table = weight_table(points(o).front(), ctx, policy(o));
  Outcome out{{{"k", "node", "weight"}, {}}, {}, {}};
  for (int k = 0; k <= table.K; ++k) {
    out.table.rows.push_back({std::int64_t{k}, table.nodes[k], table.weights[k]});
  }
  out.summary.push_back("partition_defect=" + format_number(table.partition_defect) +
                        " tail_bound=" + format_number(table.tail_bound) +
                        " working_digits=" + std::to_string(table.working_digits));
  return out;
}

Outcome cmd_eval(const Options& o) {
  const auto wf = function(o);
  const auto pol = policy(o);
  Outcome out{{{"n", "q", "x", "value"}, {}}, {}, {}};
  for (double x : points(o)) {
    if (o.classical) {
      out.table.rows.push_back({std::int64_t{o.n}, 1.0, x, classical_szasz(wf.f, x, o.n, pol)});
    } else {
      const auto ctx = context(o);
      out.table.rows.push_back({std::int64_t{o.n}, o.q, x, apply_operator(wf.f, x, ctx, pol)});
    }
  }
  return out;
}

Outcome cmd_moments(const Options& o) {
  const auto ctx = context(o);
  const auto pol = policy(o);
  if (o.mmax < 0 || o.mmax > kDefaultMomentCap) throw Failure(ExitCode::usage, "--mmax must be in 0..12");
  Outcome out{{{"m", "x", "value_poly", "value_series", "value_rec1"}, {}}, {}, {}};
  for (int m = 0; m <= o.mmax; ++m) {
    for (double x : points(o)) {
      out.table.rows.push_back({std::int64_t{m}, x, raw_moment(m, x, ctx, MomentMethod::polynomial, pol),
                                raw_moment(m, x, ctx, MomentMethod::series, pol),
                                raw_moment(m, x, ctx, MomentMethod::recurrence1, pol)});
    }
  }
  return out;
}

Outcome cmd_central_moments(const Options& o) {
  const auto ctx = context(o);
  if (o.rmax < 0 || o.rmax > 8) throw Failure(ExitCode::usage, "--rmax must be in 0..8");
  Outcome out{{{"r", "x", "value", "reference"}, {}}, {}, {}};
  for (int r = 0; r <= o.rmax; ++r) {
    for (double x : points(o)) {
      const double ref = (r >= 2 && r <= 4) ? reference_central_moment(r, x, ctx) : std::nan("");
      out.table.rows.push_back({std::int64_t{r}, x, central_moment(r, x, ctx), ref});
    }
  }
  return out;
}

Outcome cmd_stirling(const Options& o) {
  if (o.mmax < 0 || o.mmax > kDefaultMomentCap) throw Failure(ExitCode::usage, "--mmax must be in 0..12");
  const auto table = o.classical ? classical_stirling_table(o.mmax) : qstirling_table(o.mmax, context(o));
  Outcome out{{{"m", "j", "value"}, {}}, {}, {}};
  for (int m = 0; m <= o.mmax; ++m) {
    for (int j = 0; j <= m; ++j) out.table.rows.push_back({std::int64_t{m}, std::int64_t{j}, table(m, j)});
  }
  return out;
}

Outcome cmd_converge(const Options& o) {
  const auto wf = function(o);
  if (!o.classical) context(o);
  const auto report = convergence_experiment(wf, o.classical ? 2.0 : o.q, {o.nmin, o.nmax}, grid(o),
                                             policy(o), o.classical, exec(o));
  Outcome out{{{"n", "q_integer_n", "sup_error", "log_error"}, {}}, {}, {}};
  for (const auto& row : report.rows) {
    out.table.rows.push_back({std::int64_t{row.n}, row.aux, row.lhs, row.ratio});
  }
  if (report.fitted_slope) {
    out.summary.push_back("fitted_slope=" + format_number(*report.fitted_slope) +
                          " fitted_intercept=" + format_number(*report.fitted_intercept) +
                          (o.classical ? " abscissa=ln_n" : " abscissa=n"));
  }
  flag_row_failures(report, out);
  return out;
}

Outcome cmd_voronovskaja(const Options& o) {
  const auto wf = function(o);
  context(o);
  const auto report = voronovskaja_scan(wf, o.q, points(o).front(), {o.nmin, o.nmax}, policy(o));
  Outcome out{{{"n", "V_n", "paper_limit", "diagnostic_limit"}, {}}, {}, {}};
  for (const auto& row : report.rows) out.table.rows.push_back({std::int64_t{row.n}, row.lhs, row.rhs, row.aux});
  flag_row_failures(report, out);
  return out;
}

Outcome cmd_modulus(const Options& o) {
  const auto wf = function(o);
  const auto g = grid(o);
  if (o.deltas.empty()) throw Failure(ExitCode::usage, "--delta is required");
  if (o.order != 1 && o.order != 2) throw Failure(ExitCode::usage, "--order must be 1 or 2");
  Outcome out{{{"order", "delta", "value"}, {}}, {}, {}};
  for (double d : o.deltas) {
    const double v = o.order == 1 ? first_modulus(wf.f.as_std_function(), d, g) : second_modulus(wf, d, g);
    out.table.rows.push_back({std::int64_t{o.order}, d, v});
  }
  return out;
}

Outcome cmd_steklov(const Options& o) {
  const auto wf = function(o);
  const auto g = grid(o);
  Outcome out{{{"h", "err_norm", "omega2", "fh2_norm", "fh2_norm_ratio", "bound_holds"}, {}}, {}, {}};
  for (double h : o.hs) {
    const auto c = steklov_check(wf, h, g, o.quad, exec(o));
    out.table.rows.push_back({h, c.error_norm, c.omega2, c.fh2_norm, c.fh2_ratio,
                              std::int64_t{c.error_bound_holds ? 1 : 0}});
  }
  return out;
}

Outcome cmd_bound_check(const Options& o) {
  static const std::map<std::string, BoundMode> modes{
      {"local", BoundMode::local}, {"global", BoundMode::global}, {"sqrtmod", BoundMode::sqrtmod}};
  const auto it = modes.find(o.mode);
  if (it == modes.end()) throw Failure(ExitCode::usage, "--mode must be local, global or sqrtmod");
  const auto wf = function(o);
  context(o);
  const auto report =
      bound_check(it->second, wf, o.q, {o.nmin, o.nmax}, grid(o), policy(o), exec(o));
  Outcome out{{{"n", "lhs", "rhs", "ratio"}, {}}, {}, {}};
  for (const auto& row : report.rows) out.table.rows.push_back({std::int64_t{row.n}, row.lhs, row.rhs, row.ratio});
  if (report.fitted_constant) out.summary.push_back("fitted_constant=" + format_number(*report.fitted_constant));
  if (it->second == BoundMode::sqrtmod) {
    out.summary.push_back(std::string("bound_violated=") + (report.bound_violated ? "1" : "0"));
  }
  flag_row_failures(report, out);
  if (!out.failure && o.assert_bound && report.bound_violated) {
    for (const auto& row : report.rows) {
      if (row.lhs > row.rhs) {
        out.failure.emplace(ExitCode::assertion, "sqrtmod bound violated at n=" + std::to_string(row.n) +
                                                     " lhs=" + format_number(row.lhs) +
                                                     " rhs=" + format_number(row.rhs));
        break;
      }
    }
  }
  return out;
}

Outcome cmd_positivity(const Options& o) {
  const auto ctx = context(o);
  const auto report = positivity_scan(ctx, grid(o).points(), policy(o));
  Outcome out{{{"kind", "index", "x", "value"}, {}}, {}, {}};
  for (const auto& z : report.zeros) {
    out.table.rows.push_back({std::string("eq_zero"), std::int64_t{z.j}, std::nan(""), z.z});
  }
  for (const auto& w : report.negatives) {
    out.table.rows.push_back({std::string("negative_weight"), std::int64_t{w.k}, w.x, w.weight});
  }
  out.summary.push_back("negative_weights=" + std::to_string(report.negatives.size()) +
                        " eq_zeros=" + std::to_string(report.zeros.size()));
  return out;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--tol", o.tol, "relative truncation tolerance");
  sub->add_option("--max-terms", o.max_terms, "term budget for every series");
  auto* json = sub->add_flag("--json", o.json, "emit JSON");
  auto* csv = sub->add_flag("--csv", o.csv, "emit CSV (default)");
  json->excludes(csv);
  sub->add_option("--out", o.out, "output file instead of standard output");
}

void add_grid(CLI::App* sub, Options& o) {
  sub->add_option("--xmax", o.x_max, "grid upper end");
  sub->add_option("--count", o.count, "grid points");
}

void add_range(CLI::App* sub, Options& o) {
  sub->add_option("--nmin", o.nmin, "first n");
  sub->add_option("--nmax", o.nmax, "last n");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto report_failure = [&err](ExitCode code, const std::string& what) {
    err << "qszasz: error=" << code_name(code) << " reason=" << one_line(what) << '\n';
    return static_cast<int>(code);
  };

  LogLevel level = LogLevel::info;
  try {
    level = log_level_from_env();
  } catch (const Failure& f) {
    return report_failure(f.code(), f.what());
  }

  Options o;
  CLI::App app{"q-Szasz operator toolkit", "qszasz"};
  app.require_subcommand(1);
  std::map<std::string, std::function<Outcome(const Options&)>> handlers;

  auto command = [&](const std::string& name, const std::string& help,
                     std::function<Outcome(const Options&)> fn) {
    auto* sub = app.add_subcommand(name, help);
    sub->set_help_flag("--help", "print this help and exit");
    add_common(sub, o);
    handlers[name] = std::move(fn);
    return sub;
  };

  auto* weights = command("weights", "operator weights s_nk(q;x)", cmd_weights);
  weights->add_option("--q", o.q)->required();
  weights->add_option("--n", o.n)->required();
  weights->add_option("--x", o.xs)->required()->expected(1);

  auto* eval = command("eval", "M_{n,q}(f;x)", cmd_eval);
  eval->add_option("--q", o.q);
  eval->add_option("--n", o.n)->required();
  eval->add_option("--x", o.xs)->required();
  eval->add_option("--f", o.f)->required();
  eval->add_flag("--classical", o.classical, "classical Szasz-Mirakjan operator");

  auto* moments = command("moments", "raw moments by three methods", cmd_moments);
  moments->add_option("--q", o.q)->required();
  moments->add_option("--n", o.n)->required();
  moments->add_option("--x", o.xs)->required();
  moments->add_option("--mmax", o.mmax);

  auto* central = command("central-moments", "central moments M((t-x)^r;x)", cmd_central_moments);
  central->add_option("--q", o.q)->required();
  central->add_option("--n", o.n)->required();
  central->add_option("--x", o.xs)->required();
  central->add_option("--rmax", o.rmax);

  auto* stirling = command("stirling", "q-Stirling numbers of the second kind", cmd_stirling);
  stirling->add_option("--q", o.q);
  stirling->add_option("--mmax", o.mmax);
  stirling->add_flag("--classical", o.classical, "classical Stirling numbers");

  auto* converge = command("converge", "weighted sup error against n", cmd_converge);
  converge->add_option("--q", o.q);
  converge->add_option("--f", o.f)->required();
  converge->add_option("--p", o.p);
  add_range(converge, o);
  add_grid(converge, o);
  converge->add_flag("--classical", o.classical, "classical baseline, fitted against ln n");
  converge->add_flag("--serial", o.serial, "serial grid evaluation");

  auto* voronovskaja = command("voronovskaja", "[n](M(f;x) - f(x)) against its limits", cmd_voronovskaja);
  voronovskaja->add_option("--q", o.q)->required();
  voronovskaja->add_option("--f", o.f)->required();
  voronovskaja->add_option("--x", o.xs)->required()->expected(1);
  add_range(voronovskaja, o);

  auto* modulus = command("modulus", "first or weighted second modulus", cmd_modulus);
  modulus->add_option("--f", o.f)->required();
  modulus->add_option("--p", o.p);
  modulus->add_option("--order", o.order);
  modulus->add_option("--delta", o.deltas)->required();
  add_grid(modulus, o);

  auto* steklov = command("steklov", "Steklov mean error and second derivative norms", cmd_steklov);
  steklov->add_option("--f", o.f)->required();
  steklov->add_option("--p", o.p);
  steklov->add_option("--h", o.hs);
  steklov->add_option("--quad", o.quad, "Gauss-Legendre points per axis");
  add_grid(steklov, o);
  steklov->add_flag("--serial", o.serial, "serial grid evaluation");

  auto* bound = command("bound-check", "error bounds per n", cmd_bound_check);
  bound->add_option("--mode", o.mode)->required();
  bound->add_option("--f", o.f)->required();
  bound->add_option("--p", o.p);
  bound->add_option("--q", o.q)->required();
  add_range(bound, o);
  add_grid(bound, o);
  bound->add_flag("--assert", o.assert_bound, "exit 3 when the sqrtmod bound fails");
  bound->add_flag("--serial", o.serial, "serial grid evaluation");

  auto* positivity = command("diagnose-positivity", "negative weights and e_q zeros", cmd_positivity);
  positivity->add_option("--q", o.q)->required();
  positivity->add_option("--n", o.n)->required();
  add_grid(positivity, o);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ExitCode::ok;
  } catch (const CLI::ParseError& e) {
    return report_failure(ExitCode::usage, e.what());
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = handlers.at(name)(o);
  } catch (const Failure& f) {
    return report_failure(f.code(), f.what());
  } catch (const SeriesExhausted& e) {
    return report_failure(ExitCode::numerical, e.what());
  } catch (const PrecisionExhausted& e) {
    return report_failure(ExitCode::numerical, e.what());
  } catch (const NonFiniteValue& e) {
    return report_failure(ExitCode::numerical, std::string(e.what()) + " at x=" + format_number(e.where()));
  } catch (const std::invalid_argument& e) {
    return report_failure(ExitCode::usage, e.what());
  } catch (const std::domain_error& e) {
    return report_failure(ExitCode::usage, e.what());
  } catch (const std::exception& e) {
    return report_failure(ExitCode::numerical, e.what());
  }

  std::ofstream file;
  std::ostream* sink = &out;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::binary | std::ios::trunc);
    if (!file) return report_failure(ExitCode::usage, "cannot open output file '" + o.out + "'");
    sink = &file;
  }
  if (o.json) {
    write_json(outcome.table, *sink);
  } else {
    write_csv(outcome.table, *sink);
  }
  sink->flush();
  if (!*sink) return report_failure(ExitCode::usage, "write failed");

  if (level != LogLevel::quiet) {
    for (const auto& line : outcome.summary) err << "qszasz: " << name << ' ' << line << '\n';
  }
  if (level == LogLevel::debug) {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    err << "qszasz: debug rows=" << outcome.table.rows.size() << " elapsed_s=" << elapsed << '\n';
  }
  if (outcome.failure) return report_failure(outcome.failure->code(), outcome.failure->what());
  return ExitCode::ok;
}

}  // namespace qszasz::cli
