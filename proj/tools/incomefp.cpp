// incomefp: command-line front end for the threshold income model.
//
// Exit codes: 0 success, 1 internal error, 2 bad input, 3 estimation failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "incomefp/incomefp.hpp"

namespace {

using namespace incomefp;

struct Globals {
  std::string output;
  std::uint64_t seed = 1;
  bool quiet = false;
};

/// Writes to --output when given, otherwise to stdout.
template <class F>
void emit(const Globals& g, F&& write) {
  if (g.output.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream os(g.output, std::ios::binary);
  if (!os) throw IoError("cannot open " + g.output + " for writing");
  write(os);
  if (!os) throw IoError("write to " + g.output + " failed");
}

void note(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << (msg.empty() || msg.back() == '\n' ? "" : "\n");
}

template <class T>
void report_warnings(const Globals& g, const Loaded<T>& l) {
  for (const auto& w : l.warnings) note(g, "warning: " + w);
}

/// Shape parameters from either a parameter or a coefficient document.
ShapeParams read_shape(const std::string& path) {
  const json j = load_json(path);
  if (is_coeffs_json(j)) {
    const CoeffsDoc d = coeffs_from_json(j);
    return coeffs_to_effective(d.coeffs, d.m1, d.m_init).shape();
  }
  return shape_from_json(j);
}

bool looks_like_ccdf(const std::string& path) {
  std::ifstream is(path);
  std::string first;
  std::getline(is, first);
  return first.rfind("income,ccdf", 0) == 0;
}

EmpiricalCCDF read_ccdf_or_incomes(const Globals& g, const std::string& path) {
  if (looks_like_ccdf(path)) return load_ccdf_csv(path);
  const auto loaded = load_incomes(path);
  report_warnings(g, loaded);
  return rank_ccdf(loaded.values);
}

// ---------------------------------------------------------------------------

int cmd_ccdf(const Globals& g, const std::string& input) {
  const auto loaded = load_incomes(input);
  report_warnings(g, loaded);
  const EmpiricalCCDF c = rank_ccdf(loaded.values);
  emit(g, [&](std::ostream& os) { write_ccdf_csv(os, c); });
  return 0;
}

struct FuseArgs {
  std::string survey, pairs;
  std::optional<double> factor, cut;
  std::size_t top_k = 8;
};

int cmd_fuse(const Globals& g, const FuseArgs& a) {
  const auto survey = load_incomes(a.survey);
  report_warnings(g, survey);
  const auto pairs = load_wealth_pairs(a.pairs);
  report_warnings(g, pairs);
  const auto rich = forbes_incomes(pairs.values);
  if (!a.factor && rich.empty()) throw DomainError("rich list has no positive income gains; pass --factor");
  FuseOptions o;
  o.cut = a.cut;
  o.top_k = a.top_k;
  const FuseResult r = fuse(survey.values, rich, a.factor, o);
  emit(g, [&](std::ostream& os) { write_incomes_csv(os, incomes_of(r.records)); });
  note(g, "factor: " + format_double(r.factor) + (r.factor_computed ? " (computed)" : " (given)"));
  note(g, "records: " + std::to_string(survey.values.size()) + " survey + " + std::to_string(rich.size()) + " rich list");
  if (!r.full_overlap) note(g, "warning: scaled rich list does not reach the survey maximum (full overlap violated)");
  return 0;
}

struct FitArgs {
  std::string input;
  std::optional<double> m_init;
  bool no_global = false;
};

int cmd_fit(const Globals& g, const FitArgs& a) {
  const EmpiricalCCDF c = read_ccdf_or_incomes(g, a.input);
  if (c.points.empty()) throw DomainError("no data to fit");
  double m_init = c.points.back().income;
  if (a.m_init) m_init = *a.m_init;
  FitOptions o;
  o.global_refinement = !a.no_global;
  const FitReport r = fit_full(c, m_init, o);
  emit(g, [&](std::ostream& os) { write_json(os, to_json(r)); });
  note(g, summary_table(r));
  return 0;
}

struct EvalArgs {
  std::string params;
  std::size_t grid = 400;
  std::optional<double> lo, hi;
};

int cmd_eval(const Globals& g, const EvalArgs& a) {
  const ModelParams p = normalize(ModelParams(read_shape(a.params)));
  const ShapeParams& s = p.shape();
  const double lo = a.lo.value_or(s.m_init);
  const double hi = a.hi.value_or(100.0 * s.m1);
  if (!(lo >= s.m_init) || !(hi > lo)) throw DomainError("grid must satisfy m_init <= min < max");
  if (a.grid < 2) throw DomainError("grid needs at least two points");
  std::vector<double> m(a.grid);
  for (std::size_t i = 0; i < a.grid; ++i) {
    m[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(a.grid - 1));
  }
  m.front() = lo;
  m.back() = hi;
  const auto pi = ccdf_sorted(p, m);
  emit(g, [&](std::ostream& os) {
    os << "m,ccdf\n";
    for (std::size_t i = 0; i < m.size(); ++i) os << format_double(m[i]) << ',' << format_double(pi[i]) << '\n';
  });
  return 0;
}

struct SimArgs {
  std::string params;
  std::optional<double> dt;
  std::size_t n_paths = 100000;
  std::size_t n_steps = 2500;
  std::size_t burn_in = 0;
  unsigned threads = 0;
  std::string initial;
  std::string report;
};

int cmd_simulate(const Globals& g, const SimArgs& a) {
  const json j = load_json(a.params);
  SimConfig cfg;
  if (is_coeffs_json(j)) {
    const CoeffsDoc d = coeffs_from_json(j);
    cfg.coeffs = d.coeffs;
    cfg.m1 = d.m1;
    cfg.m_init = d.m_init;
  } else {
    const ShapeParams s = shape_from_json(j);
    cfg.coeffs = effective_to_coeffs(s);
    cfg.m1 = s.m1;
    cfg.m_init = s.m_init;
  }
  // Default step: a small fraction of the bulk relaxation time T^2 / B0.
  const double T = cfg.coeffs.B0 / cfg.coeffs.A0;
  cfg.dt = a.dt.value_or(std::min(0.005 * T * T / cfg.coeffs.B0, 0.5 * cfg.max_dt()));
  cfg.n_paths = a.n_paths;
  cfg.n_steps = a.n_steps;
  cfg.burn_in = a.burn_in;
  cfg.seed = g.seed;
  cfg.threads = a.threads;
  if (!a.initial.empty()) {
    const auto init = load_incomes(a.initial);
    report_warnings(g, init);
    cfg.initial = incomes_of(init.values);
    if (cfg.initial.empty()) throw DomainError("initial distribution file is empty");
  }

  const Ensemble e = run_ensemble(cfg);
  emit(g, [&](std::ostream& os) { write_incomes_csv(os, e.samples); });

  json rep;
  rep["config"] = to_json(cfg);
  rep["n_reflections"] = e.n_reflections;
  try {
    const ModelParams p = normalize(coeffs_to_effective(cfg.coeffs, cfg.m1, cfg.m_init));
    rep["ks"] = ks_distance(e.samples, p);
  } catch (const TailDivergenceError&) {
    rep["ks"] = nullptr;
  }
  if (!a.report.empty()) {
    std::ofstream os(a.report, std::ios::binary);
    if (!os) throw IoError("cannot open " + a.report + " for writing");
    write_json(os, rep);
  }
  note(g, rep["ks"].is_null() ? std::string("ks: n/a (tail not normalizable)")
                              : "ks: " + format_double(rep["ks"].get<double>()));
  return 0;
}

struct StatsArgs {
  std::string params, incomes;
};

int cmd_stats(const Globals& g, const StatsArgs& a) {
  if (a.params.empty() && a.incomes.empty()) throw DomainError("stats needs --params and/or --incomes");
  std::optional<std::vector<double>> sample;
  if (!a.incomes.empty()) {
    const auto loaded = load_incomes(a.incomes);
    report_warnings(g, loaded);
    sample = incomes_of(loaded.values);
  }
  json j;
  std::string table;
  if (!a.params.empty()) {
    const ModelParams p = normalize(ModelParams(read_shape(a.params)));
    std::optional<std::span<const double>> span;
    if (sample) span = std::span<const double>(*sample);
    const ClassStats s = class_stats(p, span);
    j = to_json(s);
    table = summary_table(s);
  } else {
    const double gv = gini(std::span<const double>(*sample));
    j["gini"] = gv;
    table = "gini        " + format_double(gv) + "\n";
  }
  emit(g, [&](std::ostream& os) { write_json(os, j); });
  note(g, table);
  return 0;
}

int cmd_rank(const Globals& g, const std::string& input) {
  const auto loaded = load_incomes(input);
  report_warnings(g, loaded);
  RankFit f;
  try {
    f = fit_rank(incomes_of(loaded.values));
  } catch (const EstimationError& e) {
    // Too few or constant values are bad input for this command.
    throw DomainError(e.what());
  }
  emit(g, [&](std::ostream& os) { write_json(os, to_json(f)); });
  note(g, "alpha_rank " + format_double(f.alpha_rank) + ", alpha_pareto " + format_double(f.alpha_pareto));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Threshold Fokker-Planck income model: evaluation, fitting, simulation and statistics"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("-o,--output", g.output, "Output file (default: stdout)");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_flag("-q,--quiet", g.quiet, "Suppress reports on stderr");

  std::string ccdf_in;
  auto* ccdf = app.add_subcommand("ccdf", "Empirical CCDF of an income file");
  ccdf->add_option("incomes", ccdf_in, "Income CSV")->required();

  FuseArgs fa;
  auto* fusec = app.add_subcommand("fuse", "Join survey incomes with a scaled rich list");
  fusec->add_option("survey", fa.survey, "Survey income CSV")->required();
  fusec->add_option("pairs", fa.pairs, "Wealth pairs CSV (id,wealth_prev,wealth_curr)")->required();
  fusec->add_option("--factor", fa.factor, "Scale factor for rich-list incomes");
  fusec->add_option("--cut", fa.cut, "Survey incomes above this form the high segment");
  fusec->add_option("--top-k", fa.top_k, "Size of the high segment when no cut is given")->capture_default_str();

  FitArgs fi;
  auto* fit = app.add_subcommand("fit", "Fit the model to an income or CCDF file");
  fit->add_option("input", fi.input, "Income CSV or CCDF CSV")->required();
  fit->add_option("--m-init", fi.m_init, "Lowest income (default: data minimum)");
  fit->add_flag("--no-global", fi.no_global, "Keep segment estimates; refine T only");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Model CCDF on a log-spaced grid");
  eval->add_option("params", ea.params, "Parameter or coefficient JSON")->required();
  eval->add_option("--grid", ea.grid, "Number of grid points")->capture_default_str();
  eval->add_option("--min", ea.lo, "First grid point (default: m_init)");
  eval->add_option("--max", ea.hi, "Last grid point (default: 100 m1)");

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Langevin ensemble simulation");
  sim->add_option("params", sa.params, "Parameter or coefficient JSON")->required();
  sim->add_option("--dt", sa.dt, "Time step");
  sim->add_option("--n-paths", sa.n_paths, "Number of paths")->capture_default_str();
  sim->add_option("--n-steps", sa.n_steps, "Steps per path")->capture_default_str();
  sim->add_option("--burn-in", sa.burn_in, "Steps counted as burn-in")->capture_default_str();
  sim->add_option("--threads", sa.threads, "Worker threads (0: all cores)")->capture_default_str();
  sim->add_option("--initial", sa.initial, "Income CSV of start values");
  sim->add_option("--report", sa.report, "Write the KS report JSON here");

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Class fractions, ratios, median and Gini");
  stats->add_option("--params", st.params, "Parameter or coefficient JSON");
  stats->add_option("--incomes", st.incomes, "Income CSV for the sample Gini");

  std::string rank_in;
  auto* rank = app.add_subcommand("rank", "Rank-size Pareto exponent");
  rank->add_option("values", rank_in, "Value CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ccdf) return cmd_ccdf(g, ccdf_in);
    if (*fusec) return cmd_fuse(g, fa);
    if (*fit) return cmd_fit(g, fi);
    if (*eval) return cmd_eval(g, ea);
    if (*sim) return cmd_simulate(g, sa);
    if (*stats) return cmd_stats(g, st);
    if (*rank) return cmd_rank(g, rank_in);
  } catch (const EstimationError& e) {
    std::cerr << "estimation failed: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
