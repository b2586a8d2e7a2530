#pragma once

// JSON and plain-text serialization of parameters, configurations and reports.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "incomefp/empirics.hpp"
#include "incomefp/error.hpp"
#include "incomefp/estimate.hpp"
#include "incomefp/inequality.hpp"
#include "incomefp/model.hpp"
#include "incomefp/simulate.hpp"

namespace incomefp {

using json = nlohmann::ordered_json;

inline json to_json(const ShapeParams& s) {
  return json{{"T", s.T},         {"T1", s.T1}, {"alpha", s.alpha},      {"alpha1", s.alpha1},
              {"m0", s.m0},       {"m1", s.m1}, {"m_init", s.m_init}};
}

inline json to_json(const LangevinCoeffs& c, double m1, double m_init) {
  return json{{"A0", c.A0}, {"a", c.a}, {"A0_hi", c.A0_hi}, {"a_hi", c.a_hi},
              {"B0", c.B0}, {"b", c.b}, {"m1", m1},          {"m_init", m_init}};
}

namespace detail {

inline double number_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw DomainError(std::string("missing field \"") + key + "\"");
  if (!it->is_number()) throw DomainError(std::string("field \"") + key + "\" must be a number");
  return it->get<double>();
}

}  // namespace detail

/// True for a coefficient document ({A0, a, ...}), false for shape parameters.
inline bool is_coeffs_json(const json& j) { return j.is_object() && j.contains("A0"); }

inline ShapeParams shape_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("parameter document must be a JSON object");
  ShapeParams s;
  s.T = detail::number_field(j, "T");
  s.T1 = j.contains("T1") ? detail::number_field(j, "T1") : s.T;
  s.alpha = detail::number_field(j, "alpha");
  s.alpha1 = detail::number_field(j, "alpha1");
  s.m0 = detail::number_field(j, "m0");
  s.m1 = detail::number_field(j, "m1");
  s.m_init = detail::number_field(j, "m_init");
  s.validate();
  return s;
}

struct CoeffsDoc {
  LangevinCoeffs coeffs;
  double m1 = 0.0;
  double m_init = 0.0;
};

inline CoeffsDoc coeffs_from_json(const json& j) {
  CoeffsDoc d;
  d.coeffs.A0 = detail::number_field(j, "A0");
  d.coeffs.a = detail::number_field(j, "a");
  d.coeffs.A0_hi = detail::number_field(j, "A0_hi");
  d.coeffs.a_hi = detail::number_field(j, "a_hi");
  d.coeffs.B0 = detail::number_field(j, "B0");
  d.coeffs.b = detail::number_field(j, "b");
  d.m1 = detail::number_field(j, "m1");
  d.m_init = detail::number_field(j, "m_init");
  d.coeffs.validate();
  return d;
}

/// Reads a JSON document; syntax errors become ParseError with position.
inline json load_json(const std::string& path) {
  const std::string text = detail::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Recover line and column from the byte offset.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(path + ": invalid JSON", line, col);
  }
}

inline json to_json(const SimConfig& c) {
  json j = to_json(c.coeffs, c.m1, c.m_init);
  j["dt"] = c.dt;
  j["n_steps"] = c.n_steps;
  j["n_paths"] = c.n_paths;
  j["seed"] = c.seed;
  j["burn_in"] = c.burn_in;
  j["initial"] = c.initial.empty() ? json("T") : json("sample");
  return j;
}

inline json to_json(const FitReport& r) {
  json j;
  j["params"] = to_json(r.params.shape());
  j["n_points"] = r.n_points;
  j["segments"] = {
      {"T_bg", r.T_bg},
      {"T_bg_se", r.T_bg_se},
      {"alpha", r.alpha_fit},
      {"alpha_se", r.alpha_fit_se},
      {"alpha1", r.alpha1_fit},
      {"alpha1_se", r.alpha1_fit_se},
      {"m0", r.m0_hat},
      {"m0_rel_unc", r.m0_rel_unc},
      {"m1", r.m1_hat},
      {"m1_rel_unc", r.m1_rel_unc},
      {"ssr", {r.ssr_per_segment[0], r.ssr_per_segment[1], r.ssr_per_segment[2]}},
  };
  j["refined_T"] = r.refined_T;
  j["global_refinement"] = r.global_refinement;
  j["objective"] = {{"segments", r.objective_segments}, {"refined", r.objective_refined}, {"final", r.objective_final}};
  return j;
}

inline json to_json(const RankFit& f) {
  return json{{"alpha_rank", f.alpha_rank}, {"alpha_pareto", f.alpha_pareto}, {"stderr", f.stderr}, {"n", f.n}};
}

inline json to_json(const ClassStats& s) {
  json j{{"f_low", s.f_low}, {"f_med", s.f_med}, {"f_high", s.f_high},
         {"r1", s.r1},       {"r2", s.r2},       {"median", s.median}};
  if (s.gini) j["gini"] = *s.gini;
  return j;
}

namespace detail {

inline std::string fixed(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

inline void row(std::ostream& os, const std::string& name, const std::string& value) {
  os << name;
  for (std::size_t i = name.size(); i < 12; ++i) os << ' ';
  os << value << '\n';
}

}  // namespace detail

inline std::string summary_table(const ClassStats& s) {
  std::ostringstream os;
  detail::row(os, "f_low", detail::fixed(s.f_low, 4) + " %");
  detail::row(os, "f_med", detail::fixed(s.f_med, 4) + " %");
  detail::row(os, "f_high", detail::fixed(s.f_high, 4) + " %");
  detail::row(os, "r1", detail::fixed(s.r1, 4));
  detail::row(os, "r2", detail::fixed(s.r2, 4));
  detail::row(os, "median", detail::fixed(s.median, 2) + " EUR");
  if (s.gini) detail::row(os, "gini", detail::fixed(*s.gini, 4));
  return os.str();
}

inline std::string summary_table(const FitReport& r) {
  const ShapeParams& s = r.params.shape();
  std::ostringstream os;
  os << "parameter   segment fit          final\n";
  auto line = [&](const char* name, double seg, double fin, int prec) {
    std::string a = detail::fixed(seg, prec);
    std::string b = detail::fixed(fin, prec);
    os << name;
    for (std::size_t i = std::char_traits<char>::length(name); i < 12; ++i) os << ' ';
    os << a;
    for (std::size_t i = a.size(); i < 21; ++i) os << ' ';
    os << b << '\n';
  };
  line("T", r.T_bg, s.T, 2);
  line("alpha", r.alpha_fit, s.alpha, 4);
  line("alpha1", r.alpha1_fit, s.alpha1, 4);
  line("m0", r.m0_hat, s.m0, 2);
  line("m1", r.m1_hat, s.m1, 2);
  os << "objective   " << detail::fixed(r.objective_segments, 6) << " -> " << detail::fixed(r.objective_final, 6)
     << '\n';
  return os.str();
}

inline void write_json(std::ostream& os, const json& j) { os << j.dump(2) << '\n'; }

}  // namespace incomefp
