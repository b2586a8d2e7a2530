#pragma once

// Empirical CCDFs from income records, and fusion of survey incomes with
// rich-list wealth differences.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "incomefp/error.hpp"

namespace incomefp {

struct IncomeRecord {
  double income = 0.0;
};

struct CcdfPoint {
  double income;
  double p;  // plotting position l / (n + 1)
};

/// Rank-ordered CCDF: points run from the richest record (rank 1) to the
/// poorest (rank n), so incomes are non-increasing and p strictly increasing.
struct EmpiricalCCDF {
  std::vector<CcdfPoint> points;
  std::size_t n = 0;
};

struct WealthPair {
  std::string id;
  double wealth_prev = 0.0;
  double wealth_curr = 0.0;
};

inline std::vector<double> incomes_of(const std::vector<IncomeRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.income);
  return out;
}

inline std::vector<IncomeRecord> records_of(const std::vector<double>& incomes) {
  std::vector<IncomeRecord> out;
  out.reserve(incomes.size());
  for (double x : incomes) out.push_back({x});
  return out;
}

/// Weibull plotting positions: the l-th richest of n records gets l / (n + 1).
/// Equal incomes keep their input order.
inline EmpiricalCCDF rank_ccdf(const std::vector<IncomeRecord>& records) {
  if (records.empty()) throw DomainError("rank_ccdf needs at least one record");
  std::vector<double> sorted = incomes_of(records);
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
  EmpiricalCCDF out;
  out.n = sorted.size();
  out.points.reserve(out.n);
  const double denom = static_cast<double>(out.n) + 1.0;
  for (std::size_t l = 1; l <= out.n; ++l) {
    out.points.push_back({sorted[l - 1], static_cast<double>(l) / denom});
  }
  return out;
}

/// Effective rich-list incomes: the year-on-year wealth gain of every entry
/// that gained. Losses and unchanged wealth are dropped.
inline std::vector<IncomeRecord> forbes_incomes(const std::vector<WealthPair>& pairs) {
  std::vector<IncomeRecord> out;
  for (const auto& w : pairs) {
    const double gain = w.wealth_curr - w.wealth_prev;
    if (gain > 0.0) out.push_back({gain});
  }
  return out;
}

struct ScaleFactor {
  double factor = 1.0;
  /// False when the scaled rich list ends below the survey's top income.
  bool full_overlap = true;
};

/// Common factor s for the rich-list incomes chosen so that the scaled rich
/// list starts exactly where the survey's high-income segment starts:
/// min(s * rich) == min(survey_high).
inline ScaleFactor find_scale_factor(const std::vector<IncomeRecord>& survey_high,
                                     const std::vector<IncomeRecord>& rich_list) {
  if (survey_high.empty()) throw DomainError("survey high-income segment is empty");
  if (rich_list.empty()) throw DomainError("rich list is empty");
  auto by_income = [](const IncomeRecord& a, const IncomeRecord& b) { return a.income < b.income; };
  const auto [s_min, s_max] = std::minmax_element(survey_high.begin(), survey_high.end(), by_income);
  const auto [r_min, r_max] = std::minmax_element(rich_list.begin(), rich_list.end(), by_income);
  if (!(r_min->income > 0.0)) throw DomainError("rich-list incomes must be positive");
  ScaleFactor out;
  out.factor = s_min->income / r_min->income;
  out.full_overlap = out.factor * r_max->income >= s_max->income;
  return out;
}

struct FuseOptions {
  /// Survey incomes strictly above this cut form the high-income segment.
  std::optional<double> cut;
  /// Otherwise the top_k survey incomes do.
  std::size_t top_k = 8;
};

struct FuseResult {
  std::vector<IncomeRecord> records;
  double factor = 1.0;
  bool factor_computed = false;
  bool full_overlap = true;
};

/// High-income segment of the survey per the cut or top-k rule.
inline std::vector<IncomeRecord> survey_high_segment(const std::vector<IncomeRecord>& survey,
                                                     const FuseOptions& opts = {}) {
  std::vector<IncomeRecord> out;
  if (opts.cut) {
    for (const auto& r : survey) {
      if (r.income > *opts.cut) out.push_back(r);
    }
    return out;
  }
  std::vector<double> sorted = incomes_of(survey);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t k = std::min(opts.top_k, sorted.size());
  for (std::size_t i = 0; i < k; ++i) out.push_back({sorted[i]});
  return out;
}

/// Survey records followed by the factor-scaled rich-list incomes.
inline FuseResult fuse(const std::vector<IncomeRecord>& survey, const std::vector<IncomeRecord>& rich_incomes,
                       std::optional<double> factor, const FuseOptions& opts = {}) {
  if (survey.empty()) throw DomainError("survey record is empty");
  FuseResult out;
  if (factor) {
    if (!(*factor > 0.0)) throw DomainError("scale factor must be positive");
    out.factor = *factor;
  } else if (!rich_incomes.empty()) {
    const ScaleFactor sf = find_scale_factor(survey_high_segment(survey, opts), rich_incomes);
    out.factor = sf.factor;
    out.full_overlap = sf.full_overlap;
    out.factor_computed = true;
  }
  out.records = survey;
  out.records.reserve(survey.size() + rich_incomes.size());
  for (const auto& r : rich_incomes) out.records.push_back({out.factor * r.income});
  return out;
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

template <class T>
struct Loaded {
  std::vector<T> values;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Parses a full field as a finite double; reports the column of the field.
inline double parse_number(std::string_view field, std::size_t line, std::size_t column) {
  const std::string_view t = trim(field);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (!t.empty() && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, value);
  if (t.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(value)) {
    throw ParseError("not a decimal number: '" + std::string(t) + "'", line, column);
  }
  return value;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

template <class F>
void for_each_line(std::string_view text, const F& f) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    f(text.substr(start, end - start), line_no);
    start = end + 1;
  }
}

}  // namespace detail

/// One positive income per line, optional "income" header.
inline Loaded<IncomeRecord> parse_incomes(std::string_view text) {
  Loaded<IncomeRecord> out;
  detail::for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const std::string_view row = detail::trim(raw);
    if (row.empty()) return;
    if (line == 1 && row == "income") return;
    const double x = detail::parse_number(row, line, 1);
    if (!(x > 0.0)) throw ParseError("income must be positive", line, 1);
    out.values.push_back({x});
  });
  if (out.values.empty()) out.warnings.push_back("no income records found");
  return out;
}

inline Loaded<IncomeRecord> load_incomes(const std::string& path) {
  auto out = parse_incomes(detail::read_file(path));
  for (auto& w : out.warnings) w = path + ": " + w;
  return out;
}

/// Header "id,wealth_prev,wealth_curr" then one pair per line.
inline Loaded<WealthPair> parse_wealth_pairs(std::string_view text) {
  Loaded<WealthPair> out;
  bool header_seen = false;
  detail::for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const std::string_view row = detail::trim(raw);
    if (row.empty()) return;
    if (!header_seen) {
      if (row != "id,wealth_prev,wealth_curr") {
        throw ParseError("expected header 'id,wealth_prev,wealth_curr'", line, 1);
      }
      header_seen = true;
      return;
    }
    const auto fields = detail::split(row, ',');
    if (fields.size() != 3) throw ParseError("expected 3 fields, got " + std::to_string(fields.size()), line, 1);
    WealthPair w;
    w.id = std::string(detail::trim(fields[0]));
    const std::size_t col_prev = fields[0].size() + 2;
    const std::size_t col_curr = col_prev + fields[1].size() + 1;
    w.wealth_prev = detail::parse_number(fields[1], line, col_prev);
    w.wealth_curr = detail::parse_number(fields[2], line, col_curr);
    if (w.wealth_prev < 0.0) throw ParseError("wealth must be non-negative", line, col_prev);
    if (w.wealth_curr < 0.0) throw ParseError("wealth must be non-negative", line, col_curr);
    out.values.push_back(std::move(w));
  });
  if (out.values.empty()) out.warnings.push_back("no wealth pairs found");
  return out;
}

inline Loaded<WealthPair> load_wealth_pairs(const std::string& path) {
  auto out = parse_wealth_pairs(detail::read_file(path));
  for (auto& w : out.warnings) w = path + ": " + w;
  return out;
}

inline void write_incomes_csv(std::ostream& os, const std::vector<double>& incomes) {
  os << "income\n";
  for (double x : incomes) os << format_double(x) << '\n';
}

/// "income,ccdf" rows in descending income order.
inline void write_ccdf_csv(std::ostream& os, const EmpiricalCCDF& ccdf) {
  os << "income,ccdf\n";
  for (const auto& pt : ccdf.points) os << format_double(pt.income) << ',' << format_double(pt.p) << '\n';
}

inline EmpiricalCCDF parse_ccdf_csv(std::string_view text) {
  EmpiricalCCDF out;
  bool header_seen = false;
  detail::for_each_line(text, [&](std::string_view raw, std::size_t line) {
    const std::string_view row = detail::trim(raw);
    if (row.empty()) return;
    if (!header_seen) {
      if (row != "income,ccdf") throw ParseError("expected header 'income,ccdf'", line, 1);
      header_seen = true;
      return;
    }
    const auto fields = detail::split(row, ',');
    if (fields.size() != 2) throw ParseError("expected 2 fields", line, 1);
    const double m = detail::parse_number(fields[0], line, 1);
    const double p = detail::parse_number(fields[1], line, fields[0].size() + 2);
    if (!(m > 0.0)) throw ParseError("income must be positive", line, 1);
    if (!(p > 0.0 && p < 1.0)) throw ParseError("ccdf value must lie in (0, 1)", line, fields[0].size() + 2);
    if (!out.points.empty() && (m > out.points.back().income || p <= out.points.back().p)) {
      throw ParseError("rows must be in descending income order", line, 1);
    }
    out.points.push_back({m, p});
  });
  if (!header_seen) throw ParseError("missing header 'income,ccdf'", 1, 1);
  out.n = out.points.size();
  return out;
}

inline EmpiricalCCDF load_ccdf_csv(const std::string& path) { return parse_ccdf_csv(detail::read_file(path)); }

}  // namespace incomefp
