#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <sstream>

#include "incomefp/empirics.hpp"

using namespace incomefp;

TEST_CASE("rank_ccdf assigns Weibull plotting positions") {
  const EmpiricalCCDF c = rank_ccdf(records_of({10, 20, 30}));
  REQUIRE(c.points.size() == 3);
  CHECK(c.n == 3);
  CHECK(c.points[0].income == 30);
  CHECK(c.points[0].p == 0.25);
  CHECK(c.points[1].income == 20);
  CHECK(c.points[1].p == 0.5);
  CHECK(c.points[2].income == 10);
  CHECK(c.points[2].p == 0.75);

  const EmpiricalCCDF one = rank_ccdf(records_of({7.5}));
  REQUIRE(one.points.size() == 1);
  CHECK(one.points[0].p == 0.5);

  CHECK_THROWS_AS(rank_ccdf({}), DomainError);
}

TEST_CASE("rank_ccdf keeps every record and never reaches 0 or 1") {
  std::mt19937_64 eng(5);
  std::lognormal_distribution<double> d(10.0, 1.0);
  std::vector<double> x(5000);
  for (auto& v : x) v = d(eng);
  x[10] = x[20];  // a tie
  const EmpiricalCCDF c = rank_ccdf(records_of(x));
  CHECK(c.points.size() == x.size());
  for (std::size_t l = 1; l <= c.points.size(); ++l) {
    CHECK(c.points[l - 1].p == static_cast<double>(l) / (x.size() + 1));
    CHECK(c.points[l - 1].p > 0.0);
    CHECK(c.points[l - 1].p < 1.0);
    if (l > 1) CHECK(c.points[l - 1].income <= c.points[l - 2].income);
  }
}

TEST_CASE("forbes_incomes keeps positive gains only") {
  const std::vector<WealthPair> pairs{{"a", 4.0e9, 5.0e9}, {"b", 5.0e9, 4.0e9}, {"c", 2e9, 2e9}};
  const auto inc = forbes_incomes(pairs);
  REQUIRE(inc.size() == 1);
  CHECK(inc[0].income == 1.0e9);
  CHECK(forbes_incomes({}).empty());
}

TEST_CASE("find_scale_factor aligns minima") {
  const auto sf = find_scale_factor(records_of({1.0e6, 2.0e6, 3.0e6}), records_of({1.0e8, 5.0e8, 9.0e8}));
  CHECK(sf.factor == Catch::Approx(1.0e-2).epsilon(1e-15));
  CHECK(sf.full_overlap);

  const auto same = find_scale_factor(records_of({3, 4, 5}), records_of({3, 4, 5}));
  CHECK(same.factor == 1.0);

  const auto scaled = find_scale_factor(records_of({1.0e6, 2.0e6}), records_of({4.0e8, 9.0e8}));
  CHECK(scaled.factor == Catch::Approx(0.25e-2).epsilon(1e-15));

  const auto short_list = find_scale_factor(records_of({1.0e6, 5.0e6}), records_of({1.0e8, 2.0e8}));
  CHECK_FALSE(short_list.full_overlap);

  CHECK_THROWS_AS(find_scale_factor({}, records_of({1})), DomainError);
  CHECK_THROWS_AS(find_scale_factor(records_of({1}), {}), DomainError);
}

TEST_CASE("fuse") {
  const auto survey = records_of({1e4, 2e4, 3e4, 1e6, 2e6});
  const auto rich = records_of({1e9});

  const FuseResult given = fuse(survey, rich, 1.0e-2);
  REQUIRE(given.records.size() == survey.size() + 1);
  CHECK(given.records.back().income == Catch::Approx(1.0e7));
  CHECK_FALSE(given.factor_computed);

  const FuseResult none = fuse(survey, {}, std::nullopt);
  CHECK(incomes_of(none.records) == incomes_of(survey));

  FuseOptions o;
  o.top_k = 2;
  const FuseResult computed = fuse(survey, records_of({1e8, 3e8}), std::nullopt, o);
  CHECK(computed.factor_computed);
  CHECK(computed.factor == Catch::Approx(1e-2).epsilon(1e-15));

  o.cut = 1.5e6;
  CHECK(fuse(survey, records_of({1e8, 3e8}), std::nullopt, o).factor == Catch::Approx(2e-2).epsilon(1e-15));

  CHECK_THROWS_AS(fuse({}, rich, 1.0), DomainError);
}

TEST_CASE("fused ccdf does not depend on input order") {
  auto survey = records_of({5, 1, 4, 9, 2, 8});
  auto rich = records_of({100, 300, 200});
  const auto a = rank_ccdf(fuse(survey, rich, std::nullopt, {std::nullopt, 3}).records);
  std::reverse(survey.begin(), survey.end());
  std::rotate(rich.begin(), rich.begin() + 1, rich.end());
  const auto b = rank_ccdf(fuse(survey, rich, std::nullopt, {std::nullopt, 3}).records);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].income == b.points[i].income);
    CHECK(a.points[i].p == b.points[i].p);
  }
}

TEST_CASE("fusing closes the gap above the survey maximum") {
  // Survey tail ends at 2e6; the rich list is measured in other units.
  std::vector<double> s{1e4, 2e4, 3e4, 5e4, 1e5, 3e5, 6e5, 1e6, 1.5e6, 2e6};
  std::vector<double> r{1e8, 1.2e8, 1.5e8, 2e8, 2.5e8, 4e8, 7e8, 1e9};
  const auto fused = fuse(records_of(s), records_of(r), std::nullopt, {std::nullopt, 4});
  std::vector<double> x = incomes_of(fused.records);
  std::sort(x.begin(), x.end());
  auto longest_run = [](const std::vector<double>& v) {
    double best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) best = std::max(best, std::log(v[i] / v[i - 1]));
    return best;
  };
  std::vector<double> ss = s;
  CHECK(longest_run(x) <= longest_run(ss));
}

TEST_CASE("income csv parsing") {
  const auto l = parse_incomes("10.5\n20\n");
  REQUIRE(l.values.size() == 2);
  CHECK(l.values[0].income == 10.5);
  CHECK(parse_incomes("income\n1\n\n2\r\n").values.size() == 2);

  try {
    parse_incomes("abc\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 1);
  }
  CHECK_THROWS_AS(parse_incomes("1\n-2\n"), ParseError);
  CHECK_THROWS_AS(parse_incomes("1\n0\n"), ParseError);

  const auto empty = parse_incomes("");
  CHECK(empty.values.empty());
  CHECK(empty.warnings.size() == 1);
}

TEST_CASE("wealth pair parsing") {
  const auto l = parse_wealth_pairs("id,wealth_prev,wealth_curr\nx,4e9,5e9\ny,1,0\n");
  REQUIRE(l.values.size() == 2);
  CHECK(l.values[0].id == "x");
  CHECK(l.values[0].wealth_curr == 5e9);
  try {
    parse_wealth_pairs("id,wealth_prev,wealth_curr\nabc,12,zz\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 8);
  }
  CHECK_THROWS_AS(parse_wealth_pairs("x,1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_wealth_pairs("id,wealth_prev,wealth_curr\nx,-1,2\n"), ParseError);
  CHECK_THROWS_AS(load_incomes("/nonexistent/incomes.csv"), IoError);
}

TEST_CASE("ccdf csv round-trips bit for bit") {
  std::mt19937_64 eng(9);
  std::exponential_distribution<double> d(1.0 / 3.3e4);
  std::vector<double> x(1000);
  for (auto& v : x) v = d(eng);
  const EmpiricalCCDF c = rank_ccdf(records_of(x));
  std::ostringstream os;
  write_ccdf_csv(os, c);
  const EmpiricalCCDF back = parse_ccdf_csv(os.str());
  REQUIRE(back.points.size() == c.points.size());
  CHECK(back.n == c.n);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    CHECK(back.points[i].income == c.points[i].income);
    CHECK(back.points[i].p == c.points[i].p);
  }
  CHECK_THROWS_AS(parse_ccdf_csv("income,ccdf\n1,0.5\n2,0.6\n"), ParseError);
}
