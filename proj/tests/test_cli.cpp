#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "incomefp/incomefp.hpp"

using namespace incomefp;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("incomefp_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

void write(const std::string& name, const std::string& text) {
  std::ofstream(path(name), std::ios::binary) << text;
}

std::string slurp(const std::string& name) {
  std::ifstream in(path(name), std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& args) {
  const std::string cmd = std::string(INCOMEFP_CLI) + " " + args + " 2>" + path("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kParams2008 =
    R"({"T": 39500, "T1": 39500, "alpha": 2.902, "alpha1": 0.79, "m0": 140000, "m1": 400000, "m_init": 0.01})";
const char* kParams2006 =
    R"({"T": 43000, "T1": 43000, "alpha": 3.171, "alpha1": 0.9, "m0": 120000, "m1": 370000, "m_init": 0.01})";

}  // namespace

TEST_CASE("ccdf subcommand") {
  write("three.csv", "income\n10\n30\n20\n");
  REQUIRE(run("ccdf " + path("three.csv") + " -o " + path("three_ccdf.csv")) == 0);
  CHECK(slurp("three_ccdf.csv") == "income,ccdf\n30,0.25\n20,0.5\n10,0.75\n");
  const EmpiricalCCDF c = load_ccdf_csv(path("three_ccdf.csv"));
  const EmpiricalCCDF d = rank_ccdf(load_incomes(path("three.csv")).values);
  REQUIRE(c.points.size() == d.points.size());
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    CHECK(c.points[i].income == d.points[i].income);
    CHECK(c.points[i].p == d.points[i].p);
  }

  write("bad.csv", "1\nabc\n");
  CHECK(run("ccdf " + path("bad.csv")) == 2);
  CHECK(slurp("stderr.txt").find("line 2") != std::string::npos);
  CHECK(run("ccdf " + path("missing.csv")) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("fuse subcommand") {
  write("survey.csv", "income\n1e4\n2e4\n5e4\n1e6\n2e6\n");
  write("pairs.csv", "id,wealth_prev,wealth_curr\na,1e9,1.1e9\nb,4e9,3e9\nc,2e9,2.5e9\n");
  REQUIRE(run("fuse " + path("survey.csv") + " " + path("pairs.csv") + " --top-k 2 -o " + path("fused.csv")) == 0);
  CHECK(slurp("stderr.txt").find("factor: 0.01") != std::string::npos);
  const auto fused = load_incomes(path("fused.csv")).values;
  REQUIRE(fused.size() == 7);
  CHECK(fused[5].income == Catch::Approx(1e6));
  CHECK(fused[6].income == Catch::Approx(5e6));
  const std::string first = slurp("fused.csv");
  REQUIRE(run("fuse " + path("survey.csv") + " " + path("pairs.csv") + " --top-k 2 -o " + path("fused.csv")) == 0);
  CHECK(slurp("fused.csv") == first);

  REQUIRE(run("fuse " + path("survey.csv") + " " + path("pairs.csv") + " --factor 1 -o " + path("pass.csv")) == 0);
  const auto pass = load_incomes(path("pass.csv")).values;
  REQUIRE(pass.size() == 7);
  CHECK(pass[5].income == Catch::Approx(1e8));

  write("losers.csv", "id,wealth_prev,wealth_curr\na,2e9,1e9\n");
  CHECK(run("fuse " + path("survey.csv") + " " + path("losers.csv")) == 2);
}

TEST_CASE("eval subcommand") {
  write("p2008.json", kParams2008);
  REQUIRE(run("eval " + path("p2008.json") + " -o " + path("model.csv")) == 0);
  std::istringstream in(slurp("model.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "m,ccdf");
  std::vector<double> m, pi;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    m.push_back(std::stod(line.substr(0, comma)));
    pi.push_back(std::stod(line.substr(comma + 1)));
  }
  REQUIRE(m.size() == 400);
  CHECK(m.front() == 0.01);
  CHECK(pi.front() == Catch::Approx(1.0).epsilon(1e-9));
  CHECK(m.back() == Catch::Approx(4e7));
  for (std::size_t i = 1; i < pi.size(); ++i) CHECK(pi[i] <= pi[i - 1]);

  // Local slopes in the Pareto regimes.
  auto slope_near = [&](double x) {
    std::size_t i = 0;
    while (m[i + 1] < x) ++i;
    return std::log(pi[i + 1] / pi[i]) / std::log(m[i + 1] / m[i]);
  };
  CHECK(-slope_near(4e7 * 0.9) == Catch::Approx(0.79).epsilon(0.02));
  ShapeParams wide{39.5e3, 39.5e3, 2.902, 0.79, 1.4e5, 1.4e8, 0.01};
  write("wide.json", to_json(wide).dump());
  REQUIRE(run("eval " + path("wide.json") + " --grid 2000 --min 1e6 --max 1e7 -o " + path("wide.csv")) == 0);
  std::istringstream w(slurp("wide.csv"));
  std::getline(w, line);
  std::vector<double> wm, wp;
  while (std::getline(w, line)) {
    const auto comma = line.find(',');
    wm.push_back(std::stod(line.substr(0, comma)));
    wp.push_back(std::stod(line.substr(comma + 1)));
  }
  const double s = std::log(wp.back() / wp[wp.size() - 2]) / std::log(wm.back() / wm[wm.size() - 2]);
  CHECK(-s == Catch::Approx(2.902).epsilon(0.05));

  write("bad_params.json", R"({"T": -1, "alpha": 2, "alpha1": 1, "m0": 10, "m1": 20, "m_init": 1})");
  CHECK(run("eval " + path("bad_params.json")) == 2);
  write("broken.json", "{\"T\": ");
  CHECK(run("eval " + path("broken.json")) == 2);
}

TEST_CASE("stats subcommand") {
  write("p2006.json", kParams2006);
  REQUIRE(run("stats --params " + path("p2006.json") + " -o " + path("stats.json")) == 0);
  const json j = json::parse(slurp("stats.json"));
  CHECK(j["r1"].get<double>() == Catch::Approx(32.66).epsilon(0.2));
  CHECK(j["r2"].get<double>() == Catch::Approx(16.48).epsilon(0.2));
  CHECK(j["f_low"].get<double>() + j["f_med"].get<double>() + j["f_high"].get<double>() ==
        Catch::Approx(100.0).epsilon(1e-12));

  write("equal.csv", "income\n5\n5\n5\n");
  REQUIRE(run("stats --incomes " + path("equal.csv") + " -o " + path("g.json")) == 0);
  CHECK(json::parse(slurp("g.json"))["gini"].get<double>() == 0.0);
  CHECK(run("stats") == 2);
}

TEST_CASE("rank subcommand") {
  for (double s : {1.22, 1.07}) {
    std::ostringstream os;
    for (int r = 1; r <= 96; ++r) os << format_double(1e9 * std::pow(r, -s)) << '\n';
    write("ranks.csv", os.str());
    REQUIRE(run("rank " + path("ranks.csv") + " -o " + path("rank.json")) == 0);
    const json j = json::parse(slurp("rank.json"));
    CHECK(j["alpha_pareto"].get<double>() == Catch::Approx(1.0 / s).epsilon(1e-9));
  }
  write("const.csv", "7\n7\n7\n7\n");
  CHECK(run("rank " + path("const.csv")) == 2);
  write("two.csv", "7\n8\n");
  CHECK(run("rank " + path("two.csv")) == 2);
}

TEST_CASE("simulate subcommand") {
  write("p2008.json", kParams2008);
  const std::string base = "simulate " + path("p2008.json") + " --n-paths 200 --n-steps 50 --seed 5";
  REQUIRE(run(base + " --threads 1 -o " + path("s1.csv") + " --report " + path("rep.json")) == 0);
  REQUIRE(run(base + " --threads 3 -o " + path("s2.csv")) == 0);
  CHECK(slurp("s1.csv") == slurp("s2.csv"));
  const json rep = json::parse(slurp("rep.json"));
  CHECK(rep["ks"].is_number());
  CHECK(rep["config"]["n_paths"].get<int>() == 200);

  REQUIRE(run("simulate " + path("p2008.json") + " --n-paths 5 --n-steps 0 -o " + path("s0.csv")) == 0);
  for (const auto& r : load_incomes(path("s0.csv")).values) CHECK(r.income == 39500.0);

  CHECK(run("simulate " + path("p2008.json") + " --dt 1.0 --n-paths 5 --n-steps 2") == 2);
}

TEST_CASE("fit subcommand") {
  const ModelParams p = normalize(ModelParams(shape_from_json(json::parse(kParams2008))));
  const std::size_t n = 20000;
  std::vector<double> levels(n);
  for (std::size_t l = 1; l <= n; ++l) levels[l - 1] = static_cast<double>(l) / (n + 1);
  std::ostringstream os;
  write_incomes_csv(os, quantiles(p, levels));
  write("sample.csv", os.str());
  REQUIRE(run("fit " + path("sample.csv") + " --m-init 0.01 -o " + path("fit.json")) == 0);
  const json j = json::parse(slurp("fit.json"));
  CHECK(j["params"]["T"].get<double>() == Catch::Approx(39500).epsilon(0.05));
  CHECK(j["params"]["alpha1"].get<double>() == Catch::Approx(0.79).epsilon(0.1));
  CHECK(j["params"]["T1"].get<double>() == j["params"]["T"].get<double>());
  const std::string first = slurp("fit.json");
  REQUIRE(run("fit " + path("sample.csv") + " --m-init 0.01 -o " + path("fit.json")) == 0);
  CHECK(slurp("fit.json") == first);

  std::ostringstream ex;
  ex << "income\n";
  for (std::size_t l = 1; l <= 5000; ++l) ex << format_double(0.01 - 3e4 * std::log(l / 5001.0)) << '\n';
  write("expo.csv", ex.str());
  CHECK(run("fit " + path("expo.csv")) == 3);
}
