#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "calderon/cli.hpp"
#include "calderon/deformations.hpp"
#include "calderon/dn_map.hpp"

namespace fs = std::filesystem;
using calderon::cli::run;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("calderon_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::string& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("spectrum subcommand") {
  TempDir tmp;
  auto out = tmp.file("spec.csv");
  CHECK(run({"spectrum", "--dim", "2", "--f", "1", "--lambda2", "0", "-K", "3", "--out", out}) == 0);
  auto rows = read_csv(out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0][0] == "k");
  CHECK(std::stod(rows[1][1]) == doctest::Approx(M_PI * M_PI).epsilon(1e-10));
  CHECK(std::stod(rows[3][1]) == doctest::Approx(9 * M_PI * M_PI).epsilon(1e-10));
}

TEST_CASE("exit codes") {
  TempDir tmp;
  // malformed expression -> config error
  CHECK(run({"spectrum", "--f", "1 + * x", "--out", tmp.file("x.csv")}) == 2);
  // unknown flag -> config error
  CHECK(run({"spectrum", "--frequencay", "1"}) == 2);
  // missing subcommand -> config error
  CHECK(run({}) == 2);
  // frequency on the Dirichlet spectrum -> computation error
  CHECK(run({"dn", "--dim", "2", "--f", "1", "--lambda2", "9.869604401089358", "--mmax", "2",
             "--out", tmp.file("dn.csv")}) == 1);
}

TEST_CASE("dn subcommand is deterministic") {
  TempDir tmp;
  auto a = tmp.file("a.csv"), b = tmp.file("b.csv");
  std::vector<std::string> args = {"dn",   "--dim",    "2",  "--f",   "1.2 + 0.4*x",
                                   "--lambda2", "0.5", "--mmax", "6", "--out", a};
  CHECK(run(args) == 0);
  args.back() = b;
  CHECK(run(args) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).substr(0, 14) == "m,n,L,T_R,T_L,");
}

TEST_CASE("verify subcommand writes a report") {
  TempDir tmp;
  auto out = tmp.file("rep.json");
  CHECK(run({"verify", "flat-spectrum", "--out", out}) == 0);
  auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["pass"].get<bool>());
  CHECK(j["scenario"] == "flat-spectrum");
  // unknown scenario is a computation-level failure
  CHECK(run({"verify", "bogus", "--out", tmp.file("r2.json")}) == 1);
}

TEST_CASE("config file with flag override") {
  TempDir tmp;
  auto cfgp = tmp.file("cfg.json");
  {
    std::ofstream cfg(cfgp);
    cfg << R"({"dim": 2, "f": "1", "lambda2": 0.0, "K": 2})";
  }
  auto out1 = tmp.file("s1.csv");
  CHECK(run({"spectrum", "--config", cfgp, "--out", out1}) == 0);
  auto rows1 = read_csv(out1);
  REQUIRE(rows1.size() == 3);
  CHECK(std::stod(rows1[1][1]) == doctest::Approx(M_PI * M_PI).epsilon(1e-9));
  // the flag wins over the file value
  auto out2 = tmp.file("s2.csv");
  CHECK(run({"spectrum", "--config", cfgp, "--lambda2", "-5", "--out", out2}) == 0);
  auto rows2 = read_csv(out2);
  CHECK(std::stod(rows2[1][1]) == doctest::Approx(5.0 + M_PI * M_PI).epsilon(1e-9));
}

TEST_CASE("trace subcommand against the single-mode closed form") {
  TempDir tmp;
  auto cfgp = tmp.file("cfg.json");
  {
    std::ofstream cfg(cfgp);
    cfg << R"({"dim": 2, "f": "1", "lambda2": 0.0, "mmax": 4, "grid": 64,
               "gamma_n_component": 1,
               "psi": {"component": 0, "modes": [[1, 1.0, 0.0]]}})";
  }
  auto out = tmp.file("trace.csv");
  CHECK(run({"trace", "--config", cfgp, "--out", out}) == 0);
  auto rows = read_csv(out);
  REQUIRE(rows.size() == 65);  // header + 64 grid samples (full-circle Gamma_N)
  bool checked = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double y = std::stod(rows[i][1]);
    const double re = std::stod(rows[i][3]);
    const double im = std::stod(rows[i][4]);
    if (std::abs(y) < 1e-12) {
      CHECK(re == doctest::Approx(-1.0 / std::sinh(1.0)).epsilon(1e-10));
      CHECK(std::abs(im) < 1e-12);
      checked = true;
    }
  }
  CHECK(checked);
}

TEST_CASE("deform round trip reproduces DN blocks") {
  using namespace calderon;
  TempDir tmp;
  auto fam = tmp.file("family.csv");
  // t small enough that the deformed profile stays positive
  CHECK(run({"deform", "--dim", "2", "--f", "1", "--lambda2", "1", "--k", "1", "--t", "0.02",
             "--out", fam}) == 0);
  auto dn1 = tmp.file("dn1.csv");
  CHECK(run({"dn", "--dim", "2", "--f", ("@" + fam), "--lambda2", "1", "--mmax", "5", "--out",
             dn1}) == 0);

  // in-process reference blocks from the same deformation
  auto dm = deform::deform_metric_2d(profiles::Profile::constant(1.0), 1.0, 1, 0.02);
  REQUIRE(dm.positive);
  profiles::Metric2D gt(dm.f);
  auto blocks = dn::block_table_2d(gt, std::nullopt, 1.0, 5);
  auto rows = read_csv(dn1);
  REQUIRE(rows.size() == blocks.size() + 1);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    CHECK(std::stod(rows[i + 1][2]) == doctest::Approx(blocks[i].L).epsilon(1e-7));
    CHECK(std::stod(rows[i + 1][3]) == doctest::Approx(blocks[i].T_R).epsilon(1e-7));
  }
}

TEST_CASE("family3d subcommand") {
  TempDir tmp;
  auto out = tmp.file("fam.csv");
  CHECK(run({"family3d", "--f", "1", "--h", "1", "--lambda2", "0", "--A", "2", "--family", "cross",
             "--out", out}) == 0);
  auto rows = read_csv(out);
  REQUIRE(rows.size() > 2);
  CHECK(rows[0] == std::vector<std::string>{"x", "f", "h", "c", "f_tilde", "h_tilde"});
  // c column starts at 8 and ends at 2
  CHECK(std::stod(rows[1][3]) == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(std::stod(rows.back()[3]) == doctest::Approx(2.0).epsilon(1e-9));
  // f_tilde = c^4 at x = 0
  CHECK(std::stod(rows[1][4]) == doctest::Approx(4096.0).epsilon(1e-8));
}

TEST_CASE("xi deformation via the CLI") {
  TempDir tmp;
  auto out = tmp.file("xi.csv");
  CHECK(run({"deform", "--dim", "2", "--f", "1", "--lambda2", "1", "--xi", "0.3,-0.2", "--out",
             out}) == 0);
  auto rows = read_csv(out);
  REQUIRE(rows.size() == 1026);
  CHECK(rows[0][1] == "q_original");
  // endpoints preserved: q(0) = -1
  CHECK(std::stod(rows[1][2]) == doctest::Approx(-1.0).epsilon(1e-4));
}

TEST_CASE("Schrodinger family via the CLI") {
  TempDir tmp;
  auto out = tmp.file("vfam.csv");
  CHECK(run({"deform", "--dim", "2", "--f", "1", "--V", "0", "--lambda2", "0", "--k", "1", "--t",
             "0.5", "--out", out}) == 0);
  auto rows = read_csv(out);
  REQUIRE(rows.size() == 1026);
  CHECK(rows[0][1] == "V_original");
  CHECK(rows[0][2] == "V_deformed");
  // midpoint closed form (v'(1/2) = 0)
  const double a = std::expm1(0.5);
  const double tail = 0.5 + std::sin(M_PI) / (2 * M_PI);
  const double th = 1.0 + a * tail;
  CHECK(std::stod(rows[513][2]) == doctest::Approx(8.0 * a * a / (th * th)).epsilon(1e-7));
}
