#include "calderon/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "calderon/conformal3d.hpp"
#include "calderon/deformations.hpp"
#include "calderon/dn_map.hpp"
#include "calderon/format.hpp"
#include "calderon/verify.hpp"

namespace calderon::cli {

namespace {

using nlohmann::json;
using profiles::Metric2D;
using profiles::Metric3D;
using profiles::Potential;
using profiles::Profile;

struct Config {
  int dim = 2;
  std::string f = "1", h = "1", V;  // V empty = absent
  double lambda2 = 0.0;
  int mmax = 32, nmax = 32;
  int K = 10;
  int n = 0;  // transverse mode index for `spectrum` in 3D
  int k = 1;
  double t = 0.1;
  std::string xi;  // comma-separated xi_1,xi_2,...
  double A = 2.0, B = 1.0, C = 1.0;
  std::string c;  // conformal factor expression
  std::string family = "";  // same | cross
  std::string gamma_d = "", gamma_n = "";
  int gamma_d_component = 0, gamma_n_component = 1;
  int grid = 256;
  std::string out;
  double tol_ode = 1e-11, tol_eq = 1e-8;
  json psi;  // boundary data for `trace`
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void load_config_file(Config& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  auto get = [&](const char* key, auto& slot) {
    if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
  };
  get("dim", cfg.dim);
  get("f", cfg.f);
  get("h", cfg.h);
  get("V", cfg.V);
  get("lambda2", cfg.lambda2);
  get("mmax", cfg.mmax);
  get("nmax", cfg.nmax);
  get("K", cfg.K);
  get("n", cfg.n);
  get("k", cfg.k);
  get("t", cfg.t);
  get("A", cfg.A);
  get("B", cfg.B);
  get("C", cfg.C);
  get("c", cfg.c);
  get("family", cfg.family);
  get("gamma_d", cfg.gamma_d);
  get("gamma_n", cfg.gamma_n);
  get("gamma_d_component", cfg.gamma_d_component);
  get("gamma_n_component", cfg.gamma_n_component);
  get("grid", cfg.grid);
  get("out", cfg.out);
  get("tol_ode", cfg.tol_ode);
  get("tol_eq", cfg.tol_eq);
  if (j.contains("xi")) {
    if (j.at("xi").is_array()) {
      std::string s;
      for (const auto& v : j.at("xi")) {
        if (!s.empty()) s += ",";
        s += io::format_double(v.get<double>());
      }
      cfg.xi = s;
    } else {
      cfg.xi = j.at("xi").get<std::string>();
    }
  }
  if (j.contains("psi")) cfg.psi = j.at("psi");
}

Profile load_profile(const std::string& spec, const char* what) {
  if (spec.empty()) throw ConfigError(std::string("missing profile: ") + what);
  if (spec[0] == '@') {
    std::ifstream in(spec.substr(1));
    if (!in) throw ConfigError("cannot open profile samples: " + spec.substr(1));
    std::vector<double> xs, ys;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::vector<std::string> cells;
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.size() < 2) continue;
      try {
        // x from the first column, value from the last (family CSV re-ingest)
        double x = std::stod(cells.front());
        double y = std::stod(cells.back());
        xs.push_back(x);
        ys.push_back(y);
      } catch (const std::exception&) {
        continue;  // header row
      }
    }
    try {
      return Profile::samples(std::move(xs), std::move(ys));
    } catch (const std::exception& e) {
      throw ConfigError("bad profile samples in " + spec.substr(1) + ": " + e.what());
    }
  }
  try {
    return Profile::parse(spec);
  } catch (const expr::SyntaxError& e) {
    throw ConfigError(std::string("profile '") + what + "': " + e.what());
  }
}

std::optional<Profile> load_optional_profile(const std::string& spec, const char* what) {
  if (spec.empty()) return std::nullopt;
  return load_profile(spec, what);
}

std::vector<std::pair<int, double>> parse_xi(const std::string& s) {
  std::vector<std::pair<int, double>> entries;
  std::stringstream ss(s);
  std::string item;
  int idx = 1;
  while (std::getline(ss, item, ',')) {
    try {
      entries.emplace_back(idx, std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("bad xi entry: '" + item + "'");
    }
    ++idx;
  }
  return entries;
}

// output sink: file when path nonempty, stdout otherwise
class Sink {
public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  bool is_file() const { return file_.is_open(); }

private:
  std::ofstream file_;
};

sl::EngineOptions engine_options(const Config& cfg) {
  if (!std::isfinite(cfg.lambda2)) throw ConfigError("lambda2 must be finite");
  if (cfg.grid < 2 || (cfg.grid & (cfg.grid - 1)) != 0)
    throw ConfigError("grid size must be a power of two");
  sl::EngineOptions opt;
  opt.abs_tol = opt.rel_tol = cfg.tol_ode;
  return opt;
}

dn::BoundaryData2D psi_from_json_2d(const json& j, int mmax) {
  dn::BoundaryData2D d;
  d.component = j.value("component", 0);
  d.hermitian = j.value("hermitian", false);
  d.m_max = mmax;
  d.coef.assign(2 * static_cast<std::size_t>(mmax) + 1, {0.0, 0.0});
  if (!j.contains("modes")) throw ConfigError("psi needs a 'modes' array");
  for (const auto& row : j.at("modes")) {
    const int m = row.at(0).get<int>();
    if (std::abs(m) > mmax) throw ConfigError("psi mode outside cutoff");
    d.coef[static_cast<std::size_t>(m + mmax)] =
        sl::Complex(row.at(1).get<double>(), row.size() > 2 ? row.at(2).get<double>() : 0.0);
  }
  return d;
}

dn::BoundaryData3D psi_from_json_3d(const json& j, int mmax, int nmax) {
  dn::BoundaryData3D d;
  d.component = j.value("component", 0);
  d.hermitian = j.value("hermitian", false);
  d.m_max = mmax;
  d.n_max = nmax;
  d.coef.assign((2 * static_cast<std::size_t>(mmax) + 1) * (2 * static_cast<std::size_t>(nmax) + 1),
                {0.0, 0.0});
  if (!j.contains("modes")) throw ConfigError("psi needs a 'modes' array");
  for (const auto& row : j.at("modes")) {
    const int m = row.at(0).get<int>();
    const int n = row.at(1).get<int>();
    if (std::abs(m) > mmax || std::abs(n) > nmax) throw ConfigError("psi mode outside cutoff");
    d.coef[static_cast<std::size_t>(m + mmax) * (2 * nmax + 1) + static_cast<std::size_t>(n + nmax)] =
        sl::Complex(row.at(2).get<double>(), row.size() > 3 ? row.at(3).get<double>() : 0.0);
  }
  return d;
}

// --- subcommands ------------------------------------------------------------

int cmd_spectrum(const Config& cfg) {
  auto opt = engine_options(cfg);
  Potential q;
  if (cfg.dim == 2) {
    Metric2D g(load_profile(cfg.f, "f"));
    q = profiles::reduced_potential_2d(g, load_optional_profile(cfg.V, "V"), cfg.lambda2);
  } else {
    Metric3D g(load_profile(cfg.f, "f"), load_profile(cfg.h, "h"));
    q = profiles::reduced_potential_3d(g, load_optional_profile(cfg.V, "V"), cfg.lambda2, cfg.n);
  }
  auto lam = sl::dirichlet_eigenvalues(q, cfg.K, opt);
  Sink sink(cfg.out);
  sink.stream() << "k,lambda\n";
  for (int i = 0; i < cfg.K; ++i)
    sink.stream() << (i + 1) << ',' << io::format_double(lam[static_cast<std::size_t>(i)]) << '\n';
  return 0;
}

int cmd_dn(const Config& cfg) {
  auto opt = engine_options(cfg);
  Sink sink(cfg.out);
  if (cfg.dim == 2) {
    Metric2D g(load_profile(cfg.f, "f"));
    auto V = load_optional_profile(cfg.V, "V");
    auto guard = dn::frequency_guard_2d(g, V, cfg.lambda2, cfg.mmax, opt);
    if (!guard.pass) throw dn::FrequencyAtEigenvalueError(guard.m, guard.n, guard.abs_delta);
    auto blocks = dn::block_table_2d(g, V, cfg.lambda2, cfg.mmax, opt);
    dn::dump_blocks_csv(sink.stream(), blocks, false);
  } else {
    Metric3D g(load_profile(cfg.f, "f"), load_profile(cfg.h, "h"));
    auto V = load_optional_profile(cfg.V, "V");
    auto guard = dn::frequency_guard_3d(g, V, cfg.lambda2, cfg.mmax, cfg.nmax, opt);
    if (!guard.pass) throw dn::FrequencyAtEigenvalueError(guard.m, guard.n, guard.abs_delta);
    auto blocks = dn::block_table_3d(g, V, cfg.lambda2, cfg.mmax, cfg.nmax, opt);
    dn::dump_blocks_csv(sink.stream(), blocks, true);
  }
  return 0;
}

int cmd_trace(const Config& cfg) {
  auto opt = engine_options(cfg);
  if (cfg.psi.is_null()) throw ConfigError("trace needs 'psi' in the config file");
  Sink sink(cfg.out);
  sink.stream() << "component,y,z,re,im\n";
  auto emit = [&](const std::vector<dn::NeumannSample>& samples) {
    for (const auto& s : samples)
      sink.stream() << s.component << ',' << io::format_double(s.y) << ','
                    << io::format_double(s.z) << ',' << io::format_double(s.value.real()) << ','
                    << io::format_double(s.value.imag()) << '\n';
  };
  if (cfg.dim == 2) {
    Metric2D g(load_profile(cfg.f, "f"));
    auto V = load_optional_profile(cfg.V, "V");
    auto psi = psi_from_json_2d(cfg.psi, cfg.mmax);
    auto gd = cfg.gamma_d.empty() ? dn::Mask2D::full() : dn::Mask2D::parse(cfg.gamma_d);
    auto gn = cfg.gamma_n.empty() ? dn::Mask2D::full() : dn::Mask2D::parse(cfg.gamma_n);
    auto res = dn::apply_partial_dn_2d(g, V, cfg.lambda2, psi, gd, cfg.gamma_n_component, gn,
                                       cfg.grid, opt);
    emit(res.neumann);
  } else {
    Metric3D g(load_profile(cfg.f, "f"), load_profile(cfg.h, "h"));
    auto V = load_optional_profile(cfg.V, "V");
    auto psi = psi_from_json_3d(cfg.psi, cfg.mmax, cfg.nmax);
    auto gd = cfg.gamma_d.empty() ? dn::Mask3D::full() : dn::Mask3D::parse(cfg.gamma_d);
    auto gn = cfg.gamma_n.empty() ? dn::Mask3D::full() : dn::Mask3D::parse(cfg.gamma_n);
    auto res = dn::apply_partial_dn_3d(g, V, cfg.lambda2, psi, gd, cfg.gamma_n_component, gn,
                                       cfg.grid, opt);
    emit(res.neumann);
  }
  return 0;
}

int cmd_deform(const Config& cfg) {
  auto opt = engine_options(cfg);
  Sink sink(cfg.out);
  Profile f = load_profile(cfg.f, "f");
  if (!cfg.xi.empty()) {
    // general finite-support deformation of the reduced potential
    deform::XiVector xi{parse_xi(cfg.xi)};
    Potential q;
    if (cfg.dim == 2) {
      Metric2D g(f);
      q = profiles::reduced_potential_2d(g, load_optional_profile(cfg.V, "V"), cfg.lambda2);
    } else {
      Metric3D g(f, load_profile(cfg.h, "h"));
      q = profiles::reduced_potential_3d(g, load_optional_profile(cfg.V, "V"), cfg.lambda2, 0);
    }
    auto spec = sl::dirichlet_spectrum(q, std::max(1, xi.max_index()), opt);
    Potential qd = deform::deform_potential_xi(q, spec, xi, opt);
    sink.stream() << "x,q_original,q_deformed\n";
    for (double x : profiles::uniform_grid(profiles::kFunctionGridSize))
      sink.stream() << io::format_double(x) << ',' << io::format_double(q(x)) << ','
                    << io::format_double(qd(x)) << '\n';
    return 0;
  }
  if (!cfg.V.empty()) {
    Profile V = load_profile(cfg.V, "V");
    std::optional<Profile> h;
    if (cfg.dim == 3) h = load_profile(cfg.h, "h");
    Profile Vt = deform::deform_schrodinger_potential(f, h, V, cfg.lambda2, cfg.k, cfg.t, opt);
    deform::dump_family_csv(sink.stream(), "V", V, Vt);
    return 0;
  }
  if (cfg.dim != 2)
    throw ConfigError("metric deformation families are 2D; use family3d for 3D metrics");
  auto dm = deform::deform_metric_2d(f, cfg.lambda2, cfg.k, cfg.t, opt);
  if (!dm.positive)
    std::cerr << "warning: deformed profile is not positive on the check grid\n";
  deform::dump_family_csv(sink.stream(), "f", f, dm.f);
  return 0;
}

int cmd_family3d(const Config& cfg) {
  auto opt = engine_options(cfg);
  Metric3D g(load_profile(cfg.f, "f"), load_profile(cfg.h, "h"));
  std::string family = cfg.family;
  if (family.empty()) family = cfg.c.empty() ? "cross" : "same";
  std::variant<double, Profile> param;
  if (!cfg.c.empty())
    param = load_profile(cfg.c, "c");
  else if (family == "cross")
    param = cfg.A;
  else
    param = cfg.B;

  conformal::FamilyResult fam =
      family == "cross" ? conformal::family_cross_component(g, cfg.lambda2, param, 8, opt)
                        : conformal::family_same_component(g, cfg.lambda2, param, opt);

  Sink sink(cfg.out);
  conformal::dump_family_csv(sink.stream(), fam);

  json rep;
  rep["family"] = family;
  rep["lambda2"] = cfg.lambda2;
  rep["max_q_deviation"] = fam.report.max_q_dev;
  rep["worst_n"] = fam.report.worst_n;
  rep["worst_x"] = fam.report.worst_x;
  if (family == "cross") {
    rep["tl_max_deviation"] = fam.report.tl_max_dev;
    rep["tl_worst_mode"] = {fam.report.tl_worst_m, fam.report.tl_worst_n};
  }
  rep["c_boundary"] = {fam.c.c0, fam.c.c1};
  rep["monotone"] = fam.c.monotone;
  rep["tol_eq"] = cfg.tol_eq;
  rep["pass"] = fam.report.max_q_dev < cfg.tol_eq &&
                (family != "cross" || fam.report.tl_max_dev < cfg.tol_eq);
  (sink.is_file() ? std::cout : std::cerr) << rep.dump(2) << "\n";
  return 0;
}

int cmd_verify(const Config& cfg, const std::string& scenario) {
  auto opt = engine_options(cfg);
  auto rep = verify::run_scenario(scenario, opt);
  Sink sink(cfg.out);
  sink.stream() << rep.to_json().dump(2) << "\n";
  return rep.all_pass() ? 0 : 3;
}

int cmd_demo(const Config& cfg) {
  auto opt = engine_options(cfg);
  bool all = true;
  for (const auto& id : verify::acceptance_scenario_ids()) {
    auto rep = verify::run_scenario(id, opt);
    for (const auto& c : rep.criteria) {
      std::cout << (c.pass ? "PASS" : "FAIL") << "  " << id << "." << c.name << "  value="
                << io::format_double(c.value)
                << (c.sense == verify::Criterion::Sense::Less ? "  < " : "  > ")
                << io::format_double(c.tolerance) << "\n";
      all = all && c.pass;
    }
  }
  std::cout << (all ? "all scenarios pass" : "some criteria failed") << "\n";
  return all ? 0 : 3;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  Config cfg;

  CLI::App app{"Partial Dirichlet-to-Neumann maps for warped-product cylinders via 1D spectral reduction"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // frees -h / --h for the metric profile

  // shared options, registered on every subcommand
  std::string scenario;
  auto add_common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "print help");
    sub->add_option("--config", [&cfg](const std::vector<std::string>& vals) {
      load_config_file(cfg, vals.front());
      return true;
    }, "JSON config file (flags override its values)");
    sub->add_option("--dim", cfg.dim)->check(CLI::IsMember({2, 3}));
    sub->add_option("--f", cfg.f);
    sub->add_option("--h", cfg.h);
    sub->add_option("--V", cfg.V);
    sub->add_option("--lambda2", cfg.lambda2);
    sub->add_option("--mmax", cfg.mmax)->check(CLI::NonNegativeNumber);
    sub->add_option("--nmax", cfg.nmax)->check(CLI::NonNegativeNumber);
    sub->add_option("-K,--num-eigenvalues", cfg.K)->check(CLI::PositiveNumber);
    sub->add_option("--n", cfg.n);
    sub->add_option("--k", cfg.k)->check(CLI::PositiveNumber);
    sub->add_option("--t", cfg.t);
    sub->add_option("--xi", cfg.xi);
    sub->add_option("--A", cfg.A);
    sub->add_option("--B", cfg.B);
    sub->add_option("--C", cfg.C);
    sub->add_option("--c", cfg.c);
    sub->add_option("--family", cfg.family)->check(CLI::IsMember({"same", "cross", ""}));
    sub->add_option("--gamma-d", cfg.gamma_d);
    sub->add_option("--gamma-n", cfg.gamma_n);
    sub->add_option("--gamma-d-component", cfg.gamma_d_component)->check(CLI::IsMember({0, 1}));
    sub->add_option("--gamma-n-component", cfg.gamma_n_component)->check(CLI::IsMember({0, 1}));
    sub->add_option("--grid", cfg.grid)->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out);
    sub->add_option("--tol-ode", cfg.tol_ode)->check(CLI::PositiveNumber);
    sub->add_option("--tol-eq", cfg.tol_eq)->check(CLI::PositiveNumber);
  };

  auto* sp = app.add_subcommand("spectrum", "Dirichlet eigenvalues of the reduced potential (CSV)");
  auto* dncmd = app.add_subcommand("dn", "per-mode DN blocks (CSV)");
  auto* tr = app.add_subcommand("trace", "partial DN map applied to boundary data (CSV)");
  auto* df = app.add_subcommand("deform", "isospectral family dump (CSV)");
  auto* f3 = app.add_subcommand("family3d", "conformal 3D family dump (CSV) + report");
  auto* vf = app.add_subcommand("verify", "run one verification scenario (JSON report)");
  auto* dm = app.add_subcommand("demo", "run all acceptance scenarios");
  for (auto* sub : {sp, dncmd, tr, df, f3, vf, dm}) add_common(sub);
  vf->add_option("scenario", scenario, "one of: " + [] {
    std::string s;
    for (const auto& id : verify::scenario_ids()) s += id + " ";
    return s;
  }())->required();

  // phase 1: configuration
  try {
    std::vector<const char*> argv;
    argv.push_back("calderon");
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  // phase 2: computation
  try {
    if (sp->parsed()) return cmd_spectrum(cfg);
    if (dncmd->parsed()) return cmd_dn(cfg);
    if (tr->parsed()) return cmd_trace(cfg);
    if (df->parsed()) return cmd_deform(cfg);
    if (f3->parsed()) return cmd_family3d(cfg);
    if (vf->parsed()) return cmd_verify(cfg, scenario);
    if (dm->parsed()) return cmd_demo(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const expr::SyntaxError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace calderon::cli
