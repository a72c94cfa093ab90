#include "calderon/dn_map.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "calderon/parallel.hpp"

namespace calderon::dn {

using profiles::Potential;
using profiles::reduced_potential_2d;
using profiles::reduced_potential_3d;

FrequencyAtEigenvalueError::FrequencyAtEigenvalueError(int m_in, int n_in, double d)
    : std::runtime_error("lambda^2 sits on the Dirichlet spectrum at mode (m=" +
                         std::to_string(m_in) + ", n=" + std::to_string(n_in) +
                         "), |Delta| = " + std::to_string(d)),
      m(m_in), n(n_in), abs_delta(d) {}

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double wrap_angle(double y) {
  double r = std::fmod(y + M_PI, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r - M_PI;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number in mask: '" + s + "'");
  return v;
}

Arc parse_arc(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("arc must be 'a:b': '" + s + "'");
  double a = parse_double(s.substr(0, colon));
  double b = parse_double(s.substr(colon + 1));
  double len = b - a;
  if (len <= 0) len += kTwoPi;
  if (len <= 0 || len > kTwoPi) throw std::invalid_argument("empty arc: '" + s + "'");
  return Arc{wrap_angle(a), len};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

}  // namespace

bool Arc::contains(double y) const {
  if (len >= kTwoPi) return true;  // whole circle
  double d = y - a;
  d -= kTwoPi * std::floor(d / kTwoPi);
  return d > 0.0 && d < len;
}

bool Mask2D::contains(double y) const {
  for (const auto& arc : arcs)
    if (arc.contains(y)) return true;
  return false;
}

Mask2D Mask2D::full() { return Mask2D{{Arc{-M_PI, kTwoPi}}}; }

Mask2D Mask2D::parse(const std::string& s) {
  Mask2D m;
  for (const auto& part : split(s, ',')) m.arcs.push_back(parse_arc(part));
  if (m.arcs.empty()) throw std::invalid_argument("mask must be nonempty");
  return m;
}

bool Mask3D::contains(double y, double z) const {
  for (const auto& r : rects)
    if (r.y.contains(y) && r.z.contains(z)) return true;
  return false;
}

Mask3D Mask3D::full() { return Mask3D{{Rect{Arc{-M_PI, kTwoPi}, Arc{-M_PI, kTwoPi}}}}; }

Mask3D Mask3D::parse(const std::string& s) {
  Mask3D m;
  for (const auto& part : split(s, ',')) {
    auto xsep = part.find('x');
    if (xsep == std::string::npos)
      throw std::invalid_argument("3d mask rect must be 'ay:byxaz:bz': '" + part + "'");
    m.rects.push_back(Rect{parse_arc(part.substr(0, xsep)), parse_arc(part.substr(xsep + 1))});
  }
  if (m.rects.empty()) throw std::invalid_argument("mask must be nonempty");
  return m;
}

BoundaryData2D BoundaryData2D::single_mode(int component, int m, Complex c, int m_max) {
  BoundaryData2D d;
  d.component = component;
  d.m_max = m_max;
  d.coef.assign(2 * static_cast<std::size_t>(m_max) + 1, Complex(0.0));
  d.coef[static_cast<std::size_t>(m + m_max)] = c;
  return d;
}

BoundaryData3D BoundaryData3D::single_mode(int component, int m, int n, Complex c, int m_max,
                                           int n_max) {
  BoundaryData3D d;
  d.component = component;
  d.m_max = m_max;
  d.n_max = n_max;
  d.coef.assign((2 * static_cast<std::size_t>(m_max) + 1) * (2 * static_cast<std::size_t>(n_max) + 1),
                Complex(0.0));
  d.coef[static_cast<std::size_t>(m + m_max) * (2 * n_max + 1) +
         static_cast<std::size_t>(n + n_max)] = c;
  return d;
}

namespace {

struct Scalars2D {
  double sqrt_f0, sqrt_f1;
};

DnBlock block_from_sf(const sl::SpectralFunctions& sf, const Scalars2D& fs, int m) {
  if (sf.pole) throw FrequencyAtEigenvalueError(m, 0, std::abs(sf.Delta));
  DnBlock b;
  b.m = m;
  b.L = -sf.M.real() / fs.sqrt_f0;
  b.T_R = -1.0 / (fs.sqrt_f0 * sf.Delta.real());
  b.T_L = -1.0 / (fs.sqrt_f1 * sf.Delta.real());
  b.R = -sf.N.real() / fs.sqrt_f1;
  return b;
}

struct Scalars3D {
  double sqrt_f0, sqrt_f1;
  double a0, a1;        // (log h)'(0)/4, (log h)'(1)/4
  double hr;            // (h(1)/h(0))^{1/4}
};

Scalars3D scalars_3d(const Metric3D& g) {
  Scalars3D s;
  s.sqrt_f0 = std::sqrt(g.f.eval(0.0, 0));
  s.sqrt_f1 = std::sqrt(g.f.eval(1.0, 0));
  s.a0 = g.h.eval(0.0, 1) / g.h.eval(0.0, 0) / 4.0;
  s.a1 = g.h.eval(1.0, 1) / g.h.eval(1.0, 0) / 4.0;
  s.hr = std::pow(g.h.eval(1.0, 0) / g.h.eval(0.0, 0), 0.25);
  return s;
}

DnBlock block_from_sf_3d(const sl::SpectralFunctions& sf, const Scalars3D& s, int m, int n) {
  if (sf.pole) throw FrequencyAtEigenvalueError(m, n, std::abs(sf.Delta));
  DnBlock b;
  b.m = m;
  b.n = n;
  b.L = s.a0 / s.sqrt_f0 - sf.M.real() / s.sqrt_f0;
  b.T_R = -s.hr / (s.sqrt_f0 * sf.Delta.real());
  b.T_L = -1.0 / (s.hr * s.sqrt_f1 * sf.Delta.real());
  b.R = -s.a1 / s.sqrt_f1 - sf.N.real() / s.sqrt_f1;
  return b;
}

}  // namespace

DnBlock dn_block_2d(const Metric2D& g, const std::optional<Profile>& V, double lambda2, int m,
                    const EngineOptions& opt) {
  Potential q = reduced_potential_2d(g, V, lambda2);
  auto sf = sl::spectral_functions(q, Complex(static_cast<double>(m) * m, 0.0), opt);
  Scalars2D fs{std::sqrt(g.f.eval(0.0, 0)), std::sqrt(g.f.eval(1.0, 0))};
  return block_from_sf(sf, fs, m);
}

DnBlock dn_block_2d_from_potential(const Potential& q, double f0, double f1, int m,
                                   const EngineOptions& opt) {
  if (!(f0 > 0.0) || !(f1 > 0.0))
    throw std::domain_error("dn_block_2d_from_potential: boundary f values must be positive");
  auto sf = sl::spectral_functions(q, Complex(static_cast<double>(m) * m, 0.0), opt);
  return block_from_sf(sf, Scalars2D{std::sqrt(f0), std::sqrt(f1)}, m);
}

DnBlock dn_block_3d(const Metric3D& g, const std::optional<Profile>& V, double lambda2, int m,
                    int n, const EngineOptions& opt) {
  Potential q = reduced_potential_3d(g, V, lambda2, n);
  auto sf = sl::spectral_functions(q, Complex(static_cast<double>(m) * m, 0.0), opt);
  return block_from_sf_3d(sf, scalars_3d(g), m, n);
}

DnBlock dn_block_3d(const Metric3D& g, const std::function<double(double)>& V, double lambda2,
                    int m, int n, const EngineOptions& opt) {
  Potential q = reduced_potential_3d(g, V, lambda2, n);
  auto sf = sl::spectral_functions(q, Complex(static_cast<double>(m) * m, 0.0), opt);
  return block_from_sf_3d(sf, scalars_3d(g), m, n);
}

GuardReport frequency_guard_2d(const Metric2D& g, const std::optional<Profile>& V, double lambda2,
                               int m_max, const EngineOptions& opt) {
  if (m_max < 0) throw std::invalid_argument("frequency_guard: cutoff must be >= 0");
  Potential q = reduced_potential_2d(g, V, lambda2);
  GuardReport rep;
  for (int m = 0; m <= m_max; ++m) {
    Complex z(static_cast<double>(m) * m, 0.0);
    auto sf = sl::spectral_functions(q, z, opt);
    if (std::abs(sf.Delta) <= sl::pole_guard_epsilon(z)) {
      rep.pass = false;
      rep.m = m;
      rep.n = 0;
      rep.abs_delta = std::abs(sf.Delta);
      rep.epsilon = sl::pole_guard_epsilon(z);
      return rep;
    }
  }
  return rep;
}

GuardReport frequency_guard_3d(const Metric3D& g, const std::optional<Profile>& V, double lambda2,
                               int m_max, int n_max, const EngineOptions& opt) {
  if (m_max < 0 || n_max < 0) throw std::invalid_argument("frequency_guard: cutoffs must be >= 0");
  GuardReport rep;
  for (int n = 0; n <= n_max; ++n) {
    Potential q = reduced_potential_3d(g, V, lambda2, n);
    for (int m = 0; m <= m_max; ++m) {
      Complex z(static_cast<double>(m) * m, 0.0);
      auto sf = sl::spectral_functions(q, z, opt);
      if (std::abs(sf.Delta) <= sl::pole_guard_epsilon(z)) {
        rep.pass = false;
        rep.m = m;
        rep.n = n;
        rep.abs_delta = std::abs(sf.Delta);
        rep.epsilon = sl::pole_guard_epsilon(z);
        return rep;
      }
    }
  }
  return rep;
}

std::vector<DnBlock> block_table_2d(const Metric2D& g, const std::optional<Profile>& V,
                                    double lambda2, int m_max, const EngineOptions& opt) {
  Potential q = reduced_potential_2d(g, V, lambda2);
  Scalars2D fs{std::sqrt(g.f.eval(0.0, 0)), std::sqrt(g.f.eval(1.0, 0))};
  std::vector<DnBlock> by_abs(static_cast<std::size_t>(m_max) + 1);
  num::parallel_for(by_abs.size(), [&](std::size_t i) {
    auto sf = sl::spectral_functions(q, Complex(static_cast<double>(i * i), 0.0), opt);
    by_abs[i] = block_from_sf(sf, fs, static_cast<int>(i));
  });
  std::vector<DnBlock> out;
  out.reserve(2 * static_cast<std::size_t>(m_max) + 1);
  for (int m = -m_max; m <= m_max; ++m) {
    DnBlock b = by_abs[static_cast<std::size_t>(std::abs(m))];
    b.m = m;
    out.push_back(b);
  }
  return out;
}

namespace {

template <class VArg>
std::vector<DnBlock> block_table_3d_impl(const Metric3D& g, const VArg& V, double lambda2,
                                         int m_max, int n_max, const EngineOptions& opt) {
  Scalars3D s = scalars_3d(g);
  const std::size_t nm = static_cast<std::size_t>(m_max) + 1;
  const std::size_t nn = static_cast<std::size_t>(n_max) + 1;
  std::vector<DnBlock> by_abs(nm * nn);
  // potentials depend on n only; spectral parameter on m only
  std::vector<Potential> qs(nn);
  for (std::size_t n = 0; n < nn; ++n)
    qs[n] = reduced_potential_3d(g, V, lambda2, static_cast<int>(n));
  num::parallel_for(nm * nn, [&](std::size_t idx) {
    const std::size_t im = idx / nn, in = idx % nn;
    auto sf = sl::spectral_functions(qs[in], Complex(static_cast<double>(im * im), 0.0), opt);
    by_abs[idx] = block_from_sf_3d(sf, s, static_cast<int>(im), static_cast<int>(in));
  });
  std::vector<DnBlock> out;
  out.reserve((2 * nm - 1) * (2 * nn - 1));
  for (int m = -m_max; m <= m_max; ++m)
    for (int n = -n_max; n <= n_max; ++n) {
      DnBlock b = by_abs[static_cast<std::size_t>(std::abs(m)) * nn +
                         static_cast<std::size_t>(std::abs(n))];
      b.m = m;
      b.n = n;
      out.push_back(b);
    }
  return out;
}

}  // namespace

std::vector<DnBlock> block_table_3d(const Metric3D& g, const std::optional<Profile>& V,
                                    double lambda2, int m_max, int n_max,
                                    const EngineOptions& opt) {
  return block_table_3d_impl(g, V, lambda2, m_max, n_max, opt);
}

std::vector<DnBlock> block_table_3d(const Metric3D& g, const std::function<double(double)>& V,
                                    double lambda2, int m_max, int n_max,
                                    const EngineOptions& opt) {
  return block_table_3d_impl(g, V, lambda2, m_max, n_max, opt);
}

void dump_blocks_csv(std::ostream& os, const std::vector<DnBlock>& blocks, bool three_d) {
  os << "m,n,L,T_R,T_L,R\n";
  char buf[512];
  for (const auto& b : blocks) {
    if (three_d)
      std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g\n", b.m, b.n, b.L, b.T_R,
                    b.T_L, b.R);
    else
      std::snprintf(buf, sizeof(buf), "%d,,%.17g,%.17g,%.17g,%.17g\n", b.m, b.L, b.T_R, b.T_L,
                    b.R);
    os << buf;
  }
}

namespace {

// relative L2 mass of psi outside gamma_d on a fine synthesis grid
void check_support_2d(const BoundaryData2D& psi, const Mask2D& gamma_d) {
  const int n = 1024;
  double outside = 0.0, total = 0.0;
  for (int i = 0; i < n; ++i) {
    double y = -M_PI + kTwoPi * i / n;
    Complex v(0.0);
    for (int m = -psi.m_max; m <= psi.m_max; ++m)
      v += psi.at(m) * std::polar(1.0, m * y);
    double p = std::norm(v);
    total += p;
    if (!gamma_d.contains(y)) outside += p;
  }
  if (total == 0.0) return;  // zero datum is trivially supported anywhere
  if (outside > 1e-10 * total)
    throw std::invalid_argument("apply_partial_dn: psi has mass outside Gamma_D (" +
                                std::to_string(outside / total) + " relative)");
}

void check_support_3d(const BoundaryData3D& psi, const Mask3D& gamma_d) {
  const int n = 256;
  double outside = 0.0, total = 0.0;
  // separable partial sums to keep the double loop cheap
  for (int iy = 0; iy < n; ++iy) {
    double y = -M_PI + kTwoPi * iy / n;
    std::vector<Complex> row(static_cast<std::size_t>(2 * psi.n_max + 1), Complex(0.0));
    for (int m = -psi.m_max; m <= psi.m_max; ++m) {
      Complex ph = std::polar(1.0, m * y);
      for (int k = -psi.n_max; k <= psi.n_max; ++k)
        row[static_cast<std::size_t>(k + psi.n_max)] += psi.at(m, k) * ph;
    }
    for (int iz = 0; iz < n; ++iz) {
      double z = -M_PI + kTwoPi * iz / n;
      Complex v(0.0);
      for (int k = -psi.n_max; k <= psi.n_max; ++k)
        v += row[static_cast<std::size_t>(k + psi.n_max)] * std::polar(1.0, k * z);
      double p = std::norm(v);
      total += p;
      if (!gamma_d.contains(y, z)) outside += p;
    }
  }
  if (total == 0.0) return;
  if (outside > 1e-10 * total)
    throw std::invalid_argument("apply_partial_dn: psi has mass outside Gamma_D");
}

void enforce_hermitian_2d(const BoundaryData2D& psi) {
  for (int m = 1; m <= psi.m_max; ++m) {
    Complex a = psi.at(m), b = std::conj(psi.at(-m));
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
      throw std::invalid_argument("boundary data flagged real violates Hermitian symmetry");
  }
}

}  // namespace

PartialDnResult2D apply_partial_dn_2d(const Metric2D& g, const std::optional<Profile>& V,
                                      double lambda2, const BoundaryData2D& psi,
                                      const Mask2D& gamma_d, int gamma_n_component,
                                      const Mask2D& gamma_n, int grid_size,
                                      const EngineOptions& opt) {
  if (gamma_n.empty()) throw std::invalid_argument("Gamma_N must be nonempty");
  check_support_2d(psi, gamma_d);
  if (psi.hermitian) enforce_hermitian_2d(psi);

  auto guard = frequency_guard_2d(g, V, lambda2, psi.m_max, opt);
  if (!guard.pass) throw FrequencyAtEigenvalueError(guard.m, guard.n, guard.abs_delta);

  auto blocks = block_table_2d(g, V, lambda2, psi.m_max, opt);
  auto block_of = [&](int m) { return blocks[static_cast<std::size_t>(m + psi.m_max)]; };

  PartialDnResult2D out;
  out.grid.resize(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) out.grid[static_cast<std::size_t>(i)] = -M_PI + kTwoPi * i / grid_size;

  // per-mode images: component 0 gets L*psi0 + T_R*psi1; component 1 gets T_L*psi0 + R*psi1
  std::vector<Complex> img0(2 * static_cast<std::size_t>(psi.m_max) + 1);
  std::vector<Complex> img1(2 * static_cast<std::size_t>(psi.m_max) + 1);
  for (int m = -psi.m_max; m <= psi.m_max; ++m) {
    const auto b = block_of(m);
    Complex p0 = psi.component == 0 ? psi.at(m) : Complex(0.0);
    Complex p1 = psi.component == 1 ? psi.at(m) : Complex(0.0);
    img0[static_cast<std::size_t>(m + psi.m_max)] = b.L * p0 + b.T_R * p1;
    img1[static_cast<std::size_t>(m + psi.m_max)] = b.T_L * p0 + b.R * p1;
  }

  for (int comp = 0; comp < 2; ++comp) {
    auto& img = comp == 0 ? img0 : img1;
    auto& tr = out.full_trace[static_cast<std::size_t>(comp)];
    tr.resize(out.grid.size());
    for (std::size_t i = 0; i < out.grid.size(); ++i) {
      Complex v(0.0);
      for (int m = -psi.m_max; m <= psi.m_max; ++m)
        v += img[static_cast<std::size_t>(m + psi.m_max)] * std::polar(1.0, m * out.grid[i]);
      if (psi.hermitian) v = Complex(v.real(), 0.0);
      tr[i] = v;
    }
  }

  for (std::size_t i = 0; i < out.grid.size(); ++i)
    if (gamma_n.contains(out.grid[i]))
      out.neumann.push_back(
          {gamma_n_component, out.grid[i], 0.0,
           out.full_trace[static_cast<std::size_t>(gamma_n_component)][i]});
  return out;
}

PartialDnResult3D apply_partial_dn_3d(const Metric3D& g, const std::optional<Profile>& V,
                                      double lambda2, const BoundaryData3D& psi,
                                      const Mask3D& gamma_d, int gamma_n_component,
                                      const Mask3D& gamma_n, int grid_size,
                                      const EngineOptions& opt) {
  check_support_3d(psi, gamma_d);

  auto guard = frequency_guard_3d(g, V, lambda2, psi.m_max, psi.n_max, opt);
  if (!guard.pass) throw FrequencyAtEigenvalueError(guard.m, guard.n, guard.abs_delta);

  auto blocks = block_table_3d(g, V, lambda2, psi.m_max, psi.n_max, opt);
  const int nn = 2 * psi.n_max + 1;
  auto block_of = [&](int m, int n) {
    return blocks[static_cast<std::size_t>(m + psi.m_max) * nn + static_cast<std::size_t>(n + psi.n_max)];
  };

  PartialDnResult3D out;
  out.grid.resize(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) out.grid[static_cast<std::size_t>(i)] = -M_PI + kTwoPi * i / grid_size;

  std::vector<Complex> img0(psi.coef.size()), img1(psi.coef.size());
  for (int m = -psi.m_max; m <= psi.m_max; ++m)
    for (int n = -psi.n_max; n <= psi.n_max; ++n) {
      const auto b = block_of(m, n);
      std::size_t idx = static_cast<std::size_t>(m + psi.m_max) * nn + static_cast<std::size_t>(n + psi.n_max);
      Complex p0 = psi.component == 0 ? psi.at(m, n) : Complex(0.0);
      Complex p1 = psi.component == 1 ? psi.at(m, n) : Complex(0.0);
      img0[idx] = b.L * p0 + b.T_R * p1;
      img1[idx] = b.T_L * p0 + b.R * p1;
    }

  const std::size_t gs = out.grid.size();
  for (int comp = 0; comp < 2; ++comp) {
    auto& img = comp == 0 ? img0 : img1;
    auto& tr = out.full_trace[static_cast<std::size_t>(comp)];
    tr.assign(gs * gs, Complex(0.0));
    // separable synthesis: sum over n first, then m
    std::vector<Complex> partial(static_cast<std::size_t>(2 * psi.m_max + 1) * gs);
    num::parallel_for(gs, [&](std::size_t iz) {
      for (int m = -psi.m_max; m <= psi.m_max; ++m) {
        Complex acc(0.0);
        for (int n = -psi.n_max; n <= psi.n_max; ++n)
          acc += img[static_cast<std::size_t>(m + psi.m_max) * nn +
                     static_cast<std::size_t>(n + psi.n_max)] *
                 std::polar(1.0, n * out.grid[iz]);
        partial[static_cast<std::size_t>(m + psi.m_max) * gs + iz] = acc;
      }
    });
    num::parallel_for(gs, [&](std::size_t iy) {
      for (std::size_t iz = 0; iz < gs; ++iz) {
        Complex v(0.0);
        for (int m = -psi.m_max; m <= psi.m_max; ++m)
          v += partial[static_cast<std::size_t>(m + psi.m_max) * gs + iz] *
               std::polar(1.0, m * out.grid[iy]);
        if (psi.hermitian) v = Complex(v.real(), 0.0);
        tr[iy * gs + iz] = v;
      }
    });
  }

  for (std::size_t iy = 0; iy < gs; ++iy)
    for (std::size_t iz = 0; iz < gs; ++iz)
      if (gamma_n.contains(out.grid[iy], out.grid[iz]))
        out.neumann.push_back({gamma_n_component, out.grid[iy], out.grid[iz],
                               out.full_trace[static_cast<std::size_t>(gamma_n_component)][iy * gs + iz]});
  return out;
}

}  // namespace calderon::dn
