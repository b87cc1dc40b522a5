#include "micropolar/littlewood_paley.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "micropolar/errors.hpp"
#include "micropolar/spectral.hpp"

namespace micropolar::lp {
namespace {

constexpr double kLog2Outer = 1.4150374992788437;  // log2(8/3)
constexpr double kTol = 1e-9;

double smooth_edge(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

template <typename Weight>
ScalarField multiply_radial(const ScalarField& f, Weight&& w) {
  const GridSpec& g = f.grid();
  ScalarField out(g, f.is_real());
  auto in = f.modes();
  auto res = out.modes();
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    const double c = w(mode_norm2(kx, ky, kz));
    if (c != 0.0) res[idx] = c * in[idx];
  });
  return out;
}

}  // namespace

double chi(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 4.0 / 3.0) return 0.0;
  const double x = (4.0 / 3.0 - r) * 3.0;
  const double a = smooth_edge(x);
  const double b = smooth_edge(1.0 - x);
  return a / (a + b);
}

double phi(double r) { return chi(0.5 * r) - chi(r); }

ShellRange resolved_shells(const GridSpec& g) {
  ShellRange r;
  r.j_min = static_cast<int>(std::ceil(std::log2(4.0 / 3.0 * g.unit()) - kTol));
  r.j_max = static_cast<int>(std::floor(std::log2(0.75 * g.dealias_cutoff()) + kTol));
  return r;
}

ShellRange lattice_shells(const GridSpec& g) {
  const double lo = std::log2(g.unit());
  const double hi = std::log2(g.unit() * std::sqrt(3.0) * (g.n() / 2));
  ShellRange r;
  r.j_min = static_cast<int>(std::floor(lo - kLog2Outer)) + 1;
  r.j_max = static_cast<int>(std::ceil(hi)) - 1;
  return r;
}

const ShellTable& shell_table(const GridSpec& g) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, std::unique_ptr<ShellTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{g.n(), g.length()}];
  if (!slot) {
    auto t = std::make_unique<ShellTable>();
    const std::size_t mmax = 3 * static_cast<std::size_t>(g.n() / 2) * (g.n() / 2);
    t->j0.assign(mmax + 1, 0);
    t->w0.assign(mmax + 1, 0.0);
    t->w1.assign(mmax + 1, 0.0);
    for (std::size_t m = 1; m <= mmax; ++m) {
      const double rho = g.unit() * std::sqrt(static_cast<double>(m));
      const int j0 = static_cast<int>(std::floor(std::log2(rho) - kLog2Outer)) + 1;
      t->j0[m] = j0;
      t->w0[m] = phi(std::ldexp(rho, -j0));
      t->w1[m] = phi(std::ldexp(rho, -j0 - 1));
    }
    slot = std::move(t);
  }
  return *slot;
}

ScalarField project_shell(const ScalarField& f, int j) {
  const ShellTable& t = shell_table(f.grid());
  return multiply_radial(f, [&](long m) { return t.weight(m, j); });
}

ScalarField project_ball(const ScalarField& f, int j) {
  const double u = f.grid().unit();
  return multiply_radial(f, [&](long m) { return chi(std::ldexp(u * std::sqrt(double(m)), -j)); });
}

ScalarField project_wide_shell(const ScalarField& f, int j) {
  const ShellTable& t = shell_table(f.grid());
  return multiply_radial(f, [&](long m) { return t.weight(m, j - 1) + t.weight(m, j) + t.weight(m, j + 1); });
}

std::vector<double> shell_norms(const ScalarField& f, double p, const ShellRange& range, int oversample) {
  std::vector<double> out(static_cast<std::size_t>(range.count()), 0.0);
  if (range.empty()) return out;
  if (p == 2.0) {
    const ShellTable& t = shell_table(f.grid());
    auto c = f.modes();
    for_each_mode(f.grid(), [&](std::size_t idx, int kx, int ky, int kz) {
      const long m = mode_norm2(kx, ky, kz);
      if (m == 0) return;
      const double a = std::norm(c[idx]);
      if (a == 0.0) return;
      const int j0 = t.j0[static_cast<std::size_t>(m)];
      if (j0 >= range.j_min && j0 <= range.j_max) out[j0 - range.j_min] += t.w0[m] * t.w0[m] * a;
      if (j0 + 1 >= range.j_min && j0 + 1 <= range.j_max) out[j0 + 1 - range.j_min] += t.w1[m] * t.w1[m] * a;
    });
    for (auto& v : out) v = std::sqrt(f.grid().volume() * v);
    return out;
  }
  for (int j = range.j_min; j <= range.j_max; ++j)
    out[j - range.j_min] = spectral::lp_norm(project_shell(f, j), p, oversample);
  return out;
}

double weighted_lq(const std::vector<double>& a, const ShellRange& range, double s, double q) {
  if (!(q >= 1.0)) throw DomainError("besov: q must be >= 1");
  double acc = 0.0;
  for (int j = range.j_min; j <= range.j_max; ++j) {
    const double v = std::exp2(j * s) * a[j - range.j_min];
    if (std::isinf(q)) acc = std::max(acc, v);
    else acc += std::pow(v, q);
  }
  return std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
}

double besov_norm(const ScalarField& f, const BesovParams& bp, int oversample) {
  const ShellRange r = resolved_shells(f.grid());
  if (r.empty()) throw DomainError("besov_norm: grid resolves no dyadic shell");
  return weighted_lq(shell_norms(f, bp.p, r, oversample), r, bp.s, bp.q);
}

double besov_norm(const VectorField& v, const BesovParams& bp, int oversample) {
  return besov_norm(v[0], bp, oversample) + besov_norm(v[1], bp, oversample) + besov_norm(v[2], bp, oversample);
}

double besov_norm(const AMatrixField& m, const BesovParams& bp, int oversample) {
  return 2.0 * (besov_norm(m.a12, bp, oversample) + besov_norm(m.a13, bp, oversample) +
                besov_norm(m.a23, bp, oversample));
}

void ShellSeries::push(double t, std::vector<double> shell_values) {
  if (!times.empty() && !(t > times.back())) throw DomainError("time series: times must increase strictly");
  if (static_cast<int>(shell_values.size()) != range.count())
    throw StructuralError("time series: shell count mismatch");
  times.push_back(t);
  values.push_back(std::move(shell_values));
}

double chemin_lerner_norm(const ShellSeries& series, double r, double s, double q) {
  const std::size_t ns = series.times.size();
  if (ns == 0) throw DomainError("chemin_lerner_norm: empty series");
  if (!std::isinf(r) && ns < 2) throw DomainError("chemin_lerner_norm: need two samples for finite r");
  if (!(r >= 1.0)) throw DomainError("chemin_lerner_norm: r must be >= 1");
  for (std::size_t i = 1; i < ns; ++i)
    if (!(series.times[i] > series.times[i - 1])) throw DomainError("chemin_lerner_norm: non-monotone times");
  const ShellRange& range = series.range;
  std::vector<double> per_shell(static_cast<std::size_t>(range.count()), 0.0);
  for (int k = 0; k < range.count(); ++k) {
    double acc = 0.0;
    if (std::isinf(r)) {
      for (std::size_t i = 0; i < ns; ++i) acc = std::max(acc, series.values[i][k]);
      per_shell[k] = acc;
    } else {
      for (std::size_t i = 1; i < ns; ++i) {
        const double dt = series.times[i] - series.times[i - 1];
        acc += 0.5 * dt * (std::pow(series.values[i - 1][k], r) + std::pow(series.values[i][k], r));
      }
      per_shell[k] = std::pow(acc, 1.0 / r);
    }
  }
  return weighted_lq(per_shell, range, s, q);
}

double chemin_lerner_norm(const std::vector<double>& times, const std::vector<ScalarField>& fields,
                          double r, const BesovParams& bp) {
  if (times.size() != fields.size()) throw StructuralError("chemin_lerner_norm: size mismatch");
  if (fields.empty()) throw DomainError("chemin_lerner_norm: empty series");
  ShellSeries s;
  s.range = resolved_shells(fields.front().grid());
  if (s.range.empty()) throw DomainError("chemin_lerner_norm: grid resolves no dyadic shell");
  for (std::size_t i = 0; i < times.size(); ++i) {
    require_same_grid(fields[i].grid(), fields.front().grid(), "chemin_lerner_norm");
    s.push(times[i], shell_norms(fields[i], bp.p, s.range));
  }
  return chemin_lerner_norm(s, r, bp.s, bp.q);
}

BonyParts bony_decompose(const ScalarField& f, const ScalarField& g) {
  const GridSpec& grid = f.grid();
  require_same_grid(grid, g.grid(), "bony_decompose");
  const ShellRange all = lattice_shells(grid);
  const std::size_t n = grid.size();
  std::vector<Complex> t1(n), t2(n), rr(n);
  for (int j = all.j_min; j <= all.j_max; ++j) {
    const auto sf = project_ball(f, j - 1).to_physical();
    const auto sg = project_ball(g, j - 1).to_physical();
    const auto df = project_shell(f, j).to_physical();
    const auto dg = project_shell(g, j).to_physical();
    const auto wg = project_wide_shell(g, j).to_physical();
    for (std::size_t i = 0; i < n; ++i) {
      t1[i] += sf[i] * dg[i];
      t2[i] += sg[i] * df[i];
      rr[i] += df[i] * wg[i];
    }
  }
  const bool real = f.is_real() && g.is_real();
  return {spectral::dealias(ScalarField::from_physical(grid, t1, real)),
          spectral::dealias(ScalarField::from_physical(grid, t2, real)),
          spectral::dealias(ScalarField::from_physical(grid, rr, real))};
}

}  // namespace micropolar::lp
