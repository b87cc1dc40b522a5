#include "micropolar/integrator.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "micropolar/errors.hpp"
#include "micropolar/spectral.hpp"

namespace micropolar {
namespace {

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// Coefficients of a transformed state in one bundle, so that the phi-function
// tables can act on states and tendencies alike.
struct Bundle {
  AMatrixField a;
  AMatrixField w;
  ScalarField d;
};

Bundle bundle(const TransformedState& ts) { return {ts.u_a, ts.omega_omega, ts.omega_d}; }
Bundle bundle(const TransformedTendency& t) { return {t.du_a, t.domega_omega, t.domega_d}; }

// out = sum_i scale_i * phi_{k_i}(h M) x_i, per mode.
Bundle apply_phi(const green::EtdTable& tab, std::initializer_list<std::tuple<int, double, const Bundle*>> terms) {
  const Bundle& first = *std::get<2>(*terms.begin());
  const GridSpec& g = first.d.grid();
  Bundle out{AMatrixField(g, first.a.is_real()), AMatrixField(g, first.w.is_real()), ScalarField(g, first.d.is_real())};
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    const auto m = static_cast<std::size_t>(lp::mode_norm2(kx, ky, kz));
    for (const auto& [k, scale, x] : terms) {
      const green::Mat2& p = tab.pair[k][m];
      for (int e = 0; e < 3; ++e) {
        const Complex a = x->a.entry(e)[idx];
        const Complex w = x->w.entry(e)[idx];
        out.a.entry(e)[idx] += scale * (p(0, 0) * a + p(0, 1) * w);
        out.w.entry(e)[idx] += scale * (p(1, 0) * a + p(1, 1) * w);
      }
      out.d[idx] += scale * tab.scalar[k][m] * x->d[idx];
    }
  });
  return out;
}

Bundle difference(const Bundle& x, const Bundle& y) { return {x.a - y.a, x.w - y.w, x.d - y.d}; }

TransformedState unbundle(Bundle b, double t, const std::array<Complex, 3>& mean) {
  return {std::move(b.a), std::move(b.w), std::move(b.d), t, mean};
}

int dominant_shell(const GridSpec& g, std::size_t idx) {
  const auto k = g.wavevector(idx);
  const long m = lp::mode_norm2(k[0], k[1], k[2]);
  if (m == 0) return lp::lattice_shells(g).j_min - 1;
  const lp::ShellTable& tab = lp::shell_table(g);
  const auto mm = static_cast<std::size_t>(m);
  return tab.w1[mm] > tab.w0[mm] ? tab.j0[mm] + 1 : tab.j0[mm];
}

// Reports the first non-finite coefficient off the zero mode (the mean only
// if nothing else is affected), since the mean carries no shell.
void check_finite_field(const ScalarField& f, double t, const char* what) {
  auto bad = [&](std::size_t i) { return !std::isfinite(f[i].real()) || !std::isfinite(f[i].imag()); };
  std::size_t hit = f.size();
  for (std::size_t i = 1; i < f.size() && hit == f.size(); ++i)
    if (bad(i)) hit = i;
  if (hit == f.size() && bad(0)) hit = 0;
  if (hit == f.size()) return;
  const int shell = dominant_shell(f.grid(), hit);
  const auto k = f.grid().wavevector(hit);
  std::ostringstream os;
  os << "non-finite " << what << " coefficient at t = " << t << ", k = (" << k[0] << ", " << k[1] << ", " << k[2]
     << "), shell " << shell;
  throw BlowUpError(t, shell, os.str());
}

State add_scaled(const State& s, double h, const Tendency& d) {
  State out = s;
  out.u.axpy(h, d.du);
  out.omega.axpy(h, d.domega);
  return out;
}

std::string fmt_num(double x) {
  if (std::isinf(x)) return "inf";
  std::ostringstream os;
  os << x;
  return os.str();
}

std::vector<MultiIndex> multi_indices(int order) {
  std::vector<MultiIndex> out;
  for (int a = order; a >= 0; --a)
    for (int b = order - a; b >= 0; --b) out.push_back({a, b, order - a - b});
  return out;
}

}  // namespace

const char* scheme_name(Scheme s) noexcept {
  switch (s) {
    case Scheme::ETD1: return "ETD1";
    case Scheme::ETDRK2: return "ETDRK2";
    case Scheme::REF_RK4: return "REF_RK4";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  const std::string u = upper(name);
  if (u == "ETD1") return Scheme::ETD1;
  if (u == "ETDRK2") return Scheme::ETDRK2;
  if (u == "REF_RK4") return Scheme::REF_RK4;
  throw DomainError("unknown scheme '" + name + "' (expected ETD1, ETDRK2 or REF_RK4)");
}

double linear_spectral_radius(const GridSpec& g, const PhysicalParams& p) {
  // The generator is Hermitian and rotation invariant, so its spectrum depends
  // on |xi| only and grows with it; evaluate at the retained corner.
  const double c = g.unit() * std::floor(g.dealias_cutoff_index());
  const Vec3 xi{c, c, c};
  green::Mat6 a = green::full_generator(xi);
  const double r2 = 3.0 * c * c;
  for (int i = 0; i < 3; ++i) {
    a(i, i) = (p.chi + p.nu) * r2;
    for (int j = 0; j < 3; ++j) {
      a(i, 3 + j) *= 2.0 * p.chi;
      a(3 + i, j) *= 2.0 * p.chi;
      a(3 + i, 3 + j) = (i == j ? p.mu * r2 + 4.0 * p.chi : 0.0) + p.kappa * xi[i] * xi[j];
    }
  }
  Eigen::SelfAdjointEigenSolver<green::Mat6> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double rk4_stability_bound(const GridSpec& g, const PhysicalParams& p) {
  return 2.785 / linear_spectral_radius(g, p);
}

double stiffness(const GridSpec& g, double dt) { return dt * g.max_retained_xi2(); }

long step_count(const IntegratorConfig& cfg) { return std::lround(cfg.t_end / cfg.dt); }

std::vector<std::string> config_violations(const IntegratorConfig& cfg, const GridSpec& g) {
  std::vector<std::string> v;
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) v.push_back("integrator.dt must be positive");
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) v.push_back("integrator.t_end must be positive");
  if (cfg.sample_stride < 1) v.push_back("integrator.sample_stride must be at least 1");
  if (cfg.dt > 0.0 && cfg.t_end > 0.0) {
    const double n = cfg.t_end / cfg.dt;
    if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n) || std::round(n) < 1.0)
      v.push_back("integrator.t_end must be a whole number of steps dt (t_end/dt = " + fmt_num(n) + ")");
  }
  try {
    cfg.params.validate();
  } catch (const DomainError& e) {
    v.push_back(e.what());
  }
  if (cfg.scheme == Scheme::REF_RK4) {
    const double bound = rk4_stability_bound(g, cfg.params);
    if (cfg.dt > bound)
      v.push_back("integrator.dt = " + fmt_num(cfg.dt) + " exceeds the REF_RK4 linear stability bound " +
                  fmt_num(bound) + " (2.785 / max eigenvalue of the linear generator on this grid)");
  } else if (!cfg.params.is_default()) {
    v.push_back("the transformed (ETD) path requires chi = nu = 1/2, kappa = mu = 1; use REF_RK4 otherwise");
  }
  return v;
}

void validate(const IntegratorConfig& cfg, const GridSpec& g) {
  auto v = config_violations(cfg, g);
  if (!v.empty()) throw ValidationError(std::move(v));
}

const char* data_kind_name(DataKind k) noexcept {
  switch (k) {
    case DataKind::GAUSSIAN: return "GAUSSIAN";
    case DataKind::CANNONE_OSC: return "CANNONE_OSC";
    case DataKind::SHELL_RANDOM: return "SHELL_RANDOM";
  }
  return "?";
}

DataKind parse_data_kind(const std::string& name) {
  const std::string u = upper(name);
  if (u == "GAUSSIAN") return DataKind::GAUSSIAN;
  if (u == "CANNONE_OSC") return DataKind::CANNONE_OSC;
  if (u == "SHELL_RANDOM") return DataKind::SHELL_RANDOM;
  throw DomainError("unknown data family '" + name + "' (expected GAUSSIAN, CANNONE_OSC or SHELL_RANDOM)");
}

int oscillation_index(const DataFamily& f, const GridSpec& g) {
  if (!(f.eps > 0.0))
    throw DomainError("data.eps must be positive for CANNONE_OSC (1/eps must be an integer multiple of 2pi/L)");
  const double k = 1.0 / (f.eps * g.unit());
  const double kr = std::round(k);
  if (kr < 1.0 || std::abs(k - kr) > 1e-9 * kr)
    throw DomainError("data.eps violates the eps/L rule: 1/eps = " + fmt_num(1.0 / f.eps) +
                      " is not an integer multiple of 2pi/L = " + fmt_num(g.unit()));
  if (kr > g.dealias_cutoff_index())
    throw DomainError("data.eps: oscillation index " + fmt_num(kr) + " lies beyond the dealias band " +
                      fmt_num(g.dealias_cutoff_index()) + " of this grid");
  return static_cast<int>(kr);
}

ScalarField gaussian_bump(const GridSpec& g) {
  const int n = g.n();
  const double h = g.length() / n;
  const double c = g.length() / 2.0;
  const double sigma = g.length() / 16.0;
  std::vector<double> e(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = i * h - c;
    e[i] = std::exp(-x * x / (2.0 * sigma * sigma));
  }
  std::vector<Complex> samples(g.size());
  std::size_t idx = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int d = 0; d < n; ++d) samples[idx++] = e[a] * e[b] * e[d];
  ScalarField f = ScalarField::from_physical(g, samples, true);
  f.enforce_reality();
  return f;
}

ScalarField shell_wave_packets(const GridSpec& g, int j, std::uint64_t seed, int packets) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, g.length());
  std::normal_distribution<double> weight(0.0, 1.0);
  std::vector<std::pair<Vec3, double>> centers;
  for (int m = 0; m < packets; ++m) {
    const Vec3 x{pos(rng), pos(rng), pos(rng)};
    centers.emplace_back(x, weight(rng));
  }
  ScalarField f(g, true);
  const double scale = std::ldexp(1.0, -j);
  for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
    if (!g.retained(kx, ky, kz)) return;
    const double r = g.unit() * std::sqrt(static_cast<double>(lp::mode_norm2(kx, ky, kz)));
    const double w = lp::phi(scale * r);
    if (w == 0.0) return;
    const Vec3 xi{g.unit() * kx, g.unit() * ky, g.unit() * kz};
    Complex acc(0.0, 0.0);
    for (const auto& [x, a] : centers) acc += a * std::polar(1.0, -(xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]));
    f[idx] = w * acc;
  });
  f.enforce_reality();
  return f;
}

State make_initial_data(const DataFamily& fam, const GridSpec& g) {
  constexpr MultiIndex d1{1, 0, 0}, d2{0, 1, 0};
  State s{VectorField(g, true), VectorField(g, true), 0.0};
  switch (fam.kind) {
    case DataKind::GAUSSIAN: {
      const ScalarField phi = gaussian_bump(g);
      const double sigma = g.length() / 16.0;
      s.u[0] = (-sigma * fam.amplitude) * spectral::derivative(phi, d2);
      s.u[1] = (sigma * fam.amplitude) * spectral::derivative(phi, d1);
      s.omega[2] = fam.amplitude * phi;
      break;
    }
    case DataKind::CANNONE_OSC: {
      const int k = oscillation_index(fam, g);
      const ScalarField phi = gaussian_bump(g);
      const ScalarField v1 = -1.0 * spectral::derivative(phi, d2);
      const ScalarField v2 = spectral::derivative(phi, d1);
      const int n = g.n();
      auto source = [&](int kx, int ky, int kz) -> long {
        if (kx < -n / 2 || kx >= n / 2 || ky < -n / 2 || ky >= n / 2 || kz < -n / 2 || kz >= n / 2) return -1;
        return static_cast<long>(g.index(g.slot(kx), g.slot(ky), g.slot(kz)));
      };
      // sin(K x3) v has coefficients (v(k - K e3) - v(k + K e3)) / 2i, which keeps
      // xi . u = 0 mode by mode.
      const Complex two_i(0.0, 2.0);
      s.omega = VectorField(g, false);
      for_each_mode(g, [&](std::size_t idx, int kx, int ky, int kz) {
        const long lo = source(kx, ky, kz - k), hi = source(kx, ky, kz + k);
        for (int c = 0; c < 2; ++c) {
          const ScalarField& v = c == 0 ? v1 : v2;
          const Complex a = lo >= 0 ? v[static_cast<std::size_t>(lo)] : Complex(0.0);
          const Complex b = hi >= 0 ? v[static_cast<std::size_t>(hi)] : Complex(0.0);
          s.u[c][idx] = fam.amplitude * (a - b) / two_i;
        }
        const long src = source(kx - k, ky, kz);
        if (src >= 0) s.omega[2][idx] = fam.amplitude * phi[static_cast<std::size_t>(src)];
      });
      for (int c = 0; c < 2; ++c) s.u[c].enforce_reality();
      break;
    }
    case DataKind::SHELL_RANDOM: {
      VectorField raw(g, true);
      for (int c = 0; c < 3; ++c) {
        raw[c] = fam.amplitude * shell_wave_packets(g, fam.shell, fam.seed * 6 + c);
        s.omega[c] = fam.amplitude * shell_wave_packets(g, fam.shell, fam.seed * 6 + 3 + c);
      }
      s.u = spectral::leray_project(raw);
      break;
    }
  }
  s.u = spectral::dealias(s.u);
  s.omega = spectral::dealias(s.omega);
  if (fam.target_norm > 0.0) {
    const lp::BesovParams bp{0.5, 2.0, lp::kInf};
    const double norm = lp::besov_norm(s.u, bp) + lp::besov_norm(s.omega, bp);
    if (norm > 0.0) {
      s.u *= fam.target_norm / norm;
      s.omega *= fam.target_norm / norm;
    }
  }
  return s;
}

void check_finite(const State& s) {
  for (int i = 0; i < 3; ++i) {
    check_finite_field(s.u[i], s.t, "velocity");
    check_finite_field(s.omega[i], s.t, "micro-rotation");
  }
}

Stepper::Stepper(const State& s0, const IntegratorConfig& cfg) : cfg_(cfg), s_(s0) {
  require_same_grid(s0.u.grid(), s0.omega.grid(), "Stepper");
  validate(cfg, s0.u.grid());
  ts_ = transform(s0);
  if (cfg.scheme != Scheme::REF_RK4) table_ = green::etd_table(s0.u.grid(), cfg.dt);
}

TransformedTendency Stepper::forcing(const TransformedState&, const State& s) const {
  return transformed_forcing(convection(s, cfg_.dealias));
}

void Stepper::step() {
  if (cfg_.scheme == Scheme::REF_RK4)
    step_rk4();
  else
    step_etd();
  check_finite(s_);
}

void Stepper::step_etd() {
  const green::EtdTable& tab = *table_;
  const double h = cfg_.dt;
  const double t1 = ts_.t + h;
  std::array<Complex, 3> mean = ts_.omega_mean;
  // The mean of omega decays at rate 2; transport has no mean.
  for (auto& c : mean) c *= std::exp(-2.0 * h);

  const Bundle x0 = bundle(ts_);
  if (!cfg_.nonlinear) {
    ts_ = unbundle(apply_phi(tab, {{0, 1.0, &x0}}), t1, mean);
    s_ = reconstruct(ts_);
    return;
  }
  const Bundle n0 = bundle(forcing(ts_, s_));
  Bundle a = apply_phi(tab, {{0, 1.0, &x0}, {1, h, &n0}});
  if (cfg_.scheme == Scheme::ETDRK2) {
    const TransformedState ta = unbundle(a, t1, mean);
    const State sa = reconstruct(ta);
    const Bundle diff = difference(bundle(forcing(ta, sa)), n0);
    const Bundle corr = apply_phi(tab, {{2, h, &diff}});
    a = {a.a + corr.a, a.w + corr.w, a.d + corr.d};
  }
  ts_ = unbundle(std::move(a), t1, mean);
  s_ = reconstruct(ts_);
}

void Stepper::step_rk4() {
  const double h = cfg_.dt;
  const PhysicalParams& p = cfg_.params;
  const bool nl = cfg_.nonlinear, da = cfg_.dealias;
  const Tendency k1 = rhs_projected(s_, p, nl, da);
  const Tendency k2 = rhs_projected(add_scaled(s_, 0.5 * h, k1), p, nl, da);
  const Tendency k3 = rhs_projected(add_scaled(s_, 0.5 * h, k2), p, nl, da);
  const Tendency k4 = rhs_projected(add_scaled(s_, h, k3), p, nl, da);
  State next = s_;
  next.u.axpy(h / 6.0, k1.du);
  next.u.axpy(h / 3.0, k2.du);
  next.u.axpy(h / 3.0, k3.du);
  next.u.axpy(h / 6.0, k4.du);
  next.omega.axpy(h / 6.0, k1.domega);
  next.omega.axpy(h / 3.0, k2.domega);
  next.omega.axpy(h / 3.0, k3.domega);
  next.omega.axpy(h / 6.0, k4.domega);
  next.t = s_.t + h;
  s_ = std::move(next);
  ts_ = transform(s_);
}

std::pair<TransformedState, State> step(const TransformedState& ts, const State& s, const IntegratorConfig& cfg) {
  const TransformedState check = transform(s);
  double scale = 0.0;
  for (int i = 0; i < 3; ++i) scale = std::max({scale, s.u[i].max_abs(), s.omega[i].max_abs()});
  if (transformed_distance(ts, check) > 1e-8 * scale)
    throw ConsistencyError("step: transformed state does not match the primitive state");
  Stepper st(s, cfg);
  st.step();
  return {st.transformed(), st.state()};
}

std::string default_probe_name(const Probe& p) {
  std::ostringstream os;
  os << "besov_" << (p.target == ProbeTarget::PAIR ? "uw" : p.target == ProbeTarget::U ? "u" : "w") << "_s"
     << fmt_num(p.bp.s) << "_p" << fmt_num(p.bp.p) << "_q" << fmt_num(p.bp.q) << "_";
  if (p.order >= 0)
    os << "d" << p.order;
  else
    os << "a" << p.alpha[0] << p.alpha[1] << p.alpha[2];
  return os.str();
}

double evaluate_probe(const Probe& p, const State& s) {
  const std::vector<MultiIndex> alphas = p.order >= 0 ? multi_indices(p.order) : std::vector<MultiIndex>{p.alpha};
  const bool trivial = alphas.size() == 1 && alphas[0] == MultiIndex{0, 0, 0};
  double total = 0.0;
  for (const VectorField* v : {&s.u, &s.omega}) {
    if ((v == &s.u && p.target == ProbeTarget::OMEGA) || (v == &s.omega && p.target == ProbeTarget::U)) continue;
    for (const auto& a : alphas) {
      for (int i = 0; i < 3; ++i) {
        total += trivial ? lp::besov_norm((*v)[i], p.bp, p.oversample)
                         : lp::besov_norm(spectral::derivative((*v)[i], a), p.bp, p.oversample);
      }
    }
  }
  return total;
}

std::vector<double> curl_shell_sup(const VectorField& u, const lp::ShellRange& range) {
  const VectorField c = spectral::curl(u);
  std::vector<double> out(static_cast<std::size_t>(range.count()), 0.0);
  for (int i = 0; i < 3; ++i) {
    const auto v = lp::shell_norms(c[i], lp::kInf, range);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += v[k];
  }
  return out;
}

double continuation_monitor(const lp::ShellSeries& series, double window) {
  const auto& t = series.times;
  if (t.size() < 2) return 0.0;
  const double start = window > 0.0 ? t.back() - window : -std::numeric_limits<double>::infinity();
  double best = 0.0;
  for (int j = 0; j < series.range.count(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (t[i] <= start) continue;
      double ta = t[i - 1], fa = series.values[i - 1][j];
      const double tb = t[i], fb = series.values[i][j];
      if (ta < start) {  // clip the first interval to the window
        fa = fa + (fb - fa) * (start - ta) / (tb - ta);
        ta = start;
      }
      acc += 0.5 * (fa + fb) * (tb - ta);
    }
    best = std::max(best, acc);
  }
  return best;
}

std::size_t TimeSeries::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw DomainError("time series has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> TimeSeries::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

void run(const State& s0, const IntegratorConfig& cfg, const RunOptions& opts, TimeSeries& out, State* final_state) {
  const GridSpec& g = s0.u.grid();
  Stepper stepper(s0, cfg);
  out.columns = {"t"};
  for (const auto& p : opts.probes) out.columns.push_back(p.name.empty() ? default_probe_name(p) : p.name);
  out.columns.insert(out.columns.end(), {"energy", "div_residual", "continuation"});
  out.rows.clear();
  out.stiffness = stiffness(g, cfg.dt);
  out.blew_up = false;
  out.error.clear();
  const lp::ShellRange range = lp::resolved_shells(g);
  out.curl_series = lp::ShellSeries{range, {}, {}};
  out.shell_records.assign(opts.shell_record_p.size(), lp::ShellSeries{range, {}, {}});

  std::size_t sample_index = 0;
  auto sample = [&](const State& s) {
    std::vector<double> row{s.t};
    for (const auto& p : opts.probes) row.push_back(evaluate_probe(p, s));
    row.push_back(energy(s));
    row.push_back(spectral::divergence_residual(s.u));
    out.curl_series.push(s.t, curl_shell_sup(s.u, range));
    row.push_back(continuation_monitor(out.curl_series, opts.continuation_window));
    for (std::size_t k = 0; k < opts.shell_record_p.size(); ++k) {
      std::vector<double> acc(static_cast<std::size_t>(range.count()), 0.0);
      for (const VectorField* v : {&s.u, &s.omega})
        for (int i = 0; i < 3; ++i) {
          const auto sh = lp::shell_norms((*v)[i], opts.shell_record_p[k], range);
          for (std::size_t q = 0; q < acc.size(); ++q) acc[q] += sh[q];
        }
      out.shell_records[k].push(s.t, std::move(acc));
    }
    out.rows.push_back(std::move(row));
    if (opts.on_sample) opts.on_sample(s, sample_index);
    ++sample_index;
  };

  const long nsteps = step_count(cfg);
  sample(stepper.state());
  try {
    for (long i = 1; i <= nsteps; ++i) {
      stepper.step();
      if (i % cfg.sample_stride == 0 || i == nsteps) sample(stepper.state());
    }
  } catch (const BlowUpError& e) {
    out.blew_up = true;
    out.error = e.what();
    if (final_state) *final_state = stepper.state();
    throw;
  }
  if (final_state) *final_state = stepper.state();
}

TimeSeries run(const State& s0, const IntegratorConfig& cfg, const RunOptions& opts) {
  TimeSeries ts;
  run(s0, cfg, opts, ts);
  return ts;
}

}  // namespace micropolar
