#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "micropolar/core.hpp"
#include "micropolar/green.hpp"
#include "micropolar/littlewood_paley.hpp"

namespace micropolar {

enum class Scheme { ETD1, ETDRK2, REF_RK4 };

const char* scheme_name(Scheme s) noexcept;
/// Accepts "ETD1", "ETDRK2", "REF_RK4" (case-insensitive); DomainError otherwise.
Scheme parse_scheme(const std::string& name);

struct IntegratorConfig {
  double dt = 0.1;
  Scheme scheme = Scheme::ETDRK2;
  double t_end = 1.0;
  int sample_stride = 1;
  bool dealias = true;
  /// Linear test mode: transport terms switched off.
  bool nonlinear = true;
  /// Only REF_RK4 honours non-default coefficients; the transformed path
  /// requires the defaults.
  PhysicalParams params;
};

/// Largest eigenvalue of the linear generator over retained modes.
double linear_spectral_radius(const GridSpec& g, const PhysicalParams& p = {});
/// Largest dt for which classical RK4 is stable on the linear part:
/// 2.785 / linear_spectral_radius.
double rk4_stability_bound(const GridSpec& g, const PhysicalParams& p = {});
/// dt * max retained |xi|^2, reported alongside every run.
double stiffness(const GridSpec& g, double dt);

/// Every violated rule for cfg on grid g: non-positive dt or t_end, t_end not
/// a whole number of steps, stride < 1, REF_RK4 above its stability bound,
/// non-default coefficients on the transformed path.
std::vector<std::string> config_violations(const IntegratorConfig& cfg, const GridSpec& g);
/// Throws ValidationError when config_violations is non-empty.
void validate(const IntegratorConfig& cfg, const GridSpec& g);
/// round(t_end / dt).
long step_count(const IntegratorConfig& cfg);

enum class DataKind { GAUSSIAN, CANNONE_OSC, SHELL_RANDOM };

const char* data_kind_name(DataKind k) noexcept;
DataKind parse_data_kind(const std::string& name);

/// Initial-data families. phi is the centered Gaussian of width L/16.
///   GAUSSIAN:     u = amplitude (L/16) (-d2 phi, d1 phi, 0), omega = amplitude phi e3
///   CANNONE_OSC:  u = amplitude sin(x3/eps) (-d2 phi, d1 phi, 0),
///                 omega = amplitude exp(i x1/eps) phi e3 (complex)
///   SHELL_RANDOM: u = amplitude P(packets), omega = amplitude packets, with
///                 random wave packets localized in shell j
/// When target_norm > 0 the state is rescaled afterwards so that
/// ||(u, omega)||_{B^{1/2}_{2,inf}} equals target_norm.
struct DataFamily {
  DataKind kind = DataKind::GAUSSIAN;
  double amplitude = 1.0;
  double eps = 0.0;
  int shell = 0;
  std::uint64_t seed = 0;
  double target_norm = 0.0;
};

/// Integer K with 1/eps = K * 2pi/L, or DomainError naming the eps/L rule.
int oscillation_index(const DataFamily& f, const GridSpec& g);

State make_initial_data(const DataFamily& family, const GridSpec& g);

/// Centered Gaussian exp(-|x - L/2|^2 / (2 sigma^2)), sigma = L/16.
ScalarField gaussian_bump(const GridSpec& g);

/// Real random field whose spectrum lies in shell j: a sum of `packets`
/// translates of the inverse transform of phi(2^-j xi) with N(0,1) weights.
ScalarField shell_wave_packets(const GridSpec& g, int j, std::uint64_t seed, int packets = 4);

/// Holds the transformed and primitive states together and advances them.
class Stepper {
 public:
  Stepper(const State& s0, const IntegratorConfig& cfg);

  /// One step of size cfg.dt. Throws BlowUpError on a non-finite coefficient.
  void step();

  const State& state() const noexcept { return s_; }
  const TransformedState& transformed() const noexcept { return ts_; }
  double time() const noexcept { return s_.t; }
  double dt() const noexcept { return cfg_.dt; }

 private:
  TransformedTendency forcing(const TransformedState& ts, const State& s) const;
  void step_etd();
  void step_rk4();

  IntegratorConfig cfg_;
  TransformedState ts_;
  State s_;
  std::optional<green::EtdTable> table_;
};

/// Single step, functional form.
std::pair<TransformedState, State> step(const TransformedState& ts, const State& s,
                                        const IntegratorConfig& cfg);

/// Throws BlowUpError if any coefficient is not finite.
void check_finite(const State& s);

enum class ProbeTarget { PAIR, U, OMEGA };

/// A Besov norm of D^alpha applied to u, omega or both. With order >= 0 the
/// norms of D^alpha over every |alpha| = order are summed and `alpha` is ignored.
struct Probe {
  std::string name;
  ProbeTarget target = ProbeTarget::PAIR;
  lp::BesovParams bp{0.5, 2.0, lp::kInf};
  MultiIndex alpha{0, 0, 0};
  int order = -1;
  int oversample = 1;
};

/// Canonical column name, e.g. "besov_uw_s0.5_p2_qinf_a000".
std::string default_probe_name(const Probe& p);
double evaluate_probe(const Probe& p, const State& s);

/// Per-shell ||Delta_j (curl u)||_inf, components summed.
std::vector<double> curl_shell_sup(const VectorField& u, const lp::ShellRange& range);

struct RunOptions {
  std::vector<Probe> probes;
  /// Trailing window of the continuation monitor; <= 0 means the whole run.
  double continuation_window = 0.0;
  /// Exponents p for which component-summed shell series of (u, omega) are kept.
  std::vector<double> shell_record_p;
  /// Called at each sample with the current state and its sample index.
  std::function<void(const State&, std::size_t)> on_sample;
};

struct TimeSeries {
  std::vector<std::string> columns;  // t, probes..., energy, div_residual, continuation
  std::vector<std::vector<double>> rows;
  std::vector<lp::ShellSeries> shell_records;  // parallel to shell_record_p
  lp::ShellSeries curl_series;
  double stiffness = 0.0;
  bool blew_up = false;
  std::string error;
  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

/// Advances s0 to cfg.t_end, sampling every cfg.sample_stride steps plus the
/// initial and final states. Results accumulate in `out`; on blow-up the
/// partial series stays in `out` and the BlowUpError propagates.
void run(const State& s0, const IntegratorConfig& cfg, const RunOptions& opts, TimeSeries& out,
         State* final_state = nullptr);
TimeSeries run(const State& s0, const IntegratorConfig& cfg, const RunOptions& opts = {});

/// sup_j of the trapezoidal integral of the per-shell series over the
/// trailing window [t_last - window, t_last] (window <= 0: everything).
double continuation_monitor(const lp::ShellSeries& series, double window);

}  // namespace micropolar
