#include "micropolar/cli.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "micropolar/errors.hpp"
#include "micropolar/spectral.hpp"
#include "toml.hpp"

namespace micropolar::cli {

namespace fs = std::filesystem;

namespace {

// ------------------------------------------------------------ TOML reading

// Typed access to one table. Wrong types and unknown keys become violations
// rather than exceptions so that a single pass reports everything.
class TableReader {
 public:
  TableReader(const toml::table* t, std::string path, std::vector<std::string>& v)
      : t_(t), path_(std::move(path)), v_(v) {}

  bool present() const { return t_ != nullptr; }

  template <typename T>
  void get(std::string_view key, T& out) {
    known_.insert(std::string(key));
    if (!t_) return;
    const toml::node* node = t_->get(key);
    if (!node) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (auto x = node->value_exact<bool>()) out = *x; else bad(key, "a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto x = node->value_exact<std::string>()) out = *x; else bad(key, "a string");
    } else if constexpr (std::is_integral_v<T>) {
      auto x = node->value_exact<std::int64_t>();
      if (!x) return bad(key, "an integer");
      if (*x < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
          static_cast<std::uint64_t>(std::max<std::int64_t>(*x, 0)) >
              static_cast<std::uint64_t>(std::numeric_limits<T>::max()))
        return bad(key, "an integer in range");
      out = static_cast<T>(*x);
    } else {
      out = number(node, key, out);
    }
  }

  /// Number, or the string "inf".
  double number(const toml::node* node, std::string_view key, double fallback) {
    if (auto x = node->value_exact<double>()) return *x;
    if (auto x = node->value_exact<std::int64_t>()) return static_cast<double>(*x);
    if (auto x = node->value_exact<std::string>(); x && (*x == "inf" || *x == "infinity")) return lp::kInf;
    bad(key, "a number");
    return fallback;
  }

  void get_numbers(std::string_view key, std::vector<double>& out) {
    known_.insert(std::string(key));
    if (!t_) return;
    const toml::node* node = t_->get(key);
    if (!node) return;
    const toml::array* arr = node->as_array();
    if (!arr) return bad(key, "an array of numbers");
    out.clear();
    for (const auto& e : *arr) out.push_back(number(&e, key, 0.0));
  }

  void get_ints(std::string_view key, std::vector<int>& out) {
    known_.insert(std::string(key));
    if (!t_) return;
    const toml::node* node = t_->get(key);
    if (!node) return;
    const toml::array* arr = node->as_array();
    if (!arr) return bad(key, "an array of integers");
    out.clear();
    for (const auto& e : *arr) {
      if (auto x = e.value_exact<std::int64_t>())
        out.push_back(static_cast<int>(*x));
      else
        return bad(key, "an array of integers");
    }
  }

  bool has(std::string_view key) const { return t_ && t_->get(key) != nullptr; }

  const toml::table* sub(std::string_view key) {
    known_.insert(std::string(key));
    if (!t_) return nullptr;
    const toml::node* node = t_->get(key);
    if (!node) return nullptr;
    if (const toml::table* t = node->as_table()) return t;
    bad(key, "a table");
    return nullptr;
  }

  const toml::array* array(std::string_view key) {
    known_.insert(std::string(key));
    if (!t_) return nullptr;
    const toml::node* node = t_->get(key);
    if (!node) return nullptr;
    if (const toml::array* a = node->as_array()) return a;
    bad(key, "an array of tables");
    return nullptr;
  }

  /// Reports keys never asked for.
  void finish() {
    if (!t_) return;
    for (const auto& [k, _] : *t_)
      if (!known_.count(std::string(k.str()))) v_.push_back(fmt::format("unknown key {}", qualified(k.str())));
  }

  std::string qualified(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

 private:
  void bad(std::string_view key, const char* type) {
    v_.push_back(fmt::format("{} must be {}", qualified(key), type));
  }

  const toml::table* t_;
  std::string path_;
  std::vector<std::string>& v_;
  std::set<std::string> known_;
};

ProbeTarget parse_target(const std::string& s, std::vector<std::string>& v, const std::string& where) {
  if (s == "pair" || s == "uw") return ProbeTarget::PAIR;
  if (s == "u") return ProbeTarget::U;
  if (s == "omega" || s == "w") return ProbeTarget::OMEGA;
  v.push_back(fmt::format("{}.target must be one of pair, u, omega (got \"{}\")", where, s));
  return ProbeTarget::PAIR;
}

Probe read_probe(const toml::table* t, const std::string& where, std::vector<std::string>& v) {
  TableReader r(t, where, v);
  Probe p;
  std::string kind = "besov", target = "pair";
  std::vector<int> alpha{0, 0, 0};
  r.get("kind", kind);
  r.get("name", p.name);
  r.get("target", target);
  r.get("s", p.bp.s);
  r.get("p", p.bp.p);
  r.get("q", p.bp.q);
  r.get_ints("alpha", alpha);
  r.get("order", p.order);
  r.get("oversample", p.oversample);
  r.finish();
  if (kind != "besov") v.push_back(fmt::format("{}.kind must be \"besov\" (got \"{}\")", where, kind));
  p.target = parse_target(target, v, where);
  if (alpha.size() != 3)
    v.push_back(fmt::format("{}.alpha must have three entries", where));
  else
    p.alpha = {alpha[0], alpha[1], alpha[2]};
  return p;
}

std::string num(double x) { return fmt::format("{:.17g}", x); }

// ------------------------------------------------------------ byte helpers

template <typename T>
void put(std::string& out, T value) {
  char b[sizeof(T)];
  std::memcpy(b, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(b, sizeof(T));
}

template <typename T>
T take(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw DomainError("snapshot truncated");
  char b[sizeof(T)];
  std::memcpy(b, bytes.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, b, sizeof(T));
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError(path, "read failed");
  return os.str();
}

}  // namespace

// ------------------------------------------------------------------ config

DataFamily RunConfig::data_family() const {
  DataFamily d = data;
  if (!data_seed_set) d.seed = seed;
  return d;
}

std::vector<Probe> RunConfig::effective_probes() const {
  if (!probes.empty()) return probes;
  return {Probe{}};
}

verify::DynamicsPreset RunConfig::dynamics_preset() const {
  verify::DynamicsPreset p;
  p.n = grid.n;
  p.length = grid.length;
  p.integrator = integrator;
  p.integrator.params = params;
  p.data = data_family();
  p.exponents = verify.exponents;
  p.decay_from = verify.decay_from;
  p.flat_from = verify.flat_from;
  p.oscillation_n = verify.oscillation_n;
  p.oscillation_length = verify.oscillation_length;
  return p;
}

namespace {

void check_grid(int n, double length, const std::string& where, std::vector<std::string>& v) {
  try {
    GridSpec g(n, length);
  } catch (const DomainError& e) {
    const std::string what = e.what();
    v.push_back(what.rfind(where + ":", 0) == 0 ? what : where + ": " + what);
  }
}

}  // namespace

std::vector<std::string> config_violations(const RunConfig& c) {
  std::vector<std::string> v;
  check_grid(c.grid.n, c.grid.length, "grid", v);
  try {
    c.params.validate();
  } catch (const DomainError& e) {
    v.push_back(fmt::format("params: {}", e.what()));
  }
  bool grid_ok = v.empty();
  if (grid_ok) {
    const GridSpec g = c.grid_spec();
    IntegratorConfig ic = c.integrator;
    ic.params = c.params;
    for (auto& s : micropolar::config_violations(ic, g)) v.push_back(s);
    if (c.data.kind == DataKind::CANNONE_OSC) {
      try {
        oscillation_index(c.data, g);
      } catch (const DomainError& e) {
        v.push_back(e.what());
      }
    }
    if (c.data.kind == DataKind::SHELL_RANDOM) {
      const lp::ShellRange range = lp::resolved_shells(g);
      if (c.data.shell < range.j_min || c.data.shell > range.j_max)
        v.push_back(fmt::format("data.shell {} outside the resolved range [{}, {}]", c.data.shell, range.j_min,
                                range.j_max));
    }
  }
  if (!std::isfinite(c.data.amplitude)) v.push_back("data.amplitude must be finite");
  if (!(c.data.target_norm >= 0.0)) v.push_back("data.target_norm must be >= 0");
  if (!(c.continuation_window >= 0.0)) v.push_back("integrator.continuation_window must be >= 0");
  std::set<std::string> names;
  for (std::size_t i = 0; i < c.probes.size(); ++i) {
    const Probe& p = c.probes[i];
    const std::string where = fmt::format("probes[{}]", i);
    if (!(p.bp.p >= 1.0)) v.push_back(where + ".p must be >= 1");
    if (!(p.bp.q >= 1.0)) v.push_back(where + ".q must be >= 1");
    if (!std::isfinite(p.bp.s)) v.push_back(where + ".s must be finite");
    if (p.order < -1 || p.order > 2) v.push_back(where + ".order must be in [0, 2] (or absent)");
    if (std::any_of(p.alpha.begin(), p.alpha.end(), [](int a) { return a < 0; }))
      v.push_back(where + ".alpha entries must be >= 0");
    if (p.oversample < 1) v.push_back(where + ".oversample must be >= 1");
    const std::string name = p.name.empty() ? default_probe_name(p) : p.name;
    if (!names.insert(name).second) v.push_back(fmt::format("{}: duplicate probe name {}", where, name));
  }
  if (c.outputs.csv.empty()) v.push_back("outputs.csv must not be empty");
  if (c.outputs.json.empty()) v.push_back("outputs.json must not be empty");
  if (c.outputs.snapshot_stride < 0) v.push_back("outputs.snapshot_stride must be >= 0");
  check_grid(c.verify.analysis.n, c.verify.analysis.length, "verify.analysis", v);
  check_grid(c.verify.green.n, 2.0 * kPi, "verify.green", v);
  check_grid(c.verify.oscillation_n, c.verify.oscillation_length, "verify.dynamics oscillation grid", v);
  if (c.verify.green.samples < 1) v.push_back("verify.green.samples must be >= 1");
  if (c.verify.green.modes < 1) v.push_back("verify.green.modes must be >= 1");
  if (c.verify.green.shells.size() < 2) v.push_back("verify.green.shells needs at least two shells");
  for (double p : c.verify.green.exponents)
    if (!(p >= 1.0)) v.push_back("verify.green.exponents must be >= 1");
  if (c.verify.exponents.empty()) v.push_back("verify.dynamics.exponents must not be empty");
  for (double p : c.verify.exponents)
    if (!(p >= 1.0) || !std::isfinite(p)) v.push_back("verify.dynamics.exponents must be finite and >= 1");
  return v;
}

namespace {

// Fit windows only matter to verify-dynamics, so they are checked there.
void validate_fit_windows(const RunConfig& c) {
  std::vector<std::string> v;
  const double t_end = c.integrator.t_end;
  if (!(c.verify.decay_from > 0.0 && c.verify.decay_from < t_end))
    v.push_back("verify.dynamics.decay_from must lie in (0, integrator.t_end)");
  if (!(c.verify.flat_from >= 0.0 && c.verify.flat_from < t_end))
    v.push_back("verify.dynamics.flat_from must lie in [0, integrator.t_end)");
  if (!v.empty()) throw ValidationError(std::move(v));
}

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    const auto& b = e.source().begin;
    throw ParseError(fmt::format("{}:{}:{}: {}", source, b.line, b.column, e.description()),
                     static_cast<int>(b.line), static_cast<int>(b.column));
  }

  RunConfig c;
  std::vector<std::string> v;
  TableReader top(&root, "", v);
  top.get("seed", c.seed);

  {
    TableReader r(top.sub("grid"), "grid", v);
    r.get("n", c.grid.n);
    r.get("L", c.grid.length);
    r.finish();
  }
  {
    TableReader r(top.sub("params"), "params", v);
    r.get("chi", c.params.chi);
    r.get("nu", c.params.nu);
    r.get("kappa", c.params.kappa);
    r.get("mu", c.params.mu);
    r.finish();
  }
  {
    TableReader r(top.sub("integrator"), "integrator", v);
    std::string scheme = scheme_name(c.integrator.scheme);
    r.get("scheme", scheme);
    r.get("dt", c.integrator.dt);
    r.get("t_end", c.integrator.t_end);
    r.get("sample_stride", c.integrator.sample_stride);
    r.get("dealias", c.integrator.dealias);
    r.get("nonlinear", c.integrator.nonlinear);
    r.get("continuation_window", c.continuation_window);
    r.finish();
    try {
      c.integrator.scheme = parse_scheme(scheme);
    } catch (const DomainError& e) {
      v.push_back(fmt::format("integrator.scheme: {}", e.what()));
    }
  }
  {
    TableReader r(top.sub("data"), "data", v);
    std::string family = data_kind_name(c.data.kind);
    r.get("family", family);
    r.get("amplitude", c.data.amplitude);
    r.get("eps", c.data.eps);
    r.get("shell", c.data.shell);
    c.data_seed_set = r.has("seed");
    r.get("seed", c.data.seed);
    r.get("target_norm", c.data.target_norm);
    r.finish();
    try {
      c.data.kind = parse_data_kind(family);
    } catch (const DomainError& e) {
      v.push_back(fmt::format("data.family: {}", e.what()));
    }
  }
  if (const toml::array* arr = top.array("probes")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const std::string where = fmt::format("probes[{}]", i);
      if (const toml::table* t = (*arr)[i].as_table())
        c.probes.push_back(read_probe(t, where, v));
      else
        v.push_back(where + " must be a table");
    }
  }
  {
    TableReader r(top.sub("outputs"), "outputs", v);
    r.get("csv", c.outputs.csv);
    r.get("json", c.outputs.json);
    r.get("snapshot_dir", c.outputs.snapshot_dir);
    r.get("snapshot_stride", c.outputs.snapshot_stride);
    r.finish();
  }
  {
    TableReader vr(top.sub("verify"), "verify", v);
    {
      TableReader r(vr.sub("analysis"), "verify.analysis", v);
      r.get("n", c.verify.analysis.n);
      r.get("L", c.verify.analysis.length);
      r.finish();
    }
    {
      TableReader r(vr.sub("green"), "verify.green", v);
      r.get("n", c.verify.green.n);
      r.get_ints("shells", c.verify.green.shells);
      r.get_numbers("exponents", c.verify.green.exponents);
      r.get("samples", c.verify.green.samples);
      r.get("modes", c.verify.green.modes);
      r.finish();
    }
    {
      TableReader r(vr.sub("dynamics"), "verify.dynamics", v);
      r.get_numbers("exponents", c.verify.exponents);
      r.get("decay_from", c.verify.decay_from);
      r.get("flat_from", c.verify.flat_from);
      r.get("oscillation_n", c.verify.oscillation_n);
      r.get("oscillation_L", c.verify.oscillation_length);
      r.finish();
    }
    vr.finish();
  }
  {
    TableReader r(top.sub("norms"), "norms", v);
    r.get("snapshot", c.norms_snapshot);
    r.finish();
  }
  top.finish();

  c.integrator.params = c.params;
  for (auto& x : config_violations(c)) v.push_back(std::move(x));
  if (!v.empty()) throw ValidationError(std::move(v));
  return c;
}

RunConfig load_config(const std::string& path) {
  RunConfig c = parse_config(read_file(path), path);
  c.base_dir = fs::absolute(fs::path(path)).parent_path().string();
  return c;
}

Subcommand parse_subcommand(const std::string& name) {
  if (name == "simulate") return Subcommand::SIMULATE;
  if (name == "verify-analysis") return Subcommand::VERIFY_ANALYSIS;
  if (name == "verify-green") return Subcommand::VERIFY_GREEN;
  if (name == "verify-dynamics") return Subcommand::VERIFY_DYNAMICS;
  if (name == "norms") return Subcommand::NORMS;
  throw DomainError("unknown subcommand " + name);
}

const char* subcommand_name(Subcommand s) noexcept {
  switch (s) {
    case Subcommand::SIMULATE: return "simulate";
    case Subcommand::VERIFY_ANALYSIS: return "verify-analysis";
    case Subcommand::VERIFY_GREEN: return "verify-green";
    case Subcommand::VERIFY_DYNAMICS: return "verify-dynamics";
    case Subcommand::NORMS: return "norms";
  }
  return "?";
}

// ----------------------------------------------------------------- formats

void atomic_write(const std::string& path, std::string_view bytes) {
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError(target.parent_path().string(), "cannot create directory (" + ec.message() + ")");
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string(), "cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError(tmp.string(), "write failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(path, "rename failed");
  }
}

std::string series_csv(const TimeSeries& series) {
  std::string out;
  for (std::size_t i = 0; i < series.columns.size(); ++i) out += (i ? "," : "") + series.columns[i];
  out += "\n";
  for (const auto& row : series.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + num(row[i]);
    out += "\n";
  }
  return out;
}

std::string row_csv(const std::vector<std::string>& columns, const std::vector<double>& values) {
  TimeSeries ts;
  ts.columns = columns;
  ts.rows.push_back(values);
  return series_csv(ts);
}

std::string encode_snapshot(const std::vector<ScalarField>& fields) {
  if (fields.empty()) throw DomainError("snapshot needs at least one field");
  const GridSpec& g = fields.front().grid();
  bool real = true;
  for (const auto& f : fields) {
    require_same_grid(g, f.grid(), "encode_snapshot");
    real = real && f.is_real();
  }
  std::string out;
  out.reserve(25 + fields.size() * g.size() * 16);
  out.append("MPSF", 4);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n()));
  put<double>(out, g.length());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(fields.size()));
  put<std::uint8_t>(out, real ? 1 : 0);
  for (const auto& f : fields)
    for (const Complex& z : f.modes()) {
      put<double>(out, z.real());
      put<double>(out, z.imag());
    }
  return out;
}

Snapshot decode_snapshot(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != "MPSF") throw DomainError("snapshot: bad magic");
  std::size_t pos = 4;
  const auto version = take<std::uint32_t>(bytes, pos);
  if (version != 1) throw DomainError(fmt::format("snapshot: unsupported version {}", version));
  const auto n = take<std::uint32_t>(bytes, pos);
  const auto length = take<double>(bytes, pos);
  const auto count = take<std::uint32_t>(bytes, pos);
  const auto real = take<std::uint8_t>(bytes, pos);
  Snapshot s{GridSpec(static_cast<int>(n), length), real != 0, {}};
  const std::size_t need = static_cast<std::size_t>(count) * s.grid.size() * 16;
  if (bytes.size() - pos != need)
    throw DomainError(fmt::format("snapshot: expected {} coefficient bytes, found {}", need, bytes.size() - pos));
  for (std::uint32_t f = 0; f < count; ++f) {
    std::vector<Complex> modes(s.grid.size());
    for (auto& z : modes) {
      const double re = take<double>(bytes, pos);
      const double im = take<double>(bytes, pos);
      z = Complex(re, im);
    }
    s.fields.emplace_back(s.grid, std::move(modes), s.real);
  }
  return s;
}

void write_snapshot(const std::string& path, const State& s) {
  atomic_write(path, encode_snapshot({s.u[0], s.u[1], s.u[2], s.omega[0], s.omega[1], s.omega[2]}));
}

Snapshot read_snapshot(const std::string& path) {
  try {
    return decode_snapshot(read_file(path));
  } catch (const DomainError& e) {
    throw IoError(path, e.what());
  }
}

State snapshot_state(const Snapshot& snap) {
  if (snap.fields.size() != 6)
    throw StructuralError(fmt::format("snapshot holds {} fields, (u, omega) needs 6", snap.fields.size()));
  State s;
  s.u = VectorField(snap.fields[0], snap.fields[1], snap.fields[2]);
  s.omega = VectorField(snap.fields[3], snap.fields[4], snap.fields[5]);
  return s;
}

// ----------------------------------------------------------------- execute

namespace {

struct Paths {
  fs::path out;
  std::string resolve(const std::string& p) const {
    const fs::path q(p);
    return (q.is_absolute() ? q : out / q).string();
  }
};

void write_report(const verify::Report& r, const std::string& path, std::ostream& log) {
  atomic_write(path, verify::to_json(r));
  for (const auto& c : r.checks) log << "[" << verdict_name(c.verdict) << "] " << c.anchor << "\n";
  log << r.suite << ": " << (r.passed() ? "all checks passed" : "FAILED") << " -> " << path << "\n";
}

std::vector<std::pair<std::string, std::string>> run_env(const RunConfig& c) {
  return {{"n", std::to_string(c.grid.n)},
          {"L", num(c.grid.length)},
          {"scheme", scheme_name(c.integrator.scheme)},
          {"dt", num(c.integrator.dt)},
          {"t_end", num(c.integrator.t_end)},
          {"data", data_kind_name(c.data.kind)},
          {"seed", std::to_string(c.data_family().seed)}};
}

// Plumbing checks of a plain run: completion and the divergence constraint.
verify::Report simulate_report(const RunConfig& c, const TimeSeries& ts) {
  verify::Report r;
  r.suite = "simulate";
  r.env = run_env(c);
  if (ts.blew_up) r.env.emplace_back("error", ts.error);
  const std::vector<double> t = ts.values("t");
  const std::vector<double> div = ts.values("div_residual");
  const std::vector<double> energy = ts.values("energy");
  verify::Check done{"plumbing-completion", "run reaches t_end with finite coefficients",
                     {{"t_reached", t.empty() ? 0.0 : t.back()}, {"samples", double(t.size())}}};
  done.verdict = !ts.blew_up && !t.empty() && std::abs(t.back() - c.integrator.t_end) < 1e-9 ? verify::Verdict::PASS
                                                                                              : verify::Verdict::FAIL;
  verify::Check divc{"plumbing-divergence", "max divergence residual over samples",
                     {{"max_div_residual", div.empty() ? 0.0 : *std::max_element(div.begin(), div.end())}},
                     1e-10};
  divc.verdict = divc.measured[0].second <= divc.tolerance ? verify::Verdict::PASS : verify::Verdict::FAIL;
  verify::Check summary{"plumbing-summary", "run diagnostics",
                        {{"stiffness", ts.stiffness},
                         {"energy_initial", energy.empty() ? 0.0 : energy.front()},
                         {"energy_final", energy.empty() ? 0.0 : energy.back()}}};
  r.checks = {done, divc, summary};
  return r;
}

int simulate(const RunConfig& c, const Paths& paths, std::ostream& log) {
  const GridSpec g = c.grid_spec();
  const State s0 = make_initial_data(c.data_family(), g);
  RunOptions ro;
  ro.probes = c.effective_probes();
  ro.continuation_window = c.continuation_window;
  std::string snap_dir;
  std::string index = "file,t\n";
  if (!c.outputs.snapshot_dir.empty()) {
    snap_dir = paths.resolve(c.outputs.snapshot_dir);
    const int stride = c.outputs.snapshot_stride;
    if (stride > 0)
      ro.on_sample = [&, stride](const State& s, std::size_t i) {
        if (i % static_cast<std::size_t>(stride) != 0) return;
        const std::string name = fmt::format("snapshot_{:06d}.mpsf", i);
        write_snapshot((fs::path(snap_dir) / name).string(), s);
        index += name + "," + num(s.t) + "\n";
      };
  }
  TimeSeries ts;
  State final_state;
  const std::string csv = paths.resolve(c.outputs.csv), json = paths.resolve(c.outputs.json);
  try {
    run(s0, c.integrator, ro, ts, &final_state);
  } catch (const BlowUpError&) {
    atomic_write(csv, series_csv(ts));
    write_report(simulate_report(c, ts), json, log);
    if (!snap_dir.empty()) atomic_write((fs::path(snap_dir) / "index.csv").string(), index);
    throw;
  }
  if (!snap_dir.empty()) {
    write_snapshot((fs::path(snap_dir) / "snapshot_final.mpsf").string(), final_state);
    index += "snapshot_final.mpsf," + num(final_state.t) + "\n";
    atomic_write((fs::path(snap_dir) / "index.csv").string(), index);
  }
  atomic_write(csv, series_csv(ts));
  log << "series -> " << csv << " (" << ts.rows.size() << " samples)\n";
  const verify::Report r = simulate_report(c, ts);
  write_report(r, json, log);
  return r.passed() ? 0 : 1;
}

int norms(const RunConfig& c, const Paths& paths, std::ostream& log) {
  if (c.norms_snapshot.empty()) throw DomainError("norms: set [norms] snapshot in the config");
  fs::path snap(c.norms_snapshot);
  if (snap.is_relative() && !c.base_dir.empty()) snap = fs::path(c.base_dir) / snap;
  const State s = snapshot_state(read_snapshot(snap.string()));
  std::vector<std::string> cols;
  std::vector<double> vals;
  for (const Probe& p : c.effective_probes()) {
    cols.push_back(p.name.empty() ? default_probe_name(p) : p.name);
    vals.push_back(evaluate_probe(p, s));
  }
  cols.push_back("energy");
  vals.push_back(energy(s));
  cols.push_back("div_residual");
  vals.push_back(spectral::divergence_residual(s.u));
  const std::string csv = paths.resolve(c.outputs.csv);
  atomic_write(csv, row_csv(cols, vals));
  log << "norms of " << snap.string() << " -> " << csv << "\n";
  return 0;
}

}  // namespace

int execute(const RunConfig& cfg, Subcommand cmd, const ExecOptions& opts, std::ostream& log) {
  RunConfig c = cfg;
  if (opts.seed) c.seed = *opts.seed;
  const Paths paths{fs::path(opts.out_dir)};
  switch (cmd) {
    case Subcommand::SIMULATE:
      return simulate(c, paths, log);
    case Subcommand::VERIFY_ANALYSIS: {
      const verify::Report r =
          verify::verify_analysis_suite(GridSpec(c.verify.analysis.n, c.verify.analysis.length), c.seed);
      write_report(r, paths.resolve(c.outputs.json), log);
      return r.passed() ? 0 : 1;
    }
    case Subcommand::VERIFY_GREEN: {
      const verify::Report r = verify::verify_green_suite(c.verify.green, c.seed);
      write_report(r, paths.resolve(c.outputs.json), log);
      return r.passed() ? 0 : 1;
    }
    case Subcommand::VERIFY_DYNAMICS: {
      validate_fit_windows(c);
      TimeSeries ts;
      const verify::Report r = verify::verify_dynamics_suite(c.dynamics_preset(), c.seed, &ts);
      atomic_write(paths.resolve(c.outputs.csv), series_csv(ts));
      write_report(r, paths.resolve(c.outputs.json), log);
      return r.passed() ? 0 : 1;
    }
    case Subcommand::NORMS:
      return norms(c, paths, log);
  }
  return 2;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pseudospectral micropolar fluid lab"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  for (const char* name : {"simulate", "verify-analysis", "verify-green", "verify-dynamics", "norms"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "TOML configuration file")->required();
    sub->add_option("--seed", seed, "seed overriding the configuration");
    sub->add_option("--out-dir", out_dir, "directory receiving the artifacts");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    const Subcommand cmd = parse_subcommand(app.get_subcommands().front()->get_name());
    const RunConfig cfg = load_config(config_path);
    return execute(cfg, cmd, ExecOptions{seed, out_dir}, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const BlowUpError& e) {
    err << "error: blow-up at t = " << e.time() << " in shell " << e.shell() << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 2;
}

}  // namespace micropolar::cli
