// captrap: trapping and extreme-poverty probabilities of a household
// capital process with cash transfers, in closed form and by simulation.
//
// Exit codes: 0 success, 2 validation error, 3 numerical error.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "captrap/closed_form.hpp"
#include "captrap/model.hpp"
#include "captrap/monte_carlo.hpp"
#include "captrap/params_io.hpp"
#include "captrap/policy.hpp"

namespace {

using captrap::LossDistribution;
using captrap::ModelParams;
using captrap::OmegaRate;
using captrap::validation_error;
using json = nlohmann::ordered_json;
namespace cf = captrap::closed_form;
namespace io = captrap::io;
namespace mc = captrap::mc;
namespace policy = captrap::policy;

// -----------------------------------------------------------------------
// model parameter source: direct flags or a config file, never both;
// command options may also come from the config file, flags win
// -----------------------------------------------------------------------

struct ModelCli {
  std::string config;
  double r = 0, a = 0, b = 0, c_s = 0;
  double lambda = 0, alpha = 0, x_star = 0, barrier = 0, c_t = 0;
  CLI::Option *o_config, *o_r, *o_a, *o_b, *o_cs, *o_lambda, *o_alpha,
      *o_xstar, *o_barrier, *o_ct;
  json config_json;
  bool loaded = false;

  void attach(CLI::App* cmd) {
    o_config = cmd->add_option(
        "--config", config,
        "JSON parameter file (exclusive with the direct parameter flags)");
    o_r = cmd->add_option("--r", r, "capital growth rate");
    o_a = cmd->add_option("--a", a, "consumption rate (micro input)");
    o_b = cmd->add_option("--b", b, "income generation rate (micro input)");
    o_cs = cmd->add_option("--cs", c_s, "savings propensity (micro input)");
    o_lambda = cmd->add_option("--lambda", lambda, "loss intensity");
    o_alpha = cmd->add_option("--alpha", alpha, "Beta(alpha,1) shape");
    o_xstar = cmd->add_option("--xstar", x_star, "critical capital");
    o_barrier = cmd->add_option("--barrier", barrier, "transfer barrier B");
    o_ct = cmd->add_option("--ct", c_t, "transfer rate");
  }

  bool any_direct() const {
    return *o_r || *o_a || *o_b || *o_cs || *o_lambda || *o_alpha ||
           *o_xstar || *o_barrier || *o_ct;
  }

  void load_config() {
    if (loaded || config.empty()) return;
    std::ifstream in(config);
    if (!in) throw validation_error("config: cannot open " + config);
    try {
      in >> config_json;
    } catch (const nlohmann::json::exception& e) {
      throw validation_error("config: " + config + ": " + e.what());
    }
    if (!config_json.is_object())
      throw validation_error("config: must be a JSON object");
    loaded = true;
  }

  bool cfg_has(const char* key) {
    load_config();
    return loaded && config_json.contains(key);
  }

  template <typename T>
  T cfg_get(const char* key) {
    return config_json.at(key).get<T>();
  }

  ModelParams resolve(std::optional<double> barrier_override = {},
                      std::optional<double> ct_override = {}) {
    if (!config.empty() && any_direct())
      throw validation_error(
          "parameters: give either --config or the direct parameter flags, "
          "not both");
    json j;
    if (!config.empty()) {
      load_config();
      for (const char* key : {"r", "a", "b", "c_s", "lambda", "alpha",
                              "x_star", "barrier", "c_t"})
        if (config_json.contains(key)) j[key] = config_json.at(key);
    } else {
      if (*o_a || *o_b || *o_cs) {
        if (!*o_a) throw validation_error("a: missing");
        if (!*o_b) throw validation_error("b: missing");
        if (!*o_cs) throw validation_error("c_s: missing");
        j["a"] = a;
        j["b"] = b;
        j["c_s"] = c_s;
      } else if (*o_r) {
        j["r"] = r;
      } else {
        throw validation_error("r: missing (or give --a --b --cs)");
      }
      auto put = [&](const CLI::Option* o, const char* key, double v) {
        if (!*o) throw validation_error(std::string(key) + ": missing");
        j[key] = v;
      };
      put(o_lambda, "lambda", lambda);
      put(o_alpha, "alpha", alpha);
      put(o_xstar, "x_star", x_star);
      if (!barrier_override) put(o_barrier, "barrier", barrier);
      if (!ct_override) put(o_ct, "c_t", c_t);
    }
    if (barrier_override) j["barrier"] = *barrier_override;
    if (ct_override) j["c_t"] = *ct_override;
    return io::params_from_json(j);
  }
};

// -----------------------------------------------------------------------
// output sink and record emission
// -----------------------------------------------------------------------

struct Sink {
  std::ofstream file;
  std::ostream* out = &std::cout;

  void open(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file) throw validation_error("output: cannot open " + path);
    out = &file;
  }
  void line(const std::string& s) { *out << s << "\n"; }
};

std::string csv_cell(const json& v) {
  if (v.is_null()) return "NA";
  if (v.is_number_float()) return io::fmt12(v.get<double>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  return v.get<std::string>();
}

void emit_records(Sink& sink, const std::string& format,
                  const std::vector<std::string>& columns,
                  const std::vector<json>& records) {
  if (format == "json") {
    for (const auto& rec : records) sink.line(rec.dump());
    return;
  }
  std::string head;
  for (const auto& c : columns) {
    if (!head.empty()) head += ',';
    head += c;
  }
  sink.line(head);
  for (const auto& rec : records) {
    std::string row;
    for (const auto& c : columns) {
      if (!row.empty()) row += ',';
      row += rec.contains(c) ? csv_cell(rec.at(c)) : "NA";
    }
    sink.line(row);
  }
}

struct CommonOut {
  std::string format;
  std::string output;
  void attach(CLI::App* cmd) {
    cmd->add_option("--format", format, "output format: json | csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--output", output, "output path (default stdout)");
  }
  std::string pick(bool grid) const {
    if (!format.empty()) return format;
    return grid ? "csv" : "json";
  }
};

std::vector<double> resolve_x(ModelCli& m, const CLI::Option* o_x, double& x,
                              const CLI::Option* o_grid, std::string& grid) {
  if (*o_x && *o_grid)
    throw validation_error("x: give --x or --x-grid, not both");
  if (!*o_x && !*o_grid) {
    if (m.cfg_has("x"))
      x = m.cfg_get<double>("x");
    else if (m.cfg_has("x_grid"))
      grid = m.cfg_get<std::string>("x_grid");
    else
      throw validation_error("x: missing (--x or --x-grid)");
    if (!grid.empty()) return io::parse_grid(grid);
    return {x};
  }
  if (*o_x) return {x};
  return io::parse_grid(grid);
}

int default_workers() {
  if (const char* env = std::getenv("CAPTRAP_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// -----------------------------------------------------------------------
// subcommand bodies
// -----------------------------------------------------------------------

// "key=lo:hi:step" parameter sweep, applied on top of the base parameters
struct Sweep {
  std::string key;
  std::vector<double> values;
};

Sweep parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw validation_error("sweep: expected key=lo:hi:step, got '" + spec + "'");
  Sweep s;
  s.key = spec.substr(0, eq);
  static const char* keys[] = {"a",      "b",       "c_s", "r",   "lambda",
                               "alpha",  "x_star",  "barrier", "c_t"};
  bool known = false;
  for (const char* k : keys) known = known || s.key == k;
  if (!known)
    throw validation_error("sweep: unknown parameter key '" + s.key + "'");
  s.values = io::parse_grid(spec.substr(eq + 1));
  return s;
}

// base parameters re-validated with one key replaced
ModelParams with_swept(const ModelParams& base, const std::string& key,
                       double v) {
  json j;
  if (base.a) {
    j["a"] = *base.a;
    j["b"] = *base.b;
    j["c_s"] = *base.c_s;
  } else {
    j["r"] = base.r;
  }
  j["lambda"] = base.lambda;
  j["alpha"] = base.alpha;
  j["x_star"] = base.x_star;
  j["barrier"] = base.barrier;
  j["c_t"] = base.c_t;
  if ((key == "a" || key == "b" || key == "c_s") && !base.a)
    throw validation_error(
        "sweep: " + key + " needs the micro inputs (--a --b --cs)");
  if (key == "r" && base.a)
    throw validation_error("sweep: r is derived here; sweep a, b or c_s");
  j[key] = v;
  if (key == "a" || key == "b" || key == "c_s") j.erase("r");
  return io::params_from_json(j);
}

struct TrapArgs {
  ModelCli m;
  CommonOut out;
  double x = 0, delta = 0;
  std::string grid, sweep;
  CLI::Option *o_x, *o_grid, *o_sweep;
};

int cmd_trap(TrapArgs& a) {
  const ModelParams p = a.m.resolve();
  Sink sink;
  sink.open(a.out.output);
  if (*a.o_sweep) {
    if (*a.o_grid)
      throw validation_error("sweep: use a single --x with --sweep");
    if (!*a.o_x) throw validation_error("x: missing (--x)");
    const Sweep sw = parse_sweep(a.sweep);
    std::vector<json> recs;
    for (const double v : sw.values) {
      const ModelParams ps = with_swept(p, sw.key, v);
      json rec;
      rec[sw.key] = v;
      rec["value"] = cf::TrappingSolution(ps, a.delta)(a.x);
      recs.push_back(std::move(rec));
    }
    emit_records(sink, a.out.pick(true), {sw.key, "value"}, recs);
    return 0;
  }
  const auto xs = resolve_x(a.m, a.o_x, a.x, a.o_grid, a.grid);
  cf::TrappingSolution sol(p, a.delta);
  const bool certain = sol.constants().certain;
  if (certain) std::cerr << "note: trapping-certain (alpha <= lambda/r)\n";
  std::vector<json> recs;
  for (const double xv : xs) {
    json rec;
    rec["x"] = xv;
    rec["value"] = sol(xv);
    if (a.delta > 0.0) rec["delta"] = a.delta;
    if (certain) rec["note"] = "trapping-certain";
    recs.push_back(std::move(rec));
  }
  emit_records(sink, a.out.pick(xs.size() > 1), {"x", "value"}, recs);
  return 0;
}

struct EpArgs {
  ModelCli m;
  CommonOut out;
  double x = 0, delta = 0, omega_const = 0, omega_exp = 0;
  std::string grid, sweep;
  bool bound_check = false;
  CLI::Option *o_x, *o_grid, *o_oc, *o_oe, *o_sweep;
};

int cmd_ep(EpArgs& a) {
  const ModelParams p = a.m.resolve();
  if (static_cast<bool>(*a.o_oc) == static_cast<bool>(*a.o_oe))
    throw validation_error(
        "omega: give exactly one of --omega-const, --omega-exp");
  if (*a.o_oe && a.delta != 0.0)
    throw validation_error(
        "delta: only the probability (delta = 0) is available for the "
        "exponential rate");
  if (*a.o_sweep) {
    if (*a.o_grid)
      throw validation_error("sweep: use a single --x with --sweep");
    if (!*a.o_x) throw validation_error("x: missing (--x)");
    const bool sweep_omega = a.sweep.rfind("omega=", 0) == 0;
    Sweep sw;
    if (sweep_omega) {
      sw.key = "omega";
      sw.values = io::parse_grid(a.sweep.substr(6));
    } else {
      sw = parse_sweep(a.sweep);
    }
    std::vector<json> recs;
    for (const double v : sw.values) {
      const ModelParams ps =
          sweep_omega ? p : with_swept(p, sw.key, v);
      const double level = sweep_omega ? v
                           : *a.o_oc  ? a.omega_const
                                      : a.omega_exp;
      const OmegaRate rate = *a.o_oc ? OmegaRate::constant(level)
                                     : OmegaRate::exponential(level);
      json rec;
      rec[sw.key] = v;
      rec["value"] = cf::EpSolution(ps, rate, a.delta)(a.x);
      recs.push_back(std::move(rec));
    }
    Sink sink;
    sink.open(a.out.output);
    emit_records(sink, a.out.pick(true), {sw.key, "value"}, recs);
    return 0;
  }
  const auto xs = resolve_x(a.m, a.o_x, a.x, a.o_grid, a.grid);
  const OmegaRate rate = *a.o_oc ? OmegaRate::constant(a.omega_const)
                                 : OmegaRate::exponential(a.omega_exp);
  cf::EpSolution sol(p, rate, a.delta);
  std::optional<cf::TrappingSolution> trap;
  if (a.bound_check) trap.emplace(p, a.delta);
  std::vector<json> recs;
  for (const double xv : xs) {
    json rec;
    rec["x"] = xv;
    rec["value"] = sol(xv);
    if (a.delta > 0.0) rec["delta"] = a.delta;
    if (trap) {
      if (xv >= p.x_star) {
        const double tv = (*trap)(xv);
        rec["trap"] = tv;
        rec["bound_ok"] = sol(xv) <= tv + 1e-9;
      } else {
        rec["trap"] = nullptr;
        rec["bound_ok"] = nullptr;
      }
    }
    recs.push_back(std::move(rec));
  }
  std::vector<std::string> cols = {"x", "value"};
  if (a.bound_check) {
    cols.push_back("trap");
    cols.push_back("bound_ok");
  }
  Sink sink;
  sink.open(a.out.output);
  emit_records(sink, a.out.pick(xs.size() > 1), cols, recs);
  return 0;
}

struct SimArgs {
  ModelCli m;
  CommonOut out;
  double x = 0, omega_const = 0, omega_exp = 0, horizon = 400.0;
  std::string grid, loss_table, trace;
  bool trapping = false, no_horizon_check = false;
  std::int64_t n = 10000;
  std::uint64_t seed = 0;
  int workers = 0;
  CLI::Option *o_x, *o_grid, *o_oc, *o_oe, *o_seed;
};

int cmd_simulate(SimArgs& a) {
  const ModelParams p = a.m.resolve();
  if (!*a.o_seed) {
    if (a.m.cfg_has("seed"))
      a.seed = a.m.cfg_get<std::uint64_t>("seed");
    else
      throw validation_error("seed: required for simulate");
  }
  const bool has_omega = *a.o_oc || *a.o_oe;
  if (a.trapping == has_omega)
    throw validation_error(
        "mode: give exactly one of --trapping, --omega-const, --omega-exp");
  const auto xs = resolve_x(a.m, a.o_x, a.x, a.o_grid, a.grid);
  const LossDistribution loss =
      a.loss_table.empty() ? LossDistribution::beta_alpha_one(p.alpha)
                           : io::loss_table_from_file(a.loss_table);

  mc::EstimateOptions opt;
  opt.n = a.n;
  opt.seed = a.seed;
  opt.horizon = a.horizon;
  opt.workers = a.workers > 0 ? a.workers : default_workers();
  opt.check_horizon = !a.no_horizon_check;

  const OmegaRate rate = *a.o_oc   ? OmegaRate::constant(a.omega_const)
                         : *a.o_oe ? OmegaRate::exponential(a.omega_exp)
                                   : OmegaRate::constant(0.0);

  if (!a.trace.empty()) {
    std::ofstream tf(a.trace);
    if (!tf) throw validation_error("trace: cannot open " + a.trace);
    tf << "path,time,capital\n";
    const std::int64_t limit = std::min<std::int64_t>(a.n, 100);
    for (std::int64_t k = 0; k < limit; ++k) {
      mc::PathRng rng(a.seed, static_cast<std::uint64_t>(k));
      const mc::PathRecord rec =
          mc::simulate_path(p, loss, xs.front(), a.horizon, rng,
                            a.trapping ? nullptr : &rate, a.trapping);
      for (const auto& ev : rec.events)
        tf << k << ',' << io::fmt12(ev.time) << ','
           << io::fmt12(ev.pre_loss_capital * ev.multiplier) << "\n";
    }
  }

  std::vector<json> recs;
  for (const double xv : xs) {
    const mc::Estimate e = a.trapping
                               ? mc::estimate_trapping(p, loss, xv, opt)
                               : mc::estimate_ep(p, loss, rate, xv, opt);
    json rec;
    rec["x"] = xv;
    rec["value"] = e.value;
    rec["ci_low"] = e.ci_low;
    rec["ci_high"] = e.ci_high;
    rec["std_dev"] = e.std_dev;
    rec["n"] = e.n;
    rec["seed"] = e.seed;
    rec["horizon"] = e.horizon;
    if (e.horizon_checked) {
      rec["value_2x_horizon"] = e.value_2x;
      rec["horizon_ok"] = e.horizon_ok;
      if (!e.horizon_ok)
        std::cerr << "warning: doubling the horizon moved the estimate at x="
                  << xv << " by more than one CI half-width\n";
    }
    recs.push_back(std::move(rec));
  }
  Sink sink;
  sink.open(a.out.output);
  emit_records(sink, a.out.pick(xs.size() > 1),
               {"x", "value", "ci_low", "ci_high"}, recs);
  return 0;
}

struct FrontierArgs {
  ModelCli m;
  CommonOut out;
  std::string kind = "trapping", b_grid;
  double target = 0, x = 0, omega_const = 0, omega_exp = 0;
  double lo = 1e-4, hi = 1e3;
  CLI::Option *o_oc, *o_oe;
};

int cmd_frontier(FrontierArgs& a) {
  const std::vector<double> grid = io::parse_grid(a.b_grid);
  if (grid.empty()) throw validation_error("b-grid: empty");
  policy::PolicyQuery q;
  q.base = a.m.resolve(grid.front(), a.lo);
  q.x0 = a.x;
  q.target = a.target;
  q.lo = a.lo;
  q.hi = a.hi;
  q.solve_for = policy::SolveFor::transfer_rate;
  if (a.kind == "trapping") {
    q.kind = policy::TargetKind::trapping;
  } else if (a.kind == "ep-const") {
    if (!*a.o_oc)
      throw validation_error("omega_c: --omega-const required for ep-const");
    q.kind = policy::TargetKind::ep_constant;
    q.omega = a.omega_const;
  } else if (a.kind == "ep-exp") {
    if (!*a.o_oe)
      throw validation_error("beta: --omega-exp required for ep-exp");
    q.kind = policy::TargetKind::ep_exponential;
    q.omega = a.omega_exp;
  } else {
    throw validation_error("kind: one of trapping, ep-const, ep-exp");
  }
  const auto pts = policy::frontier(q, grid);
  std::vector<json> recs;
  for (const auto& pt : pts) {
    json rec;
    rec["barrier"] = pt.barrier;
    if (pt.c_t) {
      rec["ct"] = *pt.c_t;
      rec["abs_err"] = std::fabs(pt.achieved - a.target);
    } else {
      rec["ct"] = nullptr;
      rec["abs_err"] = nullptr;
    }
    recs.push_back(std::move(rec));
  }
  Sink sink;
  sink.open(a.out.output);
  emit_records(sink, a.out.pick(true), {"barrier", "ct", "abs_err"}, recs);
  return 0;
}

struct CheckArgs {
  ModelCli m;
  double omega_const = 0.02, omega_exp = 0.02;
  std::int64_t n = 20000;
  std::uint64_t seed = 12345;
  bool tight = false;
};

int cmd_check(CheckArgs& a) {
  const ModelParams p = a.m.resolve();
  const double tol_scale = a.tight ? 0.5 : 1.0;
  const double val_tol = 1e-9 * tol_scale;
  bool all_ok = true;
  auto report = [&](const std::string& name, bool ok,
                    const std::string& detail) {
    std::cout << (ok ? "PASS  " : "FAIL  ") << name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n";
    all_ok = all_ok && ok;
  };

  for (const double delta : {0.0, 0.1}) {
    const auto d = cf::trapping_continuity(p, delta);
    std::ostringstream det;
    det << "value gap " << d.value_gap_barrier << ", slope gap "
        << d.deriv_gap_barrier << ", boundary residual "
        << d.boundary_residual;
    report("trap continuity at B, delta=" + io::fmt12(delta),
           d.value_gap_barrier < val_tol && d.deriv_gap_barrier < 1e-8 &&
               d.boundary_residual < 1e-8,
           det.str());
  }
  const OmegaRate wc = OmegaRate::constant(a.omega_const);
  {
    const auto d = cf::ep_continuity(p, wc, 0.0);
    std::ostringstream det;
    det << "value gaps " << d.value_gap_barrier << " / "
        << d.value_gap_critical << ", slope gap at B " << d.deriv_gap_barrier
        << ", slope jump at x* " << d.deriv_gap_critical << " vs hazard kink "
        << d.kink_expected;
    report(
        "ep continuity (constant rate)",
        d.value_gap_barrier < val_tol && d.value_gap_critical < val_tol &&
            d.deriv_gap_barrier < 1e-8 &&
            std::fabs(d.deriv_gap_critical - d.kink_expected) <
                1e-6 * tol_scale * std::max(1.0, std::fabs(d.kink_expected)),
        det.str());
  }

  {
    cf::TrappingSolution trap(p, 0.0);
    cf::EpSolution epc(p, wc, 0.0);
    cf::EpSolution epe(p, OmegaRate::exponential(a.omega_exp), 0.0);
    bool ok = true;
    double worst = 0.0;
    for (double xv = p.x_star; xv <= 3.0 * p.barrier; xv += 0.1 * p.x_star) {
      const double tv = trap(xv);
      for (const double ev : {epc(xv), epe(xv)}) {
        ok = ok && ev <= tv + 1e-9;
        worst = std::max(worst, ev - tv);
      }
    }
    report("ordering ep <= trapping", ok, "max excess " + io::fmt12(worst));
  }

  {
    const LossDistribution loss = LossDistribution::beta_alpha_one(p.alpha);
    mc::EstimateOptions opt;
    opt.n = a.n;
    opt.seed = a.seed;
    opt.horizon = 400.0;
    opt.workers = default_workers();
    opt.check_horizon = false;
    const double x0 = 0.5 * (p.x_star + p.barrier);
    const auto et = mc::estimate_trapping(p, loss, x0, opt);
    const double want_t = cf::trapping_probability(p, x0);
    report("closed form vs MC (trapping)",
           want_t >= et.ci_low && want_t <= et.ci_high,
           "closed " + io::fmt12(want_t) + " in [" + io::fmt12(et.ci_low) +
               ", " + io::fmt12(et.ci_high) + "]");
    const auto ee = mc::estimate_ep(p, loss, wc, x0, opt);
    const double want_e =
        cf::ep_probability_constant(p, a.omega_const, 0.0, x0);
    report("closed form vs MC (extreme poverty)",
           want_e >= ee.ci_low - 0.002 && want_e <= ee.ci_high + 0.002,
           "closed " + io::fmt12(want_e) + " in [" + io::fmt12(ee.ci_low) +
               ", " + io::fmt12(ee.ci_high) + "] with horizon slack 0.002");
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "captrap: poverty-trap and extreme-poverty probabilities for a capital "
      "process with cash transfers"};
  app.require_subcommand(1);

  TrapArgs ta;
  auto* trap = app.add_subcommand("trap", "trapping probability / transform");
  ta.m.attach(trap);
  ta.out.attach(trap);
  ta.o_x = trap->add_option("--x", ta.x, "initial capital");
  ta.o_grid = trap->add_option("--x-grid", ta.grid, "grid lo:hi:step");
  ta.o_sweep = trap->add_option(
      "--sweep", ta.sweep,
      "parameter sensitivity sweep key=lo:hi:step at fixed --x");
  trap->add_option("--delta", ta.delta,
                   "force of interest (0 gives the probability)");

  EpArgs ea;
  auto* ep = app.add_subcommand("ep", "extreme-poverty probability");
  ea.m.attach(ep);
  ea.out.attach(ep);
  ea.o_x = ep->add_option("--x", ea.x, "initial capital");
  ea.o_grid = ep->add_option("--x-grid", ea.grid, "grid lo:hi:step");
  ea.o_oc = ep->add_option("--omega-const", ea.omega_const,
                           "constant hazard rate");
  ea.o_oe = ep->add_option("--omega-exp", ea.omega_exp,
                           "exponential hazard beta");
  ea.o_sweep = ep->add_option(
      "--sweep", ea.sweep,
      "parameter sweep key=lo:hi:step at fixed --x (key may be omega)");
  ep->add_option("--delta", ea.delta,
                 "force of interest (constant rate only)");
  ep->add_flag("--bound-check", ea.bound_check,
               "emit the trapping curve and an upper-bound check column");

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates");
  sa.m.attach(sim);
  sa.out.attach(sim);
  sa.o_x = sim->add_option("--x", sa.x, "initial capital");
  sa.o_grid = sim->add_option("--x-grid", sa.grid, "grid lo:hi:step");
  sim->add_flag("--trapping", sa.trapping,
                "estimate the trapping probability");
  sa.o_oc = sim->add_option("--omega-const", sa.omega_const,
                            "constant hazard rate");
  sa.o_oe = sim->add_option("--omega-exp", sa.omega_exp,
                            "exponential hazard beta");
  sim->add_option("--loss-table", sa.loss_table,
                  "CSV (u,z) inverse-CDF table for a custom loss law");
  sim->add_option("--n", sa.n, "number of paths");
  sa.o_seed = sim->add_option("--seed", sa.seed, "RNG seed (required)");
  sim->add_option("--horizon", sa.horizon, "simulated horizon");
  sim->add_option("--workers", sa.workers,
                  "worker threads (default: CAPTRAP_WORKERS or hardware)");
  sim->add_flag("--no-horizon-check", sa.no_horizon_check,
                "skip the doubled-horizon bias diagnostic");
  sim->add_option("--trace", sa.trace,
                  "write (path,time,capital) events of the first 100 paths");

  FrontierArgs fa;
  auto* fr = app.add_subcommand("frontier",
                                "transfer rate needed per barrier level");
  fa.m.attach(fr);
  fa.out.attach(fr);
  fr->add_option("--kind", fa.kind, "trapping | ep-const | ep-exp");
  fr->add_option("--target", fa.target, "target probability in (0,1)")
      ->required();
  fr->add_option("--x", fa.x, "initial capital")->required();
  fa.o_oc = fr->add_option("--omega-const", fa.omega_const,
                           "constant hazard rate");
  fa.o_oe = fr->add_option("--omega-exp", fa.omega_exp,
                           "exponential hazard beta");
  fr->add_option("--b-grid", fa.b_grid, "barrier grid lo:hi:step")->required();
  fr->add_option("--lo", fa.lo, "transfer-rate search lower bound");
  fr->add_option("--hi", fa.hi, "transfer-rate search upper bound");

  CheckArgs ca;
  auto* ck = app.add_subcommand("check",
                                "self-diagnostics at the given parameters");
  ca.m.attach(ck);
  ck->add_option("--omega-const", ca.omega_const,
                 "constant hazard used by the checks");
  ck->add_option("--omega-exp", ca.omega_exp,
                 "exponential hazard used by the checks");
  ck->add_option("--n", ca.n, "paths for the MC cross-check");
  ck->add_option("--seed", ca.seed, "seed for the MC cross-check");
  ck->add_flag("--tight", ca.tight, "double the precision requirements");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  try {
    if (trap->parsed()) return cmd_trap(ta);
    if (ep->parsed()) return cmd_ep(ea);
    if (sim->parsed()) return cmd_simulate(sa);
    if (fr->parsed()) return cmd_frontier(fa);
    if (ck->parsed()) return cmd_check(ca);
  } catch (const validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
