// toruslab: configurations, norm analyses, endpoint checks, parameter
// sweeps, family diagnostics, and the verification suite.
//
// Exit codes: 0 success, 1 verification failure, 2 usage/input error,
// 3 partial sweep failure.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "toruslab/atom_space.hpp"
#include "toruslab/bounds.hpp"
#include "toruslab/errors.hpp"
#include "toruslab/maximal.hpp"
#include "toruslab/rational.hpp"
#include "toruslab/rubio_basis.hpp"
#include "toruslab/verify.hpp"

namespace {

using toruslab::Rational;

// All floats go out with 12 significant digits so identical inputs produce
// byte-identical output.
std::string f12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

// Minimal ordered-key JSON assembler (nlohmann is used only for parsing; its
// float printing does not match the 12-digit contract).
class JsonObj {
 public:
  JsonObj& str(const char* k, const std::string& v) { return raw(k, quoted(v)); }
  JsonObj& num(const char* k, double v) { return raw(k, f12(v)); }
  JsonObj& integer(const char* k, long v) { return raw(k, std::to_string(v)); }
  JsonObj& boolean(const char* k, bool v) { return raw(k, v ? "true" : "false"); }
  JsonObj& raw(const char* k, const std::string& v) {
    body_ += body_.empty() ? "" : ",";
    body_ += "\n  " + quoted(k) + ": " + v;
    return *this;
  }
  std::string render() const { return "{" + body_ + "\n}\n"; }

 private:
  std::string body_;
};

int fail_usage(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 2;
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw toruslab::Error("cannot open output file " + out_path);
  f << text;
}

// ---------------------------------------------------------------------------
// Config file round-trip.
// ---------------------------------------------------------------------------

std::string config_json(const toruslab::ConfigSpec& cfg) {
  std::string exps = "[";
  for (std::size_t i = 0; i < cfg.exponents.size(); ++i)
    exps += (i ? ", " : "") + std::to_string(cfg.exponents[i]);
  exps += "]";
  std::string trans = "[";
  for (std::size_t i = 0; i < cfg.translation.size(); ++i)
    trans += (i ? ", " : "") + quoted(cfg.translation[i].str());
  trans += "]";
  JsonObj o;
  o.str("schema", "v1")
      .str("eps", cfg.eps.str())
      .integer("d", cfg.d)
      .integer("m", cfg.m)
      .raw("exponents", exps)
      .raw("translation", trans);
  return o.render();
}

toruslab::ConfigSpec load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw toruslab::Error("cannot read config file " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw toruslab::ParseError(std::string("bad config JSON: ") + e.what());
  }
  try {
    if (j.value("schema", "") != "v1") throw toruslab::ParseError("config schema must be v1");
    toruslab::ConfigSpec cfg;
    cfg.eps = Rational::parse(j.at("eps").get<std::string>());
    cfg.d = j.at("d").get<long>();
    cfg.m = j.at("m").get<long>();
    for (const auto& e : j.at("exponents")) cfg.exponents.push_back(e.get<int>());
    for (const auto& t : j.at("translation"))
      cfg.translation.push_back(Rational::parse(t.get<std::string>()));
    toruslab::validate_config(cfg);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw toruslab::ParseError(std::string("bad config fields: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// analyze: one (eps, d, p) norm report.
// ---------------------------------------------------------------------------

struct RowValues {
  double q = 0.0, A = 0.0, B = 0.0, lower = 0.0, upper = 0.0, eta = 0.0, c_pow = 0.0;
  toruslab::RegimeReport reg;
};

RowValues compute_row(const Rational& eps, long d, double p, bool exact_mode) {
  RowValues r;
  r.q = p / (p - 1.0);
  r.A = toruslab::a_p(eps, d, p);
  r.reg = toruslab::classify_regime(r.A, p);
  r.B = r.reg.B;
  // float mode: symmetric storage, closed-form witnesses (same values; the
  // ratios are storage- and |Q0|-independent).  exact mode: literal pipeline.
  const toruslab::AtomSpace space =
      toruslab::build_atom_space(eps, d, Rational(1, 2 * (d + 1)), !exact_mode);
  r.lower = toruslab::lower_bound_weak_norm(space, p);
  r.upper = toruslab::upper_bound_weak_norm(eps, d, p);
  r.eta = toruslab::latala_eta(eps, d, r.q);
  r.c_pow = toruslab::config_ratio_pow_inv_q(eps, d, r.q);
  return r;
}

int cmd_analyze(const std::string& config_path, double p, const std::string& out_path) {
  const toruslab::ConfigSpec cfg = load_config(config_path);
  if (!(p > 1.0) || !std::isfinite(p)) throw toruslab::BadExponent("p must lie in (1, inf)");
  // The atom space of the configuration itself; the reported ratios do not
  // depend on |Q0|.
  const toruslab::AtomSpace space = toruslab::config_to_atom_space(cfg);
  RowValues r;
  r.q = p / (p - 1.0);
  r.A = toruslab::a_p(cfg.eps, cfg.d, p);
  r.reg = toruslab::classify_regime(r.A, p);
  r.B = r.reg.B;
  r.lower = toruslab::lower_bound_weak_norm(space, p);
  r.upper = toruslab::upper_bound_weak_norm(cfg.eps, cfg.d, p);
  r.eta = toruslab::latala_eta(cfg.eps, cfg.d, r.q);
  r.c_pow = toruslab::config_ratio_pow_inv_q(cfg.eps, cfg.d, r.q);

  JsonObj o;
  o.str("schema", "v1")
      .str("eps", cfg.eps.str())
      .integer("d", cfg.d)
      .num("p", p)
      .num("q", r.q)
      .num("A_p", r.A)
      .str("regime", toruslab::regime_name(r.reg.regime))
      .boolean("boundary", r.reg.boundary);
  if (r.reg.boundary) o.str("regime_alt", toruslab::regime_name(r.reg.regime_alt));
  o.num("B", r.B)
      .num("lower", r.lower)
      .num("upper", r.upper)
      .num("lower/B", r.lower / r.B)
      .num("upper/B", r.upper / r.B)
      .num("eta", r.eta)
      .num("C_pow_inv_q", r.c_pow);
  write_output(o.render(), out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// endpoint: L log L report for one witness at one level.
// ---------------------------------------------------------------------------

int cmd_endpoint(const std::string& config_path, double lambda, const std::string& witness,
                 const std::string& out_path) {
  const toruslab::ConfigSpec cfg = load_config(config_path);
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw toruslab::Error("lambda must be positive");
  toruslab::ExtremalKind kind;
  if (witness == "center")
    kind = toruslab::ExtremalKind::center;
  else if (witness == "single")
    kind = toruslab::ExtremalKind::single;
  else
    throw toruslab::Error("witness must be center or single");

  const toruslab::AtomSpace space = toruslab::config_to_atom_space(cfg);
  const toruslab::StepFunction f = toruslab::extremal_function(space, kind, 2.0);
  const toruslab::EndpointReport ep = toruslab::endpoint_machinery(cfg.eps, cfg.d);
  const toruslab::MaximalResult mr = toruslab::apply_maximal(f);
  const double superlevel = toruslab::superlevel_measure_f64(mr.mf, lambda);
  const double llogl = toruslab::llogl_functional(f, lambda);
  const double ratio = toruslab::endpoint_upper_check(f, lambda);

  JsonObj o;
  o.str("schema", "v1")
      .str("eps", cfg.eps.str())
      .integer("d", cfg.d)
      .str("witness", witness)
      .num("lambda", lambda)
      .num("A", ep.A)
      .num("Lambda", ep.Lambda)
      .num("c", ep.c)
      .num("expmoment", ep.expmoment)
      .num("expmoment_upper", ep.expmoment_upper)
      .num("inv_eps", ep.inv_eps)
      .num("superlevel", superlevel)
      .num("llogl", llogl)
      .num("ratio", ratio)
      .num("sharpness", ratio * (1.0 + ep.A));
  write_output(o.render(), out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep: CSV over a parameter grid.
// ---------------------------------------------------------------------------

struct SweepSpec {
  std::vector<Rational> eps;
  std::vector<long> d;
  std::vector<double> p;
  bool exact_mode = false;
  std::string out_csv;      // optional spec-file outputs, overridden by flags
  std::string plot_prefix;
};

SweepSpec default_sweep() {
  SweepSpec sp;
  for (int k = 1; k <= 10; ++k) sp.eps.push_back(Rational::pow2(-k));
  for (int j = 0; j <= 20; ++j) sp.d.push_back(1L << j);
  sp.p = {4.0 / 3.0, 2.0, 4.0};
  return sp;
}

SweepSpec load_sweep(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw toruslab::Error("cannot read sweep spec " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw toruslab::ParseError(std::string("bad sweep JSON: ") + e.what());
  }
  try {
    if (j.value("schema", "") != "v1") throw toruslab::ParseError("sweep schema must be v1");
    SweepSpec sp;
    // canonical key first, short alias second
    auto grid = [&j](const char* name, const char* alias) -> const nlohmann::json& {
      return j.contains(name) ? j.at(name) : j.at(alias);
    };
    for (const auto& e : grid("eps_grid", "eps"))
      sp.eps.push_back(Rational::parse(e.get<std::string>()));
    for (const auto& e : grid("d_grid", "d")) sp.d.push_back(e.get<long>());
    for (const auto& e : grid("p_grid", "p")) sp.p.push_back(e.get<double>());
    if (j.contains("outputs")) {
      sp.out_csv = j.at("outputs").value("csv", "");
      sp.plot_prefix = j.at("outputs").value("plot_prefix", "");
    }
    const std::string mode = j.value("mode", "float");
    if (mode == "exact")
      sp.exact_mode = true;
    else if (mode != "float")
      throw toruslab::ParseError("mode must be exact or float");
    return sp;
  } catch (const nlohmann::json::exception& e) {
    throw toruslab::ParseError(std::string("bad sweep fields: ") + e.what());
  }
}

void validate_sweep(const SweepSpec& sp) {
  if (sp.eps.empty() || sp.d.empty() || sp.p.empty())
    throw toruslab::Error("sweep grids must be nonempty");
  for (const Rational& e : sp.eps)
    if (e.sign() <= 0 || e > Rational(1, 2))
      throw toruslab::BadEpsilon("sweep eps must lie in (0, 1/2], got " + e.str());
  for (long d : sp.d)
    if (d < 1) throw toruslab::Error("sweep d must be >= 1");
  for (double p : sp.p)
    if (!(p > 1.0) || !std::isfinite(p)) throw toruslab::BadExponent("sweep p must lie in (1, inf)");
}

int cmd_sweep(const std::string& spec_path, const std::string& out_flag,
              const std::string& plot_flag, int threads_flag) {
  const SweepSpec sp = spec_path.empty() ? default_sweep() : load_sweep(spec_path);
  validate_sweep(sp);
  const std::string out_path = out_flag.empty() ? sp.out_csv : out_flag;
  const std::string plot_prefix = plot_flag.empty() ? sp.plot_prefix : plot_flag;
  const int threads = toruslab::resolve_threads(threads_flag);

  struct Row {
    std::size_t ei, di, pi;
    RowValues v;
    std::string err;
  };
  std::vector<Row> rows;
  for (std::size_t ei = 0; ei < sp.eps.size(); ++ei)
    for (std::size_t di = 0; di < sp.d.size(); ++di)
      for (std::size_t pi = 0; pi < sp.p.size(); ++pi) rows.push_back({ei, di, pi, {}, {}});

  // Certified uppers share one scan per (eps, p); everything else is cheap
  // enough per row.
  std::vector<std::vector<double>> uppers(sp.eps.size() * sp.p.size());
  std::vector<std::string> upper_errs(uppers.size());
  {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    const std::size_t n = uppers.size();
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    auto work = [&] {
      for (std::size_t t = next.fetch_add(1); t < n; t = next.fetch_add(1)) {
        const std::size_t ei = t / sp.p.size(), pi = t % sp.p.size();
        try {
          uppers[t] = toruslab::upper_bound_weak_norm_batch(sp.eps[ei], sp.p[pi], sp.d);
        } catch (const std::exception& e) {
          upper_errs[t] = e.what();
        }
      }
    };
    for (int i = 0; i < nt; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    const std::size_t n = rows.size();
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    auto work = [&] {
      for (std::size_t t = next.fetch_add(1); t < n; t = next.fetch_add(1)) {
        Row& row = rows[t];
        const std::size_t ut = row.ei * sp.p.size() + row.pi;
        if (!upper_errs[ut].empty()) {
          row.err = upper_errs[ut];
          continue;
        }
        try {
          if (sp.exact_mode && sp.d[row.di] > 24)
            throw toruslab::Error("exact mode requires d <= 24");
          row.v = compute_row(sp.eps[row.ei], sp.d[row.di], sp.p[row.pi], sp.exact_mode);
          row.v.upper = uppers[ut][row.di];
        } catch (const std::exception& e) {
          row.err = e.what();
        }
      }
    };
    for (int i = 0; i < nt; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::string csv = "eps,d,p,q,A_p,regime,B,lower,upper,lower/B,upper/B,eta,C_pow_inv_q,status\n";
  long failed = 0;
  for (const Row& row : rows) {
    csv += sp.eps[row.ei].str() + "," + std::to_string(sp.d[row.di]) + "," + f12(sp.p[row.pi]);
    if (row.err.empty()) {
      const RowValues& v = row.v;
      csv += "," + f12(v.q) + "," + f12(v.A) + "," + toruslab::regime_name(v.reg.regime) + "," +
             f12(v.B) + "," + f12(v.lower) + "," + f12(v.upper) + "," + f12(v.lower / v.B) + "," +
             f12(v.upper / v.B) + "," + f12(v.eta) + "," + f12(v.c_pow) + ",ok\n";
    } else {
      ++failed;
      std::string msg = row.err;
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      csv += ",,,,,,,,,,,error: " + msg + "\n";
    }
  }
  write_output(csv, out_path);

  if (!plot_prefix.empty()) {
    for (std::size_t pi = 0; pi < sp.p.size(); ++pi) {
      struct Pt {
        double A, y;
        std::size_t ei, di;
      };
      std::vector<Pt> pts;
      for (const Row& row : rows)
        if (row.pi == pi && row.err.empty()) pts.push_back({row.v.A, row.v.upper / row.v.B, row.ei, row.di});
      std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
        return a.A != b.A ? a.A < b.A : (a.ei != b.ei ? a.ei < b.ei : a.di < b.di);
      });
      std::string data = "# p = " + f12(sp.p[pi]) + "\n# A_p upper/B\n";
      for (const Pt& pt : pts) data += f12(pt.A) + " " + f12(pt.y) + "\n";
      write_output(data, plot_prefix + ".p" + std::to_string(pi + 1) + ".dat");
    }
  }
  return failed ? 3 : 0;
}

// ---------------------------------------------------------------------------
// family: corollary-rule truncations.
// ---------------------------------------------------------------------------

int cmd_family(const std::string& rule_name, double p0, long jmax, const std::string& out_path) {
  toruslab::FamilyRule rule;
  if (rule_name == "closed")
    rule = toruslab::FamilyRule::closed;
  else if (rule_name == "open")
    rule = toruslab::FamilyRule::open;
  else
    throw toruslab::Error("rule must be closed or open");
  if (!(p0 > 1.0) || !std::isfinite(p0)) throw toruslab::BadExponent("p0 must lie in (1, inf)");
  if (jmax < 1) throw toruslab::Error("jmax must be >= 1");

  const auto family = toruslab::corollary_family(rule, p0, jmax);
  const std::vector<double> ps{p0, 1.0 + (p0 - 1.0) / 2.0, p0 + 1.0};
  const toruslab::FamilyReport rep = toruslab::family_analysis(family, ps);

  std::string cps = "[";
  for (std::size_t i = 0; i < rep.checkpoints.size(); ++i)
    cps += (i ? ", " : "") + std::to_string(rep.checkpoints[i]);
  cps += "]";
  std::string trajs = "[";
  for (std::size_t i = 0; i < rep.per_p.size(); ++i) {
    const auto& tr = rep.per_p[i];
    std::string sups = "[";
    for (std::size_t k = 0; k < tr.sup_at_checkpoint.size(); ++k)
      sups += (k ? ", " : "") + f12(tr.sup_at_checkpoint[k]);
    sups += "]";
    trajs += std::string(i ? ", " : "") + "{\"p\": " + f12(tr.p) + ", \"sup_A_p\": " + sups +
             ", \"divergent\": " + (tr.divergent ? "true" : "false") + "}";
  }
  trajs += "]";

  JsonObj o;
  o.str("schema", "v1")
      .str("rule", rule_name)
      .num("p0", p0)
      .integer("jmax", jmax)
      .integer("members", static_cast<long>(family.size()))
      .str("bounded_range", std::string(rule == toruslab::FamilyRule::closed ? "[" : "(") +
                                f12(p0) + ", inf]")
      .raw("checkpoints", cps)
      .num("sup_d", rep.sup_d)
      .num("sup_A", rep.sup_A)
      .raw("trajectories", trajs);
  write_output(o.render(), out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// verify: full invariant run with a constants manifest.
// ---------------------------------------------------------------------------

int cmd_verify(bool with_oracle, const std::string& grid, int threads_flag) {
  if (grid != "small" && grid != "full") throw toruslab::Error("grid must be small or full");
  toruslab::VerifyOptions opt;
  opt.with_oracle = with_oracle;
  opt.full_grid = grid == "full";
  opt.threads = threads_flag;
  const toruslab::VerifyReport rep = toruslab::run_verify(opt);
  for (const auto& c : rep.checks)
    std::printf("check %-22s %s  %6.2fs  %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                c.seconds, c.detail.c_str());
  if (!rep.constants.empty()) {
    std::printf("measured constants:\n");
    for (const auto& kv : rep.constants)
      std::printf("  %-26s = %s\n", kv.first.c_str(), f12(kv.second).c_str());
  }
  std::printf("RESULT %s (%zu suites)\n", rep.all_pass() ? "PASS" : "FAIL", rep.checks.size());
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weak-type bounds lab for shifted-rectangle maximal operators"};
  app.require_subcommand(1);

  // mk-config
  auto* mk = app.add_subcommand("mk-config", "build an (eps, d) configuration file");
  std::string mk_eps, mk_out;
  long mk_d = 0;
  long mk_m = -1;
  mk->add_option("--eps", mk_eps, "eps as a rational a/b in (0, 1/2]")->required();
  mk->add_option("--d", mk_d, "number of shifted boxes")->required();
  mk->add_option("--m", mk_m, "basis level override (>= smallest level with d coordinates)");
  mk->add_option("--out", mk_out, "output path (default stdout)");

  // analyze
  auto* an = app.add_subcommand("analyze", "norm report for a configuration at one p");
  std::string an_cfg, an_out;
  double an_p = 2.0;
  an->add_option("config", an_cfg, "configuration JSON file")->required();
  an->add_option("--p", an_p, "Lebesgue exponent in (1, inf)")->required();
  an->add_option("--out", an_out, "output path (default stdout)");

  // endpoint
  auto* en = app.add_subcommand("endpoint", "L log L endpoint report for one witness");
  std::string en_cfg, en_out, en_witness = "center";
  double en_lambda = 0.0;
  en->add_option("config", en_cfg, "configuration JSON file")->required();
  en->add_option("--lambda", en_lambda, "superlevel threshold (> 0)")->required();
  en->add_option("--witness", en_witness, "center | single (default center)");
  en->add_option("--out", en_out, "output path (default stdout)");

  // sweep
  auto* sw = app.add_subcommand("sweep", "CSV over a parameter grid");
  std::string sw_spec, sw_out, sw_plot;
  int sw_threads = 0;
  sw->add_option("spec", sw_spec, "sweep spec JSON (default: built-in grid)");
  sw->add_option("--out", sw_out, "CSV path (default stdout)");
  sw->add_option("--plot-data", sw_plot, "prefix for per-p (A_p, upper/B) data files");
  sw->add_option("--threads", sw_threads, "worker threads (default TORUSLAB_THREADS or hardware)");

  // family
  auto* fa = app.add_subcommand("family", "corollary-family truncation diagnostics");
  std::string fa_rule, fa_out;
  double fa_p0 = 2.0;
  long fa_jmax = 10000;
  fa->add_option("--rule", fa_rule, "closed | open")->required();
  fa->add_option("--p0", fa_p0, "family exponent p0 in (1, inf)")->required();
  fa->add_option("--jmax", fa_jmax, "truncation length")->required();
  fa->add_option("--out", fa_out, "output path (default stdout)");

  // verify
  auto* ve = app.add_subcommand("verify", "run the invariant suites");
  bool ve_oracle = false;
  std::string ve_grid = "full";
  int ve_threads = 0;
  ve->add_flag("--oracle", ve_oracle, "include the grid-oracle agreement suites");
  ve->add_option("--grid", ve_grid, "small | full (default full)");
  ve->add_option("--threads", ve_threads, "worker threads (default TORUSLAB_THREADS or hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (mk->parsed()) {
      const toruslab::ConfigSpec cfg = toruslab::make_config(
          Rational::parse(mk_eps), mk_d, mk_m >= 0 ? std::optional<long>(mk_m) : std::nullopt);
      write_output(config_json(cfg), mk_out);
      return 0;
    }
    if (an->parsed()) return cmd_analyze(an_cfg, an_p, an_out);
    if (en->parsed()) return cmd_endpoint(en_cfg, en_lambda, en_witness, en_out);
    if (sw->parsed()) return cmd_sweep(sw_spec, sw_out, sw_plot, sw_threads);
    if (fa->parsed()) return cmd_family(fa_rule, fa_p0, fa_jmax, fa_out);
    if (ve->parsed()) return cmd_verify(ve_oracle, ve_grid, ve_threads);
  } catch (const toruslab::Error& e) {
    return fail_usage(e.what());
  } catch (const std::exception& e) {
    return fail_usage(e.what());
  }
  return fail_usage("no subcommand");
}
