#pragma once

// Run dispatch for the command-line tool: executes a validated RunConfig,
// writes CSV/JSON outputs and a manifest with SHA-256 digests.

#include "fracdiss/besov.hpp"
#include "fracdiss/config.hpp"
#include "fracdiss/dynamics.hpp"
#include "fracdiss/exponents.hpp"
#include "fracdiss/kernel.hpp"
#include "fracdiss/parallel.hpp"
#include "fracdiss/semigroup.hpp"
#include "fracdiss/suites.hpp"
#include "fracdiss/version.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fracdiss {

/// 17 significant digits, so values round-trip exactly.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::io, "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot read '" + p.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header) : cols_(header.size()) { row(header); }

  void row(const std::vector<std::string>& cells) {
    require(cells.size() == cols_, "CSV row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
    text_ += '\n';
  }
  void numbers(const std::vector<double>& v) {
    std::vector<std::string> cells;
    for (double x : v) cells.push_back(format_real(x));
    row(cells);
  }
  [[nodiscard]] const std::string& text() const noexcept { return text_; }

private:
  std::size_t cols_;
  std::string text_;
};

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunRecord {
  std::string kind;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::string code_version{version};
  double wall_clock_seconds = 0.0;
  std::map<std::string, double> diagnostics;
  std::vector<ManifestEntry> files;
  nlohmann::ordered_json result = nlohmann::ordered_json::object();
  std::string report;  // human-readable text printed by the CLI
};

struct RunOptions {
  int jobs = 1;
};

/// Collects output files in memory and writes them in one pass at the end.
class OutputSet {
public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string bytes) { files_.emplace_back(name, std::move(bytes)); }

  std::vector<ManifestEntry> write() const {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory '" + dir_.string() + "': " + ec.message());
    std::vector<ManifestEntry> out;
    for (const auto& [name, bytes] : files_) {
      const auto path = dir_ / name;
      {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
        f << bytes;
        if (!f) fail(ErrorKind::io, "short write on '" + path.string() + "'");
      }
      out.push_back({name, sha256_hex(bytes), bytes.size()});
    }
    return out;
  }

private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument:
    case ErrorKind::unsupported: return 1;
    case ErrorKind::numerical:
    case ErrorKind::insufficient_growth: return 2;
    case ErrorKind::io: return 3;
  }
  return 2;
}

namespace detail {

inline SpectralField gaussian_data(const Grid& g, double amp, double width) {
  if (g.dim == 1) return SpectralField::sample(g, [&](double x) { return amp * std::exp(-x * x / width); });
  return SpectralField::sample(g, [&](double x, double y) { return amp * std::exp(-(x * x + y * y) / width); });
}

inline void run_kernel(const RunConfig& cfg, const RunOptions& opt, OutputSet& out, RunRecord& rec) {
  const int n = static_cast<int>(cfg.integer("n"));
  std::vector<KernelQuery> queries;
  for (double a : cfg.reals("alpha"))
    for (double nu : cfg.reals("nu"))
      for (double x : cfg.reals("x"))
        for (double t : cfg.reals("t")) queries.push_back({a, n, nu, x, t, cfg.flag("gradient")});
  for (const auto& q : queries) validate(q);
  const auto values =
      parallel_map<KernelValue>(queries.size(), opt.jobs, [&](std::size_t i) { return kernel_eval(queries[i]); });
  CsvTable csv({"alpha", "n", "nu", "x", "t", "value", "abs_err_estimate"});
  double worst = 0.0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    csv.row({format_real(q.alpha), std::to_string(q.n), format_real(q.nu), format_real(q.x), format_real(q.t),
             format_real(values[i].value), format_real(values[i].abs_err)});
    worst = std::max(worst, values[i].abs_err);
  }
  out.add("kernel.csv", csv.text());
  rec.diagnostics["max_abs_err_estimate"] = worst;
  rec.result["entries"] = queries.size();
  rec.report = std::to_string(queries.size()) + " kernel values";
}

inline void run_smoothing(const RunConfig& cfg, const RunOptions& opt, OutputSet& out, RunRecord& rec) {
  const auto& rs = cfg.reals("r");
  const auto& ps = cfg.reals("p");
  if (rs.size() != ps.size())
    throw ConfigError(ConfigIssue::type_error, "smoothing.p", "needs one entry per entry of smoothing.r");
  const int n = static_cast<int>(cfg.integer("n"));
  const Grid g = make_grid(n, static_cast<int>(cfg.integer("N")), cfg.real("L"));
  const double tmin = cfg.real("t_min"), tmax = cfg.real("t_max");
  if (!(tmax >= 10 * tmin)) throw ConfigError(ConfigIssue::type_error, "smoothing.t_max", "must be >= 10 t_min");
  const auto tg = log_grid(tmin, tmax, static_cast<int>(cfg.integer("per_decade")));
  struct Entry {
    double alpha, nu, r, p;
  };
  std::vector<Entry> entries;
  for (double a : cfg.reals("alpha"))
    for (std::size_t k = 0; k < rs.size(); ++k)
      for (double nu : cfg.reals("nu")) entries.push_back({a, nu, rs[k], ps[k]});
  const std::string data = cfg.text("data");
  const double variance = cfg.real("variance");
  auto field_for = [&](double r) {
    const bool gaussian = data == "gaussian" || (data == "auto" && (r == 1.0 || n != 1));
    if (gaussian) {
      if (n == 1) return SpectralField::sample(g, [&](double x) { return std::exp(-x * x / (4 * variance)); });
      return SpectralField::sample(g, [&](double x, double y) { return std::exp(-(x * x + y * y) / (4 * variance)); });
    }
    return homogeneous_profile(g, n / r);
  };
  const auto reps = parallel_map<SmoothingReport>(entries.size(), opt.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    return derivative_smoothing_fit(field_for(e.r), e.nu, e.r, e.p, e.alpha, tg);
  });
  CsvTable csv({"alpha", "n", "r", "p", "nu", "predicted_slope", "fitted_slope", "r2"});
  bool within = true;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    csv.row({format_real(e.alpha), std::to_string(n), format_real(e.r), format_real(e.p), format_real(e.nu),
             format_real(reps[i].predicted_slope), format_real(reps[i].fitted_slope),
             format_real(reps[i].residual_r2)});
    within = within && reps[i].within_threshold;
    rec.diagnostics["t_threshold_alpha=" + suites::num(e.alpha)] = reps[i].t_threshold;
  }
  out.add("smoothing.csv", csv.text());
  rec.result["entries"] = entries.size();
  rec.result["fit_window_within_threshold"] = within;
  rec.report = std::to_string(entries.size()) + " smoothing fits";
}

inline void run_besov(const RunConfig& cfg, const RunOptions& opt, OutputSet& out, RunRecord& rec) {
  const Grid g = make_grid(1, static_cast<int>(cfg.integer("N")), cfg.real("L"));
  const auto profile =
      cfg.text("profile") == "exp_glue" ? TransitionProfile::exp_glue : TransitionProfile::exp_sq_glue;
  const auto fam = default_lp_family(g, profile);
  const auto corpus = besov_corpus(g, cfg.seed);
  struct Entry {
    double alpha;
    std::size_t f;
  };
  std::vector<Entry> entries;
  for (double a : cfg.reals("alpha"))
    for (std::size_t f = 0; f < corpus.size(); ++f) entries.push_back({a, f});
  struct Norms {
    double dyadic = 0.0, semigroup = 0.0;
  };
  const double s = cfg.real("s"), p = cfg.real("p"), q = cfg.real("q");
  validate(BesovParams{s, p, q, 1.0});
  const auto norms = parallel_map<Norms>(entries.size(), opt.jobs, [&](std::size_t i) {
    const BesovParams bp{s, p, q, entries[i].alpha};
    const auto& f = corpus[entries[i].f];
    return Norms{besov_norm_dyadic(f, bp, fam), besov_norm_semigroup(f, bp, semigroup_time_grid(fam, bp.alpha))};
  });
  CsvTable csv({"s", "p", "q", "alpha", "norm_dyadic", "norm_semigroup", "ratio"});
  for (std::size_t i = 0; i < entries.size(); ++i)
    csv.numbers({s, p, q, entries[i].alpha, norms[i].dyadic, norms[i].semigroup,
                 norms[i].dyadic / norms[i].semigroup});
  double coverage = 1.0;
  for (const auto& f : corpus) coverage = std::min(coverage, band_coverage(f, fam));
  rec.diagnostics["min_band_coverage"] = coverage;
  out.add("besov.csv", csv.text());
  rec.result["entries"] = entries.size();
  rec.report = std::to_string(entries.size()) + " Besov norm pairs";
}

inline std::string triplet_row(const Triplet& t, const std::string& cls) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "  %-12s q = %-8s p = %-8s r = %-8s admissible = %-5s generalized = %s\n",
                cls.c_str(), t.q.str().c_str(), t.p.str().c_str(), t.r.str().c_str(),
                is_admissible(t) ? "yes" : "no", is_generalized_admissible(t) ? "yes" : "no");
  return buf;
}

inline void run_triplets(const RunConfig& cfg, const RunOptions&, OutputSet& out, RunRecord& rec) {
  const int n = static_cast<int>(cfg.integer("n"));
  const auto alpha = cfg.get<Rational>("alpha");
  const auto b = cfg.get<Rational>("b");
  const auto d = cfg.get<Rational>("d");
  std::optional<Exponent> p, r;
  if (cfg.has("p")) p = cfg.get<Exponent>("p");
  if (cfg.has("r")) r = cfg.get<Exponent>("r");
  const auto ce = critical_exponents(n, alpha, b, d, p, r);
  const auto w = smallness_window(n, alpha, b, d);
  auto opt_str = [](const std::optional<Rational>& v) { return v ? v->str() : std::string("undefined"); };
  std::string text;
  text += "n = " + std::to_string(n) + ", alpha = " + alpha.str() + ", b = " + b.str() + ", d = " + d.str() + "\n";
  text += "  r0 = " + opt_str(ce.r0) + "\n  r1 = " + opt_str(ce.r1) + "\n  rd = " + opt_str(ce.rd) + "\n";
  text += "  sigma = " + opt_str(ce.sigma) + "\n  blowup_rate = " + opt_str(ce.blowup_rate) + "\n";
  for (const auto& u : ce.undefined) text += "  (" + u + ")\n";
  if (w.empty)
    text += "smallness window: empty (" + w.reason + ")\n";
  else
    text += "smallness window: " + std::string(w.lo_inclusive ? "[" : "(") + w.lo.str() + ", " + w.hi.str() + ")\n";

  Rational rs = r && !r->is_infinite() ? r->value() : (ce.r0 && *ce.r0 > Rational(1) ? *ce.r0 : Rational(2));
  if (!(rs > Rational(1))) rs = Rational(2);
  CsvTable csv({"class", "q", "p", "r", "admissible", "generalized_admissible"});
  text += "sample triplets at r = " + rs.str() + ":\n";
  const int count = static_cast<int>(cfg.integer("samples"));
  for (bool generalized : {false, true}) {
    const std::string cls = generalized ? "generalized" : "admissible";
    for (const auto& t : sample_triplets(n, alpha, rs, generalized, count)) {
      text += triplet_row(t, cls);
      csv.row({cls, t.q.str(), t.p.str(), t.r.str(), is_admissible(t) ? "1" : "0",
               is_generalized_admissible(t) ? "1" : "0"});
    }
  }
  out.add("triplets.txt", text);
  out.add("triplets.csv", csv.text());
  rec.result["r0"] = opt_str(ce.r0);
  rec.result["r1"] = opt_str(ce.r1);
  rec.result["rd"] = opt_str(ce.rd);
  rec.result["sigma"] = opt_str(ce.sigma);
  rec.result["blowup_rate"] = opt_str(ce.blowup_rate);
  rec.result["window"] = w.empty ? "empty" : (w.lo_inclusive ? "[" : "(") + w.lo.str() + ", " + w.hi.str() + ")";
  rec.report = text;
}

inline ProblemSpec problem_from(const RunConfig& cfg) {
  const int n = static_cast<int>(cfg.integer("n"));
  const Grid g = make_grid(n, static_cast<int>(cfg.integer("N")), cfg.real("L"));
  ProblemSpec ps{g, cfg.real("alpha"), cfg.real("kappa"), {}};
  const std::string kind = cfg.text("nonlinearity");
  const double sign = static_cast<double>(cfg.integer("sign"));
  std::optional<Multiplier> op;
  if (cfg.text("operator") == "gradient") {
    op = multipliers::gradient(1.0, 0.0);
  } else if (cfg.text("operator") == "power") {
    op = multipliers::power(cfg.real("d"));
  }
  if (kind == "power") ps.terms.push_back(NonlinearTerm::power(cfg.real("b"), sign, op));
  if (kind == "abs_power") ps.terms.push_back(NonlinearTerm::abs_power(cfg.real("b"), sign, op));
  if (kind == "qg") {
    if (op) throw ConfigError(ConfigIssue::type_error, "solve.operator", "the qg term takes no operator");
    ps.terms.push_back(NonlinearTerm::qg());
  }
  if (cfg.has("b2")) {
    if (kind != "power" && kind != "abs_power")
      throw ConfigError(ConfigIssue::type_error, "solve.b2", "a second term needs a power nonlinearity");
    const double sign2 = cfg.has("sign2") ? static_cast<double>(cfg.integer("sign2")) : sign;
    auto second = NonlinearTerm::power(cfg.real("b2"), sign2, op);
    second.kind = ps.terms.front().kind;
    ps.terms.push_back(second);
  }
  validate(ps);
  return ps;
}

inline SolveConfig solve_config_from(const RunConfig& cfg, int dim) {
  SolveConfig c;
  c.T = cfg.real("T");
  c.M = static_cast<int>(cfg.integer("M"));
  c.method = cfg.text("method") == "etd" ? Method::etd : Method::picard;
  c.r = cfg.real("r");
  c.p = cfg.real("p");
  c.q = cfg.real("q");
  c.grading = cfg.has("grading") ? cfg.real("grading") : default_grading(c.q, cfg.real("b"));
  c.tol = cfg.real("tol");
  c.max_iterations = static_cast<int>(cfg.integer("max_iterations"));
  c.max_halvings = static_cast<int>(cfg.integer("max_halvings"));
  c.substeps = static_cast<int>(cfg.integer("substeps"));
  c.adaptive = cfg.flag("adaptive");
  c.cfl = cfg.real("cfl");
  c.blowup_threshold = cfg.real("blowup_threshold");
  validate(c, dim);
  return c;
}

inline SpectralField initial_data_from(const RunConfig& cfg, const Grid& g) {
  const std::string init = cfg.text("initial");
  const double A = cfg.real("A");
  if (init == "constant") return SpectralField::sample(g, [&](double) { return A; });
  if (init == "self_similar") {
    if (g.dim != 1) fail(ErrorKind::unsupported, "self-similar data is one-dimensional");
    return A * self_similar_data(g, cfg.real("alpha"), cfg.real("b"), cfg.real("eps"), cfg.real("p"));
  }
  return gaussian_data(g, A, cfg.real("width"));
}

inline void run_solve(const RunConfig& cfg, const RunOptions&, OutputSet& out, RunRecord& rec) {
  const auto ps = problem_from(cfg);
  const auto sc = solve_config_from(cfg, ps.grid.dim);
  if (cfg.text("initial") == "constant" && ps.grid.dim != 1)
    fail(ErrorKind::unsupported, "constant data is one-dimensional");
  const auto phi = initial_data_from(cfg, ps.grid);
  const auto tr = solve(ps, phi, sc);

  CsvTable norms({"t", "l2", "linf", "lr", "lp", "weighted_lp"});
  const auto w = tr.weighted_lp();
  for (std::size_t j = 0; j < tr.times.size(); ++j)
    norms.numbers({tr.times[j], tr.l2.values[j], tr.linf.values[j], tr.lr.values[j], tr.lp.values[j], w[j]});
  out.add("norms.csv", norms.text());
  CsvTable ratios({"iteration", "ratio", "relative_change"});
  for (std::size_t k = 0; k < tr.picard_changes.size(); ++k)
    ratios.row({std::to_string(k + 1), k == 0 || k - 1 >= tr.picard_ratios.size() ? "nan"
                                                                                  : format_real(tr.picard_ratios[k - 1]),
                format_real(tr.picard_changes[k])});
  out.add("picard_ratios.csv", ratios.text());

  rec.result["method"] = cfg.text("method");
  rec.result["stop_reason"] = tr.stop_reason;
  rec.result["horizon"] = tr.T;
  rec.result["iterations"] = tr.iterations;
  rec.result["halvings"] = tr.halvings;
  rec.result["converged"] = tr.converged;
  rec.result["blowup_estimate"] = nullptr;
  const bool focusing = std::any_of(ps.terms.begin(), ps.terms.end(), [](const NonlinearTerm& t) {
    return t.kind != TermKind::qg && t.sign > 0 && t.amplitude != 0.0;
  });
  if (focusing && (tr.stop_reason != "horizon" || tr.halvings > 0)) {
    try {
      const auto est = detect_blowup(tr, cfg.real("b"), sc.r);
      rec.result["blowup_estimate"] = {{"t_star", est.t_star},
                                       {"rate", est.rate},
                                       {"predicted_rate", predicted_blowup_rate(ps.grid.dim, ps.alpha, cfg.real("b"),
                                                                                ps.terms.front().order(), sc.r)},
                                       {"r2", est.r2},
                                       {"points", est.points},
                                       {"final_linf", est.final_linf}};
    } catch (const Error& e) {
      rec.result["blowup_note"] = e.what();
    }
  }
  if (!tr.fields.empty()) {
    const auto last = tr.field(tr.fields.size() - 1);
    rec.diagnostics["boundary"] = boundary_diagnostic(last);
    rec.diagnostics["spectral_tail"] = spectral_tail_fraction(ps.grid, last.coeffs());
    if (!ps.terms.empty() && last.max_abs() > 0.0)
      rec.diagnostics["aliasing"] = aliasing_diagnostic(ps.terms, last, ps.alpha);
  }
  rec.report = "solve: " + tr.stop_reason + " at t = " + format_real(tr.times.empty() ? 0.0 : tr.times.back());
  if (!rec.result["blowup_estimate"].is_null())
    rec.report += ", blow-up T* ~ " + format_real(rec.result["blowup_estimate"]["t_star"].get<double>());
}

inline void run_verify(const RunConfig& cfg, const RunOptions& opt, OutputSet& out, RunRecord& rec) {
  const std::string suite = cfg.text("suite");
  const auto checks = run_suite(suite, opt.jobs, cfg.seed);
  nlohmann::ordered_json report = nlohmann::ordered_json::array();
  int passed = 0;
  for (const auto& c : checks) {
    report.push_back({{"check", c.check},
                      {"predicted", c.predicted},
                      {"fitted", c.fitted},
                      {"tolerance", c.tolerance},
                      {"pass", c.pass}});
    passed += c.pass ? 1 : 0;
  }
  out.add("verify_" + suite + ".json", report.dump(2) + "\n");
  rec.result["suite"] = suite;
  rec.result["checks"] = checks.size();
  rec.result["passed"] = passed;
  rec.report = "suite " + suite + ": " + std::to_string(passed) + "/" + std::to_string(checks.size()) + " passed";
  for (const auto& c : checks)
    rec.report += "\n  " + std::string(c.pass ? "PASS " : "FAIL ") + c.check + " predicted " +
                  format_real(c.predicted) + " fitted " + format_real(c.fitted);
}

} // namespace detail

inline nlohmann::ordered_json manifest_json(const RunRecord& rec) {
  nlohmann::ordered_json j;
  j["kind"] = rec.kind;
  j["seed"] = rec.seed;
  j["code_version"] = rec.code_version;
  j["wall_clock_seconds"] = rec.wall_clock_seconds;
  j["config"] = rec.config;
  j["diagnostics"] = rec.diagnostics;
  j["result"] = rec.result;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& f : rec.files) j["files"].push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return j;
}

/// Executes the run, writes outputs and manifest.json into cfg.out.
inline RunRecord run(const RunConfig& cfg, const RunOptions& opt = {}) {
  require(opt.jobs >= 1, "--jobs must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  RunRecord rec;
  rec.kind = cfg.kind;
  rec.seed = cfg.seed;
  rec.config = cfg.snapshot;
  OutputSet out(cfg.out);
  if (cfg.kind == "kernel") detail::run_kernel(cfg, opt, out, rec);
  else if (cfg.kind == "smoothing") detail::run_smoothing(cfg, opt, out, rec);
  else if (cfg.kind == "besov") detail::run_besov(cfg, opt, out, rec);
  else if (cfg.kind == "triplets") detail::run_triplets(cfg, opt, out, rec);
  else if (cfg.kind == "solve") detail::run_solve(cfg, opt, out, rec);
  else if (cfg.kind == "verify") detail::run_verify(cfg, opt, out, rec);
  else fail(ErrorKind::invalid_argument, "unknown run kind '" + cfg.kind + "'");
  rec.files = out.write();
  rec.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto path = std::filesystem::path(cfg.out) / "manifest.json";
  std::ofstream f(path, std::ios::trunc);
  if (!f) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  f << manifest_json(rec).dump(2) << "\n";
  if (!f) fail(ErrorKind::io, "short write on '" + path.string() + "'");
  return rec;
}

/// True when every manifest entry matches the bytes on disk.
inline bool manifest_matches(const std::filesystem::path& dir) {
  const auto j = nlohmann::json::parse(read_file(dir / "manifest.json"));
  for (const auto& f : j.at("files")) {
    const auto bytes = read_file(dir / f.at("path").get<std::string>());
    if (sha256_hex(bytes) != f.at("sha256").get<std::string>() || bytes.size() != f.at("bytes").get<std::uintmax_t>())
      return false;
  }
  return true;
}

} // namespace fracdiss
