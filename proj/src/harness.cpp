#include "dualmink/harness.hpp"

#include "dualmink/svg.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace dualmink {

namespace fs = std::filesystem;

const char* const kSweepColumns =
    "n,q,epsilon,mode,converged,h_minus_1_sup,max_h_over_min_h,density_ratio,delta2,beta_sqrt_eps,stability_pass";

namespace {

Resolution read_resolution(const Section& s, int dim) {
  const auto r = s.get_ints("resolution");
  if (r.empty() || r.size() > 2) throw ParseError("[" + s.name() + "] resolution needs one or two integers");
  Resolution res{int(r[0]), r.size() == 2 ? int(r[1]) : 0};
  if (dim == 2 && r.size() != 2) throw ParseError("[" + s.name() + "] n = 2 needs resolution = int[2] N_lat N_lon");
  return res;
}

std::vector<std::int64_t> resolution_ints(const Resolution& r, int dim) {
  if (dim == 1) return {r.first};
  return {r.first, r.second};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Random smooth test function with both parities.
Field random_test_function(const SphereGrid& grid, std::uint64_t seed) {
  Field f = random_even_field(grid, seed, 8);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 1; k <= 5; k += 2) {
    const double scale = 1.0 / (k * k);
    if (grid.dim() == 1) {
      f += scale * u(rng) * evaluate_mode(grid, {k, 0, false});
      f += scale * u(rng) * evaluate_mode(grid, {k, 0, true});
    } else {
      for (int m = 0; m <= k; ++m) {
        f += scale * u(rng) * evaluate_mode(grid, {k, m, false});
        if (m > 0) f += scale * u(rng) * evaluate_mode(grid, {k, m, true});
      }
    }
  }
  return f;
}

HarmonicMode parse_sweep_mode(const std::string& text, int dim) {
  const FSpec s = parse_fspec(text, dim);
  if (s.manufactured || s.terms.size() != 1 || s.constant != 0.0 || s.terms[0].amplitude != 1.0) {
    throw ParseError("sweep mode '" + text + "' must be a single mode such as cos(2θ) or Yc(2,0)");
  }
  return s.terms[0].mode;
}

struct RowOutcome {
  SweepRow row;
  bool converged = false;
  std::string message;
  double h_dev = std::numeric_limits<double>::quiet_NaN();
  double h_ratio = std::numeric_limits<double>::quiet_NaN();
  double density_ratio = std::numeric_limits<double>::quiet_NaN();
  double delta2 = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  bool stability_pass = false;
};

std::string csv_real(double x) { return std::isnan(x) ? "nan" : format_real(x); }

}  // namespace

RunConfig read_run_config(const Document& doc) {
  RunConfig cfg;
  if (doc.has("run")) {
    const Section& s = doc.at("run");
    if (s.has("dim")) cfg.dim = int(s.get_int("dim"));
    if (cfg.dim != 1 && cfg.dim != 2) throw ParseError("[run] dim must be 1 or 2");
    if (cfg.dim == 2) cfg.resolution = {32, 64};
    if (s.has("resolution")) cfg.resolution = read_resolution(s, cfg.dim);
    if (s.has("scheme")) cfg.scheme = scheme_from_string(s.get_string("scheme"));
    if (s.has("f")) cfg.f = s.get_string("f");
    if (s.has("output")) cfg.output = s.get_string("output");
    if (s.has("seed")) cfg.seed = std::uint64_t(s.get_int("seed"));
  }
  cfg.solver = read_config(doc);
  cfg.density();
  return cfg;
}

void write_run_config(Document& doc, const RunConfig& cfg) {
  Section& s = doc.section("run");
  s.set("dim", cfg.dim);
  s.set("resolution", Value(resolution_ints(cfg.resolution, cfg.dim)));
  s.set("scheme", to_string(cfg.scheme));
  s.set("f", cfg.f.c_str());
  s.set("output", cfg.output.c_str());
  s.set("seed", Value(std::int64_t(cfg.seed)));
  write_config(doc, cfg.solver);
}

SweepSpec read_sweep_spec(const Document& doc) {
  SweepSpec spec;
  const Section& s = doc.at("sweep");
  if (s.has("dim")) spec.dim = int(s.get_int("dim"));
  if (spec.dim != 1 && spec.dim != 2) throw ParseError("[sweep] dim must be 1 or 2");
  if (spec.dim == 2) spec.resolution = {32, 64};
  if (s.has("resolution")) spec.resolution = read_resolution(s, spec.dim);
  if (s.has("scheme")) spec.scheme = scheme_from_string(s.get_string("scheme"));
  if (s.has("q")) spec.q = s.get_reals("q");
  if (s.has("epsilon")) spec.epsilon = s.get_reals("epsilon");
  if (s.has("modes")) {
    std::istringstream in(s.get_string("modes"));
    std::string item;
    while (std::getline(in, item, ';')) {
      const auto b = item.find_first_not_of(' '), e = item.find_last_not_of(' ');
      if (b != std::string::npos) spec.modes.push_back(item.substr(b, e - b + 1));
    }
  }
  if (s.has("repetitions")) spec.repetitions = int(s.get_int("repetitions"));
  if (s.has("seed")) spec.seed = std::uint64_t(s.get_int("seed"));
  if (s.has("max_runs")) spec.max_runs = int(s.get_int("max_runs"));
  spec.solver = read_config(doc);
  for (const auto& m : spec.modes) parse_sweep_mode(m, spec.dim);
  return spec;
}

void write_sweep_spec(Document& doc, const SweepSpec& spec) {
  Section& s = doc.section("sweep");
  s.set("dim", spec.dim);
  s.set("resolution", Value(resolution_ints(spec.resolution, spec.dim)));
  s.set("scheme", to_string(spec.scheme));
  s.set("q", Value(spec.q));
  s.set("epsilon", Value(spec.epsilon));
  std::string modes;
  for (std::size_t i = 0; i < spec.modes.size(); ++i) modes += (i ? "; " : "") + spec.modes[i];
  s.set("modes", modes.c_str());
  s.set("repetitions", spec.repetitions);
  s.set("seed", Value(std::int64_t(spec.seed)));
  s.set("max_runs", spec.max_runs);
  write_config(doc, spec.solver);
}

std::vector<SweepRow> run_matrix(const SweepSpec& spec) {
  const std::size_t total = spec.q.size() * spec.epsilon.size() * spec.modes.size() * std::size_t(std::max(spec.repetitions, 0));
  if (total == 0) throw std::invalid_argument("sweep: empty run matrix");
  if (total > std::size_t(spec.max_runs)) {
    throw std::invalid_argument("sweep: " + std::to_string(total) + " runs exceed the cap of " +
                                std::to_string(spec.max_runs));
  }
  std::vector<SweepRow> rows;
  for (double q : spec.q) {
    for (double eps : spec.epsilon) {
      for (const auto& mode : spec.modes) {
        for (int rep = 0; rep < spec.repetitions; ++rep) {
          const int index = int(rows.size());
          rows.push_back({index, rep, q, eps, mode, spec.seed + std::uint64_t(index)});
        }
      }
    }
  }
  return rows;
}

VerifyReport verify_body(const SupportFunction& h, const Field& f, double q, std::uint64_t seed, int spectral_trials) {
  const SphereGrid& g = h.grid();
  VerifyReport r;
  r.stability = check_stability(h, q);
  r.bounds = c0_c1_report(h);
  r.density = dual_density(h, q);
  r.density_error = (r.density.g.array() / f.array() - 1.0).abs().maxCoeff();
  r.spectral_trials = spectral_trials;
  r.spectral_min_margin = std::numeric_limits<double>::infinity();
  for (int t = 0; t < spectral_trials; ++t) {
    const InequalityCheck c = check_spectral_inequality(h, random_test_function(g, seed + std::uint64_t(t)));
    if (!c.pass) ++r.spectral_failures;
    r.spectral_min_margin = std::min(r.spectral_min_margin, (c.rhs - c.lhs) / c.rhs);
  }
  r.x_alpha = check_X_alpha_inequality(h, q - g.dim() - 1);
  r.stability_range = r.stability.q_in_range;
  const bool always = r.spectral_failures == 0 && r.x_alpha.pass && r.stability.poincare.pass;
  const bool ranged = r.stability.pass && r.stability.prop33.pass && r.stability.gradient_step.pass;
  r.pass = always && (!r.stability_range || ranged);
  return r;
}

void write_verify_report(Document& doc, const VerifyReport& r) {
  write_report(doc, r.stability);
  write_bounds(doc, r.bounds);
  Section& s = doc.section("checks");
  s.set("density_error", r.density_error);
  s.set("spectral_trials", r.spectral_trials);
  s.set("spectral_failures", r.spectral_failures);
  s.set("spectral_min_margin", r.spectral_min_margin);
  s.set("x_alpha", r.stability.q - r.stability.dim - 1);
  s.set("x_alpha_lhs", r.x_alpha.lhs);
  s.set("x_alpha_rhs", r.x_alpha.rhs);
  s.set("x_alpha_pass", r.x_alpha.pass);
  s.set("stability_range", r.stability_range);
  s.set("pass", r.pass);
  write_density(doc, r.density);
}

int cmd_solve(const fs::path& config, const fs::path& out, const CommandOptions& opt, std::ostream& log) {
  RunConfig cfg;
  Field f;
  GridPtr grid;
  try {
    cfg = read_run_config(Document::load(config.string()));
    if (opt.seed_set) cfg.seed = opt.seed;
    if (opt.override_q_range) cfg.solver.override_q_range = true;
    cfg.solver.validate(cfg.dim);
    grid = cfg.grid();
    f = evaluate_fspec(cfg.density(), grid, cfg.solver.q);
  } catch (const std::exception& e) {
    log << "solve: " << e.what() << '\n';
    return kExitUsage;
  }
  if (!(cfg.solver.q > 0 && cfg.solver.q <= cfg.dim)) {
    log << "solve: warning: q = " << format_real(cfg.solver.q) << " is outside (0, " << cfg.dim
        << "]; the linearized operator may be singular\n";
  }
  SolveResult r(SupportFunction(grid, Field::Ones(grid->size()), true));
  try {
    r = solve_homotopy(grid, f, cfg.solver);
  } catch (const std::exception& e) {
    log << "solve: " << e.what() << '\n';
    return kExitUsage;
  }
  Document doc;
  write_run_config(doc, cfg);
  write_result(doc, r, project_even(*grid, f), cfg.solver);
  const fs::path target = out.empty() ? fs::path(cfg.output) / "result.txt" : out;
  try {
    write_text(target, doc.str());
  } catch (const std::exception& e) {
    log << "solve: " << e.what() << '\n';
    return kExitUsage;
  }
  log << "solve: " << to_string(r.status) << ", residual " << format_real(r.residual_inf) << ", wrote "
      << target.string() << '\n';
  if (!r.converged) log << "solve: " << r.message << '\n';
  return r.converged ? kExitOk : kExitFailed;
}

int cmd_verify(const fs::path& result, const fs::path& out, const CommandOptions& opt, std::ostream& log) {
  try {
    const Document doc = Document::load(result.string());
    const StoredResult s = read_result(doc);
    if (!s.converged) {
      log << "verify: refusing a result that did not converge (" << to_string(s.status) << ")\n";
      return kExitFailed;
    }
    std::uint64_t seed = opt.seed;
    if (!opt.seed_set && doc.has("run") && doc.at("run").has("seed")) seed = std::uint64_t(doc.at("run").get_int("seed"));
    const VerifyReport r = verify_body(s.h, s.f, s.config.q, seed);
    Document rep;
    write_verify_report(rep, r);
    const fs::path target = out.empty() ? fs::path(result).replace_extension(".verify.txt") : out;
    write_text(target, rep.str());
    log << "verify: delta2 " << format_real(r.stability.delta2) << " <= bound " << format_real(r.stability.bound)
        << (r.stability.pass ? " holds" : " FAILS") << "; overall " << (r.pass ? "pass" : "FAIL") << ", wrote "
        << target.string() << '\n';
    if (!r.stability_range) log << "verify: q outside [n-3, n+1], stability checks are informational\n";
    return r.pass ? kExitOk : kExitFailed;
  } catch (const std::exception& e) {
    log << "verify: " << e.what() << '\n';
    return kExitUsage;
  }
}

int cmd_sweep(const fs::path& spec_path, const fs::path& out_dir, const CommandOptions& opt, std::ostream& log) {
  SweepSpec spec;
  std::vector<SweepRow> rows;
  GridPtr grid;
  try {
    spec = read_sweep_spec(Document::load(spec_path.string()));
    if (opt.seed_set) spec.seed = opt.seed;
    if (opt.override_q_range) spec.solver.override_q_range = true;
    rows = run_matrix(spec);
    for (double q : spec.q) {
      SolverConfig c = spec.solver;
      c.q = q;
      c.validate(spec.dim);
    }
    grid = SphereGrid::build(spec.dim, spec.resolution, spec.scheme);
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    log << "sweep: " << e.what() << '\n';
    return kExitUsage;
  }

  std::vector<RowOutcome> outcomes(rows.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      const SweepRow& row = rows[i];
      RowOutcome& o = outcomes[i];
      o.row = row;
      try {
        const HarmonicMode mode = parse_sweep_mode(row.mode, spec.dim);
        const Field f = Field::Ones(grid->size()) + row.epsilon * evaluate_mode(*grid, mode);
        SolverConfig c = spec.solver;
        c.q = row.q;
        const SolveResult r = solve_homotopy(grid, f, c);
        o.converged = r.converged;
        o.message = r.message;
        RunConfig rc;
        rc.dim = spec.dim;
        rc.resolution = spec.resolution;
        rc.scheme = spec.scheme;
        FSpec fs_text;
        fs_text.dim = spec.dim;
        fs_text.terms.push_back({row.epsilon, mode});
        rc.f = fs_text.str();
        rc.solver = c;
        rc.output = out_dir.string();
        rc.seed = row.seed;
        Document doc;
        write_run_config(doc, rc);
        write_result(doc, r, f, c);
        char name[32];
        std::snprintf(name, sizeof name, "run_%04d.txt", row.index);
        write_text(out_dir / name, doc.str());
        if (r.converged) {
          const StabilityReport s = check_stability(r.h, row.q);
          o.h_dev = (r.h.values().array() - 1.0).abs().maxCoeff();
          o.h_ratio = r.h.values().maxCoeff() / r.h.values().minCoeff();
          o.density_ratio = s.ratio;
          o.delta2 = s.delta2;
          o.bound = s.bound;
          o.stability_pass = s.pass;
        }
      } catch (const std::exception& e) {
        o.converged = false;
        o.message = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(opt.workers, int(rows.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << kSweepColumns << '\n';
  bool all = true;
  for (const RowOutcome& o : outcomes) {
    csv << spec.dim << ',' << format_real(o.row.q) << ',' << format_real(o.row.epsilon) << ",\"" << o.row.mode
        << "\"," << (o.converged ? "true" : "false") << ',' << csv_real(o.h_dev) << ',' << csv_real(o.h_ratio) << ','
        << csv_real(o.density_ratio) << ',' << csv_real(o.delta2) << ',' << csv_real(o.bound) << ','
        << (o.stability_pass ? "true" : "false") << '\n';
    if (!o.converged || !o.stability_pass) {
      all = false;
      log << "sweep: row " << o.row.index << " (q " << format_real(o.row.q) << ", eps " << format_real(o.row.epsilon)
          << ", " << o.row.mode << "): " << (o.converged ? "stability check failed" : o.message) << '\n';
    }
  }
  try {
    write_text(out_dir / "summary.csv", csv.str());
  } catch (const std::exception& e) {
    log << "sweep: " << e.what() << '\n';
    return kExitUsage;
  }
  log << "sweep: " << rows.size() << " runs, wrote " << (out_dir / "summary.csv").string() << '\n';
  return all ? kExitOk : kExitFailed;
}

int cmd_plot(const fs::path& result, const fs::path& out, std::ostream& log) {
  try {
    const StoredResult s = read_result(Document::load(result.string()));
    if (!s.converged) {
      log << "plot: refusing a result that did not converge\n";
      return kExitFailed;
    }
    std::string svg;
    if (s.h.dim() == 1) {
      svg = boundary_svg(s.h);
    } else {
      const DualDensity d = dual_density(s.h, s.config.q);
      svg = heatmap_svg(s.h, (d.g.array() / s.f.array() - 1.0).matrix());
    }
    const fs::path target = out.empty() ? fs::path(result).replace_extension(".svg") : out;
    write_text(target, svg);
    log << "plot: wrote " << target.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    log << "plot: " << e.what() << '\n';
    return kExitUsage;
  }
}

int cmd_manufacture(const fs::path& config, const fs::path& out, const CommandOptions& opt, std::ostream& log) {
  try {
    RunConfig cfg = read_run_config(Document::load(config.string()));
    if (opt.seed_set) cfg.seed = opt.seed;
    const FSpec spec = cfg.density();
    if (!spec.manufactured) throw std::invalid_argument("manufacture needs f = manufacture:<body>");
    const GridPtr grid = cfg.grid();
    Document doc;
    write_run_config(doc, cfg);
    doc.section("density").set("f", evaluate_fspec(spec, grid, cfg.solver.q));
    write_body(doc, analytic_support(*spec.manufactured, grid));
    const fs::path target = out.empty() ? fs::path(cfg.output) / "density.txt" : out;
    write_text(target, doc.str());
    log << "manufacture: " << spec.manufactured->str() << " at q " << format_real(cfg.solver.q) << ", wrote "
        << target.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    log << "manufacture: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace dualmink
