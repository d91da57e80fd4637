#ifndef UNILEARN_CLI_HPP
#define UNILEARN_CLI_HPP

#include <chrono>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "unilearn/fullspace.hpp"
#include "unilearn/learning.hpp"
#include "unilearn/report.hpp"
#include "unilearn/simulate.hpp"

namespace unilearn {
namespace cli {

// exit-code map shared with the test suite
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kConvergence = 3,
  kRuntime = 4,
  kBoundViolation = 5,
  kOracleMismatch = 6,
};

namespace detail {

struct ProblemFlags {
  std::string group = "u1";
  long long n = 1;
  long long m = 1;
  std::string task = "emulate";
  std::string figure = "global";
  std::string state = "optimal";
};

inline void add_problem_flags(CLI::App* cmd, ProblemFlags& f, bool with_state = true,
                              bool with_n = true) {
  cmd->add_option("--group", f.group, "group (u1 or su2)")
      ->required()
      ->check(CLI::IsMember({"u1", "su2"}));
  if (with_n)
    cmd->add_option("--n", f.n, "number of examples")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--m", f.m, "number of uses to reproduce")->check(CLI::PositiveNumber);
  cmd->add_option("--task", f.task, "emulate or invert")
      ->check(CLI::IsMember({"emulate", "invert"}));
  cmd->add_option("--figure", f.figure, "global or single-copy")
      ->check(CLI::IsMember({"global", "single-copy"}));
  if (with_state)
    cmd->add_option("--state", f.state, "storage state")
        ->check(CLI::IsMember({"optimal", "likelihood", "sine"}));
}

inline LearningProblem problem_of(const ProblemFlags& f) {
  LearningProblem p;
  p.group = f.group == "u1" ? GroupId::u1 : GroupId::su2;
  p.N = f.n;
  p.M = f.m;
  p.task = f.task == "invert" ? Task::invert : Task::emulate;
  p.figure = f.figure == "single-copy" ? Figure::single_copy : Figure::global;
  return p;
}

inline StorageSpec state_of(const LearningProblem& p, const std::string& name,
                            FidelityReport* rep = nullptr) {
  if (name == "likelihood") return likelihood_state(p);
  if (name == "sine") return asymptotic_state(p);
  FidelityReport r = optimize_storage(p);
  if (rep) *rep = r;
  return r.storage;
}

inline void emit_problem(JsonWriter& w, const ProblemFlags& f, bool with_state = true) {
  w.key("problem").begin_object();
  w.key("group").value(f.group);
  w.key("n").value(f.n);
  w.key("m").value(f.m);
  w.key("task").value(f.task);
  w.key("figure").value(f.figure);
  if (with_state) w.key("state").value(f.state);
  w.end_object();
}

inline void emit_tail(JsonWriter& w, unsigned long long seed) {
  w.key("timings").begin_object().end_object();
  w.key("seed").value(seed);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

enum class Format { human, json, csv };

inline void add_format_flags(CLI::App* cmd, Format& fmt) {
  auto* j = cmd->add_flag_callback("--json", [&fmt] { fmt = Format::json; },
                                   "machine-readable JSON report");
  cmd->add_flag_callback("--csv", [&fmt] { fmt = Format::csv; }, "CSV output")->excludes(j);
}

//----------------------------------------------------------------------------

inline int run_fidelity(const ProblemFlags& f, Format fmt, std::ostream& out,
                        std::ostream& err) {
  const Timer timer;
  const LearningProblem p = problem_of(f);
  FidelityReport rep;
  const StorageSpec spec = state_of(p, f.state, &rep);
  const double fval =
      f.state == "optimal" ? rep.F_est : fidelity_of_storage(spec, p);
  if (fmt == Format::json) {
    JsonWriter w;
    w.begin_object();
    w.key("schema_version").value(kReportSchemaVersion);
    w.key("command").value("fidelity");
    emit_problem(w, f);
    w.key("results").begin_object();
    w.key("f").value(fval);
    if (f.state == "optimal") {
      w.key("leading_eigenvalue").value(rep.leading_eigenvalue);
      w.key("iterations").value(rep.iterations);
    }
    w.key("irreps").begin_array();
    for (const auto& j : spec.irreps) w.value(irrep_name(j));
    w.end_array();
    w.key("p").begin_array();
    for (Eigen::Index i = 0; i < spec.p.size(); ++i) w.value(spec.p(i));
    w.end_array();
    w.end_object();
    emit_tail(w, 0);
    w.end_object();
    out << w.str() << "\n";
  } else if (fmt == Format::csv) {
    out << "group,n,m,task,figure,state,f\n"
        << f.group << ',' << f.n << ',' << f.m << ',' << f.task << ',' << f.figure << ','
        << f.state << ',' << fmt_e(fval) << "\n";
  } else {
    out << "F = " << fmt_g(fval) << "\n";
    for (std::size_t i = 0; i < spec.irreps.size(); ++i)
      out << "p[" << irrep_name(spec.irreps[i]) << "] = "
          << fmt_g(spec.p(static_cast<Eigen::Index>(i))) << "\n";
  }
  err << "# fidelity: " << fmt_g(timer.seconds()) << " s\n";
  return kOk;
}

//----------------------------------------------------------------------------

inline int run_simulate(const ProblemFlags& f, const SimConfig& cfg, bool align, Format fmt,
                        std::ostream& out, std::ostream& err) {
  const Timer timer;
  const LearningProblem p = problem_of(f);
  const StorageSpec spec = state_of(p, f.state);
  const double block_f = fidelity_of_storage(spec, p);
  double reference = block_f;
  SimResult res;
  if (align) {
    res = alignment_fidelity(p, spec, cfg);
    const double dm = std::pow(2.0, static_cast<double>(effective_problem(p).M));
    reference = (dm * block_f + 1.0) / (dm + 1.0);
  } else {
    res = monte_carlo_fidelity(p, spec, cfg);
  }
  if (fmt == Format::json) {
    JsonWriter w;
    w.begin_object();
    w.key("schema_version").value(kReportSchemaVersion);
    w.key("command").value("simulate");
    emit_problem(w, f);
    w.key("results").begin_object();
    w.key("mean").value(res.mean);
    w.key("std_error").value(res.std_error);
    w.key("samples").value(res.samples);
    w.key("reference").value(reference);
    w.key("align").value(align);
    w.end_object();
    emit_tail(w, cfg.seed);
    w.end_object();
    out << w.str() << "\n";
  } else if (fmt == Format::csv) {
    out << "group,n,m,task,figure,state,align,samples,mean,std_error,reference\n"
        << f.group << ',' << f.n << ',' << f.m << ',' << f.task << ',' << f.figure << ','
        << f.state << ',' << (align ? 1 : 0) << ',' << res.samples << ',' << fmt_e(res.mean)
        << ',' << fmt_e(res.std_error) << ',' << fmt_e(reference) << "\n";
  } else {
    out << "mean = " << fmt_g(res.mean) << " +/- " << fmt_g(res.std_error)
        << "  (reference " << fmt_g(reference) << ", " << res.samples << " samples)\n";
  }
  err << "# simulate: " << fmt_g(timer.seconds()) << " s\n";
  return kOk;
}

//----------------------------------------------------------------------------

inline int run_falsify(const ProblemFlags& f, long long draws, unsigned long long seed,
                       Format fmt, std::ostream& out, std::ostream& err) {
  const Timer timer;
  const LearningProblem p = problem_of(f);
  const StorageSpec spec = state_of(p, f.state);
  const double f_est = fidelity_of_storage(spec, p);
  const MultiplicityMatrix mm = multiplicity_matrix(effective_problem(p));
  const double estimation_f =
      fidelity_of_retrieval(estimation_retrieval(mm), spec, mm);
  RngStream rng(seed, 0);
  double max_f = estimation_f;
  for (long long d = 0; d < draws; ++d) {
    for (int attempt = 0;; ++attempt) {
      try {
        max_f = std::max(max_f, random_covariant_retrieval(p, spec, rng).second);
        break;
      } catch (const InfeasibleDraw&) {
        if (attempt > 10000) throw;
      }
    }
  }
  const bool violation = max_f > f_est + 1e-9;
  if (fmt == Format::json) {
    JsonWriter w;
    w.begin_object();
    w.key("schema_version").value(kReportSchemaVersion);
    w.key("command").value("falsify");
    emit_problem(w, f);
    w.key("results").begin_object();
    w.key("draws").value(draws);
    w.key("max_f").value(max_f);
    w.key("f_est").value(f_est);
    w.key("estimation_f").value(estimation_f);
    w.key("violation").value(violation);
    w.end_object();
    emit_tail(w, seed);
    w.end_object();
    out << w.str() << "\n";
  } else {
    out << "max F over " << draws << " draws = " << fmt_g(max_f) << "\n"
        << "F_est = " << fmt_g(f_est) << "  (estimation strategy achieves "
        << fmt_g(estimation_f) << ")\n"
        << (violation ? "BOUND VIOLATED\n" : "bound holds\n");
  }
  err << "# falsify: " << fmt_g(timer.seconds()) << " s\n";
  return violation ? kBoundViolation : kOk;
}

//----------------------------------------------------------------------------

struct Check {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline Check make_check(std::string name, double residual, double tol) {
  return {std::move(name), residual, tol, residual <= tol};
}

// oracle suite: embedding invariants, comb normalization, covariance, and
// full-space vs block-form fidelity for each storage state
inline std::vector<Check> verify_checks(const LearningProblem& p, unsigned long long seed,
                                        int degree) {
  std::vector<Check> checks;
  const BlockEmbedding emb = build_embedding(p.group, p.N);
  const Eigen::Index dn = emb.w.rows();
  checks.push_back(make_check(
      "embedding_unitary",
      (emb.w.adjoint() * emb.w - Matrix::Identity(dn, dn)).cwiseAbs().maxCoeff(), 1e-10));

  RngStream rng(seed, 0);
  double inter = 0.0;
  for (int s = 0; s < 100; ++s) {
    const GroupElement g = haar_sample(p.group, rng);
    const Matrix un = unilearn::detail::kron_power(g.defining(), p.N);
    Matrix rep = Matrix::Zero(dn, dn);
    for (const auto& b : emb.blocks) {
      const Matrix d = unilearn::detail::irrep_matrix_raw(b.irrep, g);
      for (Eigen::Index bb = 0; bb < b.dim; ++bb)
        for (Eigen::Index a = 0; a < b.dim; ++a)
          for (Eigen::Index mu = 0; mu < b.mult; ++mu)
            rep(b.offset + bb * b.mult + mu, b.offset + a * b.mult + mu) = d(bb, a);
    }
    inter = std::max(inter, (un * emb.w - emb.w * rep).cwiseAbs().maxCoeff());
  }
  checks.push_back(make_check("intertwiner", inter, 1e-10));

  const FidelityReport rep = optimize_storage(p);
  double storres = 0.0;
  {
    const Vector base = embed_memory(emb, memory_state(rep.storage, GroupElement::identity(p.group), p));
    for (int s = 0; s < 20; ++s) {
      const GroupElement g = haar_sample(p.group, rng);
      const Matrix un = unilearn::detail::kron_power(g.defining(), p.N);
      const Vector lhs = embed_memory(emb, memory_state(rep.storage, g, p));
      const Vector rhs = unilearn::detail::kron(un, Matrix(Matrix::Identity(dn, dn))) * base;
      storres = std::max(storres, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }
  checks.push_back(make_check("storage_embedding", storres, 1e-10));

  const ChoiOperator choi = full_learning_choi(p, rep.storage, degree);
  const CombReport comb = is_comb(choi, learning_comb_spec(p.N), 1e-9);
  checks.push_back(make_check("comb_normalization", comb.max_residual, 1e-9));

  double covres = 0.0;
  for (int s = 0; s < 100; ++s) {
    const GroupElement u = haar_sample(p.group, rng);
    const GroupElement v = haar_sample(p.group, rng);
    covres = std::max(covres, covariance_residual(choi, u, v, p.N));
  }
  checks.push_back(make_check("covariance", covres, 1e-8));

  for (const std::string& state : {"optimal", "likelihood", "sine"}) {
    const StorageSpec spec = state_of(p, state);
    const double block = fidelity_of_storage(spec, p);
    const double full = full_fidelity(p, spec, degree);
    checks.push_back(make_check("oracle_" + state, std::abs(full - block), 1e-6));
  }
  return checks;
}

inline int run_verify(const ProblemFlags& f, unsigned long long seed, int degree, Format fmt,
                      std::ostream& out, std::ostream& err) {
  const Timer timer;
  LearningProblem p = problem_of(f);
  p.M = 1;
  const std::vector<Check> checks = verify_checks(p, seed, degree);
  bool ok = true;
  for (const auto& c : checks) ok = ok && c.pass;
  if (fmt == Format::json) {
    JsonWriter w;
    w.begin_object();
    w.key("schema_version").value(kReportSchemaVersion);
    w.key("command").value("verify");
    emit_problem(w, f, false);
    w.key("results").begin_object();
    w.key("checks").begin_array();
    for (const auto& c : checks) {
      w.begin_object();
      w.key("name").value(c.name);
      w.key("residual").value(c.residual);
      w.key("tolerance").value(c.tolerance);
      w.key("pass").value(c.pass);
      w.end_object();
    }
    w.end_array();
    w.key("ok").value(ok);
    w.end_object();
    emit_tail(w, seed);
    w.end_object();
    out << w.str() << "\n";
  } else {
    for (const auto& c : checks)
      out << "check " << c.name << ": residual = " << fmt_g(c.residual)
          << " (tol " << fmt_g(c.tolerance) << ") " << (c.pass ? "PASS" : "FAIL") << "\n";
    out << (ok ? "all checks passed\n" : "VERIFICATION FAILED\n");
  }
  err << "# verify: " << fmt_g(timer.seconds()) << " s\n";
  return ok ? kOk : kOracleMismatch;
}

//----------------------------------------------------------------------------

inline bool parse_range(const std::string& text, long long& lo, long long& hi) {
  const auto pos = text.find("..");
  if (pos == std::string::npos) return false;
  try {
    lo = std::stoll(text.substr(0, pos));
    hi = std::stoll(text.substr(pos + 2));
  } catch (const std::exception&) {
    return false;
  }
  return lo >= 1 && hi >= lo;
}

inline int run_sweep(const ProblemFlags& f, const std::string& range,
                     const std::vector<std::string>& states, std::ostream& out,
                     std::ostream& err) {
  const Timer timer;
  long long lo = 0, hi = 0;
  if (!parse_range(range, lo, hi)) {
    err << "sweep: bad --n-range '" << range << "' (expected a..b with 1 <= a <= b)\n";
    return kUsage;
  }
  out << "group,n,state,f,one_minus_f\n";
  for (const auto& state : states) {
    std::vector<std::pair<double, double>> pts;
    for (long long n = lo; n <= hi; ++n) {
      ProblemFlags fn = f;
      fn.n = n;
      const LearningProblem p = problem_of(fn);
      const StorageSpec spec = state_of(p, state);
      const double fv = fidelity_of_storage(spec, p);
      out << f.group << ',' << n << ',' << state << ',' << fmt_e(fv) << ','
          << fmt_e(1.0 - fv) << "\n";
      if (1.0 - fv > 0.0) pts.emplace_back(static_cast<double>(n), 1.0 - fv);
    }
    if (pts.size() >= 3) {
      const ScalingFit fit = fit_scaling(pts);
      out << "# fit group=" << f.group << " state=" << state
          << " slope_loglog=" << fmt_g(fit.slope_ols)
          << " slope_corrected=" << fmt_g(fit.slope_corrected)
          << " finite_size_coeff=" << fmt_g(fit.finite_size_coeff)
          << " intercept=" << fmt_g(fit.intercept_corrected) << "\n";
    }
  }
  err << "# sweep: " << fmt_g(timer.seconds()) << " s\n";
  return kOk;
}

}  // namespace detail

//============================================================================
// front end: fidelity | simulate | falsify | verify | sweep
//============================================================================

inline int run_cli(const std::vector<std::string>& args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"optimal storage and retrieval of group unitaries"};
  app.require_subcommand(1);

  detail::ProblemFlags fid_f, sim_f, fal_f, ver_f, swp_f;
  detail::Format fid_fmt = detail::Format::human, sim_fmt = detail::Format::human,
                 fal_fmt = detail::Format::human, ver_fmt = detail::Format::human;
  SimConfig cfg;
  bool align = false;
  long long draws = 1000;
  unsigned long long fal_seed = 0, ver_seed = 0;
  int ver_degree = 0;
  std::string range = "1..8";
  std::vector<std::string> states{"optimal"};

  auto* fid = app.add_subcommand("fidelity", "optimal or named-state learning fidelity");
  detail::add_problem_flags(fid, fid_f);
  detail::add_format_flags(fid, fid_fmt);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo measure-and-rotate simulation");
  detail::add_problem_flags(sim, sim_f);
  detail::add_format_flags(sim, sim_fmt);
  sim->add_option("--samples", cfg.samples, "sample count")->check(CLI::PositiveNumber);
  sim->add_option("--seed", cfg.seed, "RNG seed");
  sim->add_option("--chunk", cfg.chunk, "samples per RNG stream")->check(CLI::PositiveNumber);
  sim->add_flag("--align", align, "run the alignment protocol (task must be invert)");

  auto* fal = app.add_subcommand("falsify", "random covariant retrieval bound search");
  detail::add_problem_flags(fal, fal_f);
  detail::add_format_flags(fal, fal_fmt);
  fal->add_option("--draws", draws, "number of random retrieval operators")
      ->check(CLI::PositiveNumber);
  fal->add_option("--seed", fal_seed, "RNG seed");

  auto* ver = app.add_subcommand("verify", "full-space oracle cross-checks");
  detail::add_problem_flags(ver, ver_f, false);
  detail::add_format_flags(ver, ver_fmt);
  ver->add_option("--seed", ver_seed, "RNG seed for sampled group elements");
  ver->add_option("--degree", ver_degree, "POVM quadrature degree (0 = auto)");

  auto* swp = app.add_subcommand("sweep", "fidelity vs N sweep with scaling fit");
  detail::add_problem_flags(swp, swp_f, false, false);
  swp->add_option("--n-range", range, "N range a..b")->required();
  swp->add_option("--state", states, "storage states to sweep")
      ->delimiter(',')
      ->check(CLI::IsMember({"optimal", "likelihood", "sine"}));

  std::vector<const char*> argv{"unilearn"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (fid->parsed()) return detail::run_fidelity(fid_f, fid_fmt, out, err);
    if (sim->parsed()) {
      if (align && sim_f.task != "invert") {
        err << "usage error: --align requires --task invert\n";
        return kUsage;
      }
      return detail::run_simulate(sim_f, cfg, align, sim_fmt, out, err);
    }
    if (fal->parsed()) return detail::run_falsify(fal_f, draws, fal_seed, fal_fmt, out, err);
    if (ver->parsed()) return detail::run_verify(ver_f, ver_seed, ver_degree, ver_fmt, out, err);
    if (swp->parsed()) return detail::run_sweep(swp_f, range, states, out, err);
  } catch (const ConvergenceFailure& e) {
    err << "convergence failure: " << e.what() << "\n";
    return kConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace cli
}  // namespace unilearn

#endif
