// Acceptance gate: one PASS/FAIL line per criterion, exit code = failure count.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "unilearn/fullspace.hpp"
#include "unilearn/report.hpp"
#include "unilearn/simulate.hpp"

namespace {

using unilearn::GroupElement;
using unilearn::GroupId;
using unilearn::kPi;
using unilearn::LearningProblem;
using unilearn::MultiplicityMatrix;
using unilearn::RngStream;
using unilearn::SimConfig;
using unilearn::SimResult;
using unilearn::StorageSpec;
using unilearn::Task;

LearningProblem problem(GroupId g, long long n, long long m = 1, Task task = Task::emulate) {
  LearningProblem p;
  p.group = g;
  p.N = n;
  p.M = m;
  p.task = task;
  return p;
}

struct ClosedCase {
  GroupId g;
  long long n, m;
  double f;
  const char* name;
};

const std::vector<ClosedCase>& closed_cases() {
  static const std::vector<ClosedCase> c = {
      {GroupId::u1, 1, 1, 0.75, "u1 N=1 M=1"},
      {GroupId::u1, 2, 1, 0.5 + std::sqrt(2.0) / 4.0, "u1 N=2 M=1"},
      {GroupId::u1, 1, 2, 0.625, "u1 N=1 M=2"},
      {GroupId::su2, 1, 1, 0.5, "su2 N=1 M=1"},
      {GroupId::su2, 2, 1, (3.0 + std::sqrt(5.0)) / 8.0, "su2 N=2 M=1"},
  };
  return c;
}

class Criterion {
 public:
  explicit Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {
    start_ = std::chrono::steady_clock::now();
  }

  void require(bool ok, const std::string& detail) {
    if (ok) return;
    pass_ = false;
    if (!detail_.empty()) detail_ += "; ";
    detail_ += detail;
  }

  void info(const std::string& line) { std::fprintf(stderr, "  [%d] %s\n", id_, line.c_str()); }

  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  bool finish() {
    std::printf("%s criterion %d: %s (%.2f s)%s%s\n", pass_ ? "PASS" : "FAIL", id_,
                title_.c_str(), seconds(), pass_ ? "" : " -- ", pass_ ? "" : detail_.c_str());
    std::fflush(stdout);
    return pass_;
  }

 private:
  int id_;
  std::string title_;
  bool pass_ = true;
  std::string detail_;
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

//----------------------------------------------------------------------------

bool criterion1() {
  Criterion c(1, "closed-form finite-N fidelities vs grid search and full-space oracle");
  for (const auto& cc : closed_cases()) {
    const auto t0 = std::chrono::steady_clock::now();
    const LearningProblem p = problem(cc.g, cc.n, cc.m);
    const auto rep = unilearn::optimize_storage(p);
    c.require(std::abs(rep.F_est - cc.f) <= 1e-9,
              std::string(cc.name) + " F_est=" + fmt(rep.F_est));

    const double grid = testsup::simplex_grid_best(unilearn::multiplicity_matrix(p).a, 1000);
    c.require(grid <= rep.F_est + 1e-12 && rep.F_est - grid <= 1e-5,
              std::string(cc.name) + " grid=" + fmt(grid));

    double oracle;
    if (cc.m == 1)
      oracle = unilearn::full_fidelity(p, rep.storage);
    else
      oracle = unilearn::quadrature_fidelity(p, rep.storage);
    c.require(std::abs(oracle - cc.f) <= (cc.m == 1 ? 1e-6 : 1e-9),
              std::string(cc.name) + " oracle=" + fmt(oracle));

    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(dt < 1.0, std::string(cc.name) + " runtime " + fmt(dt) + " s");
  }
  return c.finish();
}

bool criterion2() {
  Criterion c(2, "u1 exact sequence 1/2 + 1/2 cos(pi/(N+2)) for N=1..64");
  for (long long n = 1; n <= 64; ++n) {
    const double want = 0.5 + 0.5 * std::cos(kPi / static_cast<double>(n + 2));
    const double got = unilearn::optimize_storage(problem(GroupId::u1, n)).F_est;
    c.require(std::abs(got - want) <= 1e-9, "N=" + std::to_string(n) + " F=" + fmt(got));
  }
  for (long long n = 1; n <= 3; ++n) {
    const LearningProblem p = problem(GroupId::u1, n);
    const auto rep = unilearn::optimize_storage(p);
    const double oracle = unilearn::full_fidelity(p, rep.storage);
    c.require(std::abs(oracle - rep.F_est) <= 1e-6,
              "oracle N=" + std::to_string(n) + " " + fmt(oracle));
  }
  return c.finish();
}

bool criterion3() {
  Criterion c(3, "scaling exponents of 1-F over N=8..128");
  struct Sweep {
    GroupId g;
    bool likelihood;
    double slope;
    const char* name;
  };
  for (const Sweep& s : {Sweep{GroupId::u1, false, -2.0, "u1 optimal"},
                         Sweep{GroupId::su2, false, -2.0, "su2 optimal"},
                         Sweep{GroupId::u1, true, -1.0, "u1 likelihood"}}) {
    std::vector<std::pair<double, double>> pts;
    for (long long n = 8; n <= 128; ++n) {
      const LearningProblem p = problem(s.g, n);
      double f;
      if (s.likelihood) {
        f = unilearn::fidelity_of_storage(unilearn::likelihood_state(p), p);
        const double exact = 1.0 - 0.5 / static_cast<double>(n + 1);
        c.require(std::abs(f - exact) <= 1e-12, "likelihood N=" + std::to_string(n));
      } else {
        f = unilearn::optimize_storage(p).F_est;
      }
      pts.emplace_back(static_cast<double>(n), 1.0 - f);
    }
    const unilearn::ScalingFit fit = unilearn::fit_scaling(pts);
    c.info(std::string(s.name) + ": slope_loglog=" + fmt(fit.slope_ols) +
           " slope_corrected=" + fmt(fit.slope_corrected) +
           " amplitude=" + fmt(std::exp(fit.intercept_corrected)));
    c.require(std::abs(fit.slope_corrected - s.slope) <= 0.1,
              std::string(s.name) + " slope=" + fmt(fit.slope_corrected));
  }
  c.require(c.seconds() < 10.0, "runtime " + fmt(c.seconds()) + " s");
  return c.finish();
}

bool criterion4() {
  Criterion c(4, "Monte Carlo means within 4 standard errors, bit-identical replay");
  SimConfig cfg;
  cfg.samples = 100000;
  cfg.seed = 2026;
  for (const auto& cc : closed_cases()) {
    const LearningProblem p = problem(cc.g, cc.n, cc.m);
    const StorageSpec spec = unilearn::optimize_storage(p).storage;
    const SimResult r = unilearn::monte_carlo_fidelity(p, spec, cfg);
    c.require(std::abs(r.mean - cc.f) <= 4.0 * r.std_error,
              std::string(cc.name) + " mean=" + fmt(r.mean) + " se=" + fmt(r.std_error));
    const SimResult r2 = unilearn::monte_carlo_fidelity(p, spec, cfg);
    c.require(r.mean == r2.mean && r.std_error == r2.std_error,
              std::string(cc.name) + " replay drifted");
    c.info(std::string(cc.name) + ": mean=" + fmt(r.mean) + " +/- " + fmt(r.std_error) +
           " target=" + fmt(cc.f));
  }
  c.require(c.seconds() < 60.0, "runtime " + fmt(c.seconds()) + " s");
  return c.finish();
}

bool criterion5() {
  Criterion c(5, "random covariant retrieval never beats F_est; estimation saturates it");
  long long total_draws = 0;
  for (GroupId g : {GroupId::u1, GroupId::su2})
    for (long long n = 1; n <= 4; ++n)
      for (long long m = 1; m <= 2; ++m) {
        const LearningProblem p = problem(g, n, m);
        const auto rep = unilearn::optimize_storage(p);
        const MultiplicityMatrix mm = unilearn::multiplicity_matrix(p);

        const double est = unilearn::fidelity_of_retrieval(unilearn::estimation_retrieval(mm),
                                                           rep.storage, mm);
        c.require(std::abs(est - rep.F_est) <= 1e-10,
                  std::string(unilearn::group_name(g)) + " N=" + std::to_string(n) +
                      " M=" + std::to_string(m) + " estimation=" + fmt(est));

        RngStream rng(515, static_cast<unsigned long long>(n * 10 + m));
        long long violations = 0;
        for (int d = 0; d < 1000; ++d) {
          for (int attempt = 0;; ++attempt) {
            try {
              const auto [op, f] =
                  unilearn::random_covariant_retrieval(p, rep.storage, rng, d % 2 == 0);
              (void)op;
              if (f > rep.F_est + 1e-9) ++violations;
              break;
            } catch (const unilearn::InfeasibleDraw&) {
              if (attempt >= 10) {
                ++violations;
                break;
              }
            }
          }
          ++total_draws;
        }
        c.require(violations == 0,
                  std::string(unilearn::group_name(g)) + " N=" + std::to_string(n) +
                      " M=" + std::to_string(m) + " violations=" + std::to_string(violations));
      }
  c.info("total draws: " + std::to_string(total_draws));
  c.require(c.seconds() < 300.0, "runtime " + fmt(c.seconds()) + " s");
  return c.finish();
}

bool criterion6() {
  Criterion c(6, "oracle network passes is_comb and covariance commutation for N<=3");
  for (GroupId g : {GroupId::u1, GroupId::su2})
    for (long long n = 1; n <= 3; ++n) {
      const LearningProblem p = problem(g, n);
      const StorageSpec spec = unilearn::optimize_storage(p).storage;
      const auto choi = unilearn::full_learning_choi(p, spec);
      const auto rep = unilearn::is_comb(choi, unilearn::learning_comb_spec(n), 1e-9);
      c.require(rep.ok && rep.max_residual <= 1e-9,
                std::string(unilearn::group_name(g)) + " N=" + std::to_string(n) +
                    " comb residual=" + fmt(rep.max_residual) + " level=" +
                    std::to_string(rep.level));

      RngStream rng(606, static_cast<unsigned long long>(n));
      double worst = 0.0;
      for (int t = 0; t < 100; ++t) {
        const GroupElement u = unilearn::haar_sample(g, rng);
        const GroupElement v = unilearn::haar_sample(g, rng);
        worst = std::max(worst, unilearn::covariance_residual(choi, u, v, n));
      }
      c.require(worst <= 1e-8, std::string(unilearn::group_name(g)) + " N=" +
                                   std::to_string(n) + " covariance=" + fmt(worst));
    }
  return c.finish();
}

bool criterion7() {
  Criterion c(7, "inversion symmetry and M-independent single-copy fidelity");
  for (GroupId g : {GroupId::u1, GroupId::su2})
    for (long long n = 1; n <= 8; ++n) {
      const double fe = unilearn::optimize_storage(problem(g, n)).F_est;
      const double fi = unilearn::optimize_storage(problem(g, n, 1, Task::invert)).F_est;
      c.require(std::abs(fe - fi) <= 1e-12, std::string(unilearn::group_name(g)) +
                                                " N=" + std::to_string(n) + " invert gap " +
                                                fmt(fi - fe));
    }
  for (GroupId g : {GroupId::u1, GroupId::su2}) {
    const double base = unilearn::optimize_storage(problem(g, 3)).F_est;
    for (long long m : {2, 3, 5}) {
      LearningProblem p = problem(g, 3, m);
      p.figure = unilearn::Figure::single_copy;
      const double sc = unilearn::single_copy_fidelity(p);
      c.require(sc == base, std::string(unilearn::group_name(g)) + " M=" + std::to_string(m) +
                                " single-copy " + fmt(sc) + " vs " + fmt(base));
    }
  }
  return c.finish();
}

bool criterion8() {
  Criterion c(8, "alignment protocol matches (d^M F' + 1)/(d^M + 1) within 4 sigma");
  SimConfig cfg;
  cfg.samples = 100000;
  cfg.seed = 808;
  for (const auto& cc : closed_cases()) {
    const LearningProblem p = problem(cc.g, cc.n, cc.m, Task::invert);
    const auto rep = unilearn::optimize_storage(p);
    const double dm = std::pow(2.0, static_cast<double>(cc.m));
    const double want = (dm * rep.F_est + 1.0) / (dm + 1.0);
    const SimResult r = unilearn::alignment_fidelity(p, rep.storage, cfg);
    c.require(std::abs(r.mean - want) <= 4.0 * r.std_error,
              std::string(cc.name) + " mean=" + fmt(r.mean) + " want=" + fmt(want) +
                  " se=" + fmt(r.std_error));
    c.info(std::string(cc.name) + ": mean=" + fmt(r.mean) + " +/- " + fmt(r.std_error) +
           " target=" + fmt(want));
  }
  return c.finish();
}

}  // namespace

int main() {
  int failures = 0;
  failures += criterion1() ? 0 : 1;
  failures += criterion2() ? 0 : 1;
  failures += criterion3() ? 0 : 1;
  failures += criterion4() ? 0 : 1;
  failures += criterion5() ? 0 : 1;
  failures += criterion6() ? 0 : 1;
  failures += criterion7() ? 0 : 1;
  failures += criterion8() ? 0 : 1;
  if (failures == 0)
    std::printf("all acceptance criteria satisfied\n");
  else
    std::printf("%d acceptance criteria failed\n", failures);
  return failures;
}
