#ifndef UNILEARN_LEARNING_HPP
#define UNILEARN_LEARNING_HPP

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "unilearn/groups.hpp"

namespace unilearn {

enum class Task { emulate, invert };
enum class Figure { global, single_copy };

struct LearningProblem {
  GroupId group = GroupId::u1;
  long long N = 1;
  long long M = 1;
  Task task = Task::emulate;
  Figure figure = Figure::global;
  std::vector<Decomposition> example_reps;  // empty: N copies of base_rep
};

inline void validate_problem(const LearningProblem& p) {
  if (p.N < 1 || p.M < 1) throw ShapeMismatch("problem: N and M must be >= 1");
  if (!p.example_reps.empty()) {
    if (static_cast<long long>(p.example_reps.size()) != p.N)
      throw ShapeMismatch("problem: example_reps must have N entries");
    for (const auto& r : p.example_reps)
      if (r.group != p.group) throw GroupMismatch("problem: example rep group mismatch");
  }
}

inline std::vector<Decomposition> example_reps_of(const LearningProblem& p) {
  if (!p.example_reps.empty()) return p.example_reps;
  return std::vector<Decomposition>(static_cast<std::size_t>(p.N), base_rep(p.group));
}

// irreps appearing in the N-fold example product (multiplicity-free listing;
// the storage fidelity depends only on this support)
inline std::vector<IrrepLabel> input_irreps(const LearningProblem& p) {
  validate_problem(p);
  return detail::support_power(p.group, example_reps_of(p));
}

inline Decomposition target_decomposition(const LearningProblem& p) {
  validate_problem(p);
  Decomposition t = tensor_power(p.group, base_rep(p.group), p.M);
  if (p.task == Task::invert) t = conjugate(t);
  return t;
}

// the problem actually optimized: the single-copy figure reduces to M = 1
inline LearningProblem effective_problem(const LearningProblem& p) {
  LearningProblem q = p;
  if (q.figure == Figure::single_copy) {
    q.M = 1;
    q.figure = Figure::global;
  }
  return q;
}

//============================================================================
// Multiplicity matrix: m_K^(j) = multiplicity of K in target (x) conj(j),
// A[j][j'] = (1/d_T^2) sum_K m_K^(j) m_K^(j')
//============================================================================

struct MultiplicityMatrix {
  std::vector<IrrepLabel> input_irreps;              // index j
  long long d_T = 1;
  std::map<IrrepLabel, std::vector<long long>> table;  // K -> (m_K^(j))_j
  Eigen::MatrixXd a;
};

inline MultiplicityMatrix multiplicity_matrix(const LearningProblem& p) {
  MultiplicityMatrix mm;
  mm.input_irreps = input_irreps(p);
  const Decomposition target = target_decomposition(p);
  mm.d_T = target.total_dim();
  const auto nj = mm.input_irreps.size();
  for (std::size_t j = 0; j < nj; ++j) {
    const IrrepLabel cj = conjugate(mm.input_irreps[j]);
    const Decomposition fused = detail::fuse_decompositions(
        target, Decomposition{p.group, {{cj, irrep_dim(cj), 1}}});
    for (const auto& b : fused.blocks) {
      auto& row = mm.table[b.irrep];
      if (row.empty()) row.assign(nj, 0);
      row[j] = b.mult;
    }
  }
  for (auto& [k, row] : mm.table)
    if (row.empty()) row.assign(nj, 0);
  mm.a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nj), static_cast<Eigen::Index>(nj));
  const double scale = 1.0 / (static_cast<double>(mm.d_T) * static_cast<double>(mm.d_T));
  for (const auto& [k, row] : mm.table)
    for (std::size_t j = 0; j < nj; ++j) {
      if (row[j] == 0) continue;
      for (std::size_t j2 = 0; j2 < nj; ++j2)
        mm.a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j2)) +=
            scale * static_cast<double>(row[j]) * static_cast<double>(row[j2]);
    }
  return mm;
}

//============================================================================
// Storage specifications (probabilities per irrep label)
//============================================================================

struct StorageSpec {
  std::vector<IrrepLabel> irreps;  // ascending
  Eigen::VectorXd p;

  Eigen::Index dim(std::size_t idx) const { return irrep_dim(irreps[idx]); }
};

inline void validate_storage(const StorageSpec& s) {
  if (s.p.size() != static_cast<Eigen::Index>(s.irreps.size()))
    throw ShapeMismatch("storage: probability vector length mismatch");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.p.size(); ++i) {
    if (s.p(i) < -1e-15 || s.p(i) > 1.0 + 1e-12)
      throw NotPositive("storage: probability out of range");
    sum += s.p(i);
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ShapeMismatch("storage: probabilities must sum to 1");
  for (std::size_t i = 1; i < s.irreps.size(); ++i)
    if (!(s.irreps[i - 1] < s.irreps[i]))
      throw ShapeMismatch("storage: irreps must be strictly ascending");
}

struct FidelityReport {
  double F_est = 0.0;
  StorageSpec storage;
  LearningProblem problem;
  double leading_eigenvalue = 0.0;
  long long iterations = 0;
};

//============================================================================
// Principal nonnegative eigenvector: power iteration with a projected
// gradient fallback for the (never observed) non-Perron corner cases
//============================================================================

namespace detail {

struct PrincipalResult {
  double value = 0.0;
  Eigen::VectorXd x;
  long long iterations = 0;
};

inline PrincipalResult projected_gradient_simplex(const Eigen::MatrixXd& a, long long max_iter = 200000) {
  const Eigen::Index n = a.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double val = x.dot(a * x);
  const double eta = 0.5 / std::max(1.0, a.cwiseAbs().rowwise().sum().maxCoeff());
  PrincipalResult r;
  for (long long it = 0; it < max_iter; ++it) {
    Eigen::VectorXd y = (x + eta * 2.0 * (a * x)).cwiseMax(0.0);
    const double nrm = y.norm();
    if (nrm == 0.0) break;
    y /= nrm;
    const double nv = y.dot(a * y);
    x = y;
    r.iterations = it + 1;
    if (std::abs(nv - val) <= 1e-14) {
      val = nv;
      break;
    }
    val = nv;
  }
  r.value = val;
  r.x = x;
  return r;
}

inline PrincipalResult principal_nonnegative(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  PrincipalResult r;
  if (n == 1) {
    r.value = a(0, 0);
    r.x = Eigen::VectorXd::Ones(1);
    r.iterations = 1;
    return r;
  }
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double val = x.dot(a * x);
  const long long max_iter = 100000;
  bool converged = false;
  for (long long it = 0; it < max_iter; ++it) {
    Eigen::VectorXd y = a * x;
    const double nrm = y.norm();
    if (nrm == 0.0) {  // A annihilates x: the quadratic form is identically 0 on this cone
      r.value = 0.0;
      r.x = x;
      r.iterations = it + 1;
      return r;
    }
    y /= nrm;
    const double nv = y.dot(a * y);
    x = y;
    r.iterations = it + 1;
    if (std::abs(nv - val) <= 1e-13) {
      val = nv;
      converged = true;
      break;
    }
    val = nv;
  }
  if (!converged) throw ConvergenceFailure("optimize_storage: power iteration did not converge");
  if (x.minCoeff() < -1e-10) {
    PrincipalResult f = projected_gradient_simplex(a);
    f.iterations += r.iterations;
    return f;
  }
  x = x.cwiseMax(0.0);
  const double nrm = x.norm();
  if (nrm > 0.0) x /= nrm;
  r.value = x.dot(a * x);
  r.x = x;
  return r;
}

inline std::vector<std::vector<Eigen::Index>> components_of(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<Eigen::Index>> out;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    std::vector<Eigen::Index> stack{s}, members;
    comp[static_cast<std::size_t>(s)] = static_cast<int>(out.size());
    while (!stack.empty()) {
      const Eigen::Index v = stack.back();
      stack.pop_back();
      members.push_back(v);
      for (Eigen::Index u = 0; u < n; ++u)
        if (a(v, u) != 0.0 && comp[static_cast<std::size_t>(u)] < 0) {
          comp[static_cast<std::size_t>(u)] = static_cast<int>(out.size());
          stack.push_back(u);
        }
    }
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  return out;
}

}  // namespace detail

inline FidelityReport optimize_storage(const LearningProblem& p) {
  const LearningProblem eff = effective_problem(p);
  const MultiplicityMatrix mm = multiplicity_matrix(eff);
  const Eigen::Index n = mm.a.rows();
  FidelityReport rep;
  rep.problem = p;
  rep.storage.irreps = mm.input_irreps;
  rep.storage.p = Eigen::VectorXd::Zero(n);

  double best = -1.0;
  Eigen::VectorXd best_x;
  std::vector<Eigen::Index> best_members;
  long long iters = 0;
  for (const auto& members : detail::components_of(mm.a)) {
    const Eigen::Index k = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) sub(i, j) = mm.a(members[i], members[j]);
    const auto res = detail::principal_nonnegative(sub);
    iters += res.iterations;
    if (res.value > best) {
      best = res.value;
      best_x = res.x;
      best_members = members;
    }
  }
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(best_members.size()); ++i)
    rep.storage.p(best_members[i]) = best_x(i) * best_x(i);
  const double total = rep.storage.p.sum();
  if (total > 0.0) rep.storage.p /= total;
  rep.F_est = best;
  rep.leading_eigenvalue = best;
  rep.iterations = iters;
  validate_storage(rep.storage);
  return rep;
}

inline double fidelity_of_storage(const StorageSpec& spec, const LearningProblem& p) {
  validate_storage(spec);
  const MultiplicityMatrix mm = multiplicity_matrix(effective_problem(p));
  if (spec.irreps != mm.input_irreps)
    throw IrrepMismatch("fidelity_of_storage: spec irreps do not match the problem");
  Eigen::VectorXd x(spec.p.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::sqrt(std::max(0.0, spec.p(i)));
  return x.dot(mm.a * x);
}

//============================================================================
// Memory states and the covariant POVM overlap
//============================================================================

struct BlockVector {
  std::vector<IrrepLabel> irreps;
  std::vector<Vector> blocks;  // block j: vectorized d_j x d_j matrix
};

inline Complex inner(const BlockVector& a, const BlockVector& b) {
  if (a.irreps != b.irreps) throw IrrepMismatch("block inner: irrep mismatch");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < a.blocks.size(); ++i) acc += a.blocks[i].dot(b.blocks[i]);
  return acc;
}

// |phi_g> = (+)_j sqrt(p_j/d_j) |U_j(g)>>
inline BlockVector memory_state(const StorageSpec& spec, const GroupElement& g,
                                const LearningProblem& p) {
  validate_storage(spec);
  if (!spec.irreps.empty() && spec.irreps[0].group != p.group)
    throw GroupMismatch("memory_state: spec group mismatch");
  if (g.group() != p.group) throw GroupMismatch("memory_state: element group mismatch");
  BlockVector out;
  out.irreps = spec.irreps;
  for (std::size_t i = 0; i < spec.irreps.size(); ++i) {
    const Eigen::Index d = irrep_dim(spec.irreps[i]);
    const Matrix u = detail::irrep_matrix_raw(spec.irreps[i], g);
    Vector v(d * d);
    const double amp = std::sqrt(spec.p(static_cast<Eigen::Index>(i)) / static_cast<double>(d));
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) v(r * d + c) = amp * u(r, c);
    out.blocks.push_back(std::move(v));
  }
  return out;
}

// <eta_gh | phi_g> = sum_j sqrt(p_j) chi_j(gh^-1 g); |.|^2 is the POVM density
inline Complex povm_overlap(const StorageSpec& spec, const GroupElement& g,
                            const GroupElement& gh, const LearningProblem& p) {
  validate_storage(spec);
  if (g.group() != p.group || gh.group() != p.group)
    throw GroupMismatch("povm_overlap: element group mismatch");
  const GroupElement rel = gh.inverse() * g;
  Complex acc = 0.0;
  for (std::size_t i = 0; i < spec.irreps.size(); ++i)
    acc += std::sqrt(spec.p(static_cast<Eigen::Index>(i))) * char_value(spec.irreps[i], rel);
  return acc;
}

//============================================================================
// Reference storage states
//============================================================================

inline StorageSpec likelihood_state(const LearningProblem& p) {
  StorageSpec s;
  s.irreps = input_irreps(p);
  s.p.resize(static_cast<Eigen::Index>(s.irreps.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < s.irreps.size(); ++i) {
    const double d = static_cast<double>(irrep_dim(s.irreps[i]));
    s.p(static_cast<Eigen::Index>(i)) = d * d;
    total += d * d;
  }
  s.p /= total;
  return s;
}

inline StorageSpec asymptotic_state(const LearningProblem& p) {
  if (p.M != 1) throw UnsupportedM("asymptotic_state: defined for M = 1 only");
  StorageSpec s;
  s.irreps = input_irreps(p);
  const auto n = static_cast<Eigen::Index>(s.irreps.size());
  s.p.resize(n);
  const double nn = static_cast<double>(p.N);
  if (p.group == GroupId::u1) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double arg = kPi * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
      s.p(k) = std::sin(arg) * std::sin(arg);
    }
  } else {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double j = static_cast<double>(s.irreps[static_cast<std::size_t>(k)].value) / 2.0;
      const double arg = 2.0 * kPi * j / nn;
      s.p(k) = std::sin(arg) * std::sin(arg);
    }
    if (s.p.sum() < 1e-14) {  // N <= 2 degenerate: fall back to the half-period profile
      for (Eigen::Index k = 0; k < n; ++k) {
        const double arg = kPi * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        s.p(k) = std::sin(arg) * std::sin(arg);
      }
    }
  }
  s.p /= s.p.sum();
  return s;
}

inline double single_copy_fidelity(const LearningProblem& p) {
  LearningProblem q = p;
  q.M = 1;
  q.figure = Figure::global;
  return optimize_storage(q).F_est;
}

}  // namespace unilearn

#endif
