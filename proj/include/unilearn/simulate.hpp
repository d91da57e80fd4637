#ifndef UNILEARN_SIMULATE_HPP
#define UNILEARN_SIMULATE_HPP

#include <atomic>
#include <cstdlib>
#include <cmath>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "unilearn/learning.hpp"

namespace unilearn {

struct SimConfig {
  long long samples = 100000;
  unsigned long long seed = 0;
  long long chunk = 8192;
};

struct SimResult {
  double mean = 0.0;
  double std_error = 0.0;
  long long samples = 0;
};

inline int default_threads() {
  if (const char* env = std::getenv("UNILEARN_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

//============================================================================
// Sampling the relative element h with POVM density |sum_j sqrt(p_j) chi_j(h)|^2
//============================================================================

namespace detail {

// u1 density autocorrelation a_m = sum_{w-w'=m} sqrt(p_w p_w'); density
// q(t) = a_0 + 2 sum_{m>=1} a_m cos(mt), a_0 = 1
inline std::vector<double> u1_autocorr(const StorageSpec& spec) {
  long long wmin = 0, wmax = 0;
  for (std::size_t i = 0; i < spec.irreps.size(); ++i) {
    wmin = std::min(wmin, spec.irreps[i].value);
    wmax = std::max(wmax, spec.irreps[i].value);
  }
  const long long span = wmax - wmin;
  std::vector<double> a(static_cast<std::size_t>(span) + 1, 0.0);
  for (std::size_t i = 0; i < spec.irreps.size(); ++i)
    for (std::size_t k = 0; k < spec.irreps.size(); ++k) {
      const long long m = spec.irreps[i].value - spec.irreps[k].value;
      if (m < 0) continue;
      a[static_cast<std::size_t>(m)] += std::sqrt(spec.p(static_cast<Eigen::Index>(i)) *
                                                  spec.p(static_cast<Eigen::Index>(k)));
    }
  return a;
}

class RelSampler {
 public:
  RelSampler(const StorageSpec& spec, GroupId group) : group_(group) {
    if (group_ == GroupId::u1) {
      a_ = u1_autocorr(spec);
      const std::size_t bandwidth = a_.size() - 1;
      const std::size_t n = std::max<std::size_t>(64, 16 * std::max<std::size_t>(bandwidth, 1));
      grid_.resize(n + 1);
      for (std::size_t i = 0; i <= n; ++i)
        grid_[i] = cdf(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
      grid_.back() = 1.0;
    } else {
      for (std::size_t i = 0; i < spec.irreps.size(); ++i) {
        amps_.push_back(std::sqrt(spec.p(static_cast<Eigen::Index>(i))));
        labels_.push_back(spec.irreps[i]);
      }
      double root = 0.0;
      for (std::size_t i = 0; i < amps_.size(); ++i)
        root += amps_[i] * static_cast<double>(irrep_dim(labels_[i]));
      envelope_ = root * root;
    }
  }

  double cdf(double x) const {
    double s = x;
    for (std::size_t m = 1; m < a_.size(); ++m)
      s += 2.0 * a_[m] / static_cast<double>(m) * std::sin(static_cast<double>(m) * x);
    return s / (2.0 * kPi);
  }

  double density(const GroupElement& h) const {
    double q = 0.0;
    if (group_ == GroupId::u1) {
      q = a_[0];
      for (std::size_t m = 1; m < a_.size(); ++m)
        q += 2.0 * a_[m] * std::cos(static_cast<double>(m) * h.angle());
    } else {
      for (std::size_t i = 0; i < amps_.size(); ++i)
        q += amps_[i] * std::real(char_value(labels_[i], h));
      q *= q;
    }
    return q;
  }

  double envelope() const { return envelope_; }

  GroupElement sample(RngStream& rng) const {
    if (group_ == GroupId::u1) {
      const double u = rng.uniform();
      std::size_t lo = 0, hi = grid_.size() - 1;
      while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (grid_[mid] <= u ? lo : hi) = mid;
      }
      const double step = 2.0 * kPi / static_cast<double>(grid_.size() - 1);
      double xl = step * static_cast<double>(lo), xh = step * static_cast<double>(hi);
      for (int it = 0; it < 60 && xh - xl > 1e-14; ++it) {
        const double xm = 0.5 * (xl + xh);
        (cdf(xm) <= u ? xl : xh) = xm;
      }
      return GroupElement::u1(0.5 * (xl + xh));
    }
    for (long long attempt = 0; attempt < 2000000; ++attempt) {
      const GroupElement h = haar_sample(GroupId::su2, rng);
      if (rng.uniform() * envelope_ <= density(h)) return h;
    }
    throw RejectionStall("sample_estimate: rejection sampler stalled");
  }

 private:
  GroupId group_;
  std::vector<double> a_;      // u1
  std::vector<double> grid_;   // u1 cdf table
  std::vector<double> amps_;   // su2
  std::vector<IrrepLabel> labels_;
  double envelope_ = 1.0;
};

// (|Tr U(h)| / 2)^{2M}
inline double goal_value(GroupId g, long long m, const GroupElement& h) {
  double c;
  if (g == GroupId::u1)
    c = std::cos(h.angle());
  else
    c = std::cos(h.rotation_angle() / 2.0);
  const double c2 = c * c;
  double f = 1.0;
  for (long long i = 0; i < m; ++i) f *= c2;
  return f;
}

// deterministic chunked accumulation: chunk i uses stream i; partial sums are
// merged in chunk order regardless of thread scheduling
template <typename Fn>
inline SimResult run_chunks(const SimConfig& cfg, Fn&& sample_one) {
  if (cfg.samples < 1) throw ShapeMismatch("simulation: samples must be >= 1");
  const long long chunk = std::max<long long>(1, cfg.chunk);
  const long long nchunks = (cfg.samples + chunk - 1) / chunk;
  std::vector<double> sums(static_cast<std::size_t>(nchunks), 0.0);
  std::vector<double> sqs(static_cast<std::size_t>(nchunks), 0.0);
  std::atomic<long long> next{0};
  auto worker = [&]() {
    for (;;) {
      const long long i = next.fetch_add(1);
      if (i >= nchunks) return;
      const long long count = std::min(chunk, cfg.samples - i * chunk);
      RngStream rng(cfg.seed, static_cast<unsigned long long>(i));
      double s = 0.0, s2 = 0.0;
      for (long long k = 0; k < count; ++k) {
        const double f = sample_one(rng);
        s += f;
        s2 += f * f;
      }
      sums[static_cast<std::size_t>(i)] = s;
      sqs[static_cast<std::size_t>(i)] = s2;
    }
  };
  const int nt = std::min<long long>(default_threads(), nchunks);
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  double s = 0.0, s2 = 0.0;
  for (long long i = 0; i < nchunks; ++i) {
    s += sums[static_cast<std::size_t>(i)];
    s2 += sqs[static_cast<std::size_t>(i)];
  }
  SimResult r;
  r.samples = cfg.samples;
  const double n = static_cast<double>(cfg.samples);
  r.mean = s / n;
  if (cfg.samples > 1) {
    const double var = std::max(0.0, (s2 - n * r.mean * r.mean) / (n - 1.0));
    r.std_error = std::sqrt(var / n);
  }
  return r;
}

}  // namespace detail

// POVM-distributed estimate of g given the stored examples
inline GroupElement sample_estimate(const GroupElement& g, const StorageSpec& spec,
                                    const LearningProblem& p, RngStream& rng) {
  validate_storage(spec);
  if (g.group() != p.group) throw GroupMismatch("sample_estimate: element group mismatch");
  const detail::RelSampler sampler(spec, p.group);
  const GroupElement h = sampler.sample(rng);
  return g * h.inverse();
}

inline SimResult monte_carlo_fidelity(const LearningProblem& p, const StorageSpec& spec,
                                      const SimConfig& cfg) {
  validate_storage(spec);
  const LearningProblem eff = effective_problem(p);
  const detail::RelSampler sampler(spec, eff.group);
  return detail::run_chunks(cfg, [&](RngStream& rng) {
    return detail::goal_value(eff.group, eff.M, sampler.sample(rng));
  });
}

//============================================================================
// Deterministic quadrature evaluation of the covariant fidelity integral
//============================================================================

inline double quadrature_fidelity(const LearningProblem& p, const StorageSpec& spec) {
  validate_storage(spec);
  const LearningProblem eff = effective_problem(p);
  long long degree;
  if (eff.group == GroupId::u1) {
    long long wmin = 0, wmax = 0;
    for (const auto& l : spec.irreps) {
      wmin = std::min(wmin, l.value);
      wmax = std::max(wmax, l.value);
    }
    degree = (wmax - wmin) + 2 * eff.M;
  } else {
    long long tmax = 0;
    for (const auto& l : spec.irreps) tmax = std::max(tmax, l.value);
    degree = 2 * tmax + 2 * eff.M;
  }
  if (degree > 2048) throw DegreeTooLow("quadrature_fidelity: integrand bandwidth too large");
  const detail::RelSampler sampler(spec, eff.group);
  double f = 0.0;
  for (const auto& [h, w] : quadrature(eff.group, static_cast<int>(degree)))
    f += w * sampler.density(h) * detail::goal_value(eff.group, eff.M, h);
  return f;
}

//============================================================================
// Covariant retrieval operators: sector blocks, normalization, fidelity
//============================================================================

struct RetrievalOperator {
  // sector (K,L) on (+)_{j in P_KL} (C^{m_K^(j)} (x) C^{m_L^(j)}); missing = zero
  std::map<std::pair<IrrepLabel, IrrepLabel>, Matrix> blocks;
};

namespace detail {

struct SectorInfo {
  std::vector<std::size_t> js;       // indices into mm.input_irreps
  std::vector<Eigen::Index> offset;  // start of each j block
  std::vector<Eigen::Index> mk, ml;  // multiplicities per block
  Eigen::Index dim = 0;
};

inline SectorInfo sector_info(const MultiplicityMatrix& mm, const IrrepLabel& k,
                              const IrrepLabel& l) {
  SectorInfo s;
  const auto& rk = mm.table.at(k);
  const auto& rl = mm.table.at(l);
  for (std::size_t j = 0; j < mm.input_irreps.size(); ++j) {
    if (rk[j] == 0 || rl[j] == 0) continue;
    s.js.push_back(j);
    s.offset.push_back(s.dim);
    s.mk.push_back(static_cast<Eigen::Index>(rk[j]));
    s.ml.push_back(static_cast<Eigen::Index>(rl[j]));
    s.dim += static_cast<Eigen::Index>(rk[j] * rl[j]);
  }
  return s;
}

// m_L x m_L trace over the m_K factor of the j sub-block
inline Matrix trace_mk(const Matrix& block, const SectorInfo& s, std::size_t bi) {
  const Eigen::Index mk = s.mk[bi], ml = s.ml[bi], off = s.offset[bi];
  Matrix out = Matrix::Zero(ml, ml);
  for (Eigen::Index a = 0; a < mk; ++a)
    out += block.block(off + a * ml, off + a * ml, ml, ml);
  return out;
}

}  // namespace detail

// the measure-and-rotate construction R_KK = |beta_K><beta_K| / d_K,
// beta_K = (+)_j sqrt(d_j) |I_{m_K^(j)}>>; saturates the fidelity bound
inline RetrievalOperator estimation_retrieval(const MultiplicityMatrix& mm) {
  RetrievalOperator r;
  for (const auto& [k, row] : mm.table) {
    const auto s = detail::sector_info(mm, k, k);
    if (s.dim == 0) continue;
    Vector beta = Vector::Zero(s.dim);
    for (std::size_t bi = 0; bi < s.js.size(); ++bi) {
      const double rd = std::sqrt(
          static_cast<double>(irrep_dim(mm.input_irreps[s.js[bi]])));
      const Eigen::Index m = s.mk[bi];
      for (Eigen::Index a = 0; a < m; ++a) beta(s.offset[bi] + a * m + a) = rd;
    }
    r.blocks[{k, k}] = beta * beta.adjoint() / static_cast<double>(irrep_dim(k));
  }
  return r;
}

// worst constraint violation: negative part of the sectors plus the deviation
// of sum_K (d_K/d_j) Tr_{m_K}[R_KL^(j)] from the identity on each (L, j)
inline double validate_retrieval(const RetrievalOperator& r, const MultiplicityMatrix& mm) {
  double worst = 0.0;
  for (const auto& [kl, block] : r.blocks) {
    const auto s = detail::sector_info(mm, kl.first, kl.second);
    if (block.rows() != s.dim || block.cols() != s.dim)
      throw ShapeMismatch("retrieval: sector dimension mismatch");
    worst = std::max(worst, -min_eigenvalue(block));
  }
  for (const auto& [l, row] : mm.table) {
    for (std::size_t j = 0; j < mm.input_irreps.size(); ++j) {
      if (row[j] == 0) continue;
      const Eigen::Index ml = static_cast<Eigen::Index>(row[j]);
      const double dj = static_cast<double>(irrep_dim(mm.input_irreps[j]));
      Matrix acc = Matrix::Zero(ml, ml);
      for (const auto& [k, krow] : mm.table) {
        if (krow[j] == 0) continue;
        const auto it = r.blocks.find({k, l});
        if (it == r.blocks.end()) continue;
        const auto s = detail::sector_info(mm, k, l);
        for (std::size_t bi = 0; bi < s.js.size(); ++bi)
          if (s.js[bi] == j)
            acc += static_cast<double>(irrep_dim(k)) / dj * detail::trace_mk(it->second, s, bi);
      }
      worst = std::max(worst, (acc - Matrix::Identity(ml, ml)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

inline double fidelity_of_retrieval(const RetrievalOperator& r, const StorageSpec& spec,
                                    const MultiplicityMatrix& mm) {
  validate_storage(spec);
  if (spec.irreps != mm.input_irreps)
    throw IrrepMismatch("fidelity_of_retrieval: spec irreps do not match");
  const double dt2 = static_cast<double>(mm.d_T) * static_cast<double>(mm.d_T);
  double f = 0.0;
  for (const auto& [k, row] : mm.table) {
    const auto it = r.blocks.find({k, k});
    if (it == r.blocks.end()) continue;
    const auto s = detail::sector_info(mm, k, k);
    Vector alpha = Vector::Zero(s.dim);
    for (std::size_t bi = 0; bi < s.js.size(); ++bi) {
      const std::size_t j = s.js[bi];
      const double amp = std::sqrt(spec.p(static_cast<Eigen::Index>(j)) /
                                   static_cast<double>(irrep_dim(mm.input_irreps[j])));
      const Eigen::Index m = s.mk[bi];
      for (Eigen::Index a = 0; a < m; ++a) alpha(s.offset[bi] + a * m + a) = amp;
    }
    f += static_cast<double>(irrep_dim(k)) / dt2 * std::real(alpha.dot(it->second * alpha));
  }
  return f;
}

// random valid covariant retrieval: Ginibre sectors scaled onto the constraint
// set; even draws use diagonal sectors only, odd draws populate all sectors
inline std::pair<RetrievalOperator, double> random_covariant_retrieval(
    const LearningProblem& p, const StorageSpec& spec, RngStream& rng,
    bool diagonal_only = false) {
  const MultiplicityMatrix mm = multiplicity_matrix(effective_problem(p));
  std::vector<IrrepLabel> ks;
  for (const auto& [k, row] : mm.table) ks.push_back(k);

  RetrievalOperator raw;
  for (const auto& k : ks)
    for (const auto& l : ks) {
      if (diagonal_only && !(k == l)) continue;
      const auto s = detail::sector_info(mm, k, l);
      if (s.dim == 0) continue;
      Matrix g(s.dim, s.dim);
      for (Eigen::Index r = 0; r < s.dim; ++r)
        for (Eigen::Index c = 0; c < s.dim; ++c) g(r, c) = rng.complex_normal();
      raw.blocks[{k, l}] = g * g.adjoint();
    }

  // scale factors S_{L,j} = M_{L,j}^{-1/2} from the unnormalized accumulations
  std::map<std::pair<IrrepLabel, std::size_t>, Matrix> scale;
  for (const auto& [l, lrow] : mm.table) {
    for (std::size_t j = 0; j < mm.input_irreps.size(); ++j) {
      if (lrow[j] == 0) continue;
      const Eigen::Index ml = static_cast<Eigen::Index>(lrow[j]);
      const double dj = static_cast<double>(irrep_dim(mm.input_irreps[j]));
      Matrix acc = Matrix::Zero(ml, ml);
      for (const auto& [k, krow] : mm.table) {
        if (krow[j] == 0) continue;
        const auto it = raw.blocks.find({k, l});
        if (it == raw.blocks.end()) continue;
        const auto s = detail::sector_info(mm, k, l);
        for (std::size_t bi = 0; bi < s.js.size(); ++bi)
          if (s.js[bi] == j)
            acc += static_cast<double>(irrep_dim(k)) / dj * detail::trace_mk(it->second, s, bi);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es((acc + acc.adjoint()) / 2.0);
      if (es.eigenvalues()(0) < 1e-10 * std::max(1.0, es.eigenvalues()(ml - 1)))
        throw InfeasibleDraw("retrieval draw: singular normalization block");
      Matrix inv_sqrt = Matrix::Zero(ml, ml);
      for (Eigen::Index i = 0; i < ml; ++i)
        inv_sqrt += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint() /
                    std::sqrt(es.eigenvalues()(i));
      scale[{l, j}] = inv_sqrt;
    }
  }

  RetrievalOperator out;
  for (const auto& [kl, block] : raw.blocks) {
    const auto s = detail::sector_info(mm, kl.first, kl.second);
    Matrix x = Matrix::Zero(s.dim, s.dim);
    for (std::size_t bi = 0; bi < s.js.size(); ++bi) {
      const Matrix& sc = scale.at({kl.second, s.js[bi]});
      const Eigen::Index mk = s.mk[bi], ml = s.ml[bi], off = s.offset[bi];
      for (Eigen::Index a = 0; a < mk; ++a)
        x.block(off + a * ml, off + a * ml, ml, ml) = sc;
    }
    out.blocks[kl] = x * block * x.adjoint();
  }
  const double residual = validate_retrieval(out, mm);
  if (residual > 1e-9) throw InfeasibleDraw("retrieval draw: constraint projection failed");
  return {std::move(out), fidelity_of_retrieval(out, spec, mm)};
}

//============================================================================
// Reference-frame alignment protocol (task = invert)
//============================================================================

inline SimResult alignment_fidelity(const LearningProblem& p, const StorageSpec& spec,
                                    const SimConfig& cfg) {
  if (p.task != Task::invert) throw ShapeMismatch("alignment_fidelity: task must be invert");
  validate_storage(spec);
  const LearningProblem eff = effective_problem(p);
  const Eigen::Index dm = static_cast<Eigen::Index>(1) << eff.M;
  if (dm > dimension_cap()) throw CapExceeded("alignment_fidelity: message space too large");
  const detail::RelSampler sampler(spec, eff.group);
  return detail::run_chunks(cfg, [&, dm](RngStream& rng) {
    const GroupElement h = sampler.sample(rng);
    Matrix u = Matrix::Identity(1, 1);
    const Matrix ud = h.defining();
    for (long long i = 0; i < eff.M; ++i) u = detail::kron(u, ud);
    Vector psi(dm);
    for (Eigen::Index i = 0; i < dm; ++i) psi(i) = rng.complex_normal();
    psi /= psi.norm();
    const Complex amp = psi.dot(u * psi);
    return std::norm(amp);
  });
}

}  // namespace unilearn

#endif
