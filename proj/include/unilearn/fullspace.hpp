#ifndef UNILEARN_FULLSPACE_HPP
#define UNILEARN_FULLSPACE_HPP

#include <string>
#include <utility>
#include <vector>

#include "unilearn/comb.hpp"
#include "unilearn/learning.hpp"

namespace unilearn {

// brute-force embedding cap; the full-space network is a desk-scale oracle
inline long long& oracle_n_cap() {
  static long long cap = 3;
  return cap;
}

//============================================================================
// Block embedding W : (+)_j (H_j (x) C^{m_j}) -> (C^2)^{(x)N}
// column layout per block: offset + a*mult + mu  (a: irrep row, mu: copy)
//============================================================================

struct EmbeddingBlock {
  IrrepLabel irrep;
  Eigen::Index dim = 1;
  Eigen::Index mult = 1;
  Eigen::Index offset = 0;
};

struct BlockEmbedding {
  GroupId group = GroupId::u1;
  long long n = 1;
  Matrix w;  // 2^n x 2^n unitary
  std::vector<EmbeddingBlock> blocks;

  // DN x d_j matrix of the mu = 0 columns of block j
  Matrix leading_columns(std::size_t bi) const {
    const auto& b = blocks[bi];
    Matrix out(w.rows(), b.dim);
    for (Eigen::Index a = 0; a < b.dim; ++a) out.col(a) = w.col(b.offset + a * b.mult);
    return out;
  }
};

namespace detail {

inline int popcount_ll(long long x) {
  int c = 0;
  while (x) {
    c += static_cast<int>(x & 1);
    x >>= 1;
  }
  return c;
}

inline BlockEmbedding build_embedding_u1(long long n) {
  const Eigen::Index dn = static_cast<Eigen::Index>(1) << n;
  BlockEmbedding emb;
  emb.group = GroupId::u1;
  emb.n = n;
  emb.w = Matrix::Zero(dn, dn);
  Eigen::Index off = 0;
  for (long long wgt = -n; wgt <= n; wgt += 2) {
    std::vector<Eigen::Index> cls;
    for (Eigen::Index b = 0; b < dn; ++b)
      if (n - 2 * popcount_ll(b) == wgt) cls.push_back(b);
    if (cls.empty()) continue;
    const auto m = static_cast<Eigen::Index>(cls.size());
    emb.blocks.push_back({irrep_u1(wgt), 1, m, off});
    for (Eigen::Index mu = 0; mu < m; ++mu) emb.w(cls[static_cast<std::size_t>(mu)], off + mu) = 1.0;
    off += m;
  }
  return emb;
}

inline BlockEmbedding build_embedding_su2(long long n) {
  const Eigen::Index dn = static_cast<Eigen::Index>(1) << n;
  // coupling paths: (twoJ, basis states for m = +j..-j), spawned up then down
  std::vector<std::pair<long long, std::vector<Vector>>> paths;
  {
    Vector e0 = Vector::Zero(2), e1 = Vector::Zero(2);
    e0(0) = 1.0;
    e1(1) = 1.0;
    paths.emplace_back(1, std::vector<Vector>{e0, e1});
  }
  for (long long step = 1; step < n; ++step) {
    std::vector<std::pair<long long, std::vector<Vector>>> next;
    for (const auto& [twoJ, vecs] : paths) {
      std::vector<Vector> big;  // index kpar*2 + s
      for (const auto& v : vecs)
        for (int s = 0; s < 2; ++s) {
          Vector kv = Vector::Zero(v.size() * 2);
          for (Eigen::Index i = 0; i < v.size(); ++i) kv(i * 2 + s) = v(i);
          big.push_back(std::move(kv));
        }
      const Eigen::MatrixXd up = cg_couple_half(twoJ, twoJ + 1);
      std::vector<Vector> upv;
      for (Eigen::Index kc = 0; kc < up.rows(); ++kc) {
        Vector acc = Vector::Zero(big[0].size());
        for (Eigen::Index r = 0; r < up.cols(); ++r)
          if (up(kc, r) != 0.0) acc += up(kc, r) * big[static_cast<std::size_t>(r)];
        upv.push_back(std::move(acc));
      }
      next.emplace_back(twoJ + 1, std::move(upv));
      if (twoJ > 0) {
        const Eigen::MatrixXd dnm = cg_couple_half(twoJ, twoJ - 1);
        std::vector<Vector> dnv;
        for (Eigen::Index kc = 0; kc < dnm.rows(); ++kc) {
          Vector acc = Vector::Zero(big[0].size());
          for (Eigen::Index r = 0; r < dnm.cols(); ++r)
            if (dnm(kc, r) != 0.0) acc += dnm(kc, r) * big[static_cast<std::size_t>(r)];
          dnv.push_back(std::move(acc));
        }
        next.emplace_back(twoJ - 1, std::move(dnv));
      }
    }
    paths.swap(next);
  }
  std::map<long long, std::vector<const std::vector<Vector>*>> bylabel;
  for (const auto& [twoJ, vecs] : paths) bylabel[twoJ].push_back(&vecs);
  BlockEmbedding emb;
  emb.group = GroupId::su2;
  emb.n = n;
  emb.w = Matrix::Zero(dn, dn);
  Eigen::Index off = 0;
  for (const auto& [twoJ, plist] : bylabel) {
    const Eigen::Index d = static_cast<Eigen::Index>(twoJ) + 1;
    const auto m = static_cast<Eigen::Index>(plist.size());
    emb.blocks.push_back({irrep_su2(twoJ), d, m, off});
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index mu = 0; mu < m; ++mu)
        emb.w.col(off + a * m + mu) = (*plist[static_cast<std::size_t>(mu)])[static_cast<std::size_t>(a)];
    off += d * m;
  }
  return emb;
}

inline Matrix kron_power(const Matrix& b, long long n) {
  Matrix out = Matrix::Identity(1, 1);
  for (long long i = 0; i < n; ++i) out = kron(out, b);
  return out;
}

}  // namespace detail

inline BlockEmbedding build_embedding(GroupId group, long long n) {
  if (n < 1 || n > oracle_n_cap())
    throw CapExceeded("build_embedding: N outside the brute-force cap");
  return group == GroupId::u1 ? detail::build_embedding_u1(n)
                              : detail::build_embedding_su2(n);
}

// lift a block memory vector into the computational basis (mu = 0 copies)
inline Vector embed_memory(const BlockEmbedding& emb, const BlockVector& bv) {
  const Eigen::Index dn = emb.w.rows();
  if (bv.irreps.size() != emb.blocks.size())
    throw IrrepMismatch("embed_memory: block count mismatch");
  Vector out = Vector::Zero(dn * dn);
  for (std::size_t bi = 0; bi < emb.blocks.size(); ++bi) {
    const auto& b = emb.blocks[bi];
    if (!(bv.irreps[bi] == b.irrep)) throw IrrepMismatch("embed_memory: irrep mismatch");
    const Matrix wj = emb.leading_columns(bi);
    const auto& v = bv.blocks[bi];
    for (Eigen::Index r = 0; r < b.dim; ++r)
      for (Eigen::Index c = 0; c < b.dim; ++c) {
        const Complex amp = v(r * b.dim + c);
        if (amp == Complex(0.0)) continue;
        for (Eigen::Index x = 0; x < dn; ++x)
          for (Eigen::Index y = 0; y < dn; ++y)
            out(x * dn + y) += amp * wj(x, r) * std::conj(wj(y, c));
      }
  }
  return out;
}

//============================================================================
// The measure-and-rotate learning network in the full space
//============================================================================

inline CombSpec learning_comb_spec(long long n) {
  CombSpec spec;
  spec.slots.push_back({{"H0", 1}, {"H1", 2}});
  for (long long k = 1; k <= n; ++k)
    spec.slots.push_back({{"H" + std::to_string(2 * k), 2},
                          {"H" + std::to_string(2 * k + 1), k == n ? 1 : 2}});
  spec.slots.push_back({{"H" + std::to_string(2 * n + 2), 2},
                        {"H" + std::to_string(2 * n + 3), 2}});
  return spec;
}

namespace detail {

struct NetworkParts {
  BlockEmbedding emb;
  Matrix phi;     // DN x DN memory correlation sum_j sqrt(p_j/d_j) Wj Wj^+
  std::vector<Matrix> wj;  // leading columns per block
};

inline NetworkParts network_parts(const LearningProblem& p, const StorageSpec& spec) {
  validate_problem(p);
  validate_storage(spec);
  if (p.M != 1) throw CapExceeded("oracle network: restricted to M = 1");
  if (!p.example_reps.empty())
    throw CapExceeded("oracle network: custom example reps not embeddable");
  NetworkParts parts;
  parts.emb = build_embedding(p.group, p.N);
  if (spec.irreps.size() != parts.emb.blocks.size())
    throw IrrepMismatch("oracle network: storage irreps do not match the embedding");
  const Eigen::Index dn = parts.emb.w.rows();
  parts.phi = Matrix::Zero(dn, dn);
  for (std::size_t bi = 0; bi < parts.emb.blocks.size(); ++bi) {
    const auto& b = parts.emb.blocks[bi];
    if (!(spec.irreps[bi] == b.irrep))
      throw IrrepMismatch("oracle network: storage irreps do not match the embedding");
    parts.wj.push_back(parts.emb.leading_columns(bi));
    const double amp = std::sqrt(spec.p(static_cast<Eigen::Index>(bi)) /
                                 static_cast<double>(b.dim));
    parts.phi += amp * parts.wj.back() * parts.wj.back().adjoint();
  }
  return parts;
}

inline Matrix eta_matrix(const NetworkParts& parts, const GroupElement& g) {
  const Eigen::Index dn = parts.emb.w.rows();
  Matrix eta = Matrix::Zero(dn, dn);
  for (std::size_t bi = 0; bi < parts.emb.blocks.size(); ++bi) {
    const auto& b = parts.emb.blocks[bi];
    const Matrix d = irrep_matrix_raw(b.irrep, g);
    eta += std::sqrt(static_cast<double>(b.dim)) * parts.wj[bi] * d * parts.wj[bi].adjoint();
  }
  return eta;
}

inline std::vector<SystemLabel> network_labels(long long n) {
  std::vector<SystemLabel> labels;
  labels.push_back({"H" + std::to_string(2 * n + 3), 2});
  labels.push_back({"H" + std::to_string(2 * n + 2), 2});
  for (long long k = 0; k < n; ++k) labels.push_back({"H" + std::to_string(2 * k + 1), 2});
  for (long long k = 0; k < n; ++k) labels.push_back({"H" + std::to_string(2 * k + 2), 2});
  labels.push_back({"H0", 1});
  labels.push_back({"H" + std::to_string(2 * n + 1), 1});
  return labels;
}

}  // namespace detail

inline ChoiOperator full_learning_choi(const LearningProblem& p, const StorageSpec& spec,
                                       int degree = 0) {
  const auto parts = detail::network_parts(p, spec);
  const int min_degree = static_cast<int>(2 * p.N + 2);
  if (degree <= 0) degree = min_degree;
  if (degree < min_degree)
    throw DegreeTooLow("full_learning_choi: POVM quadrature degree below the network bandwidth");
  const Eigen::Index dn = parts.emb.w.rows();
  const Eigen::Index dtot = 4 * dn * dn;
  Matrix l = Matrix::Zero(dtot, dtot);
  Matrix pv = Matrix::Zero(dn * dn, dn * dn);
  for (const auto& [g, w] : quadrature(p.group, degree)) {
    const Matrix u = g.defining();
    Vector uu(4);
    for (Eigen::Index r = 0; r < 2; ++r)
      for (Eigen::Index c = 0; c < 2; ++c) uu(r * 2 + c) = u(r, c);
    const Matrix vmat = parts.phi * detail::eta_matrix(parts, g).adjoint();
    Vector v(dn * dn);
    for (Eigen::Index r = 0; r < dn; ++r)
      for (Eigen::Index c = 0; c < dn; ++c) v(r * dn + c) = vmat(r, c);
    const Matrix vv = v * v.adjoint();
    l += w * detail::kron(Matrix(uu * uu.adjoint()), vv);
    pv += w * vv;
  }
  // completion: feed the unmeasured remainder of the memory marginal into a
  // depolarizing re-preparation so the board stays covariant and normalized
  const Matrix rho_oe = detail::kron(Matrix(parts.phi * parts.phi.adjoint()),
                                     Matrix(Matrix::Identity(dn, dn)));
  l += detail::kron(Matrix(Matrix::Identity(4, 4) / 2.0), Matrix(rho_oe - pv));

  auto labels = detail::network_labels(p.N);
  std::vector<std::string> ins, outs;
  for (const auto& s : learning_comb_spec(p.N).slots) {
    ins.push_back(s.in.id);
    outs.push_back(s.out.id);
  }
  return ChoiOperator(LabeledOperator(std::move(labels), std::move(l)), std::move(ins),
                      std::move(outs), 1e-8);
}

inline double full_fidelity(const LearningProblem& p, const StorageSpec& spec, int degree = 0) {
  if (degree <= 0) degree = static_cast<int>(2 * p.N + 2);
  const ChoiOperator choi = full_learning_choi(p, spec, degree);
  const Eigen::Index dn = static_cast<Eigen::Index>(1) << p.N;
  double f = 0.0;
  for (const auto& [g, w] : quadrature(p.group, degree + 2)) {
    const Matrix u = g.defining();
    Vector uu(4);
    for (Eigen::Index r = 0; r < 2; ++r)
      for (Eigen::Index c = 0; c < 2; ++c) uu(r * 2 + c) = u(r, c);
    const Matrix bn = detail::kron_power(u.adjoint(), p.N);
    Vector s(4 * dn * dn);
    for (Eigen::Index i = 0; i < 4; ++i)
      for (Eigen::Index r = 0; r < dn; ++r)
        for (Eigen::Index c = 0; c < dn; ++c)
          s(i * dn * dn + r * dn + c) = uu(i) * bn(r, c);
    f += w * std::real(s.dot(choi.op().matrix() * s));
  }
  return f / 4.0;
}

// max-norm commutator of the network with U (x) V* (x) V^{(x)N} (x) (U*)^{(x)N}
inline double covariance_residual(const ChoiOperator& choi, const GroupElement& u,
                                  const GroupElement& v, long long n) {
  const Matrix um = u.defining(), vm = v.defining();
  Matrix g = detail::kron(um, vm.conjugate());
  g = detail::kron(g, detail::kron_power(vm, n));
  g = detail::kron(g, detail::kron_power(um.conjugate(), n));
  const Matrix& l = choi.op().matrix();
  return (g * l - l * g).cwiseAbs().maxCoeff();
}

}  // namespace unilearn

#endif
