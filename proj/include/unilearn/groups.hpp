#ifndef UNILEARN_GROUPS_HPP
#define UNILEARN_GROUPS_HPP

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "unilearn/rng.hpp"
#include "unilearn/tensor.hpp"

namespace unilearn {

enum class GroupId { u1, su2 };

inline const char* group_name(GroupId g) { return g == GroupId::u1 ? "u1" : "su2"; }

constexpr double kPi = 3.14159265358979323846;

//============================================================================
// Irrep labels: u1 weights, su2 doubled spins
//============================================================================

struct IrrepLabel {
  GroupId group = GroupId::u1;
  long long value = 0;  // u1: weight w; su2: twoJ
};

inline IrrepLabel irrep_u1(long long w) { return {GroupId::u1, w}; }
inline IrrepLabel irrep_su2(long long twoJ) {
  if (twoJ < 0) throw IrrepMismatch("su2 irrep needs twoJ >= 0");
  return {GroupId::su2, twoJ};
}

inline bool operator==(const IrrepLabel& a, const IrrepLabel& b) {
  return a.group == b.group && a.value == b.value;
}
inline bool operator!=(const IrrepLabel& a, const IrrepLabel& b) { return !(a == b); }
inline bool operator<(const IrrepLabel& a, const IrrepLabel& b) {
  if (a.group != b.group) return a.group < b.group;
  return a.value < b.value;
}

inline Eigen::Index irrep_dim(const IrrepLabel& a) {
  return a.group == GroupId::su2 ? static_cast<Eigen::Index>(a.value) + 1 : 1;
}

inline IrrepLabel conjugate(const IrrepLabel& a) {
  return a.group == GroupId::u1 ? irrep_u1(-a.value) : a;
}

inline std::string irrep_name(const IrrepLabel& a) {
  return (a.group == GroupId::u1 ? "w=" : "twoJ=") + std::to_string(a.value);
}

//============================================================================
// Decompositions into irreps with multiplicities (exact integers)
//============================================================================

struct RepBlock {
  IrrepLabel irrep;
  Eigen::Index dim = 1;
  long long mult = 1;
};

namespace detail {

inline long long checked_add(long long a, long long b) {
  long long r;
  if (__builtin_add_overflow(a, b, &r)) throw MultiplicityOverflow("multiplicity overflow");
  return r;
}

inline long long checked_mul(long long a, long long b) {
  long long r;
  if (__builtin_mul_overflow(a, b, &r)) throw MultiplicityOverflow("multiplicity overflow");
  return r;
}

}  // namespace detail

struct Decomposition {
  GroupId group = GroupId::u1;
  std::vector<RepBlock> blocks;  // ascending irrep value, labels distinct

  long long total_dim() const {
    long long t = 0;
    for (const auto& b : blocks)
      t = detail::checked_add(t, detail::checked_mul(static_cast<long long>(b.dim), b.mult));
    return t;
  }
};

namespace detail {

inline Decomposition from_mult_map(GroupId g, const std::map<long long, long long>& m) {
  Decomposition d{g, {}};
  for (const auto& [v, cnt] : m) {
    IrrepLabel lab{g, v};
    d.blocks.push_back({lab, irrep_dim(lab), cnt});
  }
  return d;
}

}  // namespace detail

inline Decomposition base_rep(GroupId g) {
  if (g == GroupId::u1)
    return {g, {{irrep_u1(-1), 1, 1}, {irrep_u1(1), 1, 1}}};
  return {g, {{irrep_su2(1), 2, 1}}};
}

inline Decomposition fuse(const IrrepLabel& a, const IrrepLabel& b) {
  if (a.group != b.group) throw GroupMismatch("fuse: labels from different groups");
  if (a.group == GroupId::u1)
    return {a.group, {{irrep_u1(a.value + b.value), 1, 1}}};
  Decomposition d{a.group, {}};
  for (long long t = std::llabs(a.value - b.value); t <= a.value + b.value; t += 2)
    d.blocks.push_back({irrep_su2(t), t + 1, 1});
  return d;
}

namespace detail {

inline Decomposition fuse_decompositions(const Decomposition& a, const Decomposition& b) {
  if (a.group != b.group) throw GroupMismatch("tensor_power: mixed groups");
  std::map<long long, long long> acc;
  for (const auto& ba : a.blocks)
    for (const auto& bb : b.blocks) {
      const long long m = checked_mul(ba.mult, bb.mult);
      for (const auto& out : fuse(ba.irrep, bb.irrep).blocks)
        acc[out.irrep.value] = checked_add(acc.count(out.irrep.value) ? acc[out.irrep.value] : 0,
                                           checked_mul(m, out.mult));
    }
  return from_mult_map(a.group, acc);
}

// irrep support of an iterated fusion, multiplicities ignored (no overflow)
inline std::vector<IrrepLabel> support_power(GroupId g, const std::vector<Decomposition>& reps) {
  if (reps.empty()) throw GroupMismatch("support_power: empty rep list");
  std::set<long long> cur;
  for (const auto& b : reps[0].blocks) cur.insert(b.irrep.value);
  if (reps[0].group != g) throw GroupMismatch("support_power: mixed groups");
  for (std::size_t i = 1; i < reps.size(); ++i) {
    if (reps[i].group != g) throw GroupMismatch("support_power: mixed groups");
    std::set<long long> next;
    for (long long v : cur)
      for (const auto& b : reps[i].blocks)
        for (const auto& out : fuse(IrrepLabel{g, v}, b.irrep).blocks)
          next.insert(out.irrep.value);
    cur.swap(next);
  }
  std::vector<IrrepLabel> out;
  for (long long v : cur) out.push_back({g, v});
  return out;
}

}  // namespace detail

inline Decomposition tensor_power(GroupId g, const std::vector<Decomposition>& reps) {
  if (reps.empty()) throw GroupMismatch("tensor_power: empty rep list");
  if (reps[0].group != g) throw GroupMismatch("tensor_power: mixed groups");
  Decomposition acc = reps[0];
  for (std::size_t i = 1; i < reps.size(); ++i) acc = detail::fuse_decompositions(acc, reps[i]);
  return acc;
}

inline Decomposition tensor_power(GroupId g, const Decomposition& rep, long long n) {
  return tensor_power(g, std::vector<Decomposition>(static_cast<std::size_t>(n), rep));
}

inline Decomposition conjugate(const Decomposition& d) {
  Decomposition out{d.group, {}};
  for (const auto& b : d.blocks) out.blocks.push_back({conjugate(b.irrep), b.dim, b.mult});
  std::sort(out.blocks.begin(), out.blocks.end(),
            [](const RepBlock& x, const RepBlock& y) { return x.irrep < y.irrep; });
  return out;
}

//============================================================================
// Group elements: u1 angles, su2 unit quaternions q=(w,x,y,z),
//   U(q) = w I - i (x sx + y sy + z sz)
//============================================================================

namespace detail {

inline double mod_2pi(double t) {
  t = std::fmod(t, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  if (t >= 2.0 * kPi) t = 0.0;
  return t;
}

}  // namespace detail

class GroupElement {
 public:
  static GroupElement u1(double theta) {
    GroupElement g;
    g.group_ = GroupId::u1;
    g.theta_ = detail::mod_2pi(theta);
    return g;
  }

  static GroupElement su2(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (n < 1e-150) throw NotUnitary("su2 element: zero quaternion");
    GroupElement g;
    g.group_ = GroupId::su2;
    g.q_ << w / n, x / n, y / n, z / n;
    return g;
  }

  static GroupElement identity(GroupId id) {
    return id == GroupId::u1 ? u1(0.0) : su2(1.0, 0.0, 0.0, 0.0);
  }

  GroupId group() const { return group_; }

  double angle() const {
    if (group_ != GroupId::u1) throw GroupMismatch("angle: not a u1 element");
    return theta_;
  }

  const Eigen::Vector4d& quat() const {
    if (group_ != GroupId::su2) throw GroupMismatch("quat: not an su2 element");
    return q_;
  }

  Matrix defining() const {
    Matrix u(2, 2);
    if (group_ == GroupId::u1) {
      u << std::polar(1.0, theta_), 0.0, 0.0, std::polar(1.0, -theta_);
    } else {
      const Complex i(0.0, 1.0);
      u << q_(0) - i * q_(3), -i * q_(1) - q_(2), -i * q_(1) + q_(2), q_(0) + i * q_(3);
    }
    return u;
  }

  GroupElement inverse() const {
    if (group_ == GroupId::u1) return u1(-theta_);
    return su2(q_(0), -q_(1), -q_(2), -q_(3));
  }

  GroupElement operator*(const GroupElement& o) const {
    if (group_ != o.group_) throw GroupMismatch("compose: mixed groups");
    if (group_ == GroupId::u1) return u1(theta_ + o.theta_);
    const auto& a = q_;
    const auto& b = o.q_;
    return su2(a(0) * b(0) - a(1) * b(1) - a(2) * b(2) - a(3) * b(3),
               a(0) * b(1) + a(1) * b(0) + a(2) * b(3) - a(3) * b(2),
               a(0) * b(2) - a(1) * b(3) + a(2) * b(0) + a(3) * b(1),
               a(0) * b(3) + a(1) * b(2) - a(2) * b(1) + a(3) * b(0));
  }

  // su2 rotation angle phi in [0, 2pi]: q = (cos(phi/2), sin(phi/2) axis)
  double rotation_angle() const {
    if (group_ != GroupId::su2) throw GroupMismatch("rotation_angle: not an su2 element");
    return 2.0 * std::atan2(q_.tail<3>().norm(), q_(0));
  }

  Eigen::Vector3d axis() const {
    if (group_ != GroupId::su2) throw GroupMismatch("axis: not an su2 element");
    const double n = q_.tail<3>().norm();
    if (n < 1e-300) return {0.0, 0.0, 1.0};
    return q_.tail<3>() / n;
  }

 private:
  GroupId group_ = GroupId::u1;
  double theta_ = 0.0;
  Eigen::Vector4d q_{1.0, 0.0, 0.0, 0.0};
};

//============================================================================
// Wigner matrices, basis m = +j..-j (row/col k = j - m)
//============================================================================

namespace detail {

// coupling isometry block C^{d_in} (x) C^2 -> C^{d_out} for j (x) 1/2,
// twoJout = twoJ +/- 1; columns indexed k_in*2 + s (s: 0 -> m=+1/2, 1 -> -1/2)
inline Eigen::MatrixXd cg_couple_half(long long twoJ, long long twoJout) {
  if (twoJout != twoJ + 1 && (twoJ == 0 || twoJout != twoJ - 1))
    throw IrrepMismatch("cg_couple_half: invalid coupling");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(twoJout + 1, 2 * (twoJ + 1));
  for (long long kout = 0; kout <= twoJout; ++kout) {
    const long long twoM = twoJout - 2 * kout;
    for (int s = 0; s < 2; ++s) {
      const long long twos = 1 - 2 * s;
      const long long twom = twoM - twos;
      if (std::llabs(twom) > twoJ) continue;
      const long long kin = (twoJ - twom) / 2;
      const double den = 2.0 * static_cast<double>(twoJ + 1);
      double coeff;
      if (twoJout == twoJ + 1)
        coeff = std::sqrt(static_cast<double>(twoJ + twos * twoM + 1) / den);
      else
        coeff = -static_cast<double>(twos) *
                std::sqrt(static_cast<double>(twoJ - twos * twoM + 1) / den);
      c(kout, kin * 2 + s) = coeff;
    }
  }
  return c;
}

// primary route: iterated Clebsch-Gordan coupling from the defining rep
inline Matrix wigner(long long twoJ, const GroupElement& g) {
  if (twoJ == 0) return Matrix::Identity(1, 1);
  Matrix d = g.defining();
  const Matrix d1 = d;
  for (long long t = 1; t < twoJ; ++t) {
    const Matrix c = cg_couple_half(t, t + 1).cast<Complex>();
    d = c * kron(d, d1) * c.adjoint();
  }
  return d;
}

// cross-check route: exponentiate the angular momentum generators
inline Matrix wigner_spectral(long long twoJ, const GroupElement& g) {
  const Eigen::Index n = static_cast<Eigen::Index>(twoJ) + 1;
  Matrix jz = Matrix::Zero(n, n), jp = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) jz(k, k) = static_cast<double>(twoJ - 2 * k) / 2.0;
  for (Eigen::Index k = 1; k < n; ++k)
    jp(k - 1, k) = std::sqrt(static_cast<double>(k) * static_cast<double>(twoJ - k + 1));
  const Complex i(0.0, 1.0);
  const Matrix jx = (jp + jp.adjoint()) / 2.0;
  const Matrix jy = (jp - jp.adjoint()) / (2.0 * i);
  const Eigen::Vector3d ax = g.axis();
  const double phi = g.rotation_angle();
  const Matrix h = ax(0) * jx + ax(1) * jy + ax(2) * jz;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector phase(n);
  for (Eigen::Index k = 0; k < n; ++k) phase(k) = std::exp(-i * phi * es.eigenvalues()(k));
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix irrep_matrix_raw(const IrrepLabel& a, const GroupElement& g) {
  if (a.group != g.group()) throw GroupMismatch("irrep_matrix: label/element group mismatch");
  if (a.group == GroupId::u1) {
    Matrix m(1, 1);
    m(0, 0) = std::polar(1.0, static_cast<double>(a.value) * g.angle());
    return m;
  }
  return wigner(a.value, g);
}

}  // namespace detail

inline LabeledOperator irrep_matrix(const IrrepLabel& a, const GroupElement& g) {
  return LabeledOperator({{"rep", irrep_dim(a)}}, detail::irrep_matrix_raw(a, g));
}

inline Complex char_value(const IrrepLabel& a, const GroupElement& g) {
  if (a.group != g.group()) throw GroupMismatch("char_value: label/element group mismatch");
  if (a.group == GroupId::u1)
    return std::polar(1.0, static_cast<double>(a.value) * g.angle());
  const double half = g.rotation_angle() / 2.0;
  double acc = 0.0;
  for (long long t = -a.value; t <= a.value; t += 2) acc += std::cos(static_cast<double>(t) * half);
  return acc;
}

inline GroupElement haar_sample(GroupId g, RngStream& rng) {
  if (g == GroupId::u1) return GroupElement::u1(2.0 * kPi * rng.uniform());
  const auto q = rng.unit_quaternion();
  return GroupElement::su2(q[0], q[1], q[2], q[3]);
}

//============================================================================
// Group quadrature: exact Haar integration of irrep matrix elements up to
// the requested degree (u1 weight / su2 twoJ bound)
//============================================================================

namespace detail {

inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  x.resize(n);
  w.resize(n);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()(k);
    w[k] = 2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
}

inline GroupElement euler_zyz(double alpha, double beta, double gamma) {
  const GroupElement za = GroupElement::su2(std::cos(alpha / 2), 0, 0, std::sin(alpha / 2));
  const GroupElement yb = GroupElement::su2(std::cos(beta / 2), 0, std::sin(beta / 2), 0);
  const GroupElement zg = GroupElement::su2(std::cos(gamma / 2), 0, 0, std::sin(gamma / 2));
  return za * yb * zg;
}

}  // namespace detail

inline std::vector<std::pair<GroupElement, double>> quadrature(GroupId g, int degree) {
  if (degree < 1) degree = 1;
  std::vector<std::pair<GroupElement, double>> nodes;
  if (g == GroupId::u1) {
    const int n = 2 * degree + 1;
    nodes.reserve(n);
    for (int k = 0; k < n; ++k)
      nodes.emplace_back(GroupElement::u1(2.0 * kPi * k / n), 1.0 / n);
    return nodes;
  }
  const int nag = degree + 2;            // uniform alpha, gamma on [0, 4pi)
  const int nb = (degree + 1) / 2 + 1;   // Gauss-Legendre in u = cos(beta)
  std::vector<double> bx, bw;
  detail::gauss_legendre(nb, bx, bw);
  nodes.reserve(static_cast<std::size_t>(nag) * nag * nb);
  for (int ia = 0; ia < nag; ++ia) {
    const double alpha = 4.0 * kPi * ia / nag;
    for (int ib = 0; ib < nb; ++ib) {
      const double beta = std::acos(bx[ib]);
      const double wb = bw[ib] / 2.0;
      for (int ig = 0; ig < nag; ++ig) {
        const double gamma = 4.0 * kPi * ig / nag;
        nodes.emplace_back(detail::euler_zyz(alpha, beta, gamma),
                           wb / (static_cast<double>(nag) * nag));
      }
    }
  }
  return nodes;
}

}  // namespace unilearn

#endif
