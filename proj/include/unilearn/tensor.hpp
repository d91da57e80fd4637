#ifndef UNILEARN_TENSOR_HPP
#define UNILEARN_TENSOR_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "unilearn/errors.hpp"

namespace unilearn {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

//============================================================================
// Labeled systems: a tensor factor is named by an id and carries a dimension.
// Flattening is row-major with the leftmost label most significant.
//============================================================================

struct SystemLabel {
  std::string id;
  Eigen::Index dim = 0;
};

inline bool operator==(const SystemLabel& a, const SystemLabel& b) {
  return a.id == b.id && a.dim == b.dim;
}

// Total-dimension guard for dense storage.  Read-mostly global; adjust only
// from single-threaded setup code.
inline Eigen::Index& dimension_cap() {
  static Eigen::Index cap = 4096;
  return cap;
}

namespace detail {

inline Eigen::Index checked_total_dim(const std::vector<SystemLabel>& labels) {
  Eigen::Index total = 1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].dim < 1) throw ShapeMismatch("label '" + labels[i].id + "' has dim < 1");
    if (labels[i].id.empty()) throw ShapeMismatch("empty label id");
    for (std::size_t k = i + 1; k < labels.size(); ++k)
      if (labels[i].id == labels[k].id)
        throw DuplicateLabel("duplicate label id '" + labels[i].id + "'");
    if (total > dimension_cap() / labels[i].dim)
      throw CapExceeded("total dimension exceeds cap");
    total *= labels[i].dim;
  }
  return total;
}

// strides for row-major flattening (leftmost most significant)
inline std::vector<Eigen::Index> strides_of(const std::vector<SystemLabel>& labels) {
  std::vector<Eigen::Index> s(labels.size(), 1);
  for (std::size_t i = labels.size(); i-- > 1;) s[i - 1] = s[i] * labels[i].dim;
  return s;
}

inline std::size_t position_of(const std::vector<SystemLabel>& labels, const std::string& id) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i].id == id) return i;
  throw UnknownLabel("unknown label id '" + id + "'");
}

// Enumerates the flat offsets contributed by a subset of label positions: the
// returned vector has one entry per joint index of the subset, holding the sum
// of index*stride over the subset's positions.
inline std::vector<Eigen::Index> subset_offsets(const std::vector<SystemLabel>& labels,
                                                const std::vector<Eigen::Index>& strides,
                                                const std::vector<std::size_t>& positions) {
  Eigen::Index count = 1;
  for (auto p : positions) count *= labels[p].dim;
  std::vector<Eigen::Index> offsets(static_cast<std::size_t>(count), 0);
  Eigen::Index repeat = count;
  for (auto p : positions) {
    const Eigen::Index d = labels[p].dim;
    repeat /= d;
    Eigen::Index idx = 0;
    for (Eigen::Index block = 0; block < count; block += repeat * d)
      for (Eigen::Index v = 0; v < d; ++v)
        for (Eigen::Index r = 0; r < repeat; ++r)
          offsets[static_cast<std::size_t>(idx++)] += v * strides[p];
  }
  return offsets;
}

}  // namespace detail

//============================================================================
// LabeledOperator / LabeledVector
//============================================================================

class LabeledOperator {
 public:
  LabeledOperator() : dim_(1), mat_(Matrix::Zero(1, 1)) {}

  LabeledOperator(std::vector<SystemLabel> labels, Matrix m)
      : labels_(std::move(labels)), dim_(detail::checked_total_dim(labels_)), mat_(std::move(m)) {
    if (mat_.rows() != dim_ || mat_.cols() != dim_)
      throw ShapeMismatch("matrix size does not match label dimensions");
  }

  static LabeledOperator identity(std::vector<SystemLabel> labels) {
    const Eigen::Index d = detail::checked_total_dim(labels);
    return LabeledOperator(std::move(labels), Matrix::Identity(d, d));
  }

  const std::vector<SystemLabel>& labels() const { return labels_; }
  const Matrix& matrix() const { return mat_; }
  Matrix& matrix() { return mat_; }
  Eigen::Index dim() const { return dim_; }

  bool has_label(const std::string& id) const {
    for (const auto& l : labels_)
      if (l.id == id) return true;
    return false;
  }
  const SystemLabel& label(const std::string& id) const {
    return labels_[detail::position_of(labels_, id)];
  }

  Complex trace() const { return mat_.trace(); }
  LabeledOperator adjoint() const { return LabeledOperator(labels_, mat_.adjoint()); }

 private:
  std::vector<SystemLabel> labels_;
  Eigen::Index dim_;
  Matrix mat_;
};

class LabeledVector {
 public:
  LabeledVector() : dim_(1), vec_(Vector::Zero(1)) {}

  LabeledVector(std::vector<SystemLabel> labels, Vector v)
      : labels_(std::move(labels)), dim_(detail::checked_total_dim(labels_)), vec_(std::move(v)) {
    if (vec_.size() != dim_) throw ShapeMismatch("vector size does not match label dimensions");
  }

  const std::vector<SystemLabel>& labels() const { return labels_; }
  const Vector& vector() const { return vec_; }
  Vector& vector() { return vec_; }
  Eigen::Index dim() const { return dim_; }
  double norm() const { return vec_.norm(); }

 private:
  std::vector<SystemLabel> labels_;
  Eigen::Index dim_;
  Vector vec_;
};

//============================================================================
// Elementary operations
//============================================================================

namespace detail {

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline std::vector<SystemLabel> joined(const std::vector<SystemLabel>& a,
                                       const std::vector<SystemLabel>& b) {
  std::vector<SystemLabel> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace detail

inline LabeledOperator tensor(const LabeledOperator& a, const LabeledOperator& b) {
  return LabeledOperator(detail::joined(a.labels(), b.labels()),
                         detail::kron(a.matrix(), b.matrix()));
}

inline LabeledVector tensor(const LabeledVector& a, const LabeledVector& b) {
  return LabeledVector(detail::joined(a.labels(), b.labels()),
                       detail::kron(a.vector(), b.vector()));
}

namespace detail {

// old-flat-index -> new-flat-index map under a label permutation
inline std::vector<Eigen::Index> permutation_map(const std::vector<SystemLabel>& labels,
                                                 const std::vector<std::size_t>& perm) {
  const auto old_strides = strides_of(labels);
  std::vector<SystemLabel> new_labels(labels.size());
  for (std::size_t i = 0; i < perm.size(); ++i) new_labels[i] = labels[perm[i]];
  const auto new_strides = strides_of(new_labels);
  Eigen::Index total = 1;
  for (const auto& l : labels) total *= l.dim;
  std::vector<Eigen::Index> map(static_cast<std::size_t>(total), 0);
  for (Eigen::Index flat = 0; flat < total; ++flat) {
    Eigen::Index rem = flat, to = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const Eigen::Index idx = rem / old_strides[i];
      rem %= old_strides[i];
      // position of old factor i in the new order
      for (std::size_t k = 0; k < perm.size(); ++k)
        if (perm[k] == i) { to += idx * new_strides[k]; break; }
    }
    map[static_cast<std::size_t>(flat)] = to;
  }
  return map;
}

}  // namespace detail

namespace detail {

inline std::vector<std::size_t> reorder_perm(const std::vector<SystemLabel>& labels,
                                             const std::vector<std::string>& order) {
  if (order.size() != labels.size())
    throw InvalidPermutation("reorder: permutation length mismatch");
  std::vector<std::size_t> perm(order.size());
  std::vector<bool> used(order.size(), false);
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::size_t p = labels.size();
    for (std::size_t k = 0; k < labels.size(); ++k)
      if (labels[k].id == order[i]) { p = k; break; }
    if (p == labels.size())
      throw InvalidPermutation("reorder: id '" + order[i] + "' not present");
    if (used[p]) throw InvalidPermutation("reorder: repeated id '" + order[i] + "'");
    used[p] = true;
    perm[i] = p;
  }
  return perm;
}

}  // namespace detail

inline LabeledOperator reorder(const LabeledOperator& a, const std::vector<std::string>& order) {
  const auto perm = detail::reorder_perm(a.labels(), order);
  const auto map = detail::permutation_map(a.labels(), perm);
  std::vector<SystemLabel> new_labels(order.size());
  for (std::size_t i = 0; i < perm.size(); ++i) new_labels[i] = a.labels()[perm[i]];
  Matrix out(a.dim(), a.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i)
    for (Eigen::Index j = 0; j < a.dim(); ++j)
      out(map[static_cast<std::size_t>(i)], map[static_cast<std::size_t>(j)]) = a.matrix()(i, j);
  return LabeledOperator(std::move(new_labels), std::move(out));
}

inline LabeledVector reorder(const LabeledVector& a, const std::vector<std::string>& order) {
  const auto perm = detail::reorder_perm(a.labels(), order);
  const auto map = detail::permutation_map(a.labels(), perm);
  std::vector<SystemLabel> new_labels(order.size());
  for (std::size_t i = 0; i < perm.size(); ++i) new_labels[i] = a.labels()[perm[i]];
  Vector out(a.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i) out(map[static_cast<std::size_t>(i)]) = a.vector()(i);
  return LabeledVector(std::move(new_labels), std::move(out));
}

inline LabeledOperator partial_trace(const LabeledOperator& a, const std::vector<std::string>& ids) {
  std::vector<std::size_t> traced;
  for (const auto& id : ids) traced.push_back(detail::position_of(a.labels(), id));
  std::sort(traced.begin(), traced.end());
  if (std::adjacent_find(traced.begin(), traced.end()) != traced.end())
    throw DuplicateLabel("partial_trace: repeated id");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < a.labels().size(); ++i)
    if (!std::binary_search(traced.begin(), traced.end(), i)) kept.push_back(i);

  const auto strides = detail::strides_of(a.labels());
  const auto kept_off = detail::subset_offsets(a.labels(), strides, kept);
  const auto traced_off = detail::subset_offsets(a.labels(), strides, traced);

  std::vector<SystemLabel> new_labels;
  for (auto p : kept) new_labels.push_back(a.labels()[p]);
  const auto dk = static_cast<Eigen::Index>(kept_off.size());
  Matrix out = Matrix::Zero(dk, dk);
  for (Eigen::Index r = 0; r < dk; ++r)
    for (Eigen::Index c = 0; c < dk; ++c) {
      Complex acc = 0.0;
      for (auto t : traced_off)
        acc += a.matrix()(kept_off[static_cast<std::size_t>(r)] + t,
                          kept_off[static_cast<std::size_t>(c)] + t);
      out(r, c) = acc;
    }
  return LabeledOperator(std::move(new_labels), std::move(out));
}

inline LabeledOperator partial_transpose(const LabeledOperator& a,
                                         const std::vector<std::string>& ids) {
  std::vector<std::size_t> swap_pos;
  for (const auto& id : ids) swap_pos.push_back(detail::position_of(a.labels(), id));
  const auto strides = detail::strides_of(a.labels());
  // split each flat index into its swapped-subset part and the rest
  std::vector<Eigen::Index> spart(static_cast<std::size_t>(a.dim()), 0);
  for (Eigen::Index flat = 0; flat < a.dim(); ++flat) {
    Eigen::Index rem = flat, s = 0;
    for (std::size_t i = 0; i < a.labels().size(); ++i) {
      const Eigen::Index idx = rem / strides[i];
      rem %= strides[i];
      if (std::find(swap_pos.begin(), swap_pos.end(), i) != swap_pos.end()) s += idx * strides[i];
    }
    spart[static_cast<std::size_t>(flat)] = s;
  }
  Matrix out(a.dim(), a.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    const Eigen::Index ri = i - spart[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < a.dim(); ++j) {
      const Eigen::Index rj = j - spart[static_cast<std::size_t>(j)];
      out(ri + spart[static_cast<std::size_t>(j)], rj + spart[static_cast<std::size_t>(i)]) =
          a.matrix()(i, j);
    }
  }
  return LabeledOperator(a.labels(), std::move(out));
}

inline LabeledOperator multiply(const LabeledOperator& a, const LabeledOperator& b) {
  if (a.labels().size() != b.labels().size()) throw ShapeMismatch("multiply: label mismatch");
  for (std::size_t i = 0; i < a.labels().size(); ++i)
    if (!(a.labels()[i] == b.labels()[i])) throw ShapeMismatch("multiply: label mismatch");
  return LabeledOperator(a.labels(), a.matrix() * b.matrix());
}

//============================================================================
// Vectorization |A>> = sum_mn <m|A|n> |m>|n>  (row-major flattening).
// The in-copy labels get primed ids so the doubled label list stays unique.
//============================================================================

inline LabeledVector vectorize(const LabeledOperator& a) {
  std::vector<SystemLabel> labels = a.labels();
  for (const auto& l : a.labels()) labels.push_back({l.id + "'", l.dim});
  Vector v(a.dim() * a.dim());
  for (Eigen::Index m = 0; m < a.dim(); ++m)
    for (Eigen::Index n = 0; n < a.dim(); ++n) v(m * a.dim() + n) = a.matrix()(m, n);
  return LabeledVector(std::move(labels), std::move(v));
}

inline LabeledOperator devectorize(const LabeledVector& v) {
  const std::size_t k = v.labels().size();
  if (k % 2 != 0) throw ShapeMismatch("devectorize: odd number of labels");
  std::vector<SystemLabel> out_labels(v.labels().begin(), v.labels().begin() + k / 2);
  Eigen::Index d = 1;
  for (std::size_t i = 0; i < k / 2; ++i) {
    if (v.labels()[i].dim != v.labels()[i + k / 2].dim)
      throw ShapeMismatch("devectorize: out/in dimension mismatch");
    d *= v.labels()[i].dim;
  }
  Matrix m(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) m(r, c) = v.vector()(r * d + c);
  return LabeledOperator(std::move(out_labels), std::move(m));
}

//============================================================================
// Inner products and contractions
//============================================================================

inline Complex inner(const LabeledVector& a, const LabeledVector& b) {
  if (a.labels().size() != b.labels().size()) throw ShapeMismatch("inner: label mismatch");
  for (std::size_t i = 0; i < a.labels().size(); ++i)
    if (!(a.labels()[i] == b.labels()[i])) throw ShapeMismatch("inner: label mismatch");
  return a.vector().dot(b.vector());  // Eigen dot conjugates the left argument
}

inline LabeledOperator outer(const LabeledVector& a, const LabeledVector& b) {
  if (a.labels().size() != b.labels().size()) throw ShapeMismatch("outer: label mismatch");
  return LabeledOperator(a.labels(), a.vector() * b.vector().adjoint());
}

inline LabeledOperator outer(const LabeledVector& a) { return outer(a, a); }

// <small| big : contracts the labels of `small` (a subset of big's labels),
// conjugating `small`.  Result keeps big's remaining labels in order.
inline LabeledVector partial_inner(const LabeledVector& small, const LabeledVector& big) {
  std::vector<std::size_t> cpos;  // contracted positions inside big
  for (const auto& l : small.labels()) {
    const auto p = detail::position_of(big.labels(), l.id);
    if (big.labels()[p].dim != l.dim) throw ShapeMismatch("partial_inner: dim mismatch");
    cpos.push_back(p);
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < big.labels().size(); ++i)
    if (std::find(cpos.begin(), cpos.end(), i) == cpos.end()) kept.push_back(i);

  const auto strides = detail::strides_of(big.labels());
  const auto kept_off = detail::subset_offsets(big.labels(), strides, kept);
  // contracted offsets enumerated in small's own label order so that the joint
  // index matches small's flattening
  const auto con_off = detail::subset_offsets(big.labels(), strides, cpos);

  std::vector<SystemLabel> new_labels;
  for (auto p : kept) new_labels.push_back(big.labels()[p]);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(kept_off.size()));
  for (std::size_t s = 0; s < con_off.size(); ++s) {
    const Complex w = std::conj(small.vector()(static_cast<Eigen::Index>(s)));
    if (w == Complex(0.0)) continue;
    for (std::size_t r = 0; r < kept_off.size(); ++r)
      out(static_cast<Eigen::Index>(r)) += w * big.vector()(kept_off[r] + con_off[s]);
  }
  return LabeledVector(std::move(new_labels), std::move(out));
}

//============================================================================
// Hermitian eigendecomposition (ascending eigenvalues)
//============================================================================

struct EigResult {
  Eigen::VectorXd values;
  Matrix vectors;
};

inline EigResult hermitian_eig(const LabeledOperator& a, double tol = 1e-10) {
  if ((a.matrix() - a.matrix().adjoint()).cwiseAbs().maxCoeff() > tol)
    throw NotHermitian("hermitian_eig: matrix is not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix());
  return {es.eigenvalues(), es.eigenvectors()};
}

inline double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0,
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace unilearn

#endif
