#ifndef UNILEARN_COMB_HPP
#define UNILEARN_COMB_HPP

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "unilearn/tensor.hpp"

namespace unilearn {

//============================================================================
// Choi-Jamiolkowski operators with an input/output label partition
//============================================================================

class ChoiOperator {
 public:
  ChoiOperator() = default;

  ChoiOperator(LabeledOperator op, std::vector<std::string> inputs,
               std::vector<std::string> outputs, double tol = 1e-10)
      : op_(std::move(op)), inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
    for (const auto& id : inputs_)
      if (std::find(outputs_.begin(), outputs_.end(), id) != outputs_.end())
        throw LabelClash("choi: id '" + id + "' marked both input and output");
    if (inputs_.size() + outputs_.size() != op_.labels().size())
      throw ShapeMismatch("choi: io partition does not cover all labels");
    for (const auto& id : inputs_) (void)op_.label(id);
    for (const auto& id : outputs_) (void)op_.label(id);
    const double lo = min_eigenvalue(op_.matrix());
    if (lo < -tol) throw NotPositive("choi: smallest eigenvalue " + std::to_string(lo));
  }

  const LabeledOperator& op() const { return op_; }
  const std::vector<std::string>& inputs() const { return inputs_; }
  const std::vector<std::string>& outputs() const { return outputs_; }

  bool is_input(const std::string& id) const {
    return std::find(inputs_.begin(), inputs_.end(), id) != inputs_.end();
  }
  bool is_output(const std::string& id) const {
    return std::find(outputs_.begin(), outputs_.end(), id) != outputs_.end();
  }

  Eigen::Index input_dim() const {
    Eigen::Index d = 1;
    for (const auto& id : inputs_) d *= op_.label(id).dim;
    return d;
  }

 private:
  LabeledOperator op_;
  std::vector<std::string> inputs_, outputs_;
};

inline ChoiOperator choi_of_unitary(const Matrix& u, std::vector<SystemLabel> out_labels,
                                    std::vector<SystemLabel> in_labels) {
  const Eigen::Index d = u.rows();
  if (u.cols() != d) throw ShapeMismatch("choi_of_unitary: non-square matrix");
  if ((u * u.adjoint() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
    throw NotUnitary("choi_of_unitary: input is not unitary");
  std::vector<SystemLabel> labels = std::move(out_labels);
  std::vector<std::string> outs, ins;
  for (const auto& l : labels) outs.push_back(l.id);
  for (const auto& l : in_labels) ins.push_back(l.id);
  labels.insert(labels.end(), in_labels.begin(), in_labels.end());
  Vector v(d * d);
  for (Eigen::Index m = 0; m < d; ++m)
    for (Eigen::Index n = 0; n < d; ++n) v(m * d + n) = u(m, n);
  LabeledVector uu(std::move(labels), std::move(v));
  return ChoiOperator(outer(uu), std::move(ins), std::move(outs));
}

// default: output labels are U's own, inputs get primed ids
inline ChoiOperator choi_of_unitary(const LabeledOperator& u) {
  std::vector<SystemLabel> ins;
  for (const auto& l : u.labels()) ins.push_back({l.id + "'", l.dim});
  return choi_of_unitary(u.matrix(), u.labels(), std::move(ins));
}

//============================================================================
// Link product  D * C = Tr_K[(D x I)(I x C^{T_K})]
//============================================================================

namespace detail {

inline LabeledOperator lift(const LabeledOperator& a, const std::vector<SystemLabel>& extra) {
  if (extra.empty()) return a;
  return tensor(a, LabeledOperator::identity(extra));
}

}  // namespace detail

inline ChoiOperator link(const ChoiOperator& c, const ChoiOperator& d, double tol = 1e-10) {
  std::vector<std::string> shared;
  for (const auto& l : c.op().labels()) {
    if (!d.op().has_label(l.id)) continue;
    if (d.op().label(l.id).dim != l.dim)
      throw ShapeMismatch("link: dimension mismatch on '" + l.id + "'");
    const bool ok = (c.is_input(l.id) && d.is_output(l.id)) ||
                    (c.is_output(l.id) && d.is_input(l.id));
    if (!ok) throw LabelClash("link: id '" + l.id + "' repeats without io pairing");
    shared.push_back(l.id);
  }
  std::vector<SystemLabel> only_c, only_d;
  for (const auto& l : c.op().labels())
    if (std::find(shared.begin(), shared.end(), l.id) == shared.end()) only_c.push_back(l);
  for (const auto& l : d.op().labels())
    if (std::find(shared.begin(), shared.end(), l.id) == shared.end()) only_d.push_back(l);

  LabeledOperator cl = detail::lift(c.op(), only_d);
  LabeledOperator dl = detail::lift(d.op(), only_c);
  std::vector<std::string> order;
  for (const auto& l : cl.labels()) order.push_back(l.id);
  dl = reorder(dl, order);
  LabeledOperator prod =
      multiply(dl, shared.empty() ? cl : partial_transpose(cl, shared));
  LabeledOperator out = shared.empty() ? prod : partial_trace(prod, shared);

  std::vector<std::string> ins, outs;
  auto keep = [&shared](const std::vector<std::string>& ids, std::vector<std::string>& dst) {
    for (const auto& id : ids)
      if (std::find(shared.begin(), shared.end(), id) == shared.end()) dst.push_back(id);
  };
  keep(c.inputs(), ins);
  keep(d.inputs(), ins);
  keep(c.outputs(), outs);
  keep(d.outputs(), outs);
  return ChoiOperator(std::move(out), std::move(ins), std::move(outs), tol);
}

//============================================================================
// Channel application and structural checks
//============================================================================

inline LabeledOperator apply_channel(const ChoiOperator& c, const LabeledOperator& rho) {
  for (const auto& l : rho.labels())
    if (!c.is_input(l.id) || c.op().label(l.id).dim != l.dim)
      throw ShapeMismatch("apply_channel: state labels must match channel inputs");
  if (rho.labels().size() != c.inputs().size())
    throw ShapeMismatch("apply_channel: state labels must cover all channel inputs");
  if (std::abs(rho.trace() - Complex(1.0)) > 1e-8)
    throw ShapeMismatch("apply_channel: state trace is not 1");

  LabeledOperator rt(rho.labels(), rho.matrix().transpose());
  std::vector<SystemLabel> out_labels;
  for (const auto& id : c.outputs()) out_labels.push_back(c.op().label(id));
  LabeledOperator lifted = detail::lift(rt, out_labels);
  std::vector<std::string> order;
  for (const auto& l : c.op().labels()) order.push_back(l.id);
  lifted = reorder(lifted, order);
  return partial_trace(multiply(c.op(), lifted), c.inputs());
}

inline bool is_channel(const ChoiOperator& c, double tol = 1e-10) {
  if (min_eigenvalue(c.op().matrix()) < -tol) return false;
  LabeledOperator marg = c.outputs().empty() ? c.op() : partial_trace(c.op(), c.outputs());
  const Eigen::Index d = marg.dim();
  return (marg.matrix() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= tol;
}

//============================================================================
// Comb normalization: teeth (in_k, out_k), recursion
//   Tr_{out_k}[L^(k)] = I_{in_k} (x) L^(k-1),   L^(-1) = 1
//============================================================================

struct CombSlot {
  SystemLabel in, out;
};

struct CombSpec {
  std::vector<CombSlot> slots;
};

struct CombReport {
  bool ok = true;
  int level = -2;            // first violated level; -1 flags the positivity check
  double residual = 0.0;     // witness residual at that level
  double max_residual = 0.0; // worst residual over all levels checked
};

inline CombReport is_comb(const ChoiOperator& l, const CombSpec& spec, double tol = 1e-10) {
  std::vector<SystemLabel> expect;
  for (const auto& s : spec.slots) {
    expect.push_back(s.in);
    expect.push_back(s.out);
  }
  if (expect.size() != l.op().labels().size())
    throw ShapeMismatch("is_comb: slot labels do not match operator labels");
  for (const auto& e : expect)
    if (!l.op().has_label(e.id) || l.op().label(e.id).dim != e.dim)
      throw ShapeMismatch("is_comb: slot label '" + e.id + "' missing or wrong dim");

  CombReport rep;
  const double lo = min_eigenvalue(l.op().matrix());
  if (lo < -tol) {
    rep.ok = false;
    rep.level = -1;
    rep.residual = -lo;
    rep.max_residual = -lo;
    return rep;
  }

  LabeledOperator cur = l.op();
  for (std::size_t k = spec.slots.size(); k-- > 0;) {
    const auto& slot = spec.slots[k];
    LabeledOperator t = partial_trace(cur, {slot.out.id});
    LabeledOperator prev = partial_trace(t, {slot.in.id});
    prev.matrix() /= static_cast<double>(slot.in.dim);
    LabeledOperator model = tensor(LabeledOperator::identity({slot.in}), prev);
    std::vector<std::string> order;
    for (const auto& lab : t.labels()) order.push_back(lab.id);
    model = reorder(model, order);
    double res = (t.matrix() - model.matrix()).cwiseAbs().maxCoeff();
    if (k == 0) {
      // the recursion bottoms out at the scalar L^(-1) = 1
      res = std::max(res, std::abs(prev.matrix()(0, 0) - 1.0));
    }
    rep.max_residual = std::max(rep.max_residual, res);
    if (res > tol && rep.ok) {
      rep.ok = false;
      rep.level = static_cast<int>(k);
      rep.residual = res;
    }
    cur = std::move(prev);
  }
  return rep;
}

}  // namespace unilearn

#endif
