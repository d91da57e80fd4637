#ifndef UNILEARN_REPORT_HPP
#define UNILEARN_REPORT_HPP

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace unilearn {

inline constexpr const char* kReportSchemaVersion = "1.0";

inline std::string fmt_e(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

inline std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.16g", v);
  return buf;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

//============================================================================
// Minimal ordered JSON writer; key order is fixed by call order so identical
// inputs serialize byte-identically
//============================================================================

class JsonWriter {
 public:
  JsonWriter& begin_object() {
    prefix();
    out_ << '{';
    stack_.push_back(true);
    return *this;
  }
  JsonWriter& end_object() {
    stack_.pop_back();
    out_ << '}';
    return *this;
  }
  JsonWriter& begin_array() {
    prefix();
    out_ << '[';
    stack_.push_back(true);
    return *this;
  }
  JsonWriter& end_array() {
    stack_.pop_back();
    out_ << ']';
    return *this;
  }
  JsonWriter& key(const std::string& k) {
    prefix();
    out_ << '"' << json_escape(k) << "\":";
    has_key_ = true;
    return *this;
  }
  JsonWriter& value(double v) {
    prefix();
    out_ << fmt_e(v);
    return *this;
  }
  JsonWriter& value(long long v) {
    prefix();
    out_ << v;
    return *this;
  }
  JsonWriter& value(unsigned long long v) {
    prefix();
    out_ << v;
    return *this;
  }
  JsonWriter& value(bool v) {
    prefix();
    out_ << (v ? "true" : "false");
    return *this;
  }
  JsonWriter& value(const std::string& v) {
    prefix();
    out_ << '"' << json_escape(v) << '"';
    return *this;
  }
  JsonWriter& value(const char* v) { return value(std::string(v)); }

  std::string str() const { return out_.str(); }

 private:
  void prefix() {
    if (has_key_) {
      has_key_ = false;
      return;
    }
    if (!stack_.empty()) {
      if (!stack_.back()) out_ << ',';
      stack_.back() = false;
    }
  }

  std::ostringstream out_;
  std::vector<bool> stack_;  // true while the container is still empty
  bool has_key_ = false;
};

//============================================================================
// Scaling fit for 1 - F vs N: plain log-log OLS plus a finite-size corrected
// model  ln(1-F) = a + s ln N + b/N  whose s is the asymptotic exponent
//============================================================================

struct ScalingFit {
  double slope_ols = 0.0;
  double intercept_ols = 0.0;
  double slope_corrected = 0.0;
  double intercept_corrected = 0.0;
  double finite_size_coeff = 0.0;
};

inline ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& n_vs_loss) {
  const auto m = static_cast<Eigen::Index>(n_vs_loss.size());
  Eigen::VectorXd y(m), lx(m), ix(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    lx(i) = std::log(n_vs_loss[static_cast<std::size_t>(i)].first);
    ix(i) = 1.0 / n_vs_loss[static_cast<std::size_t>(i)].first;
    y(i) = std::log(n_vs_loss[static_cast<std::size_t>(i)].second);
  }
  ScalingFit fit;
  {
    Eigen::MatrixXd x(m, 2);
    x.col(0).setOnes();
    x.col(1) = lx;
    const Eigen::VectorXd beta = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    fit.intercept_ols = beta(0);
    fit.slope_ols = beta(1);
  }
  {
    Eigen::MatrixXd x(m, 3);
    x.col(0).setOnes();
    x.col(1) = lx;
    x.col(2) = ix;
    const Eigen::VectorXd beta = (x.transpose() * x).ldlt().solve(x.transpose() * y);
    fit.intercept_corrected = beta(0);
    fit.slope_corrected = beta(1);
    fit.finite_size_coeff = beta(2);
  }
  return fit;
}

}  // namespace unilearn

#endif
