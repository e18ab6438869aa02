#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rfr/errors.hpp"

namespace rfr {

/// Scalar activation function with a weak derivative. Built-in kinds cover
/// everything the asymptotic theory and the synthesizers produce; `tabulated`
/// wraps caller-supplied callbacks (the caller must supply the derivative,
/// no numerical differentiation is attempted).
class ActivationSpec {
 public:
  enum class Kind { Linear, Relu, ShiftedRelu, Tanh, Quadratic, SaturatedLinear, Tabulated };

  static ActivationSpec linear(double slope, double intercept) {
    ActivationSpec a(Kind::Linear);
    a.p_ = {slope, intercept};
    return a;
  }
  static ActivationSpec relu() { return ActivationSpec(Kind::Relu); }
  static ActivationSpec shifted_relu(double shift) {
    ActivationSpec a(Kind::ShiftedRelu);
    a.p_ = {shift};
    return a;
  }
  static ActivationSpec tanh_af() { return ActivationSpec(Kind::Tanh); }
  static ActivationSpec quadratic(double a2, double a1, double a0) {
    ActivationSpec a(Kind::Quadratic);
    a.p_ = {a2, a1, a0};
    return a;
  }
  /// sigma(x) = mu0_offset + b * clamp(x, -s, s), s >= 0. The slope b may be
  /// negative (the L1 synthesizer needs that branch for zeta^2 < 2/(pi-2)).
  static ActivationSpec saturated_linear(double mu0_offset, double b, double s) {
    if (s < 0.0) throw InvalidMoments("saturated-linear requires s >= 0");
    ActivationSpec a(Kind::SaturatedLinear);
    a.p_ = {mu0_offset, b, s};
    return a;
  }
  static ActivationSpec tabulated(std::function<double(double)> value,
                                  std::function<double(double)> derivative,
                                  std::string label = "tabulated") {
    ActivationSpec a(Kind::Tabulated);
    a.value_fn_ = std::move(value);
    a.deriv_fn_ = std::move(derivative);
    a.label_ = std::move(label);
    return a;
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& params() const { return p_; }

  double value(double x) const {
    switch (kind_) {
      case Kind::Linear: return p_[0] * x + p_[1];
      case Kind::Relu: return x > 0.0 ? x : 0.0;
      case Kind::ShiftedRelu: return x > p_[0] ? x - p_[0] : 0.0;
      case Kind::Tanh: return std::tanh(x);
      case Kind::Quadratic: return (p_[0] * x + p_[1]) * x + p_[2];
      case Kind::SaturatedLinear: {
        const double c = x < -p_[2] ? -p_[2] : (x > p_[2] ? p_[2] : x);
        return p_[0] + p_[1] * c;
      }
      case Kind::Tabulated: return value_fn_(x);
    }
    return 0.0;
  }

  /// Weak derivative; at kinks (a measure-zero set) the flat-side value is used.
  double weak_derivative(double x) const {
    switch (kind_) {
      case Kind::Linear: return p_[0];
      case Kind::Relu: return x > 0.0 ? 1.0 : 0.0;
      case Kind::ShiftedRelu: return x > p_[0] ? 1.0 : 0.0;
      case Kind::Tanh: {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      }
      case Kind::Quadratic: return 2.0 * p_[0] * x + p_[1];
      case Kind::SaturatedLinear: return std::fabs(x) < p_[2] ? p_[1] : 0.0;
      case Kind::Tabulated: return deriv_fn_(x);
    }
    return 0.0;
  }

  /// Abscissae where the derivative jumps; the quadrature splits panels there.
  std::vector<double> kinks() const {
    switch (kind_) {
      case Kind::Relu: return {0.0};
      case Kind::ShiftedRelu: return {p_[0]};
      case Kind::SaturatedLinear: return {-p_[2], p_[2]};
      default: return {};
    }
  }

  std::string name() const {
    std::ostringstream os;
    switch (kind_) {
      case Kind::Linear: os << "linear:" << p_[0] << "," << p_[1]; break;
      case Kind::Relu: os << "relu"; break;
      case Kind::ShiftedRelu: os << "shifted-relu:" << p_[0]; break;
      case Kind::Tanh: os << "tanh"; break;
      case Kind::Quadratic: os << "quadratic:" << p_[0] << "," << p_[1] << "," << p_[2]; break;
      case Kind::SaturatedLinear: os << "satlin:" << p_[0] << "," << p_[1] << "," << p_[2]; break;
      case Kind::Tabulated: os << label_; break;
    }
    return os.str();
  }

  /// Parses the CLI forms: relu | tanh | linear:a,b | quadratic:a,b,c |
  /// satlin:mu0,b,s | shifted-relu:shift
  static ActivationSpec parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    std::vector<double> args;
    if (colon != std::string::npos) {
      std::stringstream ss(text.substr(colon + 1));
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          args.push_back(std::stod(tok));
        } catch (const std::exception&) {
          throw ParseError("bad numeric argument in activation '" + text + "'");
        }
      }
    }
    auto want = [&](size_t n) {
      if (args.size() != n)
        throw ParseError("activation '" + head + "' expects " + std::to_string(n) +
                         " parameter(s), got " + std::to_string(args.size()));
    };
    if (head == "relu") { want(0); return relu(); }
    if (head == "tanh") { want(0); return tanh_af(); }
    if (head == "linear") { want(2); return linear(args[0], args[1]); }
    if (head == "quadratic") { want(3); return quadratic(args[0], args[1], args[2]); }
    if (head == "satlin") { want(3); return saturated_linear(args[0], args[1], args[2]); }
    if (head == "shifted-relu") { want(1); return shifted_relu(args[0]); }
    throw ParseError("unknown activation kind '" + head + "'");
  }

 private:
  explicit ActivationSpec(Kind k) : kind_(k) {}

  Kind kind_;
  std::vector<double> p_;
  std::function<double(double)> value_fn_;
  std::function<double(double)> deriv_fn_;
  std::string label_;
};

}  // namespace rfr
