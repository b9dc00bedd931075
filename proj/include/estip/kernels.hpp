#pragma once

// Radial interaction kernels Phi(|x - y|): values, gradients, odd primitives
// (for exact integration against piecewise-constant 1D densities), the
// affine modification K~ = aK + b(K(.,0) + K(0,.)) + c, and a Gram-matrix
// positive-definiteness probe.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "estip/error.hpp"
#include "estip/format.hpp"
#include "estip/vec.hpp"

namespace estip {

enum class KernelFamily {
  truncated_power,       // (1 - s)_+^tau
  inverse_multiquadric,  // (eps^2 + s^2)^-beta
  neg_power,             // -s^tau
  neg_multiquadric,      // -(eps^2 + s^2)^tau
  bernoulli_spline,      // (-1)^(m-1) / (2m)! * B_2m(s) on the unit torus
  abs_power,             // s^tau
};

enum class KernelDomain { euclidean, torus_1d };

/// Regularity class of x -> Phi(|x|), used to warn when a solver runs outside
/// the C^1 / Lipschitz-gradient hypotheses of the mean-field theory.
enum class Smoothness { nonsmooth, c1, lipschitz_gradient };

struct KernelParams {
  double tau = 1.0;
  double eps = 1.0;
  double beta = 1.0;
  int m = 1;
  double scale = 1.0;
};

inline std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::truncated_power: return "truncated_power";
    case KernelFamily::inverse_multiquadric: return "inverse_multiquadric";
    case KernelFamily::neg_power: return "neg_power";
    case KernelFamily::neg_multiquadric: return "neg_multiquadric";
    case KernelFamily::bernoulli_spline: return "bernoulli";
    case KernelFamily::abs_power: return "abs_power";
  }
  return "?";
}

inline std::string_view to_string(Smoothness s) {
  switch (s) {
    case Smoothness::nonsmooth: return "nonsmooth";
    case Smoothness::c1: return "C1";
    case Smoothness::lipschitz_gradient: return "lipschitz-gradient";
  }
  return "?";
}

/// Immutable radial kernel. All parameter checks happen in the constructor so
/// the evaluation paths stay branch-light.
class Kernel {
 public:
  Kernel(KernelFamily family, KernelParams params, KernelDomain domain = KernelDomain::euclidean,
         int dimension = 1)
      : family_(family), params_(params), domain_(domain), dimension_(dimension) {
    validate();
    if (domain_ == KernelDomain::torus_1d) half_primitive_ = base_primitive(0.5);
  }

  KernelFamily family() const noexcept { return family_; }
  const KernelParams& params() const noexcept { return params_; }
  KernelDomain domain() const noexcept { return domain_; }
  int dimension() const noexcept { return dimension_; }
  bool periodic() const noexcept { return domain_ == KernelDomain::torus_1d; }

  /// True for s^1 scaled by a positive factor, i.e. Phi' = const * sign. The
  /// transport solver evaluates such kernels through prefix sums.
  bool is_abs_linear() const noexcept {
    return family_ == KernelFamily::abs_power && params_.tau == 1.0 && domain_ == KernelDomain::euclidean;
  }

  Smoothness smoothness() const noexcept {
    const double tau = params_.tau;
    if (domain_ == KernelDomain::torus_1d && family_ != KernelFamily::bernoulli_spline)
      return Smoothness::nonsmooth;  // kink at the antipodal distance 1/2
    switch (family_) {
      case KernelFamily::truncated_power:
        return tau >= 2.0 ? Smoothness::lipschitz_gradient : (tau > 1.0 ? Smoothness::c1 : Smoothness::nonsmooth);
      case KernelFamily::inverse_multiquadric:
      case KernelFamily::neg_multiquadric:
        return Smoothness::lipschitz_gradient;
      case KernelFamily::neg_power:
        return tau > 1.0 ? Smoothness::c1 : Smoothness::nonsmooth;
      case KernelFamily::abs_power:
        if (tau == 2.0) return Smoothness::lipschitz_gradient;
        return tau > 1.0 ? Smoothness::c1 : Smoothness::nonsmooth;
      case KernelFamily::bernoulli_spline:
        return params_.m >= 2 ? Smoothness::lipschitz_gradient : Smoothness::nonsmooth;
    }
    return Smoothness::nonsmooth;
  }

  /// Phi(s) for a distance s >= 0 (periodic distance in [0, 1/2] on the torus).
  double profile(double s) const noexcept { return params_.scale * base_profile(s); }

  /// Phi'(s) for s > 0; the one-sided derivative at s = 0.
  double profile_derivative(double s) const noexcept { return params_.scale * base_derivative(s); }

  /// Signed displacement reduced to the fundamental cell: identity on R^d,
  /// shortest signed displacement in [-1/2, 1/2] on the unit torus.
  double reduce(double d) const noexcept { return periodic() ? d - std::round(d) : d; }

  /// phi(d) = Phi(|d|) for a scalar displacement.
  double eval1(double d) const noexcept { return profile(std::abs(reduce(d))); }

  /// phi'(d) with the convention phi'(0) = 0.
  double grad1(double d) const noexcept {
    const double r = reduce(d);
    if (r == 0.0) return 0.0;
    return r > 0.0 ? profile_derivative(r) : -profile_derivative(-r);
  }

  /// Odd primitive P(d) = int_0^d phi(r) dr, so int_a^b phi(p - x) dx =
  /// P(p - a) - P(p - b). On the torus P(d + 1) = P(d) + P(1).
  double primitive(double d) const {
    if (!periodic()) {
      const double p = params_.scale * base_primitive(std::abs(d));
      return d < 0.0 ? -p : p;
    }
    const double fl = std::floor(d);
    const double t = d - fl;
    const double q = t <= 0.5 ? base_primitive(t) : 2.0 * half_primitive_ - base_primitive(1.0 - t);
    return params_.scale * (fl * 2.0 * half_primitive_ + q);
  }

  /// Integral of phi over one period (torus kernels only).
  double period_integral() const noexcept { return params_.scale * 2.0 * half_primitive_; }

  template <int Dim>
  double eval(const Vec<Dim>& x) const noexcept {
    if constexpr (Dim == 1) {
      return eval1(x[0]);
    } else {
      return profile(norm(x));
    }
  }

  /// grad phi(x) = Phi'(|x|) x / |x|, and 0 at x = 0.
  template <int Dim>
  Vec<Dim> grad(const Vec<Dim>& x) const noexcept {
    if constexpr (Dim == 1) {
      return Vec<1>{grad1(x[0])};
    } else {
      const double r = norm(x);
      if (r == 0.0) return Vec<Dim>{};
      return (profile_derivative(r) / r) * x;
    }
  }

  /// Canonical spec string in the kernel grammar, parseable by parse_kernel.
  std::string spec() const {
    std::string s(to_string(family_));
    s += '(';
    switch (family_) {
      case KernelFamily::truncated_power:
      case KernelFamily::neg_power:
      case KernelFamily::abs_power:
        s += "tau=" + format_double(params_.tau);
        break;
      case KernelFamily::inverse_multiquadric:
        s += "eps=" + format_double(params_.eps) + ",beta=" + format_double(params_.beta);
        break;
      case KernelFamily::neg_multiquadric:
        s += "eps=" + format_double(params_.eps) + ",tau=" + format_double(params_.tau);
        break;
      case KernelFamily::bernoulli_spline:
        s += "m=" + std::to_string(params_.m);
        break;
    }
    if (params_.scale != 1.0) s += ",scale=" + format_double(params_.scale);
    s += ')';
    return s;
  }

 private:
  void validate() const {
    auto fail = [&](const std::string& why) {
      throw ConfigError("kernel " + std::string(to_string(family_)) + ": " + why);
    };
    if (dimension_ < 1) fail("dimension must be positive");
    if (!std::isfinite(params_.scale) || params_.scale == 0.0) fail("scale must be finite and nonzero");
    if (domain_ == KernelDomain::torus_1d && dimension_ != 1) fail("torus kernels are one-dimensional");
    const double tau = params_.tau;
    const double d = dimension_;
    switch (family_) {
      case KernelFamily::truncated_power:
        if (!(tau >= std::floor(d / 2.0) + 1.0)) fail("requires tau >= floor(d/2) + 1");
        break;
      case KernelFamily::inverse_multiquadric:
        if (!(params_.beta > d / 2.0)) fail("requires beta > d/2");
        if (!(params_.eps > 0.0)) fail("requires eps > 0");
        break;
      case KernelFamily::neg_power:
        if (!(tau > 0.0 && tau < 2.0)) fail("requires 0 < tau < 2");
        break;
      case KernelFamily::neg_multiquadric:
        if (!(tau > 0.0 && tau < 1.0)) fail("requires 0 < tau < 1");
        if (!(params_.eps > 0.0)) fail("requires eps > 0");
        break;
      case KernelFamily::abs_power:
        if (!(tau > 0.0) || !std::isfinite(tau)) fail("requires tau > 0");
        break;
      case KernelFamily::bernoulli_spline:
        if (params_.m != 1 && params_.m != 2) fail("requires m in {1, 2}");
        if (domain_ != KernelDomain::torus_1d) fail("Bernoulli splines live on the unit torus");
        break;
    }
  }

  double base_profile(double s) const noexcept {
    const double tau = params_.tau;
    switch (family_) {
      case KernelFamily::truncated_power:
        return s < 1.0 ? std::pow(1.0 - s, tau) : 0.0;
      case KernelFamily::inverse_multiquadric:
        return std::pow(params_.eps * params_.eps + s * s, -params_.beta);
      case KernelFamily::neg_power:
        return -std::pow(s, tau);
      case KernelFamily::neg_multiquadric:
        return -std::pow(params_.eps * params_.eps + s * s, tau);
      case KernelFamily::bernoulli_spline:
        return bernoulli_kernel(params_.m, s);
      case KernelFamily::abs_power:
        return tau == 1.0 ? s : std::pow(s, tau);
    }
    return 0.0;
  }

  double base_derivative(double s) const noexcept {
    const double tau = params_.tau;
    switch (family_) {
      case KernelFamily::truncated_power:
        return s < 1.0 ? -tau * std::pow(1.0 - s, tau - 1.0) : 0.0;
      case KernelFamily::inverse_multiquadric: {
        const double q = params_.eps * params_.eps + s * s;
        return -2.0 * params_.beta * s * std::pow(q, -params_.beta - 1.0);
      }
      case KernelFamily::neg_power:
        return -tau * std::pow(s, tau - 1.0);
      case KernelFamily::neg_multiquadric: {
        const double q = params_.eps * params_.eps + s * s;
        return -2.0 * tau * s * std::pow(q, tau - 1.0);
      }
      case KernelFamily::bernoulli_spline:
        return bernoulli_kernel_derivative(params_.m, s);
      case KernelFamily::abs_power:
        return tau == 1.0 ? 1.0 : tau * std::pow(s, tau - 1.0);
    }
    return 0.0;
  }

  // int_0^s Phi(r) dr without the scale factor, s >= 0.
  double base_primitive(double s) const {
    const double tau = params_.tau;
    const double eps = params_.eps;
    switch (family_) {
      case KernelFamily::truncated_power:
        return (1.0 - std::pow(1.0 - std::min(s, 1.0), tau + 1.0)) / (tau + 1.0);
      case KernelFamily::inverse_multiquadric:
        if (params_.beta == 1.0) return std::atan(s / eps) / eps;
        if (params_.beta == 0.5) return std::asinh(s / eps);
        return numeric_primitive(s);
      case KernelFamily::neg_power:
        return -std::pow(s, tau + 1.0) / (tau + 1.0);
      case KernelFamily::neg_multiquadric:
        if (tau == 0.5) return -0.5 * (s * std::sqrt(eps * eps + s * s) + eps * eps * std::asinh(s / eps));
        return numeric_primitive(s);
      case KernelFamily::bernoulli_spline:
        return bernoulli_kernel_primitive(params_.m, s);
      case KernelFamily::abs_power:
        return std::pow(s, tau + 1.0) / (tau + 1.0);
    }
    return 0.0;
  }

  double numeric_primitive(double s) const {
    if (s == 0.0) return 0.0;
    auto f = [this](double r) { return base_profile(r); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, s, 15, 1e-15);
  }

 public:
  // (-1)^(m-1) / (2m)! * B_2m(t), with B_2(t) = t^2 - t + 1/6 and
  // B_4(t) = t^4 - 2t^3 + t^2 - 1/30.
  static double bernoulli_kernel(int m, double t) noexcept {
    if (m == 1) return 0.5 * (t * t - t + 1.0 / 6.0);
    return -(1.0 / 24.0) * (t * t * t * t - 2.0 * t * t * t + t * t - 1.0 / 30.0);
  }

  static double bernoulli_polynomial(int m, double t) noexcept {
    if (m == 1) return t * t - t + 1.0 / 6.0;
    return t * t * t * t - 2.0 * t * t * t + t * t - 1.0 / 30.0;
  }

 private:
  static double bernoulli_kernel_derivative(int m, double t) noexcept {
    if (m == 1) return 0.5 * (2.0 * t - 1.0);
    return -(1.0 / 24.0) * (4.0 * t * t * t - 6.0 * t * t + 2.0 * t);
  }

  static double bernoulli_kernel_primitive(int m, double t) noexcept {
    if (m == 1) return 0.5 * (t * t * t / 3.0 - t * t / 2.0 + t / 6.0);
    const double t2 = t * t;
    return -(1.0 / 24.0) * (t2 * t2 * t / 5.0 - t2 * t2 / 2.0 + t2 * t / 3.0 - t / 30.0);
  }

  KernelFamily family_;
  KernelParams params_;
  KernelDomain domain_;
  int dimension_;
  double half_primitive_ = 0.0;
};

// ---------------------------------------------------------------------------
// Kernel spec grammar: family(key=value,...)

namespace detail {

struct SpecToken {
  enum class Kind { ident, number, punct, end } kind;
  std::string_view text;
  std::size_t column;  // 1-based
};

class SpecLexer {
 public:
  explicit SpecLexer(std::string_view src) : src_(src) {}

  SpecToken next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) return {SpecToken::Kind::end, {}, start + 1};
    const char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      return {SpecToken::Kind::ident, src_.substr(start, pos_ - start), start + 1};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      ++pos_;
      while (pos_ < src_.size()) {
        const char d = src_[pos_];
        const bool exp_sign = (d == '-' || d == '+') && (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E');
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '.' || exp_sign) {
          ++pos_;
        } else {
          break;
        }
      }
      return {SpecToken::Kind::number, src_.substr(start, pos_ - start), start + 1};
    }
    ++pos_;
    return {SpecToken::Kind::punct, src_.substr(start, 1), start + 1};
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
};

[[noreturn]] inline void spec_error(std::string_view spec, const SpecToken& tok, std::string_view expected) {
  std::string found = tok.kind == SpecToken::Kind::end ? std::string("end of input") : "'" + std::string(tok.text) + "'";
  throw ConfigError("kernel spec \"" + std::string(spec) + "\": unexpected " + found + " at column " +
                    std::to_string(tok.column) + " (expected " + std::string(expected) + ")");
}

}  // namespace detail

/// Parses `family(key=value,...)`, e.g. `abs_power(tau=1.1)`,
/// `inverse_multiquadric(eps=1,beta=2)`, `bernoulli(m=2,scale=-1)`.
/// Bernoulli splines always live on the unit torus.
inline Kernel parse_kernel(std::string_view spec, int dimension = 1,
                           KernelDomain domain = KernelDomain::euclidean) {
  using detail::SpecToken;
  detail::SpecLexer lex(spec);
  const SpecToken name = lex.next();
  if (name.kind != SpecToken::Kind::ident) detail::spec_error(spec, name, "kernel family name");

  static const std::map<std::string_view, KernelFamily> families = {
      {"truncated_power", KernelFamily::truncated_power},
      {"inverse_multiquadric", KernelFamily::inverse_multiquadric},
      {"imq", KernelFamily::inverse_multiquadric},
      {"neg_power", KernelFamily::neg_power},
      {"neg_multiquadric", KernelFamily::neg_multiquadric},
      {"bernoulli", KernelFamily::bernoulli_spline},
      {"bernoulli_spline", KernelFamily::bernoulli_spline},
      {"abs_power", KernelFamily::abs_power},
  };
  const auto fam_it = families.find(name.text);
  if (fam_it == families.end()) detail::spec_error(spec, name, "one of truncated_power, inverse_multiquadric, neg_power, neg_multiquadric, bernoulli, abs_power");
  const KernelFamily family = fam_it->second;

  std::vector<std::string_view> allowed{"scale"};
  std::vector<std::string_view> required;
  switch (family) {
    case KernelFamily::truncated_power:
    case KernelFamily::neg_power:
    case KernelFamily::abs_power:
      allowed.push_back("tau");
      required = {"tau"};
      break;
    case KernelFamily::inverse_multiquadric:
      allowed.insert(allowed.end(), {"eps", "beta"});
      required = {"beta"};
      break;
    case KernelFamily::neg_multiquadric:
      allowed.insert(allowed.end(), {"eps", "tau"});
      required = {"tau"};
      break;
    case KernelFamily::bernoulli_spline:
      allowed.push_back("m");
      required = {"m"};
      break;
  }

  SpecToken tok = lex.next();
  if (tok.kind != SpecToken::Kind::punct || tok.text != "(") detail::spec_error(spec, tok, "'('");

  std::map<std::string_view, double> values;
  tok = lex.next();
  if (!(tok.kind == SpecToken::Kind::punct && tok.text == ")")) {
    for (;;) {
      if (tok.kind != SpecToken::Kind::ident) detail::spec_error(spec, tok, "parameter name");
      if (std::find(allowed.begin(), allowed.end(), tok.text) == allowed.end()) {
        std::string list;
        for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
        detail::spec_error(spec, tok, "a parameter of " + std::string(to_string(family)) + ": " + list);
      }
      if (values.count(tok.text)) detail::spec_error(spec, tok, "each parameter at most once");
      const SpecToken key = tok;
      tok = lex.next();
      if (tok.kind != SpecToken::Kind::punct || tok.text != "=") detail::spec_error(spec, tok, "'='");
      tok = lex.next();
      double v = 0.0;
      if (tok.kind != SpecToken::Kind::number) detail::spec_error(spec, tok, "a number");
      const auto* first = tok.text.data();
      const auto* last = first + tok.text.size();
      if (*first == '+') ++first;
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) detail::spec_error(spec, tok, "a finite number");
      values[key.text] = v;
      tok = lex.next();
      if (tok.kind == SpecToken::Kind::punct && tok.text == ")") break;
      if (tok.kind != SpecToken::Kind::punct || tok.text != ",") detail::spec_error(spec, tok, "',' or ')'");
      tok = lex.next();
    }
  }
  const SpecToken tail = lex.next();
  if (tail.kind != SpecToken::Kind::end) detail::spec_error(spec, tail, "end of input");
  for (auto r : required) {
    if (!values.count(r))
      throw ConfigError("kernel spec \"" + std::string(spec) + "\": missing required parameter '" + std::string(r) + "'");
  }

  KernelParams p;
  if (auto it = values.find("tau"); it != values.end()) p.tau = it->second;
  if (auto it = values.find("eps"); it != values.end()) p.eps = it->second;
  if (auto it = values.find("beta"); it != values.end()) p.beta = it->second;
  if (auto it = values.find("scale"); it != values.end()) p.scale = it->second;
  if (auto it = values.find("m"); it != values.end()) {
    if (it->second != std::floor(it->second))
      throw ConfigError("kernel spec \"" + std::string(spec) + "\": m must be an integer");
    p.m = static_cast<int>(it->second);
  }
  if (family == KernelFamily::bernoulli_spline) domain = KernelDomain::torus_1d;
  return Kernel(family, p, domain, dimension);
}

/// Largest observed slope of Phi' on a sample of [0, range]; a crude stand-in
/// for the Lipschitz constant of grad phi, used only for step-size warnings.
inline double gradient_lipschitz_estimate(const Kernel& k, double range, int samples = 1000) {
  double lip = 0.0;
  const double ds = range / samples;
  double prev = k.profile_derivative(0.5 * ds);
  for (int i = 1; i < samples; ++i) {
    const double cur = k.profile_derivative((i + 0.5) * ds);
    lip = std::max(lip, std::abs(cur - prev) / ds);
    prev = cur;
  }
  return lip;
}

// ---------------------------------------------------------------------------
// Bivariate kernels

template <class K, int Dim>
concept BivariateKernel = requires(const K& k, const Vec<Dim>& x) {
  { k.value(x, x) } -> std::convertible_to<double>;
  { k.grad_first(x, x) } -> std::convertible_to<Vec<Dim>>;
};

/// K(x, y) = phi(x - y).
template <int Dim>
class RadialBivariate {
 public:
  explicit RadialBivariate(Kernel k) : k_(std::move(k)) {}
  double value(const Vec<Dim>& x, const Vec<Dim>& y) const noexcept { return k_.eval<Dim>(x - y); }
  Vec<Dim> grad_first(const Vec<Dim>& x, const Vec<Dim>& y) const noexcept { return k_.grad<Dim>(x - y); }
  const Kernel& base() const noexcept { return k_; }

 private:
  Kernel k_;
};

struct AffineModification {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
};

/// K~(x, y) = a K(x, y) + b (K(x, 0) + K(0, y)) + c with K(x, y) = phi(x - y).
/// No longer radial. Minimizers of the energy are unchanged for a > 0.
template <int Dim>
class AffineModifiedKernel {
 public:
  AffineModifiedKernel(Kernel base, AffineModification mod) : base_(std::move(base)), mod_(mod) {
    if (!(mod_.a > 0.0)) throw ConfigError("affine kernel modification requires a > 0");
  }

  double value(const Vec<Dim>& x, const Vec<Dim>& y) const noexcept {
    return mod_.a * base_.eval<Dim>(x - y) + mod_.b * (base_.eval<Dim>(x) + base_.eval<Dim>(y)) + mod_.c;
  }

  Vec<Dim> grad_first(const Vec<Dim>& x, const Vec<Dim>& y) const noexcept {
    return mod_.a * base_.grad<Dim>(x - y) + mod_.b * base_.grad<Dim>(x);
  }

  const Kernel& base() const noexcept { return base_; }
  const AffineModification& modification() const noexcept { return mod_; }

 private:
  Kernel base_;
  AffineModification mod_;
};

template <int Dim>
AffineModifiedKernel<Dim> affine_modify(Kernel base, AffineModification mod) {
  return AffineModifiedKernel<Dim>(std::move(base), mod);
}

/// phi(x - y) - phi(x) - phi(y) + phi(0): positive semi-definite for the
/// conditionally positive definite families of order 1.
template <int Dim>
AffineModifiedKernel<Dim> cpd_modification(Kernel base) {
  const double phi0 = base.profile(0.0);
  return AffineModifiedKernel<Dim>(std::move(base), AffineModification{1.0, -1.0, phi0});
}

/// Smallest eigenvalue of the Gram matrix (K(x_i, x_j)). A value >= -tol
/// certifies positive semi-definiteness on this sample only.
template <int Dim, class K>
  requires BivariateKernel<K, Dim>
double gram_min_eigenvalue(const K& kernel, std::span<const Vec<Dim>> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n == 0) throw ConfigError("gram_min_eigenvalue: empty point set");
  if (n > 200) throw ConfigError("gram_min_eigenvalue: at most 200 points");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (points[i] == points[j])
        throw ConfigError("gram_min_eigenvalue: points must be pairwise distinct");
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = 0.5 * (kernel.value(points[i], points[j]) + kernel.value(points[j], points[i]));
      gram(i, j) = v;
      gram(j, i) = v;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace estip
