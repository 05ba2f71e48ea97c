#ifndef THRESHOLDING_EXT_REAL_HPP_
#define THRESHOLDING_EXT_REAL_HPP_

#include <cctype>
#include <cmath>
#include <compare>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace thresholding {

/// A point of the extended real line: a finite double, -inf or +inf.
///
/// IEEE infinities already give total ordering and negation; the wrapper
/// exists to keep NaN out, so every comparison stays meaningful.
class ExtReal {
 public:
  constexpr ExtReal(double v = 0.0) : v_(v) {  // NOLINT: implicit by intent
    if (v != v) throw std::invalid_argument("ExtReal: NaN is not a point");
  }

  static constexpr ExtReal pos_inf() {
    return ExtReal(std::numeric_limits<double>::infinity());
  }
  static constexpr ExtReal neg_inf() {
    return ExtReal(-std::numeric_limits<double>::infinity());
  }

  constexpr double value() const { return v_; }
  constexpr bool is_finite() const { return !is_pos_inf() && !is_neg_inf(); }
  constexpr bool is_pos_inf() const {
    return v_ == std::numeric_limits<double>::infinity();
  }
  constexpr bool is_neg_inf() const {
    return v_ == -std::numeric_limits<double>::infinity();
  }
  constexpr bool is_infinite() const { return !is_finite(); }

  /// -1, 0 or +1.
  constexpr int sign() const { return (v_ > 0.0) - (v_ < 0.0); }
  constexpr ExtReal abs() const { return ExtReal(v_ < 0.0 ? -v_ : v_); }

  constexpr ExtReal operator-() const { return ExtReal(-v_); }

  friend constexpr bool operator==(ExtReal a, ExtReal b) { return a.v_ == b.v_; }
  friend constexpr std::strong_ordering operator<=>(ExtReal a, ExtReal b) {
    if (a.v_ < b.v_) return std::strong_ordering::less;
    if (a.v_ > b.v_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  /// Accepts decimal numbers and inf, +inf, -inf, infinity (any case).
  static ExtReal parse(std::string_view text) {
    std::string s(text);
    for (auto &c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "inf" || s == "+inf" || s == "infinity" || s == "+infinity")
      return pos_inf();
    if (s == "-inf" || s == "-infinity") return neg_inf();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception &) {
      throw std::invalid_argument("not an extended real: '" + std::string(text) + "'");
    }
    if (used != s.size() || std::isnan(v))
      throw std::invalid_argument("not an extended real: '" + std::string(text) + "'");
    return ExtReal(v);
  }

  std::string to_string() const {
    if (is_pos_inf()) return "inf";
    if (is_neg_inf()) return "-inf";
    return std::to_string(v_);
  }

 private:
  double v_;
};

}  // namespace thresholding

#endif  // THRESHOLDING_EXT_REAL_HPP_
