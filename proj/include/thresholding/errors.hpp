#ifndef THRESHOLDING_ERRORS_HPP_
#define THRESHOLDING_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace thresholding {

/// Adaptive quadrature ran out of its panel budget before meeting tolerance.
class QuadratureFailure : public std::runtime_error {
 public:
  QuadratureFailure(const std::string &what, double error_estimate)
      : std::runtime_error(what), error_estimate_(error_estimate) {}

  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

/// The requested limit regime is outside every case the limit theorems cover.
class RegimeNotCovered : public std::domain_error {
 public:
  explicit RegimeNotCovered(const std::string &what)
      : std::domain_error("regime not covered: " + what) {}
};

/// A limit was requested without a regime parameter it depends on.
class MissingRegimeField : public std::invalid_argument {
 public:
  explicit MissingRegimeField(const std::string &field)
      : std::invalid_argument("missing regime parameter: " + field),
        field_(field) {}

  const std::string &field() const noexcept { return field_; }

 private:
  std::string field_;
};

class SingularDesign : public std::runtime_error {
 public:
  explicit SingularDesign(const std::string &what)
      : std::runtime_error("singular design: " + what) {}
};

/// Coordinate descent did not reach its tolerance; carries the last iterate
/// and its largest coordinate change.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string &what, double last_change,
                 std::vector<double> last_iterate = {})
      : std::runtime_error(what),
        last_change_(last_change),
        last_iterate_(std::move(last_iterate)) {}

  double last_change() const noexcept { return last_change_; }
  const std::vector<double> &last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_change_;
  std::vector<double> last_iterate_;
};

}  // namespace thresholding

#endif  // THRESHOLDING_ERRORS_HPP_
