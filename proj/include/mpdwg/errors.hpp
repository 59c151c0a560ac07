#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mpdwg {

/// A coefficient or load sample that cannot enter a quadrature sum
/// (non-finite, non-symmetric, or taken on a discontinuity or singular point).
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear solve failure. Carries whatever residual history was available.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> residuals = {})
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

}  // namespace mpdwg
