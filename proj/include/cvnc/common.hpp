#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace cvnc {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

// Vacuum quadrature variance in the [x,p]=i convention.
inline constexpr double kVacuumVariance = 0.5;

inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kDefaultTruncationBudget = 1e-10;

// Numerical-budget failure: the requested Fock cutoff cannot hold the state
// within the truncation budget. Carries a usable cutoff suggestion.
class truncation_error : public std::runtime_error {
 public:
  truncation_error(const std::string& what, double tail_mass, int suggested_cutoff)
      : std::runtime_error(what), tail_mass(tail_mass), suggested_cutoff(suggested_cutoff) {}
  double tail_mass;
  int suggested_cutoff;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace cvnc
