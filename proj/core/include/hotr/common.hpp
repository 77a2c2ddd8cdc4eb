#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hotr {

using Complex = std::complex<double>;

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<double>;
using CSpMat = Eigen::SparseMatrix<Complex>;
using Triplet = Eigen::Triplet<double>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied something outside an operation's precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (singular factorization, divergence, ...).
class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// Iterative solve stopped without meeting its tolerance.
class ConvergenceError : public SolverFailure {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : SolverFailure(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

inline constexpr double kPi = 3.14159265358979323846;

inline double hz_to_rad(double hz) { return 2.0 * kPi * hz; }
inline double rad_to_hz(double omega) { return omega / (2.0 * kPi); }

/// 64-bit FNV-1a; used for cache keys and config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string to_hex(std::uint64_t value);

bool is_power_of_two(int n);

/// Relative Frobenius distance ||a - b|| / max(||b||, tiny).
double relative_difference(const CVec& a, const CVec& b);
double relative_difference(const Vec& a, const Vec& b);

}  // namespace hotr
