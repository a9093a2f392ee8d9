#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hslab {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Strict accretivity fails: min_x lambda_min(Re A(x)) <= floor.
class NotAccretive : public Error {
 public:
  NotAccretive(double value, int location);
  double value() const { return value_; }
  int location() const { return location_; }

 private:
  double value_;
  int location_;
};

// Spectrum touches (or numerically approaches) the imaginary axis.
class NoGap : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class IllPosed : public Error {
 public:
  using Error::Error;
};

// Relative Frobenius distance ||a - b|| / max(||b||, tiny).
double relative_error(const Mat& a, const Mat& b);
double relative_error(const Vec& a, const Vec& b);

// FNV-1a over raw bytes; used for cache keys and report config hashes.
std::uint64_t fnv1a(const void* data, std::size_t bytes,
                    std::uint64_t seed = 1469598103934665603ULL);
std::string hex64(std::uint64_t value);

}  // namespace hslab
