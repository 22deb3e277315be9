#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace oscamp {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Values mirror the C API error codes in oscamp.h.
enum class Status : int {
  ok = 0,
  invalid_argument = 1,
  parse_error = 2,
  not_hyperbolic = 3,
  glancing = 4,
  not_wr = 5,
  small_divisor = 6,
  ambiguous_mode = 7,
  cfl_violation = 8,
  blow_up = 9,
  newton_failure = 10,
  io_error = 11,
  history_gap = 12,
  internal = 13,
};

class Error : public std::runtime_error {
 public:
  Error(Status s, const std::string& msg) : std::runtime_error(msg), status_(s) {}
  Status status() const { return status_; }

 private:
  Status status_;
};

[[noreturn]] inline void fail(Status s, const std::string& msg) { throw Error(s, msg); }

inline constexpr double pi = 3.141592653589793238462643383279502884;

}  // namespace oscamp
