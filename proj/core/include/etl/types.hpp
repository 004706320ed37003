#pragma once

#include <Eigen/Core>

#include <bit>
#include <cstdint>

namespace etl {

/// State, input and noise vectors. The shipped instance is scalar.
using Vec = Eigen::VectorXd;

/// Bitwise equality; distinguishes -0.0 from 0.0 and treats identical NaN
/// payloads as equal. Used for the sender/receiver mirror checks.
inline bool bit_equal(double a, double b) noexcept {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

template <typename A, typename B>
bool bit_equal(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) noexcept {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      if (!bit_equal(a(r, c), b(r, c))) return false;
    }
  }
  return true;
}

inline Vec scalar(double v) {
  Vec out(1);
  out[0] = v;
  return out;
}

}  // namespace etl
