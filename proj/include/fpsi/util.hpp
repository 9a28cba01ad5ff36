#pragma once
// Shared aliases, error types, and the deterministic RNG used across the library.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace fpsi {

using Vec   = Eigen::VectorXd;
using Mat   = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Trip  = Eigen::Triplet<double>;
using Vec3  = Eigen::Vector3d;
using Mat3  = Eigen::Matrix3d;

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct config_error : error {
  using error::error;
};
struct solver_error : error {
  using error::error;
};

inline double sq(double x) { return x * x; }

/// All randomness in the library flows through explicitly seeded generators;
/// identical seeds reproduce identical runs bit for bit.
inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Vec random_vec(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline double rel(double value, double scale) { return value / (scale > 0 ? scale : 1.0); }

}  // namespace fpsi
