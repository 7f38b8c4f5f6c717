#pragma once

#include <cstdint>

#include "mimosd/linalg.hpp"
#include "mimosd/model.hpp"

namespace test_support {

inline mimosd::MimoInstance instance(int m, int n, mimosd::Modulation mod, double snr,
                                     std::uint64_t seed) {
  mimosd::Rng rng(seed);
  return mimosd::generate_instance(m, n, mimosd::make_constellation(mod), snr, rng);
}

inline mimosd::PreprocessedProblem problem(int m, mimosd::Modulation mod, double snr,
                                           std::uint64_t seed,
                                           mimosd::RadiusPolicy radius = mimosd::RadiusPolicy::infinite()) {
  return mimosd::preprocess(instance(m, m, mod, snr, seed), radius);
}

// Two-antenna BPSK tree with dyadic metrics:
//   level 1: |0.75 - s1|^2          -> 3.0625 (s1 = -1), 0.0625 (s1 = +1)
//   level 2 under s1 = +1: + |0.5 - 2 s0|^2 -> 6.3125 (s0 = -1), 2.3125 (s0 = +1)
inline mimosd::PreprocessedProblem tiny_problem(double radius_sq) {
  Eigen::MatrixXcd R(2, 2);
  R << 2.0, 1.0, 0.0, 1.0;
  Eigen::VectorXcd y(2);
  y << 1.5, 0.75;
  return mimosd::make_problem(R, y, mimosd::make_constellation(mimosd::Modulation::BPSK),
                              radius_sq);
}

}  // namespace test_support
