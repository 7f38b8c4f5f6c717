#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "mimosd/model.hpp"

namespace mimosd {

/// H = Q R with Q (N x N) unitary and R (N x M) upper triangular whose first M
/// diagonal entries are real and nonnegative.
struct QrFactors {
  Eigen::MatrixXcd Q;
  Eigen::MatrixXcd R;
};

// Householder QR with sign-canonicalized diagonal. Throws RankDeficientError
// when |r_kk| < 1e-12 * max|h_ij| for some k < M, DimensionError when M > N.
QrFactors qr_decompose(const Eigen::MatrixXcd& H);

struct RadiusPolicy {
  enum class Kind { Formula, Infinite, Explicit };
  Kind kind = Kind::Formula;
  double value = 0.0;  // squared radius, Explicit only

  static RadiusPolicy formula() { return {Kind::Formula, 0.0}; }
  static RadiusPolicy infinite() { return {Kind::Infinite, 0.0}; }
  static RadiusPolicy explicit_sq(double radius_sq) { return {Kind::Explicit, radius_sq}; }
};

/// The triangular search problem min ||y_bar - R s||^2 handed to every tree decoder.
///
/// For any s, ||y - H s||^2 = ||y_bar - R s||^2 + residual, where residual is the
/// energy of the bottom N - M entries of Q^H y.
struct PreprocessedProblem {
  int n_tx = 0;
  Eigen::MatrixXcd R;       // M x M, upper triangular
  Eigen::VectorXcd y_bar;   // M
  double radius_sq = std::numeric_limits<double>::infinity();
  double residual = 0.0;
  Constellation constellation;

  std::size_t omega() const { return constellation.size(); }
  double metric(const SymbolVector& s) const;  // ||y_bar - R s||^2
};

PreprocessedProblem preprocess(const MimoInstance& instance, const RadiusPolicy& policy);

// Builds a problem directly from R and y_bar (tests, hand-made trees).
PreprocessedProblem make_problem(const Eigen::MatrixXcd& R, const Eigen::VectorXcd& y_bar,
                                 const Constellation& constellation, double radius_sq);

/// Batch successor evaluation as matrix algebra: B = Y* - R_sub V, returns the
/// squared norm of every column of B. R_sub is |v| x |v|, y_star has |v| entries
/// and V is |v| x K. Throws ShapeError on mismatch.
std::vector<double> batch_evaluate(const Eigen::MatrixXcd& R_sub, const Eigen::VectorXcd& y_star,
                                   const Eigen::MatrixXcd& V);

// Same result, columns split across OpenMP threads.
std::vector<double> batch_evaluate_omp(const Eigen::MatrixXcd& R_sub,
                                       const Eigen::VectorXcd& y_star,
                                       const Eigen::MatrixXcd& V, int n_threads);

}  // namespace mimosd
