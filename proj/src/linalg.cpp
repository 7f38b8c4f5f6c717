#include "mimosd/linalg.hpp"

#include <cmath>
#include <string>

#include <omp.h>

#include "mimosd/errors.hpp"

namespace mimosd {

QrFactors qr_decompose(const Eigen::MatrixXcd& H) {
  const auto n_rx = H.rows();
  const auto n_tx = H.cols();
  if (n_tx < 1 || n_tx > n_rx) {
    throw DimensionError("qr_decompose needs 1 <= M <= N, got " + std::to_string(n_rx) + "x" +
                         std::to_string(n_tx));
  }
  const double scale = H.cwiseAbs().maxCoeff();

  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(H);
  QrFactors f;
  f.Q = qr.householderQ();
  f.R = qr.matrixQR().triangularView<Eigen::Upper>();

  // Rotate each diagonal entry onto the nonnegative real axis: R(k,:) *= conj(phase),
  // Q(:,k) *= phase keeps Q R unchanged.
  for (Eigen::Index k = 0; k < n_tx; ++k) {
    const double mag = std::abs(f.R(k, k));
    if (!(mag >= 1e-12 * scale) || scale == 0.0) {
      throw RankDeficientError("channel matrix is rank deficient at column " + std::to_string(k));
    }
    const cd phase = f.R(k, k) / mag;
    f.R.row(k) *= std::conj(phase);
    f.Q.col(k) *= phase;
    f.R(k, k) = cd(mag, 0.0);
  }
  return f;
}

double PreprocessedProblem::metric(const SymbolVector& s) const {
  Eigen::VectorXcd x(n_tx);
  for (int i = 0; i < n_tx; ++i) x(i) = constellation.points[s[i]];
  return (y_bar - R * x).squaredNorm();
}

PreprocessedProblem preprocess(const MimoInstance& instance, const RadiusPolicy& policy) {
  const QrFactors f = qr_decompose(instance.H);
  const int m = instance.n_tx;
  const Eigen::VectorXcd rotated = f.Q.adjoint() * instance.y;

  PreprocessedProblem p;
  p.n_tx = m;
  p.R = f.R.topRows(m);
  p.y_bar = rotated.head(m);
  p.residual = rotated.tail(instance.n_rx - m).squaredNorm();
  p.constellation = instance.constellation;
  switch (policy.kind) {
    case RadiusPolicy::Kind::Formula:
      p.radius_sq = initial_radius_sq(m, instance.n_rx, instance.snr_db);
      // noise-free: a zero radius would exclude the exact solution
      if (p.radius_sq == 0.0) p.radius_sq = std::numeric_limits<double>::infinity();
      break;
    case RadiusPolicy::Kind::Infinite:
      p.radius_sq = std::numeric_limits<double>::infinity();
      break;
    case RadiusPolicy::Kind::Explicit:
      p.radius_sq = policy.value;
      break;
  }
  return p;
}

PreprocessedProblem make_problem(const Eigen::MatrixXcd& R, const Eigen::VectorXcd& y_bar,
                                 const Constellation& constellation, double radius_sq) {
  if (R.rows() != R.cols() || R.rows() != y_bar.size() || R.rows() < 1) {
    throw ShapeError("make_problem needs a square R matching y_bar");
  }
  PreprocessedProblem p;
  p.n_tx = static_cast<int>(R.rows());
  p.R = R;
  p.y_bar = y_bar;
  p.radius_sq = radius_sq;
  p.constellation = constellation;
  return p;
}

namespace {

void check_batch_shapes(const Eigen::MatrixXcd& R_sub, const Eigen::VectorXcd& y_star,
                        const Eigen::MatrixXcd& V) {
  if (R_sub.rows() != R_sub.cols() || R_sub.rows() != y_star.size() ||
      V.rows() != y_star.size()) {
    throw ShapeError("batch_evaluate: R_sub " + std::to_string(R_sub.rows()) + "x" +
                     std::to_string(R_sub.cols()) + ", y* " + std::to_string(y_star.size()) +
                     ", V " + std::to_string(V.rows()) + "x" + std::to_string(V.cols()));
  }
}

}  // namespace

std::vector<double> batch_evaluate(const Eigen::MatrixXcd& R_sub, const Eigen::VectorXcd& y_star,
                                   const Eigen::MatrixXcd& V) {
  check_batch_shapes(R_sub, y_star, V);
  Eigen::MatrixXcd B = -(R_sub.triangularView<Eigen::Upper>() * V);
  B.colwise() += y_star;
  std::vector<double> out(static_cast<std::size_t>(V.cols()));
  Eigen::Map<Eigen::RowVectorXd>(out.data(), V.cols()) = B.colwise().squaredNorm();
  return out;
}

std::vector<double> batch_evaluate_omp(const Eigen::MatrixXcd& R_sub,
                                       const Eigen::VectorXcd& y_star,
                                       const Eigen::MatrixXcd& V, int n_threads) {
  check_batch_shapes(R_sub, y_star, V);
  const auto rows = V.rows();
  const auto cols = V.cols();
  std::vector<double> out(static_cast<std::size_t>(cols));
#pragma omp parallel for num_threads(n_threads) schedule(static)
  for (Eigen::Index j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      cd b = y_star(i);
      for (Eigen::Index k = i; k < rows; ++k) b -= R_sub(i, k) * V(k, j);
      acc += std::norm(b);
    }
    out[static_cast<std::size_t>(j)] = acc;
  }
  return out;
}

}  // namespace mimosd
