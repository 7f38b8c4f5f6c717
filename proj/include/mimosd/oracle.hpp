#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mimosd/linalg.hpp"
#include "mimosd/trace.hpp"

namespace mimosd {

/// Partial distance of a fixed suffix straight from the triangular metric:
///   sum_{k=1..L} |y_bar[M-k] - sum_{i=M-k}^{M-1} R(M-k, i) s_i|^2
/// written as a plain double loop with no cached state. suffix[k] is antenna
/// M-1-k. Reference for the incremental evaluator.
double scratch_pd(std::span<const Symbol> suffix, const Eigen::MatrixXcd& R,
                  const Eigen::VectorXcd& y_bar, const Constellation& constellation);

// Per-column ||y* - R_sub v_j||^2 evaluated one successor at a time.
std::vector<double> batch_evaluate_reference(const Eigen::MatrixXcd& R_sub,
                                             const Eigen::VectorXcd& y_star,
                                             const Eigen::MatrixXcd& V);

struct AuditVerdict {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Checks a recorded trace:
///   - each worker's radius readings never increase (one violation per increase)
///   - radius publications from different workers decrease in publication order
///   - pruned nodes had pd >= radius, expanded nodes and leaves pd < radius
///   - every node appears in exactly one terminal event (expand, prune, leaf,
///     cut, pooled), every non-root node's parent was expanded, and every
///     expanded node accounts for all |alphabet|^J' of its children
AuditVerdict verify_trace(const AuditTrace& trace, const PreprocessedProblem& problem);

}  // namespace mimosd
