#pragma once

#include "mimosd/linalg.hpp"
#include "mimosd/report.hpp"

namespace mimosd {

class TraceRecorder;

/// Breadth-first K-best: every level keeps the K children with the smallest
/// partial distance (ties by generation order) and discards the rest. The
/// radius is ignored, so the work per instance is fixed:
///   visited  = 1 + sum_{l=1}^{M-1} min(K, |alphabet|^l)
///   pd_calcs = |alphabet| * visited
/// Never erases.
DetectionReport kbest_decode(const PreprocessedProblem& problem, int k,
                             TraceRecorder* trace = nullptr);

struct KbestConfig {
  int k = 8;
  double closeness_eps = 0.05;  // also keep up to K nodes within (1 + eps) of the K-th best
  int n_workers = 4;
};

/// Sphere decoding with K-best subtrees. The master runs best-first search
/// until its pool holds 4 nodes per worker. Workers then repeatedly take the
/// best pooled node and run one K-best descent below it, pruning against the
/// shared radius at every level and publishing the leaves they reach. The
/// search stops when the pool is exhausted, so the result is not guaranteed to
/// be maximum likelihood; an erasure is reported when no leaf lies inside the
/// initial sphere.
///
/// per_thread[0] is the master, per_thread[w + 1] worker w.
DetectionReport sd_kbest_decode(const PreprocessedProblem& problem, const KbestConfig& config,
                                TraceRecorder* trace = nullptr);

}  // namespace mimosd
