#pragma once

#include <cstdint>
#include <string_view>

#include "mimosd/linalg.hpp"
#include "mimosd/report.hpp"

namespace mimosd {

class TraceRecorder;

/// Parallel-leaf best-first search. Each iteration removes up to
/// n_threads * batch_size admitted nodes from the top of the best-first stack,
/// expands them concurrently against a snapshot of the radius, then merges the
/// results serially in batch order. The merge is deterministic, so the result
/// does not depend on the thread schedule. With one thread and batch size one
/// it reproduces the serial best-first decoder exactly.
///
/// Trace workers: 0 is the merging thread, 1 .. n_threads the expanders.
DetectionReport pl_sd_decode(const PreprocessedProblem& problem, int n_threads, int batch_size,
                             TraceRecorder* trace = nullptr);

enum class Balancing { Static, Dynamic };

std::string_view to_string(Balancing b);
Balancing parse_balancing(std::string_view text);  // static | dynamic

struct PsdConfig {
  int n_workers = 4;
  Balancing balancing = Balancing::Dynamic;
  int group = 1;
};

/// Master/worker sphere decoder. The master expands best-first until its pool
/// holds one node per worker, hands each worker one head node, and keeps
/// feeding idle workers from its pool. Under dynamic balancing an idle master
/// takes the whole pool of the busiest worker and redistributes it. Workers run
/// best-first searches on private pools; the radius is the only shared state.
///
/// per_thread[0] is the master, per_thread[w + 1] worker w. Trace workers use
/// the same numbering.
DetectionReport psd_decode(const PreprocessedProblem& problem, const PsdConfig& config,
                           TraceRecorder* trace = nullptr);

}  // namespace mimosd
