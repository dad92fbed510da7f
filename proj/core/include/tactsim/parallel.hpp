#pragma once

#include <functional>

namespace tactsim {

/// Number of worker threads the pipeline will use: TACTSIM_THREADS when set to
/// a positive integer, otherwise std::thread::hardware_concurrency(), never
/// less than 1.
int worker_count();

/// Runs fn(row) for every row in [begin, end), splitting the range into one
/// contiguous chunk per worker. Each element is processed exactly once with
/// the same per-element arithmetic regardless of the worker count, so results
/// are bit-identical for any TACTSIM_THREADS value. With a single worker the
/// loop runs inline on the calling thread.
void parallel_for_rows(int begin, int end, const std::function<void(int)>& fn);

}  // namespace tactsim
