#pragma once

#include <cstddef>
#include <functional>

namespace animesh {

/// Cap the number of worker threads used by parallel_for. 0 restores the
/// default (hardware concurrency). The CLI wires --threads here.
void set_max_workers(unsigned n);
unsigned max_workers();

/// Run fn(i) for i in [0, n). Each index is processed exactly once and may
/// write only to its own output slot, so results are identical for any
/// worker count. Exceptions thrown by fn are rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace animesh
