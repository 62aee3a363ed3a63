#pragma once

#include <cstddef>
#include <functional>

namespace lml {

// Runs body(b) for every block b in [0, blocks) using up to `workers`
// threads. Callers fix the block decomposition and reduce per-block results
// in block order, which keeps output independent of the worker count.
void parallel_blocks(std::size_t blocks, unsigned workers,
                     const std::function<void(std::size_t)> &body);

// Default worker count: hardware concurrency, at least 1.
unsigned default_workers();

} // namespace lml
