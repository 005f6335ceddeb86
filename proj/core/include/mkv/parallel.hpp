#pragma once

#include <cstddef>
#include <functional>

namespace mkv {

// Resolves a requested worker count; 0 means hardware concurrency.
unsigned resolve_threads(unsigned requested);

// Runs body(i) for i in [0, n) on up to `threads` workers using a static
// contiguous partition. The first exception (lowest index block) is rethrown
// after all workers have joined.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

// Pairwise summation; result depends only on the order of `values`.
double pairwise_sum(const double* values, std::size_t n);

}  // namespace mkv
