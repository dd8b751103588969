#pragma once

#include <cstddef>
#include <functional>

namespace tomsc::exp {

/// Runs fn(0..n-1) on up to `workers` threads. Each index runs exactly once;
/// if any call throws, the exception of the lowest failing index is rethrown
/// after all workers finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace tomsc::exp
