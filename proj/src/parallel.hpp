#pragma once

#include "impact/core.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace impact::detail {

// Runs body(i) for i in [begin, end) on up to `threads` workers. Each index is
// processed by exactly one worker, so results do not depend on the count.
template <class Body>
void parallel_for(Index begin, Index end, int threads, Body body) {
  const Index total = end - begin;
  const Index workers = std::clamp<Index>(threads, 1, std::max<Index>(total, 1));
  if (workers <= 1) {
    for (Index i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([=, &body] {
      for (Index i = begin + w; i < end; i += workers) body(i);
    });
  }
}

}  // namespace impact::detail
