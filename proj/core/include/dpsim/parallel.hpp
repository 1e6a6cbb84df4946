// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace dpsim {

/// Worker count: DPSIM_THREADS when set and positive, otherwise the
/// hardware concurrency.
unsigned worker_count();

/// Runs fn(i) for i in [0, n). Each index must write only its own output
/// slot; results therefore never depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dpsim
