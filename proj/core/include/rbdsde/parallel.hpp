#pragma once

#include <cstddef>
#include <functional>

namespace rbdsde {

/// Runs body(i) for i in [0, count) on up to `workers` threads (0 means the
/// hardware concurrency). Each index must write only to its own output slot,
/// so results never depend on the number of workers. After a failure the
/// remaining indices are abandoned and the recorded exception with the
/// smallest index is rethrown.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace rbdsde
