#pragma once

#include <cstddef>
#include <functional>

namespace fnc {

// Every replication-style loop in the library runs either through OpenMP or
// through a plain serial loop. Per-index work writes only to its own slot,
// so the two policies produce bit-identical results; the serial path is the
// reference the tests compare against.
enum class ExecutionPolicy { serial, parallel };

// Worker cap: min(hardware/OpenMP max, FNC_THREADS env var when set).
int worker_count();

// Runs fn(i) for i in [0, n). Exceptions thrown by fn under the parallel
// policy are captured and rethrown once the loop has drained.
void for_each_index(ExecutionPolicy policy, std::size_t n,
                    const std::function<void(std::size_t)>& fn);

}  // namespace fnc
