#pragma once

#include <functional>

namespace serw {

/// Caps the number of worker threads used by parallel loops
/// (GW restarts, per-frame curve distances). 1 disables threading.
void set_max_threads(int n);
int max_threads();

/// Runs body(i) for i in [0, count). Each index writes only its own
/// output slot, so results are deterministic regardless of the cap.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace serw
