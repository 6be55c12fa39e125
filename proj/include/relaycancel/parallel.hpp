#pragma once

#include <functional>

namespace relaycancel {

/// Worker count: RELAYCANCEL_THREADS when set to a positive integer,
/// otherwise the hardware concurrency.
int thread_budget();

/// Runs body(i) for i in [0, count) on up to thread_budget() threads.
/// Each index is visited exactly once; callers write to disjoint slots.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace relaycancel
