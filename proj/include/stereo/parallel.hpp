#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "stereo/core.hpp"

namespace stereo {

/// Half-open row interval [begin, end).
struct RowRange {
    int begin = 0;
    int end = 0;

    int size() const noexcept { return end - begin; }
    bool empty() const noexcept { return end <= begin; }
    friend constexpr bool operator==(RowRange, RowRange) = default;
};

/// Split [0, height) into `workers` contiguous stripes whose sizes differ by at
/// most one; the first `height % workers` stripes get the extra row.
inline std::vector<RowRange> stripe_plan(int height, int workers) {
    if (workers < 1) throw ContractViolation("stripe_plan: workers must be >= 1");
    if (height < 0) throw ContractViolation("stripe_plan: negative height");
    std::vector<RowRange> plan;
    plan.reserve(static_cast<std::size_t>(workers));
    const int base = height / workers;
    const int extra = height % workers;
    int row = 0;
    for (int w = 0; w < workers; ++w) {
        const int n = base + (w < extra ? 1 : 0);
        plan.push_back({row, row + n});
        row += n;
    }
    return plan;
}

/// Run `fn(RowRange)` for each non-empty stripe of [0, count) on its own
/// thread and join before returning. The join is the synchronization point
/// between pipeline stages. The first exception thrown by a stripe is rethrown.
template <typename Fn>
void for_each_stripe(int count, int workers, Fn&& fn) {
    const auto plan = stripe_plan(count, std::max(1, workers));
    std::vector<RowRange> work;
    for (auto r : plan)
        if (!r.empty()) work.push_back(r);
    if (work.empty()) return;
    if (work.size() == 1) {
        fn(work.front());
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto guarded = [&](RowRange r) {
        try {
            fn(r);
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };

    {
        std::vector<std::jthread> threads;
        threads.reserve(work.size() - 1);
        for (std::size_t i = 1; i < work.size(); ++i) threads.emplace_back(guarded, work[i]);
        guarded(work.front());
    }
    if (failure) std::rethrow_exception(failure);
}

} // namespace stereo
