// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace pigen::detail {

/// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads with a
/// static interleaved schedule. fn must only write state owned by index i.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t serial_below = 256) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(hw, n);
    if (n < serial_below || workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
}

} // namespace pigen::detail
