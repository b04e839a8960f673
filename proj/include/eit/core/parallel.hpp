// SPDX-License-Identifier: Apache-2.0
//
// eit-mimo: electromagnetic channel modelling and capacity analysis toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef EIT_CORE_PARALLEL_HPP
#define EIT_CORE_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace eit
{
    // Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware concurrency).
    // Work is claimed index by index; callers write results into slot i, so the merged
    // output never depends on scheduling. The first exception (lowest index) is rethrown.
    template <typename Body>
    void parallel_for(std::size_t count, Body &&body, unsigned threads = 0)
    {
        if (threads == 0)
            threads = std::max(1u, std::thread::hardware_concurrency());
        threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
        if (threads <= 1)
        {
            for (std::size_t i = 0; i < count; ++i)
                body(i);
            return;
        }

        std::atomic<std::size_t> next{0};
        std::mutex guard;
        std::exception_ptr first_error;
        std::size_t first_index = count;
        auto worker = [&] {
            for (std::size_t i = next++; i < count; i = next++)
            {
                try
                {
                    body(i);
                }
                catch (...)
                {
                    std::lock_guard lock(guard);
                    if (i < first_index)
                    {
                        first_index = i;
                        first_error = std::current_exception();
                    }
                }
            }
        };
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        pool.clear();
        if (first_error)
            std::rethrow_exception(first_error);
    }
}

#endif
