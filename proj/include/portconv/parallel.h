/*
 * Copyright The portconv Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PORTCONV_PARALLEL_H_
#define PORTCONV_PARALLEL_H_

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

#include "portconv/tensor.h"

namespace portconv {

/// Process-wide parallel degree used by the kernels. Defaults to the number
/// of logical cores.
int num_threads() noexcept;
void set_num_threads(int threads);

/// Splits [0, count) into contiguous chunks, one per worker, and runs
/// `body(begin, end)` on each. The partition depends only on `count` and
/// num_threads(), so results are deterministic for a fixed degree.
template <typename Body>
void parallel_for(Index count, Body&& body) {
  if (count <= 0) return;
  auto const workers =
      static_cast<Index>(std::min<Index>(num_threads(), count));
  if (workers <= 1) {
    body(Index{0}, count);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  threads.reserve(static_cast<std::size_t>(workers));
  for (Index t = 0; t < workers; ++t) {
    Index const begin = count * t / workers;
    Index const end = count * (t + 1) / workers;
    threads.emplace_back([&, t, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace portconv

#endif  // PORTCONV_PARALLEL_H_
