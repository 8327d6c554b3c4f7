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

#include "portconv/parallel.h"

#include <atomic>

#include "portconv/error.h"

namespace portconv {
namespace {

int host_threads() noexcept {
  unsigned const n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

std::atomic<int> g_threads{host_threads()};

}  // namespace

int num_threads() noexcept { return g_threads.load(); }

void set_num_threads(int threads) {
  if (threads < 0) throw InvalidParamsError("thread count must be >= 0");
  g_threads.store(threads == 0 ? host_threads() : threads);
}

}  // namespace portconv
