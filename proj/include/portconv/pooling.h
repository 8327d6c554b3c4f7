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

#ifndef PORTCONV_POOLING_H_
#define PORTCONV_POOLING_H_

#include "portconv/tensor.h"

namespace portconv {

struct PoolWindow {
  Index rows = 1;
  Index cols = 1;
};

struct PoolStride {
  Index rows = 1;
  Index cols = 1;
};

/// Per-channel maximum over each window. Padded positions are skipped.
Tensor max_pool2d(Tensor const& input, PoolWindow window, PoolStride stride,
                  Padding padding);

/// Per-channel mean over the in-bounds elements of each window.
Tensor avg_pool2d(Tensor const& input, PoolWindow window, PoolStride stride,
                  Padding padding);

}  // namespace portconv

#endif  // PORTCONV_POOLING_H_
