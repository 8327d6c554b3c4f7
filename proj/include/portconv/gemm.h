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

#ifndef PORTCONV_GEMM_H_
#define PORTCONV_GEMM_H_

#include <span>
#include <vector>

#include "portconv/tensor.h"

namespace portconv {

/// Row-major dense matrix.
template <typename T>
class BasicMatrix {
 public:
  BasicMatrix() = default;
  BasicMatrix(Index rows, Index cols);
  BasicMatrix(Index rows, Index cols, std::vector<T> values);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  std::span<T const> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }

  T at(Index r, Index c) const noexcept {
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }
  T& at(Index r, Index c) noexcept {
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }

  friend bool operator==(BasicMatrix const&, BasicMatrix const&) = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<float>;

/// Non-owning row-major view, used to multiply tensor storage in place.
template <typename T>
struct MatrixView {
  Index rows;
  Index cols;
  T* data;

  T& at(Index r, Index c) const noexcept { return data[r * cols + c]; }
};

template <typename T>
MatrixView<T const> view(BasicMatrix<T> const& m) {
  return {m.rows(), m.cols(), m.data().data()};
}
template <typename T>
MatrixView<T> view(BasicMatrix<T>& m) {
  return {m.rows(), m.cols(), m.data().data()};
}

/// Cache-block extents (mc x kc of A, kc x nc of B) and the register tile
/// (mr x nr) computed by the micro-kernel.
struct GemmBlocking {
  Index mc = 64;
  Index nc = 256;
  Index kc = 256;
  Index mr = 4;
  Index nr = 8;

  void validate() const;
};

/// Reference product with 64-bit accumulation.
Matrix gemm_naive(Matrix const& a, Matrix const& b);

/// Packed, cache-blocked product. Accumulates in 64-bit across the whole k
/// extent and rounds once on store. Edge tiles use scalar cleanup loops.
Matrix gemm_blocked(Matrix const& a, Matrix const& b,
                    GemmBlocking const& blocking = {});
BasicMatrix<double> gemm_blocked(BasicMatrix<double> const& a,
                                 BasicMatrix<double> const& b,
                                 GemmBlocking const& blocking = {});

/// c = a * b written into caller-owned storage.
void gemm_blocked_into(MatrixView<float const> a, MatrixView<float const> b,
                       MatrixView<float> c, GemmBlocking const& blocking);
void gemm_blocked_into(MatrixView<double const> a, MatrixView<double const> b,
                       MatrixView<double> c, GemmBlocking const& blocking);

}  // namespace portconv

#endif  // PORTCONV_GEMM_H_
