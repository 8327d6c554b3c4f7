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

#include "portconv/gemm.h"

#include <algorithm>
#include <string>

#include "portconv/error.h"
#include "portconv/parallel.h"

namespace portconv {

template <typename T>
BasicMatrix<T>::BasicMatrix(Index rows, Index cols)
    : rows_{rows},
      cols_{cols},
      data_(static_cast<std::size_t>(checked_mul(rows, cols)), T{0}) {}

template <typename T>
BasicMatrix<T>::BasicMatrix(Index rows, Index cols, std::vector<T> values)
    : rows_{rows}, cols_{cols}, data_{std::move(values)} {
  if (static_cast<Index>(data_.size()) != checked_mul(rows, cols)) {
    throw ShapeMismatchError("matrix data holds " +
                             std::to_string(data_.size()) + " values, " +
                             std::to_string(rows) + "x" +
                             std::to_string(cols) + " needed");
  }
}

template class BasicMatrix<float>;
template class BasicMatrix<double>;

void GemmBlocking::validate() const {
  if (mc < 1 || nc < 1 || kc < 1 || mr < 1 || nr < 1) {
    throw InvalidParamsError("gemm blocking extents must be >= 1");
  }
  if (mr > mc || nr > nc) {
    throw InvalidParamsError("register tile must fit inside the cache block");
  }
}

namespace {

template <typename A, typename B, typename C>
void check_dims(MatrixView<A> a, MatrixView<B> b, MatrixView<C> c) {
  if (a.cols != b.rows) {
    throw ShapeMismatchError("gemm: lhs has " + std::to_string(a.cols) +
                             " columns, rhs has " + std::to_string(b.rows) +
                             " rows");
  }
  if (c.rows != a.rows || c.cols != b.cols) {
    throw ShapeMismatchError("gemm: output has the wrong shape");
  }
}

// Packed operands store each mr-row (A) or nr-column (B) strip contiguously,
// k-major, so the micro-kernel streams both with unit stride. A partial last
// strip is packed at its true width.
struct PackedPanel {
  std::vector<double> values;
  Index strip;  // nominal strip width
  Index depth;  // k extent
  Index extent;

  double const* strip_data(Index s) const {
    return values.data() + s * strip * depth;
  }
  Index strip_width(Index s) const {
    return std::min(strip, extent - s * strip);
  }
};

template <typename T>
void pack_b(MatrixView<T const> b, Index col0, Index ncols, Index nr,
            PackedPanel& out) {
  out.strip = nr;
  out.depth = b.rows;
  out.extent = ncols;
  out.values.resize(static_cast<std::size_t>(b.rows * ncols));
  Index const strips = (ncols + nr - 1) / nr;
  for (Index s = 0; s < strips; ++s) {
    Index const w = out.strip_width(s);
    double* dst = out.values.data() + s * nr * b.rows;
    for (Index p = 0; p < b.rows; ++p) {
      T const* src = b.data + p * b.cols + col0 + s * nr;
      for (Index j = 0; j < w; ++j) dst[p * w + j] = src[j];
    }
  }
}

template <typename T>
void pack_a(MatrixView<T const> a, Index row0, Index nrows, Index mr,
            PackedPanel& out) {
  out.strip = mr;
  out.depth = a.cols;
  out.extent = nrows;
  out.values.resize(static_cast<std::size_t>(a.cols * nrows));
  Index const strips = (nrows + mr - 1) / mr;
  for (Index s = 0; s < strips; ++s) {
    Index const h = out.strip_width(s);
    double* dst = out.values.data() + s * mr * a.cols;
    for (Index i = 0; i < h; ++i) {
      T const* src = a.data + (row0 + s * mr + i) * a.cols;
      for (Index p = 0; p < a.cols; ++p) dst[p * h + i] = src[p];
    }
  }
}

// Full register tile with compile-time extents.
template <Index MR, Index NR>
void micro_kernel(double const* a, double const* b, Index k_begin,
                  Index k_end, double* c, Index ldc) {
  double acc[MR][NR];
  for (Index i = 0; i < MR; ++i)
    for (Index j = 0; j < NR; ++j) acc[i][j] = c[i * ldc + j];
  for (Index p = k_begin; p < k_end; ++p) {
    double const* ap = a + p * MR;
    double const* bp = b + p * NR;
    for (Index i = 0; i < MR; ++i) {
      double const ai = ap[i];
      for (Index j = 0; j < NR; ++j) acc[i][j] += ai * bp[j];
    }
  }
  for (Index i = 0; i < MR; ++i)
    for (Index j = 0; j < NR; ++j) c[i * ldc + j] = acc[i][j];
}

// Scalar cleanup for edge tiles and register tiles without a specialisation.
void scalar_kernel(double const* a, Index h, double const* b, Index w,
                   Index k_begin, Index k_end, double* c, Index ldc) {
  for (Index i = 0; i < h; ++i) {
    for (Index j = 0; j < w; ++j) {
      double acc = c[i * ldc + j];
      for (Index p = k_begin; p < k_end; ++p) acc += a[p * h + i] * b[p * w + j];
      c[i * ldc + j] = acc;
    }
  }
}

using KernelFn = void (*)(double const*, double const*, Index, Index, double*,
                          Index);

KernelFn pick_kernel(Index mr, Index nr) {
  if (mr == 4 && nr == 8) return micro_kernel<4, 8>;
  if (mr == 4 && nr == 4) return micro_kernel<4, 4>;
  if (mr == 8 && nr == 8) return micro_kernel<8, 8>;
  if (mr == 4 && nr == 16) return micro_kernel<4, 16>;
  if (mr == 6 && nr == 8) return micro_kernel<6, 8>;
  return nullptr;
}

template <typename In, typename Out>
void gemm_blocked_impl(MatrixView<In const> a, MatrixView<In const> b,
                       MatrixView<Out> c, GemmBlocking const& blk) {
  blk.validate();
  check_dims(a, b, c);
  Index const m = a.rows;
  Index const n = b.cols;
  Index const k = a.cols;
  KernelFn const kernel = pick_kernel(blk.mr, blk.nr);
  Index const row_blocks = (m + blk.mc - 1) / blk.mc;

  PackedPanel packed_b;
  for (Index jc = 0; jc < n; jc += blk.nc) {
    Index const nb = std::min(blk.nc, n - jc);
    pack_b(b, jc, nb, blk.nr, packed_b);
    Index const col_strips = (nb + blk.nr - 1) / blk.nr;

    parallel_for(row_blocks, [&](Index first, Index last) {
      PackedPanel packed_a;
      std::vector<double> acc;
      for (Index ib = first; ib < last; ++ib) {
        Index const ic = ib * blk.mc;
        Index const mb = std::min(blk.mc, m - ic);
        pack_a(a, ic, mb, blk.mr, packed_a);
        acc.assign(static_cast<std::size_t>(mb * nb), 0.0);
        Index const row_strips = (mb + blk.mr - 1) / blk.mr;

        for (Index pc = 0; pc < k; pc += blk.kc) {
          Index const pe = std::min(k, pc + blk.kc);
          for (Index js = 0; js < col_strips; ++js) {
            Index const w = packed_b.strip_width(js);
            double const* bs = packed_b.strip_data(js);
            for (Index is = 0; is < row_strips; ++is) {
              Index const h = packed_a.strip_width(is);
              double const* as = packed_a.strip_data(is);
              double* cs = acc.data() + is * blk.mr * nb + js * blk.nr;
              if (kernel != nullptr && h == blk.mr && w == blk.nr) {
                kernel(as, bs, pc, pe, cs, nb);
              } else {
                scalar_kernel(as, h, bs, w, pc, pe, cs, nb);
              }
            }
          }
        }
        for (Index i = 0; i < mb; ++i) {
          Out* dst = c.data + (ic + i) * c.cols + jc;
          double const* src = acc.data() + i * nb;
          for (Index j = 0; j < nb; ++j) dst[j] = static_cast<Out>(src[j]);
        }
      }
    });
  }
}

}  // namespace

Matrix gemm_naive(Matrix const& a, Matrix const& b) {
  Matrix c{a.rows(), b.cols()};
  check_dims(view(a), view(b), view(c));
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.cols(); ++j) {
      double acc = 0;
      for (Index p = 0; p < a.cols(); ++p) {
        acc += static_cast<double>(a.at(i, p)) * static_cast<double>(b.at(p, j));
      }
      c.at(i, j) = static_cast<float>(acc);
    }
  }
  return c;
}

void gemm_blocked_into(MatrixView<float const> a, MatrixView<float const> b,
                       MatrixView<float> c, GemmBlocking const& blocking) {
  gemm_blocked_impl(a, b, c, blocking);
}

void gemm_blocked_into(MatrixView<double const> a, MatrixView<double const> b,
                       MatrixView<double> c, GemmBlocking const& blocking) {
  gemm_blocked_impl(a, b, c, blocking);
}

Matrix gemm_blocked(Matrix const& a, Matrix const& b,
                    GemmBlocking const& blocking) {
  if (a.cols() != b.rows()) check_dims(view(a), view(b), view(a));
  Matrix c{a.rows(), b.cols()};
  gemm_blocked_impl(view(a), view(b), view(c), blocking);
  return c;
}

BasicMatrix<double> gemm_blocked(BasicMatrix<double> const& a,
                                 BasicMatrix<double> const& b,
                                 GemmBlocking const& blocking) {
  if (a.cols() != b.rows()) check_dims(view(a), view(b), view(a));
  BasicMatrix<double> c{a.rows(), b.cols()};
  gemm_blocked_impl(view(a), view(b), view(c), blocking);
  return c;
}

}  // namespace portconv
