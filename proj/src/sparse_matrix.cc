// Copyright 2026 The geocooc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "geocooc/sparse_matrix.h"

#include <algorithm>
#include <cmath>

#include "geocooc/errors.h"

namespace geocooc {

SparseMatrix SparseMatrix::from_dense(std::size_t rows, std::size_t cols, const std::vector<double>& dense,
                                      double zero_threshold) {
  if (dense.size() != rows * cols) throw ValidationError("dense buffer does not match matrix shape");
  SparseMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = dense[r * cols + c];
      if (std::abs(v) >= zero_threshold && v != 0.0) {
        out.cols_idx_.push_back(static_cast<std::uint32_t>(c));
        out.values_.push_back(v);
      }
    }
    out.row_ptr_[r + 1] = out.values_.size();
  }
  return out;
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix out(rows, cols);
  const Triplet* prev = nullptr;
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) throw ValidationError("triplet outside matrix shape");
    if (prev && prev->row == t.row && prev->col == t.col) {
      out.values_.back() += t.value;
    } else {
      out.cols_idx_.push_back(t.col);
      out.values_.push_back(t.value);
    }
    out.row_ptr_[t.row + 1] = out.values_.size();
    prev = &t;
  }
  for (std::size_t r = 1; r <= rows; ++r) out.row_ptr_[r] = std::max(out.row_ptr_[r], out.row_ptr_[r - 1]);
  return out;
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  if (r >= rows_ || c >= cols_) throw ValidationError("matrix index out of range");
  const auto first = cols_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto last = cols_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
  if (it == last || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_idx_.begin())];
}

std::vector<double> SparseMatrix::row(std::size_t r) const {
  std::vector<double> out(cols_, 0.0);
  axpy_row(r, 1.0, out);
  return out;
}

void SparseMatrix::axpy_row(std::size_t r, double scale, std::vector<double>& acc) const {
  if (r >= rows_) throw ValidationError("matrix row out of range");
  for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc[cols_idx_[k]] += scale * values_[k];
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for_each([&](std::size_t r, std::size_t c, double v) {
    t.push_back({static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(r), v});
  });
  return from_triplets(cols_, rows_, std::move(t));
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for_each([&](std::size_t r, std::size_t c, double v) {
    t.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), v});
  });
  return t;
}

}  // namespace geocooc
