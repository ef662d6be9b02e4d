#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "pscode/field.hpp"

namespace pscode {

// Dense row-major matrix over GF(q). Every entry is a canonical residue
// in [0, q). Values are immutable in spirit: operations return fresh
// matrices, mutation is confined to construction helpers.
class FieldMatrix {
 public:
  FieldMatrix(PrimeField field, std::size_t rows, std::size_t cols)
      : field_(field), rows_(rows), cols_(cols), entries_(rows * cols, 0) {}

  static FieldMatrix random(PrimeField field, std::size_t rows,
                            std::size_t cols, std::mt19937_64& rng);

  // Row-major initializer; values are reduced mod q.
  static FieldMatrix from_entries(PrimeField field, std::size_t rows,
                                  std::size_t cols,
                                  const std::vector<std::uint64_t>& values);

  static FieldMatrix identity(PrimeField field, std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const PrimeField& field() const { return field_; }

  std::uint64_t operator()(std::size_t r, std::size_t c) const {
    return entries_[r * cols_ + c];
  }

  void set(std::size_t r, std::size_t c, std::uint64_t v) {
    entries_[r * cols_ + c] = field_.reduce(v);
  }

  const std::vector<std::uint64_t>& entries() const { return entries_; }

  bool operator==(const FieldMatrix& other) const {
    return field_ == other.field_ && rows_ == other.rows_ &&
           cols_ == other.cols_ && entries_ == other.entries_;
  }
  bool operator!=(const FieldMatrix& other) const { return !(*this == other); }

 private:
  PrimeField field_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint64_t> entries_;
};

// C = A * B over the shared field. Throws on inner-dimension or field
// mismatch.
FieldMatrix matmul(const FieldMatrix& a, const FieldMatrix& b);

FieldMatrix add(const FieldMatrix& a, const FieldMatrix& b);

// B = s * A entrywise.
FieldMatrix scale(const FieldMatrix& a, std::uint64_t s);

// dst += s * src, in place. The one mutating kernel; encoders and the
// decoder accumulate through it.
void add_scaled(FieldMatrix& dst, const FieldMatrix& src, std::uint64_t s);

// Splits A into m row blocks of ceil(rows/m) rows each. When m does not
// divide rows, A is implicitly zero-padded at the bottom first; callers
// trim the padding after decode.
std::vector<FieldMatrix> partition_rows(const FieldMatrix& a, std::size_t m);

// Splits B into `parts` column blocks of ceil(cols/parts) columns each,
// zero-padding on the right.
std::vector<FieldMatrix> partition_cols(const FieldMatrix& b,
                                        std::size_t parts);

// Inverse of the partitions: stack blocks and drop padding down to
// rows x cols.
FieldMatrix assemble_rows(const std::vector<FieldMatrix>& blocks,
                          std::size_t rows);
FieldMatrix assemble_cols(const std::vector<FieldMatrix>& blocks,
                          std::size_t cols);

}  // namespace pscode
