#include "pscode/matrix.hpp"

#include <stdexcept>

#include "pscode/rng.hpp"

namespace pscode {

namespace {

void require_same_field(const FieldMatrix& a, const FieldMatrix& b) {
  if (a.field() != b.field())
    throw std::invalid_argument("matrices live in different fields");
}

}  // namespace

FieldMatrix FieldMatrix::random(PrimeField field, std::size_t rows,
                                std::size_t cols, std::mt19937_64& rng) {
  FieldMatrix out(field, rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out.set(i, j, uniform_below(rng, field.modulus()));
  return out;
}

FieldMatrix FieldMatrix::from_entries(PrimeField field, std::size_t rows,
                                      std::size_t cols,
                                      const std::vector<std::uint64_t>& values) {
  if (values.size() != rows * cols)
    throw std::invalid_argument("entry count does not match rows*cols");
  FieldMatrix out(field, rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out.set(i, j, values[i * cols + j]);
  return out;
}

FieldMatrix FieldMatrix::identity(PrimeField field, std::size_t n) {
  FieldMatrix out(field, n, n);
  for (std::size_t i = 0; i < n; ++i) out.set(i, i, 1);
  return out;
}

FieldMatrix matmul(const FieldMatrix& a, const FieldMatrix& b) {
  require_same_field(a, b);
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimensions do not match");
  const PrimeField& f = a.field();
  const std::uint64_t q = f.modulus();
  FieldMatrix out(f, a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      unsigned __int128 acc = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        acc += static_cast<unsigned __int128>(a(i, k)) * b(k, j);
        // 64 products of residues < 2^61 still fit in 128 bits.
        if ((k & 63) == 63) acc %= q;
      }
      out.set(i, j, static_cast<std::uint64_t>(acc % q));
    }
  }
  return out;
}

FieldMatrix add(const FieldMatrix& a, const FieldMatrix& b) {
  require_same_field(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("add: shapes do not match");
  FieldMatrix out(a.field(), a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      out.set(i, j, a.field().add(a(i, j), b(i, j)));
  return out;
}

FieldMatrix scale(const FieldMatrix& a, std::uint64_t s) {
  FieldMatrix out(a.field(), a.rows(), a.cols());
  s = a.field().reduce(s);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      out.set(i, j, a.field().mul(a(i, j), s));
  return out;
}

void add_scaled(FieldMatrix& dst, const FieldMatrix& src, std::uint64_t s) {
  require_same_field(dst, src);
  if (dst.rows() != src.rows() || dst.cols() != src.cols())
    throw std::invalid_argument("add_scaled: shapes do not match");
  const PrimeField& f = dst.field();
  s = f.reduce(s);
  for (std::size_t i = 0; i < dst.rows(); ++i)
    for (std::size_t j = 0; j < dst.cols(); ++j)
      dst.set(i, j, f.add(dst(i, j), f.mul(src(i, j), s)));
}

std::vector<FieldMatrix> partition_rows(const FieldMatrix& a, std::size_t m) {
  if (m == 0) throw std::invalid_argument("partition_rows: m must be >= 1");
  const std::size_t block = (a.rows() + m - 1) / m;
  std::vector<FieldMatrix> out;
  out.reserve(m);
  for (std::size_t b = 0; b < m; ++b) {
    FieldMatrix blk(a.field(), block, a.cols());
    for (std::size_t i = 0; i < block; ++i) {
      const std::size_t src = b * block + i;
      if (src >= a.rows()) break;  // zero padding
      for (std::size_t j = 0; j < a.cols(); ++j) blk.set(i, j, a(src, j));
    }
    out.push_back(std::move(blk));
  }
  return out;
}

std::vector<FieldMatrix> partition_cols(const FieldMatrix& b,
                                        std::size_t parts) {
  if (parts == 0)
    throw std::invalid_argument("partition_cols: parts must be >= 1");
  const std::size_t block = (b.cols() + parts - 1) / parts;
  std::vector<FieldMatrix> out;
  out.reserve(parts);
  for (std::size_t p = 0; p < parts; ++p) {
    FieldMatrix blk(b.field(), b.rows(), block);
    for (std::size_t j = 0; j < block; ++j) {
      const std::size_t src = p * block + j;
      if (src >= b.cols()) break;
      for (std::size_t i = 0; i < b.rows(); ++i) blk.set(i, j, b(i, src));
    }
    out.push_back(std::move(blk));
  }
  return out;
}

FieldMatrix assemble_rows(const std::vector<FieldMatrix>& blocks,
                          std::size_t rows) {
  if (blocks.empty()) throw std::invalid_argument("assemble_rows: no blocks");
  const std::size_t block = blocks.front().rows();
  FieldMatrix out(blocks.front().field(), rows, blocks.front().cols());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t i = 0; i < block; ++i) {
      const std::size_t dst = b * block + i;
      if (dst >= rows) break;
      for (std::size_t j = 0; j < out.cols(); ++j)
        out.set(dst, j, blocks[b](i, j));
    }
  }
  return out;
}

FieldMatrix assemble_cols(const std::vector<FieldMatrix>& blocks,
                          std::size_t cols) {
  if (blocks.empty()) throw std::invalid_argument("assemble_cols: no blocks");
  const std::size_t block = blocks.front().cols();
  FieldMatrix out(blocks.front().field(), blocks.front().rows(), cols);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t j = 0; j < block; ++j) {
      const std::size_t dst = b * block + j;
      if (dst >= cols) break;
      for (std::size_t i = 0; i < out.rows(); ++i)
        out.set(i, dst, blocks[b](i, j));
    }
  }
  return out;
}

}  // namespace pscode
