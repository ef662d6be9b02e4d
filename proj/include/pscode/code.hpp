#pragma once

#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "pscode/matrix.hpp"

namespace pscode {

// Raised when interpolation is asked to recover a degree-(K-1) polynomial
// from fewer than K evaluations. Deliberately a distinct type: the decoder
// must never silently return a value below the recovery threshold.
struct UnderdeterminedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full parameter set of one coded-multiplication job:
//   A is r x s, split into m row blocks;
//   each of the M library matrices is s x t, split into n-1 column blocks;
//   N workers, desired library index D (1-based);
//   recovery threshold K = n(m+1).
struct CodeParams {
  PrimeField field;
  std::size_t m = 1;
  std::size_t n = 2;
  std::size_t M = 1;
  std::size_t N = 4;
  std::size_t D = 1;
  std::size_t r = 1, s = 1, t = 1;

  std::size_t recovery_threshold() const { return n * (m + 1); }

  // Row/column geometry after zero-padding to divisible shapes.
  std::size_t padded_rows() const { return ((r + m - 1) / m) * m; }
  std::size_t row_block() const { return padded_rows() / m; }
  std::size_t padded_cols() const {
    return ((t + n - 2) / (n - 1)) * (n - 1);
  }
  std::size_t col_block() const { return padded_cols() / (n - 1); }

  // Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

// The evaluation points of one job: one distinct nonzero point per worker,
// plus one shared point per undesired library index, all N + M - 1 of them
// pairwise distinct.
struct PointAssignment {
  std::vector<std::uint64_t> worker_points;           // size N, worker i-1
  std::map<std::size_t, std::uint64_t> undesired_points;  // key: k != D
};

// Coefficients Z_0 .. Z_{n(m+1)-1} of the worker-result polynomial.
struct ProductCoefficients {
  std::vector<FieldMatrix> blocks;
};

// One decoded input: the sub-result a worker returned together with the
// point its masked share was evaluated at.
struct Evaluation {
  std::uint64_t point;
  FieldMatrix value;
};

// Draws N + M - 1 distinct nonzero points uniformly (rejection sampling
// over F \ {0}). Requires q > N + M - 1; D picks which map keys exist.
PointAssignment sample_points(const CodeParams& params, std::mt19937_64& rng);

// Evaluates the masked polynomial sum_{l<m} A_l x^l + R x^m by Horner.
// A is the full r x s input (padded internally); R must be
// row_block x s. x = 0 is rejected: it would hand the worker A_0 bare.
FieldMatrix encode_a_share(const FieldMatrix& a, const FieldMatrix& mask,
                           std::uint64_t x, std::size_t m);

// Worker-side library encoding: sum over the library of
// B~_k(p_k) with B~_k(x) = sum_{l=1}^{n-1} B_{k,l} x^{l(m+1)}, where p_k
// is the desired worker point for k = D and the shared undesired point
// otherwise. Returns an s x col_block matrix.
FieldMatrix encode_library_share(const std::vector<FieldMatrix>& library,
                                 const CodeParams& params,
                                 const PointAssignment& points,
                                 std::size_t worker_index /*1-based*/);

// Same sum driven by an explicit point-per-library-index list; this is the
// path a worker executes (it never sees D).
FieldMatrix library_share_at_points(const std::vector<FieldMatrix>& library,
                                    std::span<const std::uint64_t> points,
                                    std::size_t parts, std::size_t step);

// The single sub-computation: masked share times summed library share.
FieldMatrix worker_compute(const FieldMatrix& a_share,
                           const FieldMatrix& lib_share);

// Recovers the coefficient_count coefficients of the matrix polynomial
// through the given evaluations. Requires exactly coefficient_count
// pairwise-distinct points; fewer raises UnderdeterminedError. One
// Vandermonde inverse is shared across all matrix entries.
ProductCoefficients interpolate(std::span<const Evaluation> evals,
                                std::size_t coefficient_count);

// Independent route: Lagrange-basis expansion. Used as a cross-check of
// the Vandermonde solve.
ProductCoefficients interpolate_lagrange(std::span<const Evaluation> evals,
                                         std::size_t coefficient_count);

// Reads the product blocks out of the coefficient list: grid cell (u, p-1)
// is Z_{p(m+1)+u}. Coefficients Z_0..Z_m carry mask/undesired noise and are
// dropped; padding is trimmed to the exact r x t shape.
FieldMatrix extract_result(const ProductCoefficients& coeffs,
                           const CodeParams& params);

}  // namespace pscode
