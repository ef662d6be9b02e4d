#include "pscode/code.hpp"

#include <algorithm>
#include <set>

#include "pscode/rng.hpp"

namespace pscode {

void CodeParams::validate() const {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  if (M < 1) throw std::invalid_argument("library must hold at least one matrix");
  if (D < 1 || D > M) throw std::invalid_argument("D must lie in [1, M]");
  if (recovery_threshold() > N)
    throw std::invalid_argument(
        "recovery threshold n(m+1) exceeds worker count N");
  if (r < 1 || s < 1 || t < 1)
    throw std::invalid_argument("matrix dimensions must be positive");
  // Room for N worker points plus M-1 undesired points, all distinct
  // and nonzero.
  if (field.modulus() <= static_cast<std::uint64_t>(N) + M - 1)
    throw std::invalid_argument("field too small: need q > N + M - 1");
}

PointAssignment sample_points(const CodeParams& params, std::mt19937_64& rng) {
  const std::uint64_t q = params.field.modulus();
  const std::size_t needed = params.N + params.M - 1;
  if (q <= needed)
    throw std::invalid_argument("field too small: need q > N + M - 1");

  std::set<std::uint64_t> used;
  auto fresh_nonzero = [&]() {
    for (;;) {
      std::uint64_t x = 1 + uniform_below(rng, q - 1);
      if (used.insert(x).second) return x;
    }
  };

  PointAssignment out;
  out.worker_points.reserve(params.N);
  for (std::size_t i = 0; i < params.N; ++i)
    out.worker_points.push_back(fresh_nonzero());
  for (std::size_t k = 1; k <= params.M; ++k) {
    if (k == params.D) continue;
    out.undesired_points[k] = fresh_nonzero();
  }
  return out;
}

FieldMatrix encode_a_share(const FieldMatrix& a, const FieldMatrix& mask,
                           std::uint64_t x, std::size_t m) {
  if (m == 0) throw std::invalid_argument("encode_a_share: m must be >= 1");
  if (x == 0)
    throw std::invalid_argument(
        "encode_a_share: x = 0 would expose A_0 unmasked");
  const std::size_t block = (a.rows() + m - 1) / m;
  if (mask.rows() != block || mask.cols() != a.cols())
    throw std::invalid_argument("encode_a_share: mask shape mismatch");
  if (mask.field() != a.field())
    throw std::invalid_argument("encode_a_share: field mismatch");

  std::vector<FieldMatrix> blocks = partition_rows(a, m);
  x = a.field().reduce(x);
  // Horner over the degree-m matrix polynomial, R as leading coefficient.
  FieldMatrix acc = mask;
  for (std::size_t l = m; l-- > 0;) {
    FieldMatrix next = scale(acc, x);
    add_scaled(next, blocks[l], 1);
    acc = std::move(next);
  }
  return acc;
}

FieldMatrix library_share_at_points(const std::vector<FieldMatrix>& library,
                                    std::span<const std::uint64_t> points,
                                    std::size_t parts, std::size_t step) {
  if (library.empty())
    throw std::invalid_argument("library_share_at_points: empty library");
  if (points.size() != library.size())
    throw std::invalid_argument(
        "library_share_at_points: one point per library matrix required");
  if (parts == 0 || step == 0)
    throw std::invalid_argument("library_share_at_points: bad partition spec");

  const PrimeField& f = library.front().field();
  const std::size_t rows = library.front().rows();
  const std::size_t cols = library.front().cols();
  for (const FieldMatrix& b : library)
    if (b.rows() != rows || b.cols() != cols || b.field() != f)
      throw std::invalid_argument(
          "library_share_at_points: library shapes do not match");

  const std::size_t block = (cols + parts - 1) / parts;
  FieldMatrix acc(f, rows, block);
  for (std::size_t k = 0; k < library.size(); ++k) {
    const std::vector<FieldMatrix> blocks = partition_cols(library[k], parts);
    const std::uint64_t x = f.reduce(points[k]);
    for (std::size_t l = 1; l <= parts; ++l)
      add_scaled(acc, blocks[l - 1], f.pow(x, l * step));
  }
  return acc;
}

FieldMatrix encode_library_share(const std::vector<FieldMatrix>& library,
                                 const CodeParams& params,
                                 const PointAssignment& points,
                                 std::size_t worker_index) {
  if (worker_index < 1 || worker_index > points.worker_points.size())
    throw std::invalid_argument("encode_library_share: bad worker index");
  if (library.size() != params.M)
    throw std::invalid_argument("encode_library_share: library size != M");
  std::vector<std::uint64_t> per_index(params.M);
  for (std::size_t k = 1; k <= params.M; ++k)
    per_index[k - 1] = (k == params.D)
                           ? points.worker_points[worker_index - 1]
                           : points.undesired_points.at(k);
  return library_share_at_points(library, per_index, params.n - 1,
                                 params.m + 1);
}

FieldMatrix worker_compute(const FieldMatrix& a_share,
                           const FieldMatrix& lib_share) {
  return matmul(a_share, lib_share);
}

namespace {

void require_distinct_points(std::span<const Evaluation> evals) {
  std::vector<std::uint64_t> pts;
  pts.reserve(evals.size());
  for (const Evaluation& e : evals) pts.push_back(e.point);
  std::sort(pts.begin(), pts.end());
  if (std::adjacent_find(pts.begin(), pts.end()) != pts.end())
    throw std::invalid_argument("interpolate: duplicate evaluation points");
}

void require_exact_count(std::span<const Evaluation> evals, std::size_t k) {
  if (evals.size() < k)
    throw UnderdeterminedError(
        "interpolate: fewer evaluations than coefficients; the polynomial "
        "is underdetermined");
  if (evals.size() > k)
    throw std::invalid_argument(
        "interpolate: expected exactly K evaluations");
}

// Gauss-Jordan inverse over GF(q). The Vandermonde matrix of distinct
// points is always invertible; a missing pivot therefore signals bad
// input and is reported as such.
std::vector<std::vector<std::uint64_t>> invert_matrix(
    const PrimeField& f, std::vector<std::vector<std::uint64_t>> a) {
  const std::size_t k = a.size();
  std::vector<std::vector<std::uint64_t>> inv(
      k, std::vector<std::uint64_t>(k, 0));
  for (std::size_t i = 0; i < k; ++i) inv[i][i] = 1;

  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    while (pivot < k && a[pivot][col] == 0) ++pivot;
    if (pivot == k)
      throw std::invalid_argument("interpolate: singular system");
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);

    const std::uint64_t scale = f.inv(a[col][col]);
    for (std::size_t j = 0; j < k; ++j) {
      a[col][j] = f.mul(a[col][j], scale);
      inv[col][j] = f.mul(inv[col][j], scale);
    }
    for (std::size_t row = 0; row < k; ++row) {
      if (row == col || a[row][col] == 0) continue;
      const std::uint64_t factor = a[row][col];
      for (std::size_t j = 0; j < k; ++j) {
        a[row][j] = f.sub(a[row][j], f.mul(factor, a[col][j]));
        inv[row][j] = f.sub(inv[row][j], f.mul(factor, inv[col][j]));
      }
    }
  }
  return inv;
}

}  // namespace

ProductCoefficients interpolate(std::span<const Evaluation> evals,
                                std::size_t coefficient_count) {
  require_exact_count(evals, coefficient_count);
  require_distinct_points(evals);
  const std::size_t k = coefficient_count;
  const PrimeField& f = evals.front().value.field();

  std::vector<std::vector<std::uint64_t>> vand(
      k, std::vector<std::uint64_t>(k, 0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      vand[i][j] = f.pow(f.reduce(evals[i].point), j);
  const auto vinv = invert_matrix(f, std::move(vand));

  // One shared inverse, applied entrywise: Z_l = sum_i vinv[l][i] * Y_i.
  ProductCoefficients out;
  out.blocks.reserve(k);
  for (std::size_t l = 0; l < k; ++l) {
    FieldMatrix z(f, evals.front().value.rows(), evals.front().value.cols());
    for (std::size_t i = 0; i < k; ++i)
      add_scaled(z, evals[i].value, vinv[l][i]);
    out.blocks.push_back(std::move(z));
  }
  return out;
}

ProductCoefficients interpolate_lagrange(std::span<const Evaluation> evals,
                                         std::size_t coefficient_count) {
  require_exact_count(evals, coefficient_count);
  require_distinct_points(evals);
  const std::size_t k = coefficient_count;
  const PrimeField& f = evals.front().value.field();

  // P(x) = prod_i (x - x_i), degree k.
  std::vector<std::uint64_t> master(k + 1, 0);
  master[0] = 1;
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint64_t neg_x = f.neg(f.reduce(evals[i].point));
    for (std::size_t j = i + 1; j-- > 0;) {
      master[j + 1] = f.add(master[j + 1], master[j]);
      master[j] = f.mul(master[j], neg_x);
    }
  }

  ProductCoefficients out;
  out.blocks.assign(
      k, FieldMatrix(f, evals.front().value.rows(), evals.front().value.cols()));
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint64_t xi = f.reduce(evals[i].point);
    // Synthetic division: basis_i(x) = P(x) / (x - x_i).
    std::vector<std::uint64_t> basis(k, 0);
    std::uint64_t carry = master[k];
    for (std::size_t j = k; j-- > 0;) {
      basis[j] = carry;
      carry = f.add(master[j], f.mul(carry, xi));
    }
    std::uint64_t denom = 1;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      denom = f.mul(denom, f.sub(xi, f.reduce(evals[j].point)));
    }
    const std::uint64_t w = f.inv(denom);
    for (std::size_t l = 0; l < k; ++l)
      add_scaled(out.blocks[l], evals[i].value, f.mul(basis[l], w));
  }
  return out;
}

FieldMatrix extract_result(const ProductCoefficients& coeffs,
                           const CodeParams& params) {
  const std::size_t k = params.recovery_threshold();
  if (coeffs.blocks.size() != k)
    throw std::invalid_argument(
        "extract_result: coefficient count != n(m+1)");
  const std::size_t rb = params.row_block();
  const std::size_t cb = params.col_block();
  const PrimeField& f = params.field;

  FieldMatrix padded(f, params.padded_rows(), params.padded_cols());
  for (std::size_t p = 1; p <= params.n - 1; ++p) {
    for (std::size_t u = 0; u < params.m; ++u) {
      const FieldMatrix& z = coeffs.blocks[p * (params.m + 1) + u];
      if (z.rows() != rb || z.cols() != cb)
        throw std::invalid_argument("extract_result: block shape mismatch");
      for (std::size_t i = 0; i < rb; ++i)
        for (std::size_t j = 0; j < cb; ++j)
          padded.set(u * rb + i, (p - 1) * cb + j, z(i, j));
    }
  }

  FieldMatrix out(f, params.r, params.t);
  for (std::size_t i = 0; i < params.r; ++i)
    for (std::size_t j = 0; j < params.t; ++j) out.set(i, j, padded(i, j));
  return out;
}

}  // namespace pscode
