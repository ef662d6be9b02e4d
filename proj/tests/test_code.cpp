#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "pscode/code.hpp"
#include "pscode/rng.hpp"

using namespace pscode;

namespace {

CodeParams worked_example_params() {
  // 12 workers, library of two, A in two row blocks, B_k in two column
  // blocks; threshold 9.
  return CodeParams{PrimeField(97), 2, 3, 2, 12, 1, 2, 2, 2};
}

}  // namespace

TEST_CASE("params validation catches each violated constraint") {
  CodeParams good = worked_example_params();
  CHECK_NOTHROW(good.validate());
  CHECK(good.recovery_threshold() == 9);

  CodeParams bad = good;
  bad.n = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = good;
  bad.m = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = good;
  bad.D = 3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = good;
  bad.N = 8;  // below n(m+1) = 9
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = good;
  bad.field = PrimeField(13);  // q <= N + M - 1
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("sample_points: distinct, nonzero, right multiplicities") {
  std::mt19937_64 rng(1);

  CodeParams p = worked_example_params();
  PointAssignment pts = sample_points(p, rng);
  REQUIRE(pts.worker_points.size() == 12);
  REQUIRE(pts.undesired_points.size() == 1);
  CHECK(pts.undesired_points.count(2) == 1);

  CodeParams single = p;
  single.M = 1;
  single.D = 1;
  CHECK(sample_points(single, rng).undesired_points.empty());

  CodeParams wide{PrimeField(17), 1, 2, 4, 12, 2, 1, 1, 1};
  PointAssignment many = sample_points(wide, rng);
  std::set<std::uint64_t> all(many.worker_points.begin(),
                              many.worker_points.end());
  for (const auto& [k, x] : many.undesired_points) all.insert(x);
  CHECK(all.size() == 15);  // 12 + (4 - 1), pairwise distinct
  for (std::uint64_t x : all) {
    CHECK(x != 0);
    CHECK(x < 17);
  }

  CodeParams cramped = wide;
  cramped.field = PrimeField(13);  // needs q > 15
  CHECK_THROWS_AS(sample_points(cramped, rng), std::invalid_argument);
}

TEST_CASE("masked encoding matches the term-by-term oracle") {
  PrimeField f7(7);
  FieldMatrix a = FieldMatrix::from_entries(f7, 1, 1, {2});
  FieldMatrix mask = FieldMatrix::from_entries(f7, 1, 1, {3});
  CHECK(encode_a_share(a, mask, 2, 1) ==
        FieldMatrix::from_entries(f7, 1, 1, {1}));  // 2 + 3*2 = 8 = 1

  std::mt19937_64 rng(5);
  PrimeField f(97);
  FieldMatrix a2 = FieldMatrix::random(f, 4, 3, rng);
  FieldMatrix r2 = FieldMatrix::random(f, 2, 3, rng);
  for (std::uint64_t x : {1ull, 2ull, 50ull, 96ull})
    CHECK(encode_a_share(a2, r2, x, 2) == oracle::masked_input_eval(a2, r2, x, 2));

  // zero mask at x = 1 degenerates to the plain block sum
  FieldMatrix zero(f, 2, 3);
  auto blocks = partition_rows(a2, 2);
  CHECK(encode_a_share(a2, zero, 1, 2) == add(blocks[0], blocks[1]));

  CHECK_THROWS_AS(encode_a_share(a2, r2, 0, 2), std::invalid_argument);
  FieldMatrix wrong(f, 3, 3);
  CHECK_THROWS_AS(encode_a_share(a2, wrong, 1, 2), std::invalid_argument);
}

TEST_CASE("library encoding uses exponents l(m+1) and sums across the library") {
  std::mt19937_64 rng(6);
  CodeParams p = worked_example_params();
  std::vector<FieldMatrix> library{
      FieldMatrix::random(p.field, 2, 2, rng),
      FieldMatrix::random(p.field, 2, 2, rng)};
  PointAssignment pts = sample_points(p, rng);

  for (std::size_t i = 1; i <= p.N; ++i) {
    // m = 2: exponents 3 and 6
    FieldMatrix expected = add(
        oracle::library_poly_eval(library[0], 2, 3, pts.worker_points[i - 1]),
        oracle::library_poly_eval(library[1], 2, 3, pts.undesired_points.at(2)));
    CHECK(encode_library_share(library, p, pts, i) == expected);
  }

  CodeParams single = p;
  single.M = 1;
  std::vector<FieldMatrix> lone{library[0]};
  PointAssignment spts = sample_points(single, rng);
  CHECK(encode_library_share(lone, single, spts, 3) ==
        oracle::library_poly_eval(lone[0], 2, 3, spts.worker_points[2]));

  // q = 11 instance against the brute-force polynomial evaluation
  CodeParams tiny{PrimeField(11), 1, 2, 2, 4, 2, 2, 2, 2};
  std::vector<FieldMatrix> tlib{FieldMatrix::random(tiny.field, 2, 2, rng),
                                FieldMatrix::random(tiny.field, 2, 2, rng)};
  PointAssignment tpts = sample_points(tiny, rng);
  FieldMatrix expected =
      add(oracle::library_poly_eval(tlib[0], 1, 2, tpts.undesired_points.at(1)),
          oracle::library_poly_eval(tlib[1], 1, 2, tpts.worker_points[0]));
  CHECK(encode_library_share(tlib, tiny, tpts, 1) == expected);

  std::vector<FieldMatrix> ragged{FieldMatrix::random(p.field, 2, 2, rng),
                                  FieldMatrix::random(p.field, 3, 2, rng)};
  CHECK_THROWS_AS(encode_library_share(ragged, p, pts, 1),
                  std::invalid_argument);
}

TEST_CASE("worker result is the closed-form polynomial at the worker point") {
  std::mt19937_64 rng(7);
  CodeParams tiny{PrimeField(11), 1, 2, 2, 4, 1, 2, 2, 1};
  oracle::Pipeline pipe = oracle::run_pipeline(tiny, rng);
  const auto z = oracle::closed_form_coefficients(pipe.library, tiny,
                                                  pipe.points, pipe.a,
                                                  pipe.mask);
  std::vector<std::size_t> exps;
  for (std::size_t l = 0; l < z.size(); ++l) exps.push_back(l);
  for (std::size_t i = 0; i < tiny.N; ++i)
    CHECK(pipe.evals[i].value ==
          oracle::poly_eval(z, exps, pipe.evals[i].point));

  // zero library annihilates every result
  std::vector<FieldMatrix> zeros{FieldMatrix(tiny.field, 2, 1),
                                 FieldMatrix(tiny.field, 2, 1)};
  FieldMatrix share = encode_a_share(pipe.a, pipe.mask, 5, 1);
  CHECK(worker_compute(share, encode_library_share(zeros, tiny, pipe.points, 1))
            .entries() == std::vector<std::uint64_t>{0, 0});
}

TEST_CASE("interpolation: threshold semantics and round trips") {
  PrimeField f(97);
  std::mt19937_64 rng(8);

  SUBCASE("constant polynomial") {
    FieldMatrix value = FieldMatrix::random(f, 2, 2, rng);
    std::vector<Evaluation> evals;
    for (std::uint64_t x = 1; x <= 5; ++x) evals.push_back({x, value});
    ProductCoefficients c = interpolate(evals, 5);
    CHECK(c.blocks[0] == value);
    for (std::size_t l = 1; l < 5; ++l)
      CHECK(c.blocks[l] == FieldMatrix(f, 2, 2));
  }

  SUBCASE("random coefficients round-trip, both solver routes") {
    const std::size_t k = 9;
    std::vector<FieldMatrix> z;
    std::vector<std::size_t> exps;
    for (std::size_t l = 0; l < k; ++l) {
      z.push_back(FieldMatrix::random(f, 2, 3, rng));
      exps.push_back(l);
    }
    std::vector<Evaluation> evals;
    for (std::uint64_t x = 3; x < 3 + k; ++x)
      evals.push_back({x, oracle::poly_eval(z, exps, x)});

    ProductCoefficients vand = interpolate(evals, k);
    ProductCoefficients lagr = interpolate_lagrange(evals, k);
    for (std::size_t l = 0; l < k; ++l) {
      CHECK(vand.blocks[l] == z[l]);
      CHECK(lagr.blocks[l] == z[l]);
    }
  }

  SUBCASE("failure modes") {
    FieldMatrix v(f, 1, 1);
    std::vector<Evaluation> evals{{1, v}, {2, v}, {2, v}};
    CHECK_THROWS_AS(interpolate(evals, 3), std::invalid_argument);

    std::vector<Evaluation> few{{1, v}, {2, v}};
    CHECK_THROWS_AS(interpolate(few, 3), UnderdeterminedError);
    CHECK_THROWS_AS(interpolate_lagrange(few, 3), UnderdeterminedError);

    std::vector<Evaluation> extra{{1, v}, {2, v}, {3, v}, {4, v}};
    CHECK_THROWS_AS(interpolate(extra, 3), std::invalid_argument);
  }
}

TEST_CASE("extraction picks exactly the product coefficients") {
  // threshold 9; product blocks sit at x^3, x^4, x^6, x^7
  CodeParams p = worked_example_params();
  PrimeField f = p.field;
  ProductCoefficients coeffs;
  for (std::size_t l = 0; l < 9; ++l)
    coeffs.blocks.push_back(FieldMatrix::from_entries(f, 1, 1, {10 + l}));
  FieldMatrix out = extract_result(coeffs, p);
  CHECK(out == FieldMatrix::from_entries(f, 2, 2, {13, 16, 14, 17}));

  CodeParams smallest{PrimeField(17), 1, 2, 1, 4, 1, 1, 1, 1};
  ProductCoefficients c2;
  for (std::size_t l = 0; l < 4; ++l)
    c2.blocks.push_back(FieldMatrix::from_entries(PrimeField(17), 1, 1, {l}));
  // single product block lives at index 1*(1+1) = 2
  CHECK(extract_result(c2, smallest) ==
        FieldMatrix::from_entries(PrimeField(17), 1, 1, {2}));

  coeffs.blocks.pop_back();
  CHECK_THROWS_AS(extract_result(coeffs, p), std::invalid_argument);
}

TEST_CASE("end-to-end decode equals the direct product, 100 seeded instances") {
  std::mt19937_64 rng(20240810);
  int done = 0;
  while (done < 100) {
    CodeParams p{PrimeField(97),
                 1 + uniform_below(rng, 3),
                 2 + uniform_below(rng, 3),
                 1 + uniform_below(rng, 3),
                 0,
                 0,
                 1 + uniform_below(rng, 5),
                 1 + uniform_below(rng, 4),
                 1 + uniform_below(rng, 5)};
    p.N = p.recovery_threshold() + uniform_below(rng, 4);
    p.D = 1 + uniform_below(rng, p.M);
    if (p.field.modulus() <= p.N + p.M - 1) continue;

    oracle::Pipeline pipe = oracle::run_pipeline(p, rng);
    std::vector<Evaluation> first(pipe.evals.begin(),
                                  pipe.evals.begin() + p.recovery_threshold());
    FieldMatrix decoded =
        extract_result(interpolate(first, p.recovery_threshold()), p);
    CHECK(decoded == oracle::matmul_bigint(pipe.a, pipe.library[p.D - 1]));
    ++done;
  }
}

TEST_CASE("any K-subset decodes to the same product; K-1 does not decode") {
  std::mt19937_64 rng(99);
  CodeParams p = worked_example_params();
  oracle::Pipeline pipe = oracle::run_pipeline(p, rng);
  const std::size_t k = p.recovery_threshold();
  const FieldMatrix expected =
      oracle::matmul_bigint(pipe.a, pipe.library[p.D - 1]);

  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::size_t> order(p.N);
    for (std::size_t i = 0; i < p.N; ++i) order[i] = i;
    for (std::size_t i = p.N; i > 1; --i)
      std::swap(order[i - 1], order[uniform_below(rng, i)]);

    std::vector<Evaluation> subset;
    for (std::size_t i = 0; i < k; ++i) subset.push_back(pipe.evals[order[i]]);
    CHECK(extract_result(interpolate(subset, k), p) == expected);

    subset.pop_back();
    CHECK_THROWS_AS(interpolate(subset, k), UnderdeterminedError);
  }
}

TEST_CASE("coefficient identities of the worker polynomial") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    CodeParams p{PrimeField(101), 2, 3, 3, 9, 1 + uniform_below(rng, 3),
                 2,   2, 2};
    oracle::Pipeline pipe = oracle::run_pipeline(p, rng);
    const std::size_t k = p.recovery_threshold();
    std::vector<Evaluation> first(pipe.evals.begin(), pipe.evals.begin() + k);
    ProductCoefficients c = interpolate(first, k);

    const auto z = oracle::closed_form_coefficients(pipe.library, p,
                                                    pipe.points, pipe.a,
                                                    pipe.mask);
    for (std::size_t l = 0; l < k; ++l) CHECK(c.blocks[l] == z[l]);

    // leading coefficient: the polynomial has full degree K-1, and its top
    // term is the mask against the last block of the desired matrix
    auto d_blocks = partition_cols(pipe.library[p.D - 1], p.n - 1);
    CHECK(c.blocks[k - 1] == oracle::matmul_bigint(pipe.mask, d_blocks[p.n - 2]));
  }
}
