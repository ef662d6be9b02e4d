#include "pscode/audit.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "pscode/rng.hpp"

namespace pscode {

namespace {

constexpr double kAlpha = 0.01;  // pre-registered significance level

// One deterministic retry for sampled statistics: a p-value can dip below
// alpha by chance, so a failure reruns once with a derived seed before it
// counts.
std::uint64_t retry_seed(std::uint64_t seed) {
  return splitmix64(seed ^ 0x7e7276a1b7f3c25dULL);
}

std::vector<std::uint8_t> matrix_bytes(const FieldMatrix& m) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + 8 * m.entries().size());
  auto put64 = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xff);
  };
  put64(m.rows());
  put64(m.cols());
  for (std::uint64_t e : m.entries()) put64(e);
  return out;
}

double chi_square_pvalue(double stat, double dof) {
  if (dof <= 0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

}  // namespace

double chi_square_uniform_pvalue(const std::vector<std::uint64_t>& counts) {
  const std::size_t bins = counts.size();
  if (bins < 2) return 1.0;
  double total = 0.0;
  for (std::uint64_t c : counts) total += static_cast<double>(c);
  if (total == 0.0) return 1.0;
  const double expected = total / static_cast<double>(bins);
  double stat = 0.0;
  for (std::uint64_t c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return chi_square_pvalue(stat, static_cast<double>(bins - 1));
}

double chi_square_homogeneity_pvalue(
    const std::vector<std::vector<std::uint64_t>>& groups) {
  if (groups.size() < 2) return 1.0;
  const std::size_t bins = groups.front().size();
  std::vector<double> row_total(groups.size(), 0.0);
  std::vector<double> col_total(bins, 0.0);
  double total = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t b = 0; b < bins; ++b) {
      row_total[g] += static_cast<double>(groups[g][b]);
      col_total[b] += static_cast<double>(groups[g][b]);
    }
    total += row_total[g];
  }
  if (total == 0.0) return 1.0;

  double stat = 0.0;
  std::size_t live_cols = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (col_total[b] == 0.0) continue;  // value never observed anywhere
    ++live_cols;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const double expected = row_total[g] * col_total[b] / total;
      if (expected == 0.0) continue;
      const double d = static_cast<double>(groups[g][b]) - expected;
      stat += d * d / expected;
    }
  }
  if (live_cols < 2) return 1.0;
  const double dof =
      static_cast<double>(groups.size() - 1) * static_cast<double>(live_cols - 1);
  return chi_square_pvalue(stat, dof);
}

std::uint64_t library_fingerprint(const std::vector<FieldMatrix>& library) {
  std::vector<std::uint8_t> bytes;
  for (const FieldMatrix& b : library) {
    const auto mb = matrix_bytes(b);
    bytes.insert(bytes.end(), mb.begin(), mb.end());
  }
  return fnv1a64(bytes);
}

std::vector<ViewSample> views_from_transcript(
    const JobTranscript& t, const std::vector<FieldMatrix>& library) {
  const std::uint64_t fp = library_fingerprint(library);
  std::vector<ViewSample> out;
  for (const WorkerRecord& w : t.workers) {
    if (!w.result) continue;
    out.push_back({t.params.D, w.worker, w.query_bytes, w.share, *w.result, fp});
  }
  return out;
}

nlohmann::json CheckResult::to_json() const {
  return {{"name", name},        {"config", config},
          {"statistic", statistic}, {"threshold", threshold},
          {"passed", passed},    {"retried", retried},
          {"detail", detail}};
}

bool AuditReport::all_passed() const {
  for (const CheckResult& c : checks)
    if (!c.passed) return false;
  return true;
}

nlohmann::json AuditReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const CheckResult& c : checks) arr.push_back(c.to_json());
  return {{"schema", "pscode.audit.v1"},
          {"checks", arr},
          {"warnings", warnings},
          {"all_passed", all_passed()}};
}

std::string AuditReport::to_string() const { return to_json().dump(2) + "\n"; }

namespace {

// Enumerates 1 x cells row vectors over GF(q) in odometer order.
struct MaskEnumerator {
  const PrimeField& field;
  std::vector<std::uint64_t> current;
  bool done = false;

  MaskEnumerator(const PrimeField& f, std::size_t cells)
      : field(f), current(cells, 0) {}

  bool next() {
    if (done) return false;
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (++current[i] < field.modulus()) return true;
      current[i] = 0;
    }
    done = true;
    return false;
  }
};

std::uint64_t encode_tuple(const PrimeField& f,
                           const std::vector<std::uint64_t>& v) {
  std::uint64_t idx = 0;
  for (std::size_t i = v.size(); i-- > 0;) idx = idx * f.modulus() + v[i];
  return idx;
}

// The audited map, written out with bare field ops so this module does
// not lean on the encoder it is checking: share_j = sum_l A(l,j) x^l
// + R_j x^m.
std::vector<std::uint64_t> masked_row(const PrimeField& f,
                                      const std::vector<std::uint64_t>& a_rows,
                                      std::size_t cells, std::size_t m,
                                      const std::vector<std::uint64_t>& mask,
                                      std::uint64_t x) {
  std::vector<std::uint64_t> share(cells, 0);
  for (std::size_t l = 0; l < m; ++l) {
    const std::uint64_t xl = f.pow(x, l);
    for (std::size_t j = 0; j < cells; ++j)
      share[j] = f.add(share[j], f.mul(a_rows[l * cells + j], xl));
  }
  const std::uint64_t xm = f.pow(x, m);
  for (std::size_t j = 0; j < cells; ++j)
    share[j] = f.add(share[j], f.mul(mask[j], xm));
  return share;
}

}  // namespace

CheckResult check_masking_bijection(const PrimeField& field, std::uint64_t x,
                                    std::size_t m, std::size_t mask_cols) {
  CheckResult res;
  res.name = "masking_bijection";
  res.config = {{"q", field.modulus()}, {"x", x}, {"m", m},
                {"mask_cols", mask_cols}};
  const std::uint64_t q = field.modulus();
  double space = 1.0;
  for (std::size_t j = 0; j < mask_cols; ++j) space *= static_cast<double>(q);
  res.threshold = space;

  // Two deterministic, distinct inputs; each row block is 1 x mask_cols.
  std::vector<std::uint64_t> a1(m * mask_cols), a2(m * mask_cols);
  for (std::size_t i = 0; i < a1.size(); ++i) {
    a1[i] = field.reduce(i + 1);
    a2[i] = field.reduce(i + 2);
  }

  std::size_t min_image = static_cast<std::size_t>(space);
  for (const auto& a : {a1, a2}) {
    std::vector<bool> seen(static_cast<std::size_t>(space), false);
    std::size_t image = 0;
    MaskEnumerator it(field, mask_cols);
    do {
      const auto share = masked_row(field, a, mask_cols, m, it.current, x);
      const std::uint64_t idx = encode_tuple(field, share);
      if (!seen[idx]) {
        seen[idx] = true;
        ++image;
      }
    } while (it.next());
    min_image = std::min(min_image, image);
  }

  res.statistic = static_cast<double>(min_image);
  res.passed = min_image == static_cast<std::size_t>(space);
  if (x == 0 && !res.passed)
    res.detail = "A_0 exposed: at x = 0 the share is constant in R";
  else if (!res.passed)
    res.detail = "mask map is not a bijection on the share space";
  return res;
}

CheckResult check_share_uniformity(const PrimeField& field,
                                   const FieldMatrix& a,
                                   const FieldMatrix& a_prime, std::uint64_t x,
                                   std::size_t samples, std::uint64_t seed) {
  CheckResult res;
  res.name = "share_uniformity";
  const std::uint64_t q = field.modulus();
  const std::size_t cells = a.rows() * a.cols();
  if (a_prime.rows() != a.rows() || a_prime.cols() != a.cols())
    throw std::invalid_argument("check_share_uniformity: shape mismatch");

  double space = 1.0;
  for (std::size_t j = 0; j < cells; ++j) space *= static_cast<double>(q);
  const bool exhaustive = samples == 0;  // samples = 0 requests enumeration
  if (exhaustive && space > 1e6)
    throw std::invalid_argument(
        "check_share_uniformity: share space too large to enumerate");
  res.config = {{"q", q},
                {"x", x},
                {"cells", cells},
                {"mode", exhaustive ? "exhaustive" : "sampled"},
                {"samples", samples}};

  const std::vector<std::uint64_t>& flat_a = a.entries();
  const std::vector<std::uint64_t>& flat_a2 = a_prime.entries();

  if (exhaustive) {
    const std::size_t bins = static_cast<std::size_t>(space);
    std::vector<std::uint64_t> h1(bins, 0), h2(bins, 0);
    MaskEnumerator it(field, cells);
    do {
      h1[encode_tuple(field,
                      masked_row(field, flat_a, cells, 1, it.current, x))]++;
      h2[encode_tuple(field,
                      masked_row(field, flat_a2, cells, 1, it.current, x))]++;
    } while (it.next());
    bool uniform = h1 == h2;
    for (std::uint64_t c : h1) uniform = uniform && c == 1;
    res.statistic = uniform ? 1.0 : 0.0;
    res.threshold = 1.0;
    res.passed = uniform;
    if (!uniform) res.detail = "share distribution differs between inputs";
    return res;
  }

  auto sampled_pvalue = [&](std::uint64_t run_seed) {
    std::mt19937_64 rng(run_seed);
    const std::size_t bins = static_cast<std::size_t>(space);
    std::vector<std::vector<std::uint64_t>> hists(
        2, std::vector<std::uint64_t>(bins, 0));
    std::vector<std::uint64_t> mask(cells);
    for (std::size_t i = 0; i < samples; ++i) {
      for (auto& cell : mask) cell = uniform_below(rng, q);
      hists[0][encode_tuple(field,
                            masked_row(field, flat_a, cells, 1, mask, x))]++;
      for (auto& cell : mask) cell = uniform_below(rng, q);
      hists[1][encode_tuple(field,
                            masked_row(field, flat_a2, cells, 1, mask, x))]++;
    }
    return chi_square_homogeneity_pvalue(hists);
  };

  res.threshold = kAlpha;
  res.statistic = sampled_pvalue(seed);
  res.passed = res.statistic > kAlpha;
  if (!res.passed) {
    res.retried = true;
    res.statistic = sampled_pvalue(retry_seed(seed));
    res.passed = res.statistic > kAlpha;
  }
  if (!res.passed)
    res.detail = "share distributions for the two inputs differ (p <= 0.01)";
  return res;
}

CheckResult check_query_symmetry(const CodeParams& params, std::size_t samples,
                                 std::uint64_t seed) {
  CheckResult res;
  res.name = "query_symmetry";
  res.config = {{"q", params.field.modulus()}, {"N", params.N},
                {"M", params.M},               {"m", params.m},
                {"n", params.n},               {"samples", samples}};
  res.threshold = kAlpha;
  if (params.M < 2) {
    res.statistic = 1.0;
    res.passed = true;
    res.detail = "vacuous: only one possible desired index";
    return res;
  }

  const std::uint64_t q = params.field.modulus();
  const std::size_t bins = q - 1;  // nonzero field values

  // Structural comparison uses one serialized query per D; the fixed
  // sub-queries carry no randomness.
  std::vector<std::vector<std::uint8_t>> reference(params.M);

  auto run_once = [&](std::uint64_t run_seed, CheckResult& out) {
    std::vector<std::vector<std::vector<std::uint64_t>>> hist(
        params.M, std::vector<std::vector<std::uint64_t>>(
                      params.M, std::vector<std::uint64_t>(bins, 0)));
    for (std::size_t d = 1; d <= params.M; ++d) {
      CodeParams p = params;
      p.D = d;
      for (std::size_t j = 0; j < samples; ++j) {
        std::mt19937_64 rng(counter_word(run_seed, d, j));
        const PointAssignment points = sample_points(p, rng);
        const Query query = make_worker_query(p, points, 1);
        for (std::size_t k = 0; k < params.M; ++k)
          hist[k][d - 1][query.eval_points[k] - 1]++;
        if (j == 0) reference[d - 1] = query.serialize();
      }
    }

    // (a) identical schema and byte length across D
    for (std::size_t d = 1; d < params.M; ++d) {
      if (reference[d].size() != reference[0].size()) {
        out.statistic = 0.0;
        out.passed = false;
        out.detail = "serialized query lengths differ across D";
        return;
      }
    }
    // (b) partition, sum, compute sub-queries byte-identical across D
    for (auto range :
         {query_partition_range(), query_sum_range(), query_compute_range()}) {
      for (std::size_t d = 1; d < params.M; ++d) {
        for (std::size_t off = range.first; off < range.second; ++off) {
          if (reference[d][off] != reference[0][off]) {
            out.statistic = 0.0;
            out.passed = false;
            out.detail = "fixed sub-query bytes differ across D at offset " +
                         std::to_string(off);
            return;
          }
        }
      }
    }
    // (c) per-index point marginals homogeneous across D
    double min_p = 1.0;
    for (std::size_t k = 0; k < params.M; ++k)
      min_p = std::min(min_p, chi_square_homogeneity_pvalue(hist[k]));
    out.statistic = min_p;
    out.passed = min_p > kAlpha;
    if (!out.passed)
      out.detail = "evaluation-point marginals depend on D (p <= 0.01)";
  };

  run_once(seed, res);
  if (!res.passed && res.detail.find("offset") == std::string::npos &&
      res.detail.find("lengths") == std::string::npos) {
    res.retried = true;
    res.detail.clear();
    run_once(retry_seed(seed), res);
    if (!res.passed && res.detail.empty())
      res.detail = "evaluation-point marginals depend on D (p <= 0.01)";
  }
  return res;
}

CheckResult check_result_determinism(const std::vector<ViewSample>& views,
                                     const std::vector<FieldMatrix>& library) {
  CheckResult res;
  res.name = "result_determinism";
  res.config = {{"views", views.size()}, {"library_size", library.size()}};
  res.threshold = static_cast<double>(views.size());
  if (views.empty()) {
    res.passed = true;
    res.detail = "vacuous: no views";
    return res;
  }

  const std::uint64_t fp = library_fingerprint(library);
  std::size_t verified = 0;
  for (const ViewSample& v : views) {
    if (v.library_fingerprint != fp) {
      res.detail = "view " + std::to_string(v.worker) +
                   " was produced against a different library";
      break;
    }
    const Query query = Query::deserialize(v.query_bytes);
    const FieldMatrix lib_share = library_share_at_points(
        library, query.eval_points, query.parts, query.step);
    if (worker_compute(v.share, lib_share) != v.result) {
      res.detail = "worker " + std::to_string(v.worker) +
                   " returned a value outside the declared function";
      break;
    }
    ++verified;
  }
  res.statistic = static_cast<double>(verified);
  res.passed = verified == views.size();
  return res;
}

AuditReport run_default_audit(const AuditOptions& options) {
  AuditReport report;

  // Masking bijection, exhaustive over every nonzero point of each tiny
  // field, 1x1 and 1x2 masks, with and without a degree-1 data block.
  for (std::uint64_t q : {5ull, 7ull}) {
    const PrimeField field(q);
    for (std::size_t m : {std::size_t{1}, std::size_t{2}}) {
      for (std::size_t cols : {std::size_t{1}, std::size_t{2}}) {
        CheckResult merged;
        merged.name = "masking_bijection";
        merged.config = {{"q", q}, {"m", m}, {"mask_cols", cols},
                         {"x", "all nonzero"}};
        merged.passed = true;
        std::size_t verified = 0;
        for (std::uint64_t x = 1; x < q; ++x) {
          CheckResult one = check_masking_bijection(field, x, m, cols);
          merged.threshold = one.threshold;
          if (!one.passed) {
            merged = one;
            break;
          }
          ++verified;
        }
        if (merged.passed) {
          merged.statistic = static_cast<double>(verified);
          merged.threshold = static_cast<double>(q - 1);
          merged.detail = "bijection holds for every nonzero x";
        }
        report.checks.push_back(std::move(merged));
      }
    }
  }

  if (options.allow_zero_point) {
    // Deliberate violation: the x = 0 share is A_0 itself. The check must
    // catch it, and the report must go red.
    CheckResult zero = check_masking_bijection(PrimeField(5), 0, 1, 1);
    zero.name = "masking_bijection_zero_point_injected";
    report.checks.push_back(std::move(zero));
  }

  {
    const PrimeField f5(5);
    report.checks.push_back(check_share_uniformity(
        f5, FieldMatrix::from_entries(f5, 1, 1, {2}),
        FieldMatrix::from_entries(f5, 1, 1, {4}), 3, 0, options.seed));
    const PrimeField f61(61);
    report.checks.push_back(check_share_uniformity(
        f61, FieldMatrix::from_entries(f61, 1, 1, {7}),
        FieldMatrix::from_entries(f61, 1, 1, {42}), 7,
        options.uniformity_samples, splitmix64(options.seed ^ 1)));
  }

  {
    CodeParams params{PrimeField(17), 1, 2, 2, 2, 1, 1, 1, 1};
    const std::size_t min_samples = 20 * (params.field.modulus() - 1);
    if (options.symmetry_samples < min_samples)
      report.warnings.push_back(
          "statistical power insufficient for query_symmetry: " +
          std::to_string(options.symmetry_samples) + " samples per D < " +
          std::to_string(min_samples));
    report.checks.push_back(check_query_symmetry(
        params, options.symmetry_samples, splitmix64(options.seed ^ 2)));
  }

  {
    CodeParams params{PrimeField(97), 2, 3, 2, 12, 1, 2, 2, 2};
    std::mt19937_64 rng(splitmix64(options.seed ^ 3));
    const FieldMatrix a =
        FieldMatrix::random(params.field, params.r, params.s, rng);
    std::vector<FieldMatrix> library;
    for (std::size_t k = 0; k < params.M; ++k)
      library.push_back(
          FieldMatrix::random(params.field, params.s, params.t, rng));
    const JobTranscript t = run_job(params, a, library,
                                    {.seed = splitmix64(options.seed ^ 4)});
    report.checks.push_back(
        check_result_determinism(views_from_transcript(t, library), library));
  }

  return report;
}

}  // namespace pscode
