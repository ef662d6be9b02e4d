#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace pscode {

// Shifted-exponential worker-time model: a worker assigned a c-fraction of
// the job finishes in c * (gamma + Exp(mu)).
struct LatencyParams {
  double mu = 0.1;       // straggling rate
  double gamma = 0.1;    // shift (hard floor)
  std::size_t workers = 12;
  std::size_t trials = 100000;
  std::uint64_t seed = 1;

  void validate() const;
};

enum class SchemeVariant { kConventional, kPrivateSecure, kGroupedBaseline };

// A scheme is a per-worker workload fraction plus a completion rule over
// the N worker finish times.
struct SchemeSpec {
  SchemeVariant variant = SchemeVariant::kPrivateSecure;
  std::size_t m = 1;
  std::size_t n = 2;
  std::size_t M = 1;
  std::size_t N = 12;

  std::size_t threshold() const { return n * (m + 1); }
  // 1/K for the conventional code; 1/((m+1)(n-1)) for the private-secure
  // code and the grouped comparator (both do n/(n-1) times the direct
  // work, spread over K workers).
  double workload_factor() const;

  void validate() const;
};

// Mean completion time of the conventional code,
//   (1/K) (gamma + (1/mu) ln(N / (N-K))).
// The log term is the classic approximation of the K-th order statistic of
// N exponentials; K >= N diverges and is rejected.
double analytic_conventional(const LatencyParams& params, std::size_t K);

// Mean completion time of the private-secure code,
//   (1/((m+1)(n-1))) (gamma + (1/mu) ln(N / (N - n(m+1)))).
double analytic_private_secure(const LatencyParams& params, std::size_t m,
                               std::size_t n);

double harmonic_number(std::size_t k);

// Exact expectation the log form approximates:
//   c (gamma + (H_N - H_{N-K}) / mu).
// Holds for the K-th-order-statistic completion rules (not the grouped
// one, which has no such closed form here).
double harmonic_expectation(const LatencyParams& params, const SchemeSpec& spec);

struct McResult {
  double mean = 0.0;
  double stderr_mean = 0.0;
  double ci_low = 0.0;   // 95% normal interval
  double ci_high = 0.0;
  std::size_t trials = 0;
};

// One trial's completion time under the K-th-arrival rule. Exposed so the
// grouped rule's degeneracies can be checked against it draw-for-draw.
double trial_time_threshold(const LatencyParams& params, std::uint64_t trial,
                            std::size_t N, std::size_t K, double c);

// One trial under the grouped rule: workers split into `groups` equal
// groups, each of which must deliver `per_group` results; the slowest
// group ends the trial.
double trial_time_grouped(const LatencyParams& params, std::uint64_t trial,
                          std::size_t N, std::size_t groups,
                          std::size_t per_group, double c);

// Monte Carlo mean and 95% CI. Trials use counter-based randomness keyed
// by (seed, trial, worker): the result is bit-identical for any thread
// count and any execution order.
McResult mc_simulate(const SchemeSpec& spec, const LatencyParams& params,
                     unsigned threads = 1);

// The grouped private-code comparator: n groups of N/n workers, m+1
// results required from every group. This completion rule is a
// reconstruction (the comparator's own formula is not reproduced here);
// outputs carry a "reconstructed" marker wherever they are emitted.
McResult grouped_baseline_simulate(const LatencyParams& params, std::size_t m,
                                   std::size_t n, std::size_t M, std::size_t N,
                                   unsigned threads = 1);

// One CSV row of a sweep. analytic_time is NaN where no closed form is
// reported (grouped baseline, skipped rows).
struct SweepRow {
  std::string scheme;
  std::size_t N = 0, M = 0, m = 0, n = 0, K = 0;
  double mu = 0.0, gamma = 0.0;
  double analytic_time = 0.0;
  double mc_mean = 0.0, mc_ci_low = 0.0, mc_ci_high = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

// Sweep over K = n(m+1) values at fixed (N, M, n, mu, gamma): for each K,
// rows for conventional, private_secure and the grouped baseline.
// K >= N yields a single "skipped" marker row.
std::vector<SweepRow> sweep_over_k(const LatencyParams& params, std::size_t M,
                                   std::size_t n,
                                   const std::vector<std::size_t>& k_values,
                                   unsigned threads = 1);

// Sweep over mu at fixed (N, M, m, n, gamma).
std::vector<SweepRow> sweep_over_mu(const LatencyParams& params, std::size_t M,
                                    std::size_t m, std::size_t n,
                                    const std::vector<double>& mu_values,
                                    unsigned threads = 1);

// Schema-stamped CSV; byte-stable for fixed inputs.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace pscode
