#include "pscode/latency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>

#include "pscode/rng.hpp"

namespace pscode {

void LatencyParams::validate() const {
  if (!(mu > 0)) throw std::invalid_argument("mu must be > 0");
  if (!(gamma >= 0)) throw std::invalid_argument("gamma must be >= 0");
  if (workers < 1) throw std::invalid_argument("need at least one worker");
  if (trials < 1) throw std::invalid_argument("need at least one trial");
}

double SchemeSpec::workload_factor() const {
  if (variant == SchemeVariant::kConventional)
    return 1.0 / static_cast<double>(threshold());
  return 1.0 / (static_cast<double>(m + 1) * static_cast<double>(n - 1));
}

void SchemeSpec::validate() const {
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (variant != SchemeVariant::kConventional && n < 2)
    throw std::invalid_argument("n must be >= 2 for a nontrivial split");
  if (threshold() > N)
    throw std::invalid_argument("threshold n(m+1) exceeds N");
  if (variant == SchemeVariant::kGroupedBaseline && N % n != 0)
    throw std::invalid_argument("grouped baseline needs n | N");
}

double analytic_conventional(const LatencyParams& params, std::size_t K) {
  params.validate();
  if (K < 1 || K >= params.workers)
    throw std::invalid_argument(
        "analytic_conventional: need 1 <= K < N (the log diverges at K = N)");
  const double N = static_cast<double>(params.workers);
  const double Kd = static_cast<double>(K);
  return (params.gamma + std::log(N / (N - Kd)) / params.mu) / Kd;
}

double analytic_private_secure(const LatencyParams& params, std::size_t m,
                               std::size_t n) {
  params.validate();
  if (m < 1 || n < 2) throw std::invalid_argument("need m >= 1, n >= 2");
  const std::size_t K = n * (m + 1);
  if (K >= params.workers)
    throw std::invalid_argument(
        "analytic_private_secure: need n(m+1) < N");
  const double N = static_cast<double>(params.workers);
  const double c = 1.0 / (static_cast<double>(m + 1) * (n - 1));
  return c * (params.gamma +
              std::log(N / (N - static_cast<double>(K))) / params.mu);
}

double harmonic_number(std::size_t k) {
  double h = 0.0;
  for (std::size_t i = 1; i <= k; ++i) h += 1.0 / static_cast<double>(i);
  return h;
}

double harmonic_expectation(const LatencyParams& params,
                            const SchemeSpec& spec) {
  spec.validate();
  if (spec.variant == SchemeVariant::kGroupedBaseline)
    throw std::invalid_argument(
        "harmonic_expectation: no closed form for the grouped rule");
  const std::size_t K = spec.threshold();
  const double os =
      harmonic_number(spec.N) - harmonic_number(spec.N - K);
  return spec.workload_factor() * (params.gamma + os / params.mu);
}

namespace {

double worker_finish_time(const LatencyParams& params, std::uint64_t trial,
                          std::size_t worker, double c) {
  const double u = unit_double(counter_word(params.seed, trial, worker));
  return c * (params.gamma + (-std::log1p(-u)) / params.mu);
}

// K-th smallest of the first `count` entries of buf.
double kth_smallest(std::vector<double>& buf, std::size_t k) {
  std::nth_element(buf.begin(), buf.begin() + (k - 1), buf.end());
  return buf[k - 1];
}

}  // namespace

double trial_time_threshold(const LatencyParams& params, std::uint64_t trial,
                            std::size_t N, std::size_t K, double c) {
  std::vector<double> times(N);
  for (std::size_t w = 1; w <= N; ++w)
    times[w - 1] = worker_finish_time(params, trial, w, c);
  return kth_smallest(times, K);
}

double trial_time_grouped(const LatencyParams& params, std::uint64_t trial,
                          std::size_t N, std::size_t groups,
                          std::size_t per_group, double c) {
  const std::size_t size = N / groups;
  double worst = 0.0;
  std::vector<double> times(size);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t j = 0; j < size; ++j)
      times[j] = worker_finish_time(params, trial, g * size + j + 1, c);
    worst = std::max(worst, kth_smallest(times, per_group));
  }
  return worst;
}

McResult mc_simulate(const SchemeSpec& spec, const LatencyParams& params,
                     unsigned threads) {
  params.validate();
  spec.validate();
  const double c = spec.workload_factor();
  const std::size_t K = spec.threshold();

  // Per-trial values land in fixed slots; the reduction below runs in
  // index order, so the outcome is independent of the thread count.
  std::vector<double> per_trial(params.trials);
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t trial = begin; trial < end; ++trial) {
      per_trial[trial] =
          spec.variant == SchemeVariant::kGroupedBaseline
              ? trial_time_grouped(params, trial, spec.N, spec.n, spec.m + 1, c)
              : trial_time_threshold(params, trial, spec.N, K, c);
    }
  };

  const unsigned workers = std::max(1u, threads);
  if (workers == 1 || params.trials < 1024) {
    run_range(0, params.trials);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (params.trials + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = std::min<std::size_t>(w * chunk, params.trials);
      const std::size_t end = std::min(begin + chunk, params.trials);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  double sum = 0.0;
  for (double v : per_trial) sum += v;
  const double mean = sum / static_cast<double>(params.trials);
  double ssq = 0.0;
  for (double v : per_trial) ssq += (v - mean) * (v - mean);
  const double var = params.trials > 1
                         ? ssq / static_cast<double>(params.trials - 1)
                         : 0.0;
  const double se = std::sqrt(var / static_cast<double>(params.trials));
  return {mean, se, mean - 1.96 * se, mean + 1.96 * se, params.trials};
}

McResult grouped_baseline_simulate(const LatencyParams& params, std::size_t m,
                                   std::size_t n, std::size_t M, std::size_t N,
                                   unsigned threads) {
  SchemeSpec spec{SchemeVariant::kGroupedBaseline, m, n, M, N};
  return mc_simulate(spec, params, threads);
}

namespace {

const char* variant_name(SchemeVariant v) {
  switch (v) {
    case SchemeVariant::kConventional:
      return "conventional";
    case SchemeVariant::kPrivateSecure:
      return "private_secure";
    case SchemeVariant::kGroupedBaseline:
      return "grouped_baseline";
  }
  return "?";
}

SweepRow make_row(const SchemeSpec& spec, const LatencyParams& params,
                  double analytic, const McResult& mc) {
  return {variant_name(spec.variant),
          spec.N,
          spec.M,
          spec.m,
          spec.n,
          spec.threshold(),
          params.mu,
          params.gamma,
          analytic,
          mc.mean,
          mc.ci_low,
          mc.ci_high,
          mc.trials,
          params.seed};
}

SweepRow skipped_row(const LatencyParams& params, std::size_t M, std::size_t m,
                     std::size_t n) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {"skipped_K>=N", params.workers, M, m, n, n * (m + 1),
          params.mu, params.gamma, nan, nan, nan, nan, 0, params.seed};
}

void append_point(std::vector<SweepRow>& rows, const LatencyParams& params,
                  std::size_t M, std::size_t m, std::size_t n,
                  unsigned threads) {
  const std::size_t K = n * (m + 1);
  if (K >= params.workers) {
    rows.push_back(skipped_row(params, M, m, n));
    return;
  }
  SchemeSpec conv{SchemeVariant::kConventional, m, n, M, params.workers};
  SchemeSpec ps{SchemeVariant::kPrivateSecure, m, n, M, params.workers};
  rows.push_back(make_row(conv, params, analytic_conventional(params, K),
                          mc_simulate(conv, params, threads)));
  rows.push_back(make_row(ps, params, analytic_private_secure(params, m, n),
                          mc_simulate(ps, params, threads)));
  if (params.workers % n == 0) {
    SchemeSpec grouped{SchemeVariant::kGroupedBaseline, m, n, M,
                       params.workers};
    rows.push_back(make_row(grouped, params,
                            std::numeric_limits<double>::quiet_NaN(),
                            mc_simulate(grouped, params, threads)));
  }
}

}  // namespace

std::vector<SweepRow> sweep_over_k(const LatencyParams& params, std::size_t M,
                                   std::size_t n,
                                   const std::vector<std::size_t>& k_values,
                                   unsigned threads) {
  std::vector<SweepRow> rows;
  for (std::size_t K : k_values) {
    if (K % n != 0 || K / n < 2) {
      rows.push_back(skipped_row(params, M, 0, n));
      rows.back().scheme = "skipped_K_not_n(m+1)";
      rows.back().K = K;
      continue;
    }
    append_point(rows, params, M, K / n - 1, n, threads);
  }
  return rows;
}

std::vector<SweepRow> sweep_over_mu(const LatencyParams& params, std::size_t M,
                                    std::size_t m, std::size_t n,
                                    const std::vector<double>& mu_values,
                                    unsigned threads) {
  std::vector<SweepRow> rows;
  for (double mu : mu_values) {
    LatencyParams point = params;
    point.mu = mu;
    append_point(rows, point, M, m, n, threads);
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out;
  out += "# pscode.sweep.v1\n";
  out += "# grouped_baseline uses a reconstructed completion rule: m+1 "
         "results from each of n groups\n";
  out += "scheme,N,M,m,n,K,mu,gamma,analytic_time,mc_mean,mc_ci_low,"
         "mc_ci_high,trials,seed\n";
  char buf[512];
  auto fmt = [&](double v) -> std::string {
    if (std::isnan(v)) return "";
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
  };
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%zu,%zu,%zu,%zu,%zu,", r.scheme.c_str(),
                  r.N, r.M, r.m, r.n, r.K);
    out += buf;
    out += fmt(r.mu) + "," + fmt(r.gamma) + "," + fmt(r.analytic_time) + "," +
           fmt(r.mc_mean) + "," + fmt(r.mc_ci_low) + "," + fmt(r.mc_ci_high);
    std::snprintf(buf, sizeof(buf), ",%zu,%llu\n", r.trials,
                  static_cast<unsigned long long>(r.seed));
    out += buf;
  }
  return out;
}

}  // namespace pscode
