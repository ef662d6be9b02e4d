// Command-line front end: demo walkthrough, single coded jobs, latency
// sweeps, and the privacy/security audit suite.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pscode/audit.hpp"
#include "pscode/latency.hpp"
#include "pscode/protocol.hpp"
#include "pscode/rng.hpp"

namespace {

using namespace pscode;

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitConfig = 2;

nlohmann::json g_config;  // from --config; flags win on conflict

template <typename T>
void merge_config(CLI::App* cmd, const std::string& flag, const char* key,
                  T& var) {
  if (g_config.contains(key) && cmd->count(flag) == 0)
    var = g_config.at(key).get<T>();
}

struct JobFlags {
  std::uint64_t q = PrimeField::kDefaultModulus;
  std::size_t m = 2, n = 3, M = 2, N = 12, D = 1;
  std::size_t r = 4, s = 3, t = 4;
  std::uint64_t seed = 1;
  double mu = 1.0, gamma = 0.0;
  unsigned threads = 1;
};

void add_job_flags(CLI::App* cmd, JobFlags& f) {
  cmd->add_option("--q", f.q, "prime field modulus");
  cmd->add_option("--m", f.m, "row blocks of A");
  cmd->add_option("--n", f.n, "code parameter (library split is n-1)");
  cmd->add_option("--M", f.M, "library size");
  cmd->add_option("--N", f.N, "worker count");
  cmd->add_option("--D", f.D, "desired library index (1-based)");
  cmd->add_option("--r", f.r, "rows of A");
  cmd->add_option("--s", f.s, "cols of A / rows of each B_k");
  cmd->add_option("--t", f.t, "cols of each B_k");
  cmd->add_option("--seed", f.seed, "seed for all randomness");
  cmd->add_option("--mu", f.mu, "worker delay straggling rate");
  cmd->add_option("--gamma", f.gamma, "worker delay shift");
  cmd->add_option("--threads", f.threads, "worker compute threads");
}

void merge_job_flags(CLI::App* cmd, JobFlags& f) {
  merge_config(cmd, "--q", "q", f.q);
  merge_config(cmd, "--m", "m", f.m);
  merge_config(cmd, "--n", "n", f.n);
  merge_config(cmd, "--M", "M", f.M);
  merge_config(cmd, "--N", "N", f.N);
  merge_config(cmd, "--D", "D", f.D);
  merge_config(cmd, "--r", "r", f.r);
  merge_config(cmd, "--s", "s", f.s);
  merge_config(cmd, "--t", "t", f.t);
  merge_config(cmd, "--seed", "seed", f.seed);
  merge_config(cmd, "--mu", "mu", f.mu);
  merge_config(cmd, "--gamma", "gamma", f.gamma);
  merge_config(cmd, "--threads", "threads", f.threads);
}

CodeParams params_from_flags(const JobFlags& f) {
  return CodeParams{PrimeField(f.q), f.m, f.n, f.M, f.N, f.D, f.r, f.s, f.t};
}

// Input data is drawn from a stream separate from the protocol's own
// randomness so both are pinned by one --seed.
std::mt19937_64 data_rng(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed ^ 0xdafa5eedULL));
}

std::vector<FieldMatrix> random_library(const CodeParams& p,
                                        std::mt19937_64& rng) {
  std::vector<FieldMatrix> lib;
  lib.reserve(p.M);
  for (std::size_t k = 0; k < p.M; ++k)
    lib.push_back(FieldMatrix::random(p.field, p.s, p.t, rng));
  return lib;
}

bool write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
  return static_cast<bool>(out);
}

std::string coefficient_role(const CodeParams& p, std::size_t l) {
  char buf[128];
  const std::size_t u = l % (p.m + 1);
  const std::size_t blk = l / (p.m + 1);
  if (u == p.m) {
    if (blk == 0) return "R * (sum of undesired evaluations)   [discarded]";
    std::snprintf(buf, sizeof(buf), "R * B_D,%zu   [discarded]", blk);
    return buf;
  }
  if (blk == 0) {
    std::snprintf(buf, sizeof(buf),
                  "A_%zu * (sum of undesired evaluations)   [discarded]", u);
    return buf;
  }
  std::snprintf(buf, sizeof(buf), "A_%zu * B_D,%zu   -> output block (%zu,%zu)",
                u, blk, u, blk - 1);
  return buf;
}

// First-K evaluations of a finished job, in arrival order.
std::vector<Evaluation> first_k_evaluations(const JobTranscript& t) {
  std::vector<const WorkerRecord*> order;
  for (const WorkerRecord& w : t.workers) order.push_back(&w);
  std::sort(order.begin(), order.end(),
            [](const WorkerRecord* a, const WorkerRecord* b) {
              if (a->time != b->time) return a->time < b->time;
              return a->worker < b->worker;
            });
  std::vector<Evaluation> evals;
  for (const WorkerRecord* w : order) {
    if (!w->result) continue;
    evals.push_back({t.points.worker_points[w->worker - 1], *w->result});
    if (evals.size() == t.threshold) break;
  }
  return evals;
}

int cmd_demo(const JobFlags& flags) {
  const CodeParams params = params_from_flags(flags);
  params.validate();

  std::mt19937_64 rng = data_rng(flags.seed);
  const FieldMatrix a = FieldMatrix::random(params.field, params.r, params.s, rng);
  const std::vector<FieldMatrix> library = random_library(params, rng);

  const JobTranscript transcript =
      run_job(params, a, library,
              {flags.seed, flags.mu, flags.gamma, flags.threads});

  std::printf("params: q=%llu m=%zu n=%zu M=%zu N=%zu D=%zu r=%zu s=%zu t=%zu\n",
              static_cast<unsigned long long>(params.field.modulus()), params.m,
              params.n, params.M, params.N, params.D, params.r, params.s,
              params.t);
  const std::size_t k = params.recovery_threshold();
  std::printf("recovery threshold K = %zu\n", k);
  std::printf("worker-result polynomial degree = %zu\n", k - 1);

  const std::vector<Evaluation> evals = first_k_evaluations(transcript);
  if (evals.size() < k) {
    std::printf("job failed: only %zu of %zu results\n", evals.size(), k);
    return kExitVerification;
  }
  interpolate(evals, k);  // the decode the table below describes
  std::printf("coefficient roles:\n");
  for (std::size_t l = 0; l < k; ++l)
    std::printf("  Z_%zu: %s\n", l, coefficient_role(params, l).c_str());

  const FieldMatrix expected = matmul(a, library[params.D - 1]);
  const bool ok = transcript.decoded && *transcript.decoded == expected;
  std::printf("decoded == A*B_%zu: %s\n", params.D, ok ? "OK" : "MISMATCH");

  const std::string body = transcript_to_string(transcript);
  std::printf("transcript hash: 0x%016llx\n",
              static_cast<unsigned long long>(fnv1a64(std::span(
                  reinterpret_cast<const std::uint8_t*>(body.data()),
                  body.size()))));
  return ok ? kExitOk : kExitVerification;
}

int cmd_run(const JobFlags& flags, const std::string& out_path) {
  const CodeParams params = params_from_flags(flags);
  params.validate();  // reject bad configs before any compute

  std::mt19937_64 rng = data_rng(flags.seed);
  const FieldMatrix a = FieldMatrix::random(params.field, params.r, params.s, rng);
  const std::vector<FieldMatrix> library = random_library(params, rng);

  const JobTranscript transcript =
      run_job(params, a, library,
              {flags.seed, flags.mu, flags.gamma, flags.threads});

  if (!write_file(out_path, transcript_to_string(transcript))) {
    std::fprintf(stderr, "error: cannot write %s\n", out_path.c_str());
    return kExitConfig;
  }

  if (!transcript.decoded) {
    std::fprintf(stderr, "job failed: fewer than K results\n");
    return kExitVerification;
  }
  if (*transcript.decoded != matmul(a, library[params.D - 1])) {
    std::fprintf(stderr, "verification failed: decoded != A*B_D\n");
    return kExitVerification;
  }
  const CheckResult determinism = check_result_determinism(
      views_from_transcript(transcript, library), library);
  if (!determinism.passed) {
    std::fprintf(stderr, "audit failed: %s\n", determinism.detail.c_str());
    return kExitVerification;
  }
  std::printf("decoded %zux%zu product, K=%zu of N=%zu used; transcript: %s\n",
              params.r, params.t, transcript.threshold, params.N,
              out_path.c_str());
  return kExitOk;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  const double step = (std::log10(hi) - std::log10(lo)) /
                      static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(std::pow(10.0, std::log10(lo) + step * static_cast<double>(i)));
  return out;
}

int cmd_simulate(const JobFlags& flags, const std::string& out_path,
                 const std::string& preset, std::size_t trials,
                 std::vector<std::size_t> sweep_k,
                 std::vector<double> sweep_mu) {
  LatencyParams base{flags.mu, flags.gamma, flags.N, trials, flags.seed};
  std::size_t M = flags.M, m = flags.m, n = flags.n;

  if (preset == "fig2") {
    base.mu = 0.1;
    base.gamma = 0.1;
    base.workers = 12;
    M = 4;
    n = 2;
    sweep_k = {4, 6, 8, 10};
    sweep_mu.clear();
  } else if (preset == "fig3") {
    base.gamma = 1.0;
    base.workers = 12;
    M = 4;
    m = 1;
    n = 2;
    sweep_mu = log_spaced(0.1, 10.0, 9);
    sweep_k.clear();
  } else if (!preset.empty() && preset != "demo") {
    std::fprintf(stderr, "error: unknown preset '%s'\n", preset.c_str());
    return kExitConfig;
  }
  base.validate();

  std::vector<SweepRow> rows;
  if (!sweep_k.empty()) {
    rows = sweep_over_k(base, M, n, sweep_k, flags.threads);
  } else if (!sweep_mu.empty()) {
    rows = sweep_over_mu(base, M, m, n, sweep_mu, flags.threads);
  } else {
    // single-point "sweep" at the configured (m, n)
    rows = sweep_over_k(base, M, n, {n * (m + 1)}, flags.threads);
  }

  for (const SweepRow& r : rows)
    if (r.scheme.rfind("skipped", 0) == 0)
      std::fprintf(stderr, "warning: sweep point K=%zu skipped (%s)\n", r.K,
                   r.scheme.c_str());

  if (!write_file(out_path, sweep_to_csv(rows))) {
    std::fprintf(stderr, "error: cannot write %s\n", out_path.c_str());
    return kExitConfig;
  }
  std::printf("wrote %zu rows to %s\n", rows.size(), out_path.c_str());
  return kExitOk;
}

int cmd_audit(std::uint64_t seed, std::size_t samples, bool samples_given,
              bool allow_zero_point, const std::string& out_path) {
  AuditOptions options;
  options.seed = seed;
  options.allow_zero_point = allow_zero_point;
  if (samples_given) {
    options.symmetry_samples = samples;
    options.uniformity_samples = samples;
  }

  const AuditReport report = run_default_audit(options);
  for (const std::string& w : report.warnings)
    std::fprintf(stderr, "warning: %s\n", w.c_str());
  for (const CheckResult& c : report.checks)
    std::printf("[%s] %s%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.empty() ? "" : ": ", c.detail.c_str());

  if (!out_path.empty() && !write_file(out_path, report.to_string())) {
    std::fprintf(stderr, "error: cannot write %s\n", out_path.c_str());
    return kExitConfig;
  }
  return report.all_passed() ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coded matrix multiplication with a masked input and a hidden "
               "library index"};
  app.require_subcommand(1);

  std::string config_path;
  auto add_config_flag = [&config_path](CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "JSON config file; explicit flags win on conflict");
  };

  JobFlags demo_flags;
  CLI::App* demo = app.add_subcommand(
      "demo", "worked 12-worker example with the coefficient table");
  add_job_flags(demo, demo_flags);
  add_config_flag(demo);

  JobFlags run_flags;
  std::string run_out = "transcript.json";
  CLI::App* run = app.add_subcommand("run", "execute one full coded job");
  add_job_flags(run, run_flags);
  add_config_flag(run);
  run->add_option("--out", run_out, "transcript output path");

  JobFlags sim_flags;
  sim_flags.mu = 0.1;
  sim_flags.gamma = 0.1;
  std::string sim_out = "sweep.csv";
  std::string preset;
  std::size_t trials = 100000;
  std::vector<std::size_t> sweep_k;
  std::vector<double> sweep_mu;
  CLI::App* sim = app.add_subcommand(
      "simulate", "latency model sweeps (analytic + Monte Carlo), CSV out");
  add_job_flags(sim, sim_flags);
  add_config_flag(sim);
  sim->add_option("--out", sim_out, "CSV output path");
  sim->add_option("--preset", preset, "fig2 | fig3");
  sim->add_option("--trials", trials, "Monte Carlo trials per point");
  sim->add_option("--sweep-k", sweep_k, "K values to sweep")->delimiter(',');
  sim->add_option("--sweep-mu", sweep_mu, "mu values to sweep")->delimiter(',');

  std::uint64_t audit_seed = 1;
  std::size_t audit_samples = 10000;
  bool allow_zero_point = false;
  std::string audit_out = "audit.json";
  CLI::App* audit = app.add_subcommand(
      "audit", "run the privacy/security check suite, JSON report out");
  add_config_flag(audit);
  audit->add_option("--seed", audit_seed, "seed for sampled checks");
  audit->add_option("--samples", audit_samples,
                    "samples per sampled statistical check");
  audit->add_flag("--allow-zero-point", allow_zero_point,
                  "inject the forbidden x=0 encoding (must be caught)");
  audit->add_option("--out", audit_out, "report output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::fprintf(stderr, "error: cannot read config %s\n",
                     config_path.c_str());
        return kExitConfig;
      }
      in >> g_config;
    }

    if (app.got_subcommand(demo)) {
      merge_job_flags(demo, demo_flags);
      return cmd_demo(demo_flags);
    }
    if (app.got_subcommand(run)) {
      merge_job_flags(run, run_flags);
      merge_config(run, "--out", "out", run_out);
      return cmd_run(run_flags, run_out);
    }
    if (app.got_subcommand(sim)) {
      merge_job_flags(sim, sim_flags);
      merge_config(sim, "--out", "out", sim_out);
      merge_config(sim, "--preset", "preset", preset);
      merge_config(sim, "--trials", "trials", trials);
      merge_config(sim, "--sweep-k", "sweep_k", sweep_k);
      merge_config(sim, "--sweep-mu", "sweep_mu", sweep_mu);
      return cmd_simulate(sim_flags, sim_out, preset, trials, sweep_k,
                          sweep_mu);
    }
    if (app.got_subcommand(audit)) {
      merge_config(audit, "--seed", "seed", audit_seed);
      const bool samples_given =
          audit->count("--samples") > 0 || g_config.contains("samples");
      merge_config(audit, "--samples", "samples", audit_samples);
      merge_config(audit, "--out", "out", audit_out);
      if (g_config.contains("allow_zero_point") &&
          audit->count("--allow-zero-point") == 0)
        allow_zero_point = g_config.at("allow_zero_point").get<bool>();
      return cmd_audit(audit_seed, audit_samples, samples_given,
                       allow_zero_point, audit_out);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitVerification;
  }
  return kExitConfig;
}
