#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pscode/code.hpp"

namespace pscode {

// A worker that receives a malformed query refuses to compute; the master
// simply sees one more straggler.
struct QueryRejected : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The four-part worker instruction. Everything except the evaluation
// points is a function of (m, n, M) alone, so serialized queries for any
// two desired indices are structurally identical.
struct Query {
  // partition sub-query: split each library matrix into `parts` column
  // blocks (right zero-padded); exponent of block l is l * step.
  std::uint32_t parts = 1;       // n - 1
  std::uint32_t step = 2;        // m + 1
  std::uint32_t sum_opcode = 1;  // symmetric sum of all M evaluations
  std::uint32_t compute_opcode = 1;  // multiply by masked share, return
  // evaluation sub-query: point for library index k at eval_points[k-1].
  std::vector<std::uint64_t> eval_points;

  std::vector<std::uint8_t> serialize() const;
  static Query deserialize(std::span<const std::uint8_t> bytes);
};

// Byte ranges of the four sub-queries inside a serialized query, for
// audits that compare worker-observable views. [first, second) offsets.
using ByteRange = std::pair<std::size_t, std::size_t>;
ByteRange query_partition_range();
ByteRange query_sum_range();
ByteRange query_compute_range();
ByteRange query_eval_range(std::size_t library_size);

struct MaskedShare {
  std::size_t worker = 0;  // 1-based
  FieldMatrix value;
};

struct SubResult {
  std::size_t worker = 0;  // 1-based
  FieldMatrix value;
};

// Everything a single worker ever observes.
struct WorkerState {
  std::vector<FieldMatrix> library;
  Query query;
  MaskedShare share;
};

Query make_worker_query(const CodeParams& params, const PointAssignment& points,
                        std::size_t worker_index /*1-based*/);
std::vector<Query> make_queries(const CodeParams& params,
                                const PointAssignment& points);

struct MasterSetup {
  PointAssignment points;
  FieldMatrix mask;                 // fresh R, one per job
  std::vector<MaskedShare> shares;  // one per worker, index order
  std::vector<Query> queries;
};

// Draws points and the mask, encodes A once per worker. All randomness of
// a job happens here, in a fixed order, so a seed pins the whole run.
MasterSetup master_setup(const CodeParams& params, const FieldMatrix& a,
                         std::mt19937_64& rng);

// Executes the four sub-queries in order. Throws QueryRejected on a
// malformed query (wrong point count, zero/duplicate points, bad split).
SubResult worker_handle(const WorkerState& state);

struct Arrival {
  std::size_t worker = 0;  // 1-based
  FieldMatrix value;
  double time = 0.0;
};

// Consumes arrivals in stream order and decodes from the first K usable
// ones; everything after the K-th is ignored. Returns nullopt when the
// stream ends with fewer than K results.
std::optional<FieldMatrix> collect_and_decode(const CodeParams& params,
                                              const PointAssignment& points,
                                              std::span<const Arrival> arrivals);

struct WorkerRecord {
  std::size_t worker = 0;
  std::vector<std::uint8_t> query_bytes;
  FieldMatrix share;
  std::optional<FieldMatrix> result;  // absent if the worker rejected
  double time = 0.0;
  bool rejected = false;
};

struct JobTranscript {
  CodeParams params;
  std::uint64_t seed = 0;
  double delay_mu = 1.0;
  double delay_gamma = 0.0;
  PointAssignment points;
  std::vector<WorkerRecord> workers;
  std::size_t threshold = 0;
  std::optional<FieldMatrix> decoded;
};

struct JobOptions {
  std::uint64_t seed = 1;
  // Per-worker completion delay: gamma + Exp(mu), drawn from a
  // counter-based stream keyed by (seed, worker).
  double delay_mu = 1.0;
  double delay_gamma = 0.0;
  unsigned threads = 1;
};

// Full job: setup -> workers (optionally in parallel; the transcript is
// identical for any thread count) -> decode at the K-th arrival.
JobTranscript run_job(const CodeParams& params, const FieldMatrix& a,
                      const std::vector<FieldMatrix>& library,
                      const JobOptions& options);

nlohmann::json transcript_to_json(const JobTranscript& transcript);
JobTranscript transcript_from_json(const nlohmann::json& j);
std::string transcript_to_string(const JobTranscript& transcript);

// Re-runs the decode path (first-K rule) from the recorded sub-results.
std::optional<FieldMatrix> replay_decode(const JobTranscript& transcript);

}  // namespace pscode
