#include "pscode/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "pscode/rng.hpp"

namespace pscode {

namespace {

constexpr char kMagic[4] = {'P', 'S', 'Q', '1'};
constexpr std::size_t kPartitionOffset = 4;
constexpr std::size_t kSumOffset = 12;
constexpr std::size_t kComputeOffset = 16;
constexpr std::size_t kEvalOffset = 20;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[off + i];
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[off + i];
  return v;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0)
    throw std::invalid_argument("hex string with odd length");
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw std::invalid_argument("bad hex digit");
  };
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]);
  return out;
}

nlohmann::json matrix_to_json(const FieldMatrix& m) {
  return nlohmann::json{
      {"rows", m.rows()}, {"cols", m.cols()}, {"data", m.entries()}};
}

FieldMatrix matrix_from_json(const PrimeField& f, const nlohmann::json& j) {
  return FieldMatrix::from_entries(
      f, j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
      j.at("data").get<std::vector<std::uint64_t>>());
}

}  // namespace

std::vector<std::uint8_t> Query::serialize() const {
  // Canonical layout, fixed-width little-endian, points ordered by
  // library index:
  //   [0,4)   magic "PSQ1"
  //   [4,12)  partition sub-query: u32 parts, u32 step
  //   [12,16) sum sub-query: u32 opcode
  //   [16,20) compute sub-query: u32 opcode
  //   [20,..) eval sub-query: u32 count, count x u64 points
  std::vector<std::uint8_t> out;
  out.reserve(kEvalOffset + 4 + 8 * eval_points.size());
  for (char c : kMagic) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, parts);
  put_u32(out, step);
  put_u32(out, sum_opcode);
  put_u32(out, compute_opcode);
  put_u32(out, static_cast<std::uint32_t>(eval_points.size()));
  for (std::uint64_t p : eval_points) put_u64(out, p);
  return out;
}

Query Query::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kEvalOffset + 4)
    throw std::invalid_argument("query too short");
  for (std::size_t i = 0; i < 4; ++i)
    if (bytes[i] != static_cast<std::uint8_t>(kMagic[i]))
      throw std::invalid_argument("bad query magic");
  Query q;
  q.parts = get_u32(bytes, kPartitionOffset);
  q.step = get_u32(bytes, kPartitionOffset + 4);
  q.sum_opcode = get_u32(bytes, kSumOffset);
  q.compute_opcode = get_u32(bytes, kComputeOffset);
  const std::uint32_t count = get_u32(bytes, kEvalOffset);
  if (bytes.size() != kEvalOffset + 4 + 8ull * count)
    throw std::invalid_argument("query length does not match point count");
  q.eval_points.resize(count);
  for (std::uint32_t i = 0; i < count; ++i)
    q.eval_points[i] = get_u64(bytes, kEvalOffset + 4 + 8ull * i);
  return q;
}

ByteRange query_partition_range() { return {kPartitionOffset, kSumOffset}; }
ByteRange query_sum_range() { return {kSumOffset, kComputeOffset}; }
ByteRange query_compute_range() { return {kComputeOffset, kEvalOffset}; }
ByteRange query_eval_range(std::size_t library_size) {
  return {kEvalOffset, kEvalOffset + 4 + 8 * library_size};
}

Query make_worker_query(const CodeParams& params, const PointAssignment& points,
                        std::size_t worker_index) {
  if (worker_index < 1 || worker_index > points.worker_points.size())
    throw std::invalid_argument("make_worker_query: bad worker index");
  Query q;
  q.parts = static_cast<std::uint32_t>(params.n - 1);
  q.step = static_cast<std::uint32_t>(params.m + 1);
  // D only decides which pre-drawn point lands at which library index.
  q.eval_points.resize(params.M);
  for (std::size_t k = 1; k <= params.M; ++k)
    q.eval_points[k - 1] = (k == params.D)
                               ? points.worker_points[worker_index - 1]
                               : points.undesired_points.at(k);
  return q;
}

std::vector<Query> make_queries(const CodeParams& params,
                                const PointAssignment& points) {
  std::vector<Query> out;
  out.reserve(params.N);
  for (std::size_t i = 1; i <= params.N; ++i)
    out.push_back(make_worker_query(params, points, i));
  return out;
}

MasterSetup master_setup(const CodeParams& params, const FieldMatrix& a,
                         std::mt19937_64& rng) {
  params.validate();
  if (a.rows() != params.r || a.cols() != params.s)
    throw std::invalid_argument("master_setup: A is not r x s");
  if (a.field() != params.field)
    throw std::invalid_argument("master_setup: field mismatch");

  MasterSetup setup{.points = sample_points(params, rng),
                    .mask = FieldMatrix::random(params.field,
                                                params.row_block(), params.s,
                                                rng),
                    .shares = {},
                    .queries = {}};
  setup.shares.reserve(params.N);
  setup.queries.reserve(params.N);
  for (std::size_t i = 1; i <= params.N; ++i) {
    setup.shares.push_back(
        {i, encode_a_share(a, setup.mask, setup.points.worker_points[i - 1],
                           params.m)});
    setup.queries.push_back(make_worker_query(params, setup.points, i));
  }
  return setup;
}

SubResult worker_handle(const WorkerState& state) {
  const Query& q = state.query;
  if (q.parts < 1) throw QueryRejected("partition sub-query asks for 0 blocks");
  if (q.step < 1) throw QueryRejected("exponent step must be positive");
  if (q.sum_opcode != 1) throw QueryRejected("unknown sum sub-query");
  if (q.compute_opcode != 1) throw QueryRejected("unknown compute sub-query");
  if (q.eval_points.size() != state.library.size())
    throw QueryRejected("evaluation sub-query must name one point per "
                        "library matrix");
  std::set<std::uint64_t> distinct;
  for (std::uint64_t p : q.eval_points) {
    if (p == 0) throw QueryRejected("evaluation point 0 is not allowed");
    if (!distinct.insert(p).second)
      throw QueryRejected("duplicate evaluation points");
  }

  // Partition, evaluate, sum, compute: all library indices pass through
  // the same code path.
  FieldMatrix lib_share = library_share_at_points(
      state.library, q.eval_points, q.parts, q.step);
  return {state.share.worker, worker_compute(state.share.value, lib_share)};
}

std::optional<FieldMatrix> collect_and_decode(const CodeParams& params,
                                              const PointAssignment& points,
                                              std::span<const Arrival> arrivals) {
  const std::size_t k = params.recovery_threshold();
  std::vector<Evaluation> evals;
  evals.reserve(k);
  for (const Arrival& arr : arrivals) {
    if (arr.worker < 1 || arr.worker > points.worker_points.size())
      throw std::invalid_argument("collect_and_decode: bad worker index");
    evals.push_back({points.worker_points[arr.worker - 1], arr.value});
    if (evals.size() == k) break;  // stragglers beyond this are ignored
  }
  if (evals.size() < k) return std::nullopt;
  return extract_result(interpolate(evals, k), params);
}

JobTranscript run_job(const CodeParams& params, const FieldMatrix& a,
                      const std::vector<FieldMatrix>& library,
                      const JobOptions& options) {
  if (library.size() != params.M)
    throw std::invalid_argument("run_job: library size != M");
  std::mt19937_64 rng(options.seed);
  MasterSetup setup = master_setup(params, a, rng);

  // Delays are pre-drawn per worker from a counter stream; neither thread
  // count nor scheduling can change the transcript.
  std::vector<double> delays(params.N);
  for (std::size_t i = 1; i <= params.N; ++i) {
    const double u = unit_double(counter_word(options.seed, 0xde1a, i));
    delays[i - 1] =
        options.delay_gamma + (-std::log1p(-u)) / options.delay_mu;
  }

  std::vector<std::optional<FieldMatrix>> results(params.N);
  std::vector<bool> rejected(params.N, false);
  auto compute_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      WorkerState state{library, setup.queries[i], setup.shares[i]};
      try {
        results[i] = worker_handle(state).value;
      } catch (const QueryRejected&) {
        rejected[i] = true;
      }
    }
  };
  const unsigned threads = std::max(1u, options.threads);
  if (threads == 1 || params.N < 2) {
    compute_range(0, params.N);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (params.N + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t begin = std::min<std::size_t>(w * chunk, params.N);
      const std::size_t end = std::min<std::size_t>(begin + chunk, params.N);
      if (begin < end) pool.emplace_back(compute_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  std::vector<std::size_t> order(params.N);
  for (std::size_t i = 0; i < params.N; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (delays[x] != delays[y]) return delays[x] < delays[y];
    return x < y;
  });

  std::vector<Arrival> arrivals;
  for (std::size_t idx : order)
    if (results[idx])
      arrivals.push_back({idx + 1, *results[idx], delays[idx]});

  JobTranscript transcript{.params = params,
                           .seed = options.seed,
                           .delay_mu = options.delay_mu,
                           .delay_gamma = options.delay_gamma,
                           .points = setup.points,
                           .workers = {},
                           .threshold = params.recovery_threshold(),
                           .decoded = collect_and_decode(params, setup.points,
                                                         arrivals)};
  transcript.workers.reserve(params.N);
  for (std::size_t i = 0; i < params.N; ++i) {
    transcript.workers.push_back({i + 1, setup.queries[i].serialize(),
                                  setup.shares[i].value, results[i], delays[i],
                                  rejected[i]});
  }
  return transcript;
}

nlohmann::json transcript_to_json(const JobTranscript& t) {
  nlohmann::json undesired = nlohmann::json::array();
  for (const auto& [k, x] : t.points.undesired_points)
    undesired.push_back({{"k", k}, {"x", x}});

  nlohmann::json workers = nlohmann::json::array();
  for (const WorkerRecord& w : t.workers) {
    nlohmann::json rec{{"index", w.worker},
                       {"query", to_hex(w.query_bytes)},
                       {"share", matrix_to_json(w.share)},
                       {"time", w.time},
                       {"rejected", w.rejected}};
    rec["result"] = w.result ? matrix_to_json(*w.result) : nlohmann::json();
    workers.push_back(std::move(rec));
  }

  nlohmann::json j{
      {"schema", "pscode.transcript.v1"},
      {"params",
       {{"q", t.params.field.modulus()},
        {"m", t.params.m},
        {"n", t.params.n},
        {"M", t.params.M},
        {"N", t.params.N},
        {"D", t.params.D},
        {"r", t.params.r},
        {"s", t.params.s},
        {"t", t.params.t},
        {"K", t.params.recovery_threshold()}}},
      {"seed", t.seed},
      {"delay", {{"mu", t.delay_mu}, {"gamma", t.delay_gamma}}},
      {"points", {{"worker", t.points.worker_points}, {"undesired", undesired}}},
      {"workers", workers},
      {"threshold", t.threshold}};
  j["decoded"] = t.decoded ? matrix_to_json(*t.decoded) : nlohmann::json();
  return j;
}

JobTranscript transcript_from_json(const nlohmann::json& j) {
  if (j.at("schema").get<std::string>() != "pscode.transcript.v1")
    throw std::invalid_argument("unknown transcript schema");
  const auto& p = j.at("params");
  CodeParams params{PrimeField(p.at("q").get<std::uint64_t>()),
                    p.at("m").get<std::size_t>(),
                    p.at("n").get<std::size_t>(),
                    p.at("M").get<std::size_t>(),
                    p.at("N").get<std::size_t>(),
                    p.at("D").get<std::size_t>(),
                    p.at("r").get<std::size_t>(),
                    p.at("s").get<std::size_t>(),
                    p.at("t").get<std::size_t>()};

  JobTranscript t{.params = params,
                  .seed = j.at("seed").get<std::uint64_t>(),
                  .delay_mu = j.at("delay").at("mu").get<double>(),
                  .delay_gamma = j.at("delay").at("gamma").get<double>(),
                  .points = {},
                  .workers = {},
                  .threshold = j.at("threshold").get<std::size_t>(),
                  .decoded = std::nullopt};
  t.points.worker_points =
      j.at("points").at("worker").get<std::vector<std::uint64_t>>();
  for (const auto& u : j.at("points").at("undesired"))
    t.points.undesired_points[u.at("k").get<std::size_t>()] =
        u.at("x").get<std::uint64_t>();

  for (const auto& rec : j.at("workers")) {
    WorkerRecord w{rec.at("index").get<std::size_t>(),
                   from_hex(rec.at("query").get<std::string>()),
                   matrix_from_json(params.field, rec.at("share")),
                   std::nullopt,
                   rec.at("time").get<double>(),
                   rec.at("rejected").get<bool>()};
    if (!rec.at("result").is_null())
      w.result = matrix_from_json(params.field, rec.at("result"));
    t.workers.push_back(std::move(w));
  }
  if (!j.at("decoded").is_null())
    t.decoded = matrix_from_json(params.field, j.at("decoded"));
  return t;
}

std::string transcript_to_string(const JobTranscript& t) {
  return transcript_to_json(t).dump(2) + "\n";
}

std::optional<FieldMatrix> replay_decode(const JobTranscript& t) {
  std::vector<const WorkerRecord*> order;
  for (const WorkerRecord& w : t.workers) order.push_back(&w);
  std::sort(order.begin(), order.end(),
            [](const WorkerRecord* a, const WorkerRecord* b) {
              if (a->time != b->time) return a->time < b->time;
              return a->worker < b->worker;
            });
  std::vector<Arrival> arrivals;
  for (const WorkerRecord* w : order)
    if (w->result) arrivals.push_back({w->worker, *w->result, w->time});
  return collect_and_decode(t.params, t.points, arrivals);
}

}  // namespace pscode
