/*
 * Copyright 2026 The sslr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// sslr: share splitting, secure training (TI, both data processors, or a
// single-process local run), reconstruction and microbenchmarks.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sslr.hpp"

namespace {

using namespace sslr;
using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

std::string hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (auto b : bytes) {
    s += digits[b >> 4];
    s += digits[b & 15];
  }
  return s;
}

std::string read_text(const std::string& path) {
  const auto bytes = io::read_file(path);
  return {bytes.begin(), bytes.end()};
}

void write_text(const std::string& path, const std::string& text) {
  io::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string role_path(const std::string& prefix, Role r, const char* ext) {
  return prefix + "." + to_string(r) + ext;
}

cli::ShareFile load_shares(const std::string& path) {
  auto [h, w] = read_share_file(path);
  return {h, std::move(w)};
}

// Options shared by several subcommands.
struct ParamFlags {
  unsigned frac_bits = 12;
  unsigned int_bits = 15;
  unsigned ring_bits = 64;
  CLI::Option* frac_opt = nullptr;
  CLI::Option* int_opt = nullptr;
  CLI::Option* ring_opt = nullptr;

  void add(CLI::App& app) {
    frac_opt = app.add_option("--frac-bits", frac_bits, "fractional bits a")->capture_default_str();
    int_opt = app.add_option("--int-bits", int_bits, "integer bits b")->capture_default_str();
    ring_opt = app.add_option("--ring-bits", ring_bits, "ring width lambda")->capture_default_str();
  }
  FixedPointParams params() const {
    FixedPointParams p{frac_bits, int_bits, ring_bits};
    p.validate();
    return p;
  }
  bool any_given() const { return frac_opt->count() + int_opt->count() + ring_opt->count() > 0; }
};

// ---------------------------------------------------------------------------
// split

struct SplitArgs {
  std::string data, out, id_column;
  bool no_label = false, no_ones = false;
  std::uint64_t seed = 0;
  ParamFlags fp;
};

int run_split(const SplitArgs& a) {
  const auto fp = a.fp.params();
  const auto table = cli::parse_csv(read_text(a.data), {!a.no_label, a.id_column});
  const auto res = cli::split_table(table, fp, derive_run_seeds(a.seed).split, {!a.no_ones});
  write_share_file(role_path(a.out, Role::A, ".shr"), res.header, res.a);
  write_share_file(role_path(a.out, Role::B, ".shr"), res.header, res.b);
  std::printf("split %zu rows x %zu columns into %s and %s\n", std::size_t(res.header.rows),
              std::size_t(res.header.cols), role_path(a.out, Role::A, ".shr").c_str(),
              role_path(a.out, Role::B, ".shr").c_str());
  return cli::kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string role;
  std::vector<std::string> data;
  std::size_t rows = 0, features = 0;
  std::string listen, peer, ti;
  std::string shares_out, weights_out, report;
  std::string randomness = "online";
  unsigned slack = 5;
  double lr = 0.001;
  std::size_t iterations = 100;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  double connect_timeout = 30;
  ParamFlags fp;

  std::chrono::milliseconds wait() const {
    return std::chrono::milliseconds(static_cast<long long>(connect_timeout * 1000));
  }
};

// Training input from one party's share file: all columns but the last are
// X (ones column first), the last column holds the labels.
struct PartyData {
  FixedPointParams params;
  ShareMatrix x;
  ShareVector t;
};

PartyData load_party_data(const std::string& path, Role role, const TrainArgs& a) {
  const auto f = load_shares(path);
  if (f.header.cols < 2) {
    fail(ErrorCode::kFormat, path + ": need a ones column, features and a label column");
  }
  if (a.fp.any_given() && !(a.fp.params() == f.header.params)) {
    fail(ErrorCode::kFormat, path + ": file was split with lambda=" +
                                 std::to_string(f.header.params.ring_bits) + ", a=" +
                                 std::to_string(f.header.params.frac_bits) + ", b=" +
                                 std::to_string(f.header.params.int_bits) +
                                 ", which differs from the flags");
  }
  PartyData d{f.header.params, ShareMatrix(role, f.header.rows, f.header.cols - 1), {role, {}}};
  for (std::size_t r = 0; r < f.header.rows; ++r) {
    for (std::size_t c = 0; c + 1 < f.header.cols; ++c) d.x.at(r, c) = f.words[r * f.header.cols + c];
    d.t.values.push_back(f.words[r * f.header.cols + f.header.cols - 1]);
  }
  return d;
}

json transcript_json(const Transcript& t, const std::array<std::uint8_t, 32>& hash) {
  return {{"rounds", t.rounds},         {"bytes_sent", t.bytes_sent},
          {"bytes_received", t.bytes_received}, {"ring_mults", t.ring_mults},
          {"bit_mults", t.bit_mults},   {"secure_mults", t.secure_mults()},
          {"transcript_hash", hex(hash)}};
}

void print_stats(const char* who, double seconds, const Transcript& t,
                 const std::array<std::uint8_t, 32>& hash) {
  std::printf("[%s] wall time %.3f s, %llu rounds, %llu bytes sent, %llu received\n", who,
              seconds, static_cast<unsigned long long>(t.rounds),
              static_cast<unsigned long long>(t.bytes_sent),
              static_cast<unsigned long long>(t.bytes_received));
  std::printf("[%s] multiplications: %llu ring, %llu Z_2, %llu total\n", who,
              static_cast<unsigned long long>(t.ring_mults),
              static_cast<unsigned long long>(t.bit_mults),
              static_cast<unsigned long long>(t.secure_mults()));
  std::printf("[%s] transcript hash %s\n", who, hex(hash).c_str());
}

TrainingConfig training_config(const TrainArgs& a, const FixedPointParams& fp) {
  if (!(a.lr >= 0)) fail(ErrorCode::kArgument, "--lr must be non-negative");
  TrainingConfig cfg;
  cfg.eta = a.lr;
  cfg.iterations = a.iterations;
  cfg.params = fp;
  return cfg;
}

// "file:PATH" -> PATH, "online" -> nullopt.
std::optional<std::string> randomness_file(const std::string& spec) {
  if (spec == "online") return std::nullopt;
  if (spec.rfind("file:", 0) == 0 && spec.size() > 5) return spec.substr(5);
  fail(ErrorCode::kArgument, "--randomness must be 'online' or 'file:PATH', got '" + spec + "'");
}

int run_ti(const TrainArgs& a) {
  const RunSeeds seeds = derive_run_seeds(a.seed);
  FixedPointParams fp = a.fp.params();
  std::size_t rows = a.rows, cols = a.features + 1;
  if (!a.data.empty()) {
    const auto h = read_share_file(a.data[0]).first;
    fp = h.params;
    rows = h.rows;
    cols = h.cols - 1;
  }
  if (const auto path = randomness_file(a.randomness)) {
    Dealer dealer(seeds.ti, fp.ring());
    const auto req = with_slack(training_requirements(rows, cols, a.iterations, fp), a.slack);
    const auto [sa, sb] = provision(dealer, req);
    io::write_file(role_path(*path, Role::A, ".crn"), serialize_stream(sa));
    io::write_file(role_path(*path, Role::B, ".crn"), serialize_stream(sb));
    std::printf("[TI] wrote randomness for %zu x %zu, %zu iterations (+%u%% slack):\n", rows, cols,
                a.iterations, a.slack);
    for (const auto& [tag, units] : req) {
      std::printf("  %-24s %zu units\n", tag.label().c_str(), units);
    }
    return cli::kExitOk;
  }
  if (a.listen.empty()) fail(ErrorCode::kArgument, "online TI needs --listen host:port");
  TcpListener listener(parse_endpoint(a.listen));
  std::printf("[TI] listening on port %u\n", listener.port());
  std::fflush(stdout);
  std::unique_ptr<Channel> alice, bob;
  for (int i = 0; i < 2; ++i) {
    auto ch = listener.accept(a.wait());
    const Frame who = ch->recv();
    if (who.type != MsgType::kControl || who.words.size() != 1 || who.words[0] > 1) {
      fail(ErrorCode::kProtocol, "connection did not identify itself as a data processor");
    }
    auto& slot = who.words[0] == 0 ? alice : bob;
    if (slot) fail(ErrorCode::kProtocol, "two connections claimed the same role");
    slot = std::move(ch);
  }
  DealerBroker broker(seeds.ti, fp.ring());
  serve_trusted_initializer(broker, *alice, *bob);
  std::printf("[TI] served both parties\n");
  return cli::kExitOk;
}

std::unique_ptr<CorrelatedSource> party_source(const TrainArgs& a, Role role, const Ring& ring) {
  if (const auto path = randomness_file(a.randomness)) {
    auto stream = deserialize_stream(io::read_file(*path));
    if (stream.role != role) fail(ErrorCode::kFormat, *path + " holds the other party's randomness");
    if (stream.ring_bits != ring.bits()) {
      fail(ErrorCode::kFormat, *path + " was generated for lambda=" +
                                   std::to_string(stream.ring_bits));
    }
    return std::make_unique<StreamSource>(std::move(stream));
  }
  if (a.ti.empty()) fail(ErrorCode::kArgument, "online randomness needs --ti host:port");
  auto ch = TcpChannel::connect(parse_endpoint(a.ti), a.wait());
  ch->send(Frame{MsgType::kControl, {static_cast<std::uint64_t>(role)}});
  return std::make_unique<RemoteSource>(std::move(ch), ring);
}

int run_party(const TrainArgs& a, Role role) {
  if (a.data.size() != 1) fail(ErrorCode::kArgument, "--data takes this party's share file");
  if (!a.weights_out.empty()) {
    fail(ErrorCode::kArgument, "--weights-out needs both shares; use 'reconstruct' or --role local");
  }
  const auto d = load_party_data(a.data[0], role, a);
  const auto cfg = training_config(a, d.params);
  const RunSeeds seeds = derive_run_seeds(a.seed);
  auto source = party_source(a, role, d.params.ring());

  std::unique_ptr<Channel> ch;
  if (role == Role::A) {
    if (a.listen.empty()) fail(ErrorCode::kArgument, "alice needs --listen host:port");
    TcpListener listener(parse_endpoint(a.listen));
    ch = listener.accept(a.wait());
  } else {
    if (a.peer.empty()) fail(ErrorCode::kArgument, "bob needs --peer host:port");
    ch = TcpChannel::connect(parse_endpoint(a.peer), a.wait());
  }
  Handshake h;
  h.ring_bits = d.params.ring_bits;
  h.frac_bits = d.params.frac_bits;
  h.int_bits = d.params.int_bits;
  h.rows = d.x.rows;
  h.cols = d.x.cols;
  h.seed_commitment = source->commitment();
  handshake(*ch, h);

  const auto t0 = Clock::now();
  Session s(role, *ch, *source, d.params, SessionOptions{a.threads, seeds.party(role)});
  const auto w = train_secure(s, d.x, d.t, cfg);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const auto hash = s.transcript_hash();
  const char* who = role == Role::A ? "alice" : "bob";
  print_stats(who, secs, s.transcript(), hash);
  if (!a.shares_out.empty()) write_share_file(a.shares_out, {d.params, w.values.size(), 1}, w.values);
  if (!a.report.empty()) {
    json r = {{"role", who},
              {"rows", d.x.rows},
              {"cols", d.x.cols},
              {"iterations", a.iterations},
              {"wall_seconds", secs},
              {to_string(role), transcript_json(s.transcript(), hash)}};
    write_text(a.report, r.dump(2) + "\n");
  }
  return cli::kExitOk;
}

int run_local_role(const TrainArgs& a) {
  if (a.data.size() != 2) fail(ErrorCode::kArgument, "--role local needs --data A.shr --data B.shr");
  const auto da = load_party_data(a.data[0], Role::A, a);
  const auto db = load_party_data(a.data[1], Role::B, a);
  if (!(da.params == db.params) || da.x.rows != db.x.rows || da.x.cols != db.x.cols) {
    fail(ErrorCode::kFormat, "the two share files have different headers");
  }
  const auto cfg = training_config(a, da.params);
  const RunSeeds seeds = derive_run_seeds(a.seed);
  const auto body = [&](Session& s) {
    return train_secure(s, s.is_a() ? da.x : db.x, s.is_a() ? da.t : db.t, cfg);
  };
  const auto t0 = Clock::now();
  std::optional<LocalRun<ShareVector>> run;
  if (const auto path = randomness_file(a.randomness)) {
    StreamSource sa(deserialize_stream(io::read_file(role_path(*path, Role::A, ".crn"))));
    StreamSource sb(deserialize_stream(io::read_file(role_path(*path, Role::B, ".crn"))));
    run.emplace(run_local(da.params, sa, sb, seeds, body, a.threads));
  } else {
    run.emplace(run_local(da.params, seeds, body, a.threads));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  print_stats("A", secs, run->transcript_a, run->hash_a);
  print_stats("B", secs, run->transcript_b, run->hash_b);
  const auto expect = count_multiplications(da.x.rows, da.x.cols - 1, a.iterations, da.params);
  std::printf("closed-form multiplications: %llu\n", static_cast<unsigned long long>(expect.total()));

  const ShareFileHeader wh{da.params, run->a.values.size(), 1};
  if (!a.shares_out.empty()) {
    write_share_file(role_path(a.shares_out, Role::A, ".shr"), wh, run->a.values);
    write_share_file(role_path(a.shares_out, Role::B, ".shr"), wh, run->b.values);
  }
  const auto weights = cli::reconstruct({wh, run->a.values}, {wh, run->b.values});
  if (!a.weights_out.empty()) write_text(a.weights_out, cli::format_csv(weights, 1));
  if (!a.report.empty()) {
    json r = {{"role", "local"},
              {"rows", da.x.rows},
              {"cols", da.x.cols},
              {"iterations", a.iterations},
              {"wall_seconds", secs},
              {"closed_form_mults", expect.total()},
              {"weights", weights},
              {"A", transcript_json(run->transcript_a, run->hash_a)},
              {"B", transcript_json(run->transcript_b, run->hash_b)}};
    write_text(a.report, r.dump(2) + "\n");
  }
  return cli::kExitOk;
}

int run_train(const TrainArgs& a) {
  if (a.role == "ti") return run_ti(a);
  if (a.role == "alice") return run_party(a, Role::A);
  if (a.role == "bob") return run_party(a, Role::B);
  return run_local_role(a);
}

// ---------------------------------------------------------------------------
// reconstruct / merge

struct ReconstructArgs {
  std::string a, b, out;
};

int run_reconstruct(const ReconstructArgs& r) {
  const auto fa = load_shares(r.a), fb = load_shares(r.b);
  const auto v = cli::reconstruct(fa, fb);
  const auto csv = cli::format_csv(v, fa.header.cols);
  if (r.out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_text(r.out, csv);
  }
  return cli::kExitOk;
}

struct MergeArgs {
  std::vector<std::string> inputs;
  std::string out;
  bool columns = false;
};

int run_merge(const MergeArgs& m) {
  std::vector<cli::ShareFile> parts;
  for (const auto& p : m.inputs) parts.push_back(load_shares(p));
  const auto merged = m.columns ? cli::merge_columns(parts) : cli::merge_rows(parts);
  write_share_file(m.out, merged.header, merged.words);
  std::printf("merged %zu files into %llu x %llu\n", parts.size(),
              static_cast<unsigned long long>(merged.header.rows),
              static_cast<unsigned long long>(merged.header.cols));
  return cli::kExitOk;
}

// ---------------------------------------------------------------------------
// bench: in-process two-party session timed on party A's clock. Correlated
// randomness is provisioned before timing, as with an offline TI.

struct BenchArgs {
  std::string kind = "activation";
  std::vector<std::size_t> batches = {256, 512, 1024, 2048};
  std::size_t reps = 3;
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  std::string report;
  ParamFlags fp;
};

// Passes requests through and tallies them.
class CountingSource final : public CorrelatedSource {
 public:
  explicit CountingSource(CorrelatedSource& inner) : inner_(inner) {}
  std::vector<std::uint64_t> take(const TagKey& tag, std::size_t units) override {
    used_[tag] += units;
    return inner_.take(tag, units);
  }
  Seed commitment() const override { return inner_.commitment(); }
  const Requirements& used() const { return used_; }

 private:
  CorrelatedSource& inner_;
  Requirements used_;
};

struct BenchOut {
  std::vector<double> secs;
  Transcript one;
};

BenchOut bench_batch(const BenchArgs& b, const FixedPointParams& fp, const RunSeeds& seeds,
                     std::size_t n, CorrelatedSource& sa, CorrelatedSource& sb, std::size_t reps) {
  return run_local(fp, sa, sb, seeds, [&](Session& s) {
    Prg prg(derive_seed(seeds.party(s.role()), "bench-input"));
    std::vector<RingElement> x(n), y(n);
    for (auto& v : x) v = s.ring().reduce(prg() >> 40);
    for (auto& v : y) v = s.ring().reduce(prg());
    BenchOut out;
    const std::vector<RingElement> sync = {0};
    for (std::size_t rep = 0; rep < reps; ++rep) {
      reveal(s, sync);
      const Transcript before = s.transcript();
      const auto t0 = Clock::now();
      if (b.kind == "activation") {
        batch_activate(s, x);
      } else if (b.kind == "decompose") {
        decompose_sliced(s, x, fp.ring_bits);
      } else {
        batch_mul(s, x, y);
      }
      out.secs.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
      if (rep == 0) {
        const Transcript& after = s.transcript();
        out.one = {after.rounds - before.rounds,         after.bytes_sent - before.bytes_sent,
                   after.bytes_received - before.bytes_received,
                   after.ring_mults - before.ring_mults, after.bit_mults - before.bit_mults,
                   after.opened_words - before.opened_words};
      }
    }
    return out;
  }, b.threads).a;
}

int run_bench(const BenchArgs& b) {
  const auto fp = b.fp.params();
  if (b.reps < 1) fail(ErrorCode::kArgument, "--reps must be at least 1");
  const RunSeeds seeds = derive_run_seeds(b.seed);
  json rows = json::array();
  std::printf("%-10s %8s %12s %14s %8s %12s %12s\n", "kind", "batch", "mean ms", "per-eval us",
              "rounds", "bytes", "mults");
  for (std::size_t n : b.batches) {
    if (n == 0) fail(ErrorCode::kArgument, "batch sizes must be positive");
    // Untimed pass to learn the per-repetition requirements.
    auto broker = std::make_shared<DealerBroker>(seeds.ti, fp.ring());
    BrokerSource ba(Role::A, broker), bb(Role::B, broker);
    CountingSource ca(ba), cb(bb);
    bench_batch(b, fp, seeds, n, ca, cb, 1);
    Requirements req = ca.used();
    for (auto& [tag, units] : req) units *= b.reps;
    Dealer dealer(seeds.ti, fp.ring());
    auto [ra, rb] = provision(dealer, req);
    StreamSource sa(std::move(ra)), sb(std::move(rb));
    const BenchOut o = bench_batch(b, fp, seeds, n, sa, sb, b.reps);

    double mean = 0, best = o.secs[0];
    for (double t : o.secs) {
      mean += t;
      best = std::min(best, t);
    }
    mean /= static_cast<double>(o.secs.size());
    std::printf("%-10s %8zu %12.3f %14.3f %8llu %12llu %12llu\n", b.kind.c_str(), n, mean * 1e3,
                mean * 1e6 / static_cast<double>(n), static_cast<unsigned long long>(o.one.rounds),
                static_cast<unsigned long long>(o.one.bytes_sent),
                static_cast<unsigned long long>(o.one.secure_mults()));
    rows.push_back({{"batch", n},
                    {"mean_seconds", mean},
                    {"min_seconds", best},
                    {"per_eval_seconds", mean / static_cast<double>(n)},
                    {"min_per_eval_seconds", best / static_cast<double>(n)},
                    {"rounds", o.one.rounds},
                    {"bytes_sent", o.one.bytes_sent},
                    {"ring_mults", o.one.ring_mults},
                    {"bit_mults", o.one.bit_mults}});
  }
  if (!b.report.empty()) {
    json r = {{"kind", b.kind}, {"reps", b.reps}, {"ring_bits", fp.ring_bits}, {"results", rows}};
    write_text(b.report, r.dump(2) + "\n");
  }
  return cli::kExitOk;
}

// Finds "--config FILE" in argv and splices its entries in as flags.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      continue;
    }
    return cli::merge_config(std::move(args), cli::parse_config(read_text(path)));
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-party secure logistic regression training"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  const auto hw = std::max(1u, std::thread::hardware_concurrency());

  SplitArgs split;
  auto* sp = app.add_subcommand("split", "encode a CSV and split it into two share files");
  sp->add_option("--data", split.data, "CSV with a header row; last column is the 0/1 label")
      ->required();
  sp->add_option("--shares-out", split.out, "output prefix; writes PREFIX.A.shr and PREFIX.B.shr")
      ->required();
  sp->add_option("--id-column", split.id_column, "sample-id column used to align vertical splits");
  sp->add_flag("--no-label", split.no_label, "the CSV has no label column");
  sp->add_flag("--no-ones", split.no_ones, "do not prepend the all-ones column");
  sp->add_option("--seed", split.seed, "seed for the share randomness")->capture_default_str();
  split.fp.add(*sp);

  TrainArgs train;
  train.threads = hw;
  auto* tr = app.add_subcommand("train", "run one role of secure training");
  tr->add_option("--role", train.role, "ti, alice, bob or local")
      ->required()
      ->check(CLI::IsMember({"ti", "alice", "bob", "local"}));
  tr->add_option("--data", train.data,
                 "share file(s) from split: this party's, or A's then B's for --role local");
  tr->add_option("--rows", train.rows, "sample count (TI without --data)");
  tr->add_option("--features", train.features, "feature count m (TI without --data)");
  tr->add_option("--listen", train.listen, "host:port to listen on (alice, online TI)");
  tr->add_option("--peer", train.peer, "alice's host:port (bob)");
  tr->add_option("--ti", train.ti, "online TI host:port (alice, bob)");
  tr->add_option("--randomness", train.randomness,
                 "'online' or 'file:PATH' (TI/local: prefix of PATH.A.crn, PATH.B.crn)")
      ->capture_default_str();
  tr->add_option("--slack", train.slack, "extra percent of randomness in TI files")
      ->capture_default_str();
  tr->add_option("--shares-out", train.shares_out,
                 "weight shares (local: prefix of PREFIX.A.shr, PREFIX.B.shr)");
  tr->add_option("--weights-out", train.weights_out, "decoded weights CSV (local only)");
  tr->add_option("--report", train.report, "JSON run report");
  tr->add_option("--lr", train.lr, "learning rate eta")->capture_default_str();
  tr->add_option("--iterations", train.iterations, "gradient descent iterations")
      ->capture_default_str();
  tr->add_option("--seed", train.seed, "master seed for TI and party randomness")
      ->capture_default_str();
  tr->add_option("--threads", train.threads, "worker threads per party")->capture_default_str();
  tr->add_option("--connect-timeout", train.connect_timeout, "seconds to wait for peers")
      ->capture_default_str();
  train.fp.add(*tr);

  ReconstructArgs rec;
  auto* rc = app.add_subcommand("reconstruct", "open two share files and decode them");
  rc->add_option("--a", rec.a, "party A's share file")->required();
  rc->add_option("--b", rec.b, "party B's share file")->required();
  rc->add_option("--weights-out", rec.out, "CSV output (default: stdout)");

  MergeArgs merge;
  auto* mg = app.add_subcommand("merge", "concatenate one party's share files from several owners");
  mg->add_option("inputs", merge.inputs, "share files in order")->required();
  mg->add_option("--out", merge.out, "merged share file")->required();
  mg->add_flag("--columns,!--rows", merge.columns,
               "append columns (vertical partition) instead of rows");

  BenchArgs bench;
  auto* bn = app.add_subcommand("bench", "microbenchmark one protocol in-process");
  bn->add_option("--kind", bench.kind, "activation, decompose or mul")
      ->check(CLI::IsMember({"activation", "decompose", "mul"}))
      ->capture_default_str();
  bn->add_option("--batches", bench.batches, "batch sizes")->delimiter(',')->capture_default_str();
  bn->add_option("--reps", bench.reps, "repetitions per batch size")->capture_default_str();
  bn->add_option("--threads", bench.threads, "worker threads per party")->capture_default_str();
  bn->add_option("--seed", bench.seed, "seed")->capture_default_str();
  bn->add_option("--report", bench.report, "JSON report");
  bench.fp.add(*bn);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kExitOk : cli::kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.code()), e.what());
    return cli::exit_code(e.code());
  }

  try {
    if (*sp) return run_split(split);
    if (*tr) return run_train(train);
    if (*rc) return run_reconstruct(rec);
    if (*mg) return run_merge(merge);
    return run_bench(bench);
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.code()), e.what());
    return cli::exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cli::kExitOther;
  }
}
