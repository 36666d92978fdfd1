#include "vpfuzz/fuzzer.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "vpfuzz/util.hpp"

namespace vpfuzz {

std::atomic<bool> g_interrupt_requested{false};

namespace {

constexpr uint8_t kInterestingBytes[] = {0x00, 0xFF, 0x7F, 0x80, '\n', '\0'};

void count_op(MutationHistogram* h, MutOp op) {
  if (h) (*h)[static_cast<size_t>(op)]++;
}

}  // namespace

std::vector<uint8_t> mutate_havoc(std::span<const uint8_t> input, Rng& rng,
                                  const std::vector<std::vector<uint8_t>>& corpus,
                                  MutationHistogram* histogram) {
  std::vector<uint8_t> buf(input.begin(), input.end());
  if (buf.size() > kMaxInputLen) buf.resize(kMaxInputLen);

  const uint64_t stack = 1 + rng.below(64);
  for (uint64_t s = 0; s < stack; s++) {
    MutOp op = static_cast<MutOp>(rng.below(static_cast<uint64_t>(MutOp::kCount)));
    switch (op) {
      case MutOp::BitFlip: {
        if (buf.empty()) break;
        uint64_t bit = rng.below(buf.size() * 8);
        buf[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
        count_op(histogram, op);
        break;
      }
      case MutOp::ByteRandom: {
        if (buf.empty()) break;
        buf[rng.below(buf.size())] = static_cast<uint8_t>(rng.below(256));
        count_op(histogram, op);
        break;
      }
      case MutOp::ByteInteresting: {
        if (buf.empty()) break;
        buf[rng.below(buf.size())] =
            kInterestingBytes[rng.below(sizeof(kInterestingBytes))];
        count_op(histogram, op);
        break;
      }
      case MutOp::ByteDelete: {
        if (buf.empty()) break;
        buf.erase(buf.begin() + static_cast<long>(rng.below(buf.size())));
        count_op(histogram, op);
        break;
      }
      case MutOp::ByteInsert: {
        if (buf.size() >= kMaxInputLen) break;
        size_t pos = rng.below(buf.size() + 1);
        buf.insert(buf.begin() + static_cast<long>(pos),
                   static_cast<uint8_t>(rng.below(256)));
        count_op(histogram, op);
        break;
      }
      case MutOp::ChunkDup: {
        if (buf.empty()) break;
        size_t src = rng.below(buf.size());
        size_t max_n = std::min<size_t>(buf.size() - src, 16);
        size_t n = 1 + rng.below(max_n);
        if (buf.size() + n > kMaxInputLen) break;
        std::vector<uint8_t> chunk(buf.begin() + static_cast<long>(src),
                                   buf.begin() + static_cast<long>(src + n));
        size_t dst = rng.below(buf.size() + 1);
        buf.insert(buf.begin() + static_cast<long>(dst), chunk.begin(),
                   chunk.end());
        count_op(histogram, op);
        break;
      }
      case MutOp::ChunkSplice: {
        if (buf.empty() || corpus.empty()) break;
        const std::vector<uint8_t>& other = corpus[rng.below(corpus.size())];
        if (other.empty()) break;
        size_t n = 1 + rng.below(std::min<size_t>(other.size(), 16));
        size_t src = rng.below(other.size() - n + 1);
        size_t dst = rng.below(buf.size());
        n = std::min(n, buf.size() - dst);
        std::copy(other.begin() + static_cast<long>(src),
                  other.begin() + static_cast<long>(src + n),
                  buf.begin() + static_cast<long>(dst));
        count_op(histogram, op);
        break;
      }
      case MutOp::kCount:
        break;
    }
  }
  if (buf.size() > kMaxInputLen) buf.resize(kMaxInputLen);
  return buf;
}

uint64_t entry_energy(const QueueEntry& e, uint64_t now_exec,
                      uint64_t median_instructions) {
  uint64_t energy = kEnergyBase;
  if (now_exec - e.found_at_exec <= kRecentWindowExecs) energy *= 2;
  if (median_instructions > 0) {
    uint64_t ratio = e.instructions / median_instructions;
    while (ratio > 2) {
      energy /= 2;
      ratio /= 2;
    }
  }
  return energy == 0 ? 1 : energy;
}

void recompute_favored(std::vector<QueueEntry>& queue) {
  std::map<uint32_t, size_t> winner;
  for (size_t i = 0; i < queue.size(); i++) {
    for (uint32_t idx : queue[i].cov_indices) {
      auto it = winner.find(idx);
      if (it == winner.end() ||
          queue[i].input.size() < queue[it->second].input.size())
        winner[idx] = i;
    }
  }
  for (auto& e : queue) e.favored = false;
  for (const auto& [idx, i] : winner) queue[i].favored = true;
}

size_t schedule_next(const std::vector<QueueEntry>& queue, Rng& rng,
                     uint64_t now_exec, uint64_t median_instructions) {
  std::vector<size_t> favored, rest;
  for (size_t i = 0; i < queue.size(); i++)
    (queue[i].favored ? favored : rest).push_back(i);

  if (!favored.empty() && (rest.empty() || rng.percent(80)))
    return favored[rng.below(favored.size())];

  const std::vector<size_t>& pool = rest.empty() ? favored : rest;
  uint64_t total = 0;
  for (size_t i : pool) total += entry_energy(queue[i], now_exec, median_instructions);
  uint64_t x = rng.below(total);
  for (size_t i : pool) {
    uint64_t e = entry_energy(queue[i], now_exec, median_instructions);
    if (x < e) return i;
    x -= e;
  }
  return pool.back();
}

namespace {

class StatsWriter {
 public:
  explicit StatsWriter(const std::string& out_dir) {
    if (out_dir.empty()) return;
    file_.open(out_dir + "/stats.csv", std::ios::trunc);
    file_ << "unix_ms,total_execs,execs_per_sec,queue_len,crashes_unique\n";
  }

  double rate(uint64_t total_execs) {
    double now = now_ms();
    window_.push_back({now, total_execs});
    while (window_.size() > 2 && now - window_.front().first > 10'000.0)
      window_.pop_front();
    double dt = (now - window_.front().first) / 1000.0;
    if (dt <= 0) return 0;
    return static_cast<double>(total_execs - window_.front().second) / dt;
  }

  void row(const FuzzStats& st) {
    if (!file_.is_open()) return;
    file_ << unix_ms() << "," << st.total_execs << ",";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", st.execs_per_sec);
    file_ << buf << "," << st.queue_len << "," << st.crashes_unique << "\n";
    file_.flush();
  }

 private:
  std::ofstream file_;
  std::deque<std::pair<double, uint64_t>> window_;
};

std::string input_preview(const std::vector<uint8_t>& in) {
  std::string out;
  for (uint8_t b : in) {
    if (out.size() > 32) {
      out += "...";
      break;
    }
    if (b >= 0x20 && b < 0x7f)
      out += static_cast<char>(b);
    else {
      char esc[8];
      std::snprintf(esc, sizeof(esc), "\\x%02x", b);
      out += esc;
    }
  }
  return out;
}

}  // namespace

std::string CampaignReport::to_text() const {
  std::ostringstream s;
  s << "campaign report\n";
  s << "mode: " << exec_mode_name(mode) << "\n";
  s << "rng_seed: " << rng_seed << "\n";
  s << "total_execs: " << total_execs << "\n";
  s << "seed_execs: " << seed_execs << "\n";
  s << "total_crash_events: " << total_crash_events << "\n";
  s << "unique_crashes: " << crashes.size() << "\n";
  s << "queue_entries: " << queue.size() << "\n";
  s << "coverage_bytes: " << coverage_bytes << "\n";
  s << "last_new_path_exec: " << last_new_path_exec << "\n";
  if (aborted) s << "aborted: " << abort_reason << "\n";
  s << "queue:\n";
  for (size_t i = 0; i < queue.size(); i++) {
    const QueueEntry& e = queue[i];
    s << "  " << i << " len=" << e.input.size() << " digest="
      << hex64(e.coverage_digest) << " found_at_exec=" << e.found_at_exec
      << " fuzzed=" << e.times_fuzzed << " favored=" << (e.favored ? 1 : 0)
      << " input=\"" << input_preview(e.input) << "\"\n";
  }
  s << "crashes:\n";
  for (size_t i = 0; i < crashes.size(); i++) {
    const CrashRecord& c = crashes[i];
    s << "  " << i << " reason=" << crash_reason_name(c.exit.reason)
      << " value=" << c.exit.value << " digest=" << hex64(c.coverage_digest)
      << " found_at_exec=" << c.found_at_exec << " len=" << c.input.size()
      << " input=\"" << input_preview(c.input) << "\"\n";
  }
  s << "end\n";
  return s.str();
}

CampaignReport fuzz_campaign(const CampaignOptions& opts) {
  namespace fs = std::filesystem;

  CampaignReport report;
  report.mode = opts.mode;
  report.rng_seed = opts.config.rng_seed;

  if (!opts.out_dir.empty()) {
    if (fs::exists(opts.out_dir)) {
      if (!opts.force)
        throw ConfigError("out_dir '" + opts.out_dir +
                          "' already exists (use --force to overwrite)");
      fs::remove_all(opts.out_dir);
    }
    fs::create_directories(opts.out_dir + "/queue");
    fs::create_directories(opts.out_dir + "/crashes");
  }

  CaseRunner runner(opts.config, opts.mode, opts.vp_binary);
  Rng rng(opts.config.rng_seed);
  StatsWriter stats(opts.out_dir);

  CoverageMap global;  // classified space
  std::set<std::vector<uint8_t>> seen_inputs;
  std::set<std::pair<uint8_t, uint64_t>> crash_keys;
  std::vector<std::vector<uint8_t>> corpus_inputs;  // mirror for splicing
  uint64_t median_instructions = 0;

  const double t_start = now_ms();
  double next_stats_ms = t_start + 5000;
  double next_console_ms = t_start;

  auto update_median = [&] {
    if (report.queue.empty()) return;
    std::vector<uint64_t> v;
    v.reserve(report.queue.size());
    for (const auto& e : report.queue) v.push_back(e.instructions);
    std::sort(v.begin(), v.end());
    median_instructions = v[v.size() / 2];
  };

  auto persist_queue_entry = [&](size_t idx) {
    if (opts.out_dir.empty()) return;
    char name[64];
    std::snprintf(name, sizeof(name), "%06zu_%s", idx,
                  hex64(report.queue[idx].coverage_digest).c_str());
    write_file_bytes(opts.out_dir + "/queue/" + name, report.queue[idx].input);
  };

  auto persist_crash = [&](const CrashRecord& c, size_t idx) {
    if (opts.out_dir.empty()) return;
    try {
      char name[96];
      std::snprintf(name, sizeof(name), "crash_%04zu_%s_%s", idx,
                    crash_reason_name(c.exit.reason),
                    hex64(c.coverage_digest).c_str());
      std::string stem = opts.out_dir + "/crashes/" + name;
      write_file_bytes(stem + ".bin", c.input);
      std::ostringstream meta;
      meta << "reason = " << crash_reason_name(c.exit.reason) << "\n";
      meta << "exit = " << exit_kind_to_string(c.exit) << "\n";
      meta << "value = " << c.exit.value << "\n";
      meta << "coverage_digest = " << hex64(c.coverage_digest) << "\n";
      meta << "found_at_exec = " << c.found_at_exec << "\n";
      write_file_text(stem + ".meta", meta.str());
    } catch (const std::exception& e) {
      // Persistence problems degrade to a warning; the campaign goes on.
      std::fprintf(stderr, "warning: cannot persist crash: %s\n", e.what());
    }
  };

  auto exec_one = [&](const std::vector<uint8_t>& input) {
    RunResult r = runner.run(input);
    report.total_execs++;

    CoverageMap raw;
    raw.bytes = r.coverage;
    raw.bytes.resize(kCoverageMapSize, 0);
    CoverageMap local = classify_counts(raw);
    uint64_t digest = coverage_digest(local);
    NewBits verdict = has_new_bits(global, local);
    if (verdict != NewBits::Nothing) report.last_new_path_exec = report.total_execs;

    if (r.exit.tag == ExitKindTag::Crash) {
      report.total_crash_events++;
      auto key = std::make_pair(static_cast<uint8_t>(r.exit.reason), digest);
      if (crash_keys.insert(key).second) {
        report.crashes.push_back({input, r.exit, digest, report.total_execs});
        persist_crash(report.crashes.back(), report.crashes.size() - 1);
      }
    }

    // Timeouts stay out of the queue: scheduling one costs a full budget.
    if (verdict != NewBits::Nothing && r.exit.tag != ExitKindTag::Timeout &&
        !seen_inputs.count(input)) {
      seen_inputs.insert(input);
      QueueEntry e;
      e.input = input;
      e.coverage_digest = digest;
      e.exec_us = r.exec_us;
      e.instructions = r.instructions;
      e.found_at_exec = report.total_execs;
      e.cov_indices = nonzero_indices(local);
      report.queue.push_back(std::move(e));
      corpus_inputs.push_back(input);
      recompute_favored(report.queue);
      update_median();
      persist_queue_entry(report.queue.size() - 1);
    }
  };

  auto tick = [&] {
    double now = now_ms();
    FuzzStats st;
    st.total_execs = report.total_execs;
    st.queue_len = report.queue.size();
    st.crashes_unique = report.crashes.size();
    st.last_new_path_exec = report.last_new_path_exec;
    st.mode = opts.mode;
    if (now >= next_stats_ms) {
      st.execs_per_sec = stats.rate(report.total_execs);
      stats.row(st);
      next_stats_ms = now + 5000;
    }
    if (!opts.quiet && now >= next_console_ms) {
      std::fprintf(stderr,
                   "[fuzz] execs=%" PRIu64 " rate=%.0f/s queue=%zu crashes=%zu\n",
                   report.total_execs, stats.rate(report.total_execs),
                   report.queue.size(), report.crashes.size());
      next_console_ms = now + 1000;
    }
  };

  auto budget_left = [&] {
    if (g_interrupt_requested.load()) return false;
    if (opts.stop_on_first_crash && !report.crashes.empty()) return false;
    if (opts.max_execs && report.total_execs >= *opts.max_execs) return false;
    if (opts.max_seconds &&
        (now_ms() - t_start) / 1000.0 >= *opts.max_seconds)
      return false;
    return true;
  };

  std::vector<std::vector<uint8_t>> seeds = opts.seeds;
  if (seeds.empty() && !opts.config.seed_dir.empty()) {
    for (const auto& ent : fs::directory_iterator(opts.config.seed_dir))
      if (ent.is_regular_file())
        seeds.push_back(read_file_bytes(ent.path().string()));
    std::sort(seeds.begin(), seeds.end());
  }
  if (seeds.empty()) seeds.push_back({});  // default seed: empty input

  try {
    for (const auto& s : seeds) {
      if (!budget_left()) break;
      exec_one(s);
      report.seed_execs++;
      tick();
    }
    while (budget_left()) {
      std::vector<uint8_t> base;
      if (!report.queue.empty()) {
        size_t idx = schedule_next(report.queue, rng, report.total_execs,
                                   median_instructions);
        report.queue[idx].times_fuzzed++;
        base = report.queue[idx].input;
      } else {
        base = seeds[report.total_execs % seeds.size()];
        report.seed_execs++;
      }
      exec_one(mutate_havoc(base, rng, corpus_inputs));
      tick();
    }
  } catch (const std::exception& e) {
    report.aborted = true;
    report.abort_reason = e.what();
  }

  report.elapsed_seconds = (now_ms() - t_start) / 1000.0;
  FuzzStats st;
  st.total_execs = report.total_execs;
  st.execs_per_sec = stats.rate(report.total_execs);
  st.queue_len = report.queue.size();
  st.crashes_unique = report.crashes.size();
  st.last_new_path_exec = report.last_new_path_exec;
  st.mode = opts.mode;
  stats.row(st);

  report.coverage_bytes = global.nonzero_bytes();
  if (!opts.out_dir.empty())
    write_file_text(opts.out_dir + "/report.txt", report.to_text());
  return report;
}

}  // namespace vpfuzz
