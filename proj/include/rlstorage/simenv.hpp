#pragma once

#include <cstdint>
#include <deque>
#include <list>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rlstorage/trace.hpp"

namespace rlstorage {

inline constexpr std::uint64_t kPageBytes = 4096;
inline constexpr double kCacheHitLatencyUs = 5.0;

using PageId = std::uint64_t;

struct DeviceProfile {
  std::string name;
  double base_latency_us = 0.0;
  double per_byte_us = 0.0;
  double seek_penalty_us = 0.0;
  std::uint32_t internal_parallelism = 1;

  static DeviceProfile nvme();
  static DeviceProfile sata();
  static DeviceProfile preset(const std::string& name);

  void validate() const;
};

/// The knob vector the tuner controls.
///
/// readahead_pages and cache_pages are powers of two (readahead may be 0).
/// queue_depth is any integer in range so that smoothed actuation can hold
/// intermediate depths.
struct TunableConfig {
  std::uint32_t readahead_pages = 8;
  std::uint32_t queue_depth = 8;
  std::uint32_t cache_pages = 1024;

  static constexpr std::uint32_t kMaxReadahead = 256;
  static constexpr std::uint32_t kMaxQueueDepth = 1024;
  static constexpr std::uint32_t kMaxCachePages = 1u << 22;

  void validate() const;
  bool operator==(const TunableConfig&) const = default;
};

struct CompletionRecord {
  IoRequest request;
  std::size_t index = 0;  // position in the trace
  double submit_us = 0.0;
  double complete_us = 0.0;
  bool cache_hit = false;
  std::uint32_t pages_read = 0;  // page lookups made by a read
  std::uint32_t pages_hit = 0;

  double latency_us() const { return complete_us - static_cast<double>(request.arrival_us); }
  bool operator==(const CompletionRecord&) const = default;
};

/// Windowed metrics. Latency and hit-rate fields are absent for windows
/// without completions (or without reads, for the hit rate).
struct MetricsSample {
  double window_us = 0.0;
  std::size_t completions = 0;
  double iops = 0.0;
  std::optional<double> mean_latency_us;
  std::optional<double> p99_latency_us;
  std::optional<double> cache_hit_rate;
  double utilization = 0.0;
  std::uint64_t bytes_transferred = 0;

  bool operator==(const MetricsSample&) const = default;
};

double service_time(const DeviceProfile& profile, std::uint64_t bytes, bool contiguous);
double service_time(const DeviceProfile& profile, const IoRequest& request, bool contiguous);

/// Nearest-rank percentile over unsorted values; `q` in (0, 1].
double nearest_rank_percentile(std::vector<double> values, double q);

MetricsSample summarize(std::span<const CompletionRecord> records, double window_us, double busy_us);

/// LRU page cache. Hits refresh recency; inserting past capacity evicts the
/// least recently used page.
class LruCache {
 public:
  struct AccessResult {
    std::size_t hits = 0;
    std::vector<PageId> misses;
    std::vector<PageId> evicted;
  };

  explicit LruCache(std::size_t capacity);

  AccessResult access(std::span<const PageId> pages);

  /// Refreshes `page` if resident. Returns whether it was.
  bool touch(PageId page);
  /// Inserts a non-resident page as most recent, evicting as needed.
  void insert(PageId page, std::vector<PageId>* evicted = nullptr);
  bool contains(PageId page) const { return index_.contains(page); }

  /// Changes capacity; shrinking evicts LRU-first. Returns evicted pages.
  std::vector<PageId> resize(std::size_t capacity);

  std::size_t size() const { return order_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Resident pages, most recent first.
  std::vector<PageId> contents() const { return {order_.begin(), order_.end()}; }

 private:
  std::size_t capacity_;
  std::list<PageId> order_;  // front = most recent
  std::unordered_map<PageId, std::list<PageId>::iterator> index_;
};

struct WindowResult {
  double start_us = 0.0;
  double end_us = 0.0;
  std::vector<CompletionRecord> records;
  double busy_us = 0.0;  // server-busy time divided by internal parallelism
};

struct RunResult {
  std::vector<CompletionRecord> records;
  std::vector<MetricsSample> samples;
};

/// Discrete-event model of a block device behind an LRU page cache.
///
/// Cache lookups happen at arrival. A read whose pages are all resident
/// completes after kCacheHitLatencyUs without touching the device; anything
/// else becomes one device command that waits in a FIFO admission queue until
/// fewer than min(queue_depth, internal_parallelism) commands are in flight.
/// A read that starts where the previous read ended is sequential: each of
/// its page misses also fetches the next readahead_pages pages.
class Simulator {
 public:
  Simulator(DeviceProfile profile, TunableConfig config, std::uint64_t seed);

  /// Queues every request of `trace` for arrival. May only be called once.
  void load(const Trace& trace);

  /// Processes all events strictly before `t_end_us` and closes the window
  /// that began at the previous boundary.
  WindowResult run_until(double t_end_us);

  /// Applies `config` from the current clock on. Returns the previous config.
  TunableConfig apply_config(const TunableConfig& config);

  bool done() const;
  double now_us() const { return now_; }
  const TunableConfig& config() const { return config_; }
  const DeviceProfile& profile() const { return profile_; }
  std::uint64_t seed() const { return seed_; }
  const LruCache& cache() const { return cache_; }
  std::size_t in_flight() const { return in_flight_.size(); }
  std::size_t admission_backlog() const { return admission_.size(); }

  /// Loads `trace` and runs it to completion in windows of `window_us`.
  RunResult run(const Trace& trace, double window_us);

 private:
  enum class EventKind : std::uint8_t { Arrival, HitDone, DeviceDone };
  struct Event {
    double t;
    std::uint64_t seq;
    EventKind kind;
    std::size_t request;
    bool operator>(const Event& o) const { return t != o.t ? t > o.t : seq > o.seq; }
  };
  struct Pending {
    std::uint64_t cmd_offset = 0;
    std::uint64_t cmd_bytes = 0;
    double submit_us = 0.0;
    std::uint32_t pages_read = 0;
    std::uint32_t pages_hit = 0;
  };

  void push(double t, EventKind kind, std::size_t request);
  void on_arrival(double t, std::size_t i);
  void try_dispatch(double t);
  void finish(double t, std::size_t i, bool hit, std::vector<CompletionRecord>& out);
  std::uint32_t device_slots() const;

  DeviceProfile profile_;
  TunableConfig config_;
  std::uint64_t seed_;
  LruCache cache_;

  std::vector<IoRequest> requests_;
  std::vector<Pending> pending_;
  std::uint64_t address_space_ = 0;
  bool loaded_ = false;
  std::size_t completed_ = 0;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t next_seq_ = 0;
  std::deque<std::size_t> admission_;
  std::map<std::size_t, double> in_flight_;  // request -> device start time

  std::optional<std::uint64_t> last_read_end_;
  std::optional<std::uint64_t> last_dispatch_end_;

  double now_ = 0.0;
};

}  // namespace rlstorage
