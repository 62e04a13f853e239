#include "rlstorage/simenv.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rlstorage {
namespace {

bool pow2(std::uint32_t v) { return std::has_single_bit(v); }

}  // namespace

DeviceProfile DeviceProfile::nvme() { return {"nvme", 80.0, 0.01, 0.0, 64}; }

DeviceProfile DeviceProfile::sata() { return {"sata", 400.0, 0.02, 400.0, 32}; }

DeviceProfile DeviceProfile::preset(const std::string& name) {
  if (name == "nvme") return nvme();
  if (name == "sata") return sata();
  throw std::invalid_argument("unknown device preset: " + name);
}

void DeviceProfile::validate() const {
  if (!(base_latency_us >= 0.0) || !(per_byte_us >= 0.0) || !(seek_penalty_us >= 0.0))
    throw std::invalid_argument("device latencies must be non-negative");
  if (internal_parallelism < 1) throw std::invalid_argument("internal_parallelism must be >= 1");
}

void TunableConfig::validate() const {
  if (readahead_pages > kMaxReadahead || (readahead_pages != 0 && !pow2(readahead_pages)))
    throw std::invalid_argument("readahead_pages must be 0 or a power of two <= 256");
  if (queue_depth < 1 || queue_depth > kMaxQueueDepth)
    throw std::invalid_argument("queue_depth must lie in [1, 1024]");
  if (cache_pages < 1 || cache_pages > kMaxCachePages || !pow2(cache_pages))
    throw std::invalid_argument("cache_pages must be a power of two in [1, 2^22]");
}

double service_time(const DeviceProfile& profile, std::uint64_t bytes, bool contiguous) {
  return profile.base_latency_us + static_cast<double>(bytes) * profile.per_byte_us +
         (contiguous ? 0.0 : profile.seek_penalty_us);
}

double service_time(const DeviceProfile& profile, const IoRequest& request, bool contiguous) {
  return service_time(profile, request.size, contiguous);
}

double nearest_rank_percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of empty set");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("percentile must be in (0, 1]");
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

MetricsSample summarize(std::span<const CompletionRecord> records, double window_us, double busy_us) {
  if (!(window_us > 0.0)) throw std::invalid_argument("window_us must be positive");
  MetricsSample s;
  s.window_us = window_us;
  s.completions = records.size();
  s.iops = static_cast<double>(records.size()) / (window_us * 1e-6);
  s.utilization = std::clamp(busy_us / window_us, 0.0, 1.0);
  if (records.empty()) return s;

  std::vector<double> lat;
  lat.reserve(records.size());
  std::uint64_t pages_read = 0;
  std::uint64_t pages_hit = 0;
  for (const auto& r : records) {
    lat.push_back(r.latency_us());
    s.bytes_transferred += r.request.size;
    pages_read += r.pages_read;
    pages_hit += r.pages_hit;
  }
  s.mean_latency_us = std::accumulate(lat.begin(), lat.end(), 0.0) / static_cast<double>(lat.size());
  s.p99_latency_us = nearest_rank_percentile(std::move(lat), 0.99);
  if (pages_read > 0) s.cache_hit_rate = static_cast<double>(pages_hit) / static_cast<double>(pages_read);
  return s;
}

// ---------------------------------------------------------------------------

LruCache::LruCache(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("cache capacity must be >= 1");
}

LruCache::AccessResult LruCache::access(std::span<const PageId> pages) {
  AccessResult res;
  for (PageId p : pages) {
    if (touch(p)) {
      ++res.hits;
    } else {
      res.misses.push_back(p);
      insert(p, &res.evicted);
    }
  }
  return res;
}

bool LruCache::touch(PageId page) {
  auto it = index_.find(page);
  if (it == index_.end()) return false;
  order_.splice(order_.begin(), order_, it->second);
  return true;
}

void LruCache::insert(PageId page, std::vector<PageId>* evicted) {
  order_.push_front(page);
  index_[page] = order_.begin();
  while (order_.size() > capacity_) {
    const PageId victim = order_.back();
    if (evicted) evicted->push_back(victim);
    index_.erase(victim);
    order_.pop_back();
  }
}

std::vector<PageId> LruCache::resize(std::size_t capacity) {
  if (capacity == 0) throw std::invalid_argument("cache capacity must be >= 1");
  capacity_ = capacity;
  std::vector<PageId> evicted;
  while (order_.size() > capacity_) {
    evicted.push_back(order_.back());
    index_.erase(order_.back());
    order_.pop_back();
  }
  return evicted;
}

// ---------------------------------------------------------------------------

Simulator::Simulator(DeviceProfile profile, TunableConfig config, std::uint64_t seed)
    : profile_(std::move(profile)), config_(config), seed_(seed), cache_((config.validate(), config.cache_pages)) {
  profile_.validate();
  last_dispatch_end_ = 0;
}

void Simulator::load(const Trace& trace) {
  if (loaded_) throw std::logic_error("simulator already has a trace");
  trace.validate();
  requests_ = trace.requests;
  address_space_ = trace.header.address_space_bytes;
  pending_.assign(requests_.size(), Pending{});
  for (std::size_t i = 0; i < requests_.size(); ++i)
    push(static_cast<double>(requests_[i].arrival_us), EventKind::Arrival, i);
  loaded_ = true;
}

bool Simulator::done() const { return loaded_ && completed_ == requests_.size(); }

std::uint32_t Simulator::device_slots() const {
  return std::min(config_.queue_depth, profile_.internal_parallelism);
}

void Simulator::push(double t, EventKind kind, std::size_t request) {
  events_.push({t, next_seq_++, kind, request});
}

void Simulator::on_arrival(double t, std::size_t i) {
  const IoRequest& r = requests_[i];
  Pending& p = pending_[i];

  if (r.op == Op::Write) {
    // write-through: pages enter the cache, the device still does the work
    for (PageId page = r.offset / kPageBytes; page <= (r.end() - 1) / kPageBytes; ++page)
      if (!cache_.touch(page)) cache_.insert(page);
    p.cmd_offset = r.offset;
    p.cmd_bytes = r.size;
    admission_.push_back(i);
    try_dispatch(t);
    return;
  }

  const bool sequential = last_read_end_ && *last_read_end_ == r.offset;
  last_read_end_ = r.end();

  const PageId first = r.offset / kPageBytes;
  const PageId last = (r.end() - 1) / kPageBytes;
  std::vector<bool> fetched(last - first + 1, false);
  std::optional<PageId> first_fetched;
  std::uint32_t hits = 0;
  std::uint32_t pre_resident = 0;
  std::uint64_t beyond = 0;

  for (PageId page = first; page <= last; ++page) {
    if (cache_.touch(page)) {
      ++hits;
      if (!fetched[page - first]) ++pre_resident;
      continue;
    }
    cache_.insert(page);
    fetched[page - first] = true;
    if (!first_fetched) first_fetched = page;
    if (!sequential) continue;
    for (PageId ahead = page + 1; ahead <= page + config_.readahead_pages; ++ahead) {
      if ((ahead + 1) * kPageBytes > address_space_) break;
      if (cache_.contains(ahead)) continue;
      cache_.insert(ahead);
      if (ahead <= last) {
        fetched[ahead - first] = true;
      } else {
        ++beyond;
      }
    }
  }

  p.pages_read = static_cast<std::uint32_t>(last - first + 1);
  p.pages_hit = hits;
  if (pre_resident == p.pages_read) {
    p.submit_us = t;
    push(t + kCacheHitLatencyUs, EventKind::HitDone, i);
    return;
  }
  const std::uint64_t missing = static_cast<std::uint64_t>(p.pages_read - pre_resident) * kPageBytes;
  p.cmd_offset = *first_fetched == first ? r.offset : *first_fetched * kPageBytes;
  p.cmd_bytes = std::min<std::uint64_t>(r.size, missing) + beyond * kPageBytes;
  admission_.push_back(i);
  try_dispatch(t);
}

void Simulator::try_dispatch(double t) {
  while (!admission_.empty() && in_flight_.size() < device_slots()) {
    const std::size_t i = admission_.front();
    admission_.pop_front();
    Pending& p = pending_[i];
    const bool contiguous = last_dispatch_end_ && *last_dispatch_end_ == p.cmd_offset;
    last_dispatch_end_ = p.cmd_offset + p.cmd_bytes;
    p.submit_us = t;
    in_flight_.emplace(i, t);
    push(t + service_time(profile_, p.cmd_bytes, contiguous), EventKind::DeviceDone, i);
  }
}

void Simulator::finish(double t, std::size_t i, bool hit, std::vector<CompletionRecord>& out) {
  const Pending& p = pending_[i];
  CompletionRecord rec;
  rec.request = requests_[i];
  rec.index = i;
  rec.submit_us = p.submit_us;
  rec.complete_us = t;
  rec.cache_hit = hit;
  rec.pages_read = p.pages_read;
  rec.pages_hit = p.pages_hit;
  out.push_back(rec);
  ++completed_;
}

WindowResult Simulator::run_until(double t_end_us) {
  if (!loaded_) throw std::logic_error("simulator has no trace");
  if (t_end_us < now_) throw std::invalid_argument("window end precedes the clock");
  WindowResult w;
  w.start_us = now_;
  w.end_us = t_end_us;
  double busy = 0.0;

  while (!events_.empty() && events_.top().t < t_end_us) {
    const Event e = events_.top();
    events_.pop();
    switch (e.kind) {
      case EventKind::Arrival:
        on_arrival(e.t, e.request);
        break;
      case EventKind::HitDone:
        finish(e.t, e.request, true, w.records);
        break;
      case EventKind::DeviceDone: {
        auto it = in_flight_.find(e.request);
        busy += e.t - std::max(it->second, w.start_us);
        in_flight_.erase(it);
        finish(e.t, e.request, false, w.records);
        try_dispatch(e.t);
        break;
      }
    }
  }
  for (const auto& [i, start] : in_flight_) busy += t_end_us - std::max(start, w.start_us);
  w.busy_us = busy / static_cast<double>(profile_.internal_parallelism);
  now_ = t_end_us;
  return w;
}

TunableConfig Simulator::apply_config(const TunableConfig& config) {
  config.validate();
  const TunableConfig previous = config_;
  cache_.resize(config.cache_pages);
  config_ = config;
  if (loaded_) try_dispatch(now_);
  return previous;
}

RunResult Simulator::run(const Trace& trace, double window_us) {
  if (!(window_us > 0.0)) throw std::invalid_argument("window_us must be positive");
  load(trace);
  RunResult out;
  const double origin = now_;
  for (std::uint64_t k = 1; !done(); ++k) {
    WindowResult w = run_until(origin + static_cast<double>(k) * window_us);
    out.samples.push_back(summarize(w.records, window_us, w.busy_us));
    out.records.insert(out.records.end(), w.records.begin(), w.records.end());
  }
  return out;
}

}  // namespace rlstorage
