#include <algorithm>

#include "doctest.h"
#include "oracles.hpp"
#include "rlstorage/rng.hpp"
#include "rlstorage/simenv.hpp"

using namespace rlstorage;

namespace {

Trace make(std::uint64_t space, std::vector<IoRequest> reqs) {
  Trace t;
  t.header.address_space_bytes = space;
  t.requests = std::move(reqs);
  return t;
}

TunableConfig cfg(std::uint32_t ra, std::uint32_t qd, std::uint32_t cache) { return {ra, qd, cache}; }

}  // namespace

TEST_CASE("device presets") {
  const auto n = DeviceProfile::nvme();
  const auto s = DeviceProfile::sata();
  CHECK(n.internal_parallelism == 64);
  CHECK(s.internal_parallelism == 32);
  CHECK(DeviceProfile::preset("sata").seek_penalty_us == s.seek_penalty_us);
  CHECK_THROWS_AS(DeviceProfile::preset("tape"), std::invalid_argument);
  DeviceProfile bad = n;
  bad.internal_parallelism = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("service time") {
  const auto s = DeviceProfile::sata();
  CHECK(service_time(s, 4096, true) == doctest::Approx(400.0 + 0.02 * 4096));
  CHECK(service_time(s, 4096, false) == doctest::Approx(800.0 + 0.02 * 4096));
  CHECK(service_time(DeviceProfile::nvme(), 4096, false) == doctest::Approx(80.0 + 0.01 * 4096));
}

TEST_CASE("tunable config bounds") {
  CHECK_NOTHROW(cfg(0, 1, 1).validate());
  CHECK_NOTHROW(cfg(256, 1024, 1u << 22).validate());
  CHECK_NOTHROW(cfg(8, 12, 64).validate());
  CHECK_THROWS_AS(cfg(3, 8, 64).validate(), std::invalid_argument);
  CHECK_THROWS_AS(cfg(512, 8, 64).validate(), std::invalid_argument);
  CHECK_THROWS_AS(cfg(8, 0, 64).validate(), std::invalid_argument);
  CHECK_THROWS_AS(cfg(8, 2048, 64).validate(), std::invalid_argument);
  CHECK_THROWS_AS(cfg(8, 8, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(cfg(8, 8, 100).validate(), std::invalid_argument);
}

TEST_CASE("nearest-rank percentile") {
  CHECK(nearest_rank_percentile({5.0}, 0.99) == 5.0);
  CHECK(nearest_rank_percentile({3, 1, 2, 4}, 0.5) == 2.0);
  std::vector<double> v;
  for (int i = 100; i >= 1; --i) v.push_back(i);
  CHECK(nearest_rank_percentile(v, 0.99) == 99.0);
  CHECK_THROWS(nearest_rank_percentile({}, 0.5));
  CHECK_THROWS(nearest_rank_percentile({1.0}, 0.0));

  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(1 + uniform_below(rng, 300));
    for (auto& x : xs) x = uniform01(rng) * 1000;
    const double q = 0.01 + 0.99 * uniform01(rng);
    CHECK(nearest_rank_percentile(xs, q) == oracle::nearest_rank(xs, q));
  }
}

TEST_CASE("summarize") {
  CompletionRecord a, b;
  a.request = {0, Op::Read, 0, 4096};
  a.complete_us = 100;
  a.pages_read = 1;
  a.pages_hit = 1;
  b.request = {50, Op::Read, 8192, 8192};
  b.complete_us = 350;
  b.pages_read = 2;
  const std::vector<CompletionRecord> recs = {a, b};
  const MetricsSample m = summarize(recs, 1000.0, 250.0);
  CHECK(m.completions == 2);
  CHECK(m.iops == doctest::Approx(2000.0));
  CHECK(*m.mean_latency_us == doctest::Approx(200.0));
  CHECK(*m.p99_latency_us == doctest::Approx(300.0));
  CHECK(*m.cache_hit_rate == doctest::Approx(1.0 / 3.0));
  CHECK(m.utilization == doctest::Approx(0.25));
  CHECK(m.bytes_transferred == 12288);

  const MetricsSample empty = summarize({}, 1000.0, 0.0);
  CHECK(empty.completions == 0);
  CHECK(empty.iops == 0.0);
  CHECK_FALSE(empty.mean_latency_us);
  CHECK_FALSE(empty.p99_latency_us);
  CHECK_FALSE(empty.cache_hit_rate);
}

TEST_CASE("LRU cache basics") {
  LruCache c(2);
  const std::vector<PageId> seq = {1, 2, 1, 3, 2};
  const auto r = c.access(seq);
  CHECK(r.hits == 1);
  CHECK(r.misses == std::vector<PageId>{1, 2, 3, 2});
  CHECK(r.evicted == std::vector<PageId>{2, 1});
  CHECK(c.contents() == std::vector<PageId>{2, 3});
  CHECK(c.resize(1) == std::vector<PageId>{3});
  CHECK(c.contents() == std::vector<PageId>{2});
  CHECK_THROWS_AS(LruCache(0), std::invalid_argument);
}

TEST_CASE("LRU cache matches the list oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t cap = 1 + uniform_below(rng, 64);
    LruCache c(cap);
    oracle::ListLru ref{cap, {}};
    std::size_t hits = 0, misses = 0, evictions = 0;
    for (int k = 0; k < 2000; ++k) {
      const PageId p = uniform_below(rng, 128);
      const std::vector<PageId> one = {p};
      const auto r = c.access(one);
      ref.access(p);
      hits += r.hits;
      misses += r.misses.size();
      evictions += r.evicted.size();
    }
    CHECK(hits == ref.hits);
    CHECK(misses == ref.misses);
    CHECK(evictions == ref.evictions);
    CHECK(c.contents() == std::vector<PageId>(ref.pages.begin(), ref.pages.end()));
  }
}

TEST_CASE("single read goes to the device, repeat hits the cache") {
  const auto sata = DeviceProfile::sata();
  Simulator sim(sata, cfg(0, 8, 64), 1);
  const auto res = sim.run(make(1 << 20, {{0, Op::Read, 0, 4096}, {10000, Op::Read, 0, 4096}}), 1e6);
  REQUIRE(res.records.size() == 2);
  CHECK_FALSE(res.records[0].cache_hit);
  CHECK(res.records[0].complete_us == doctest::Approx(service_time(sata, 4096, true)));
  CHECK(res.records[1].cache_hit);
  CHECK(res.records[1].latency_us() == doctest::Approx(kCacheHitLatencyUs));
  CHECK(res.samples.size() == 1);
  CHECK(*res.samples[0].cache_hit_rate == doctest::Approx(0.5));
}

TEST_CASE("queue depth limits concurrency") {
  const auto sata = DeviceProfile::sata();
  const Trace t = make(1 << 24, {{0, Op::Read, 1 << 20, 4096}, {0, Op::Read, 1 << 22, 4096}});
  const double st = service_time(sata, 4096, false);

  Simulator one(sata, cfg(0, 1, 64), 1);
  const auto a = one.run(t, 1e6);
  REQUIRE(a.records.size() == 2);
  CHECK(a.records[0].complete_us == doctest::Approx(st));
  CHECK(a.records[1].submit_us == doctest::Approx(st));
  CHECK(a.records[1].complete_us == doctest::Approx(2 * st));

  Simulator two(sata, cfg(0, 2, 64), 1);
  const auto b = two.run(t, 1e6);
  CHECK(b.records[1].complete_us == doctest::Approx(st));
}

TEST_CASE("utilization counts busy servers") {
  const auto sata = DeviceProfile::sata();
  Simulator sim(sata, cfg(0, 8, 64), 1);
  sim.load(make(1 << 20, {{0, Op::Read, 0, 4096}}));
  const auto w = sim.run_until(1000.0);
  const double st = service_time(sata, 4096, true);
  CHECK(w.busy_us == doctest::Approx(st / sata.internal_parallelism));
  CHECK(summarize(w.records, 1000.0, w.busy_us).utilization == doctest::Approx(st / 32.0 / 1000.0));
}

TEST_CASE("run_until splits in-flight work across windows") {
  const auto sata = DeviceProfile::sata();
  Simulator sim(sata, cfg(0, 8, 64), 1);
  sim.load(make(1 << 20, {{0, Op::Read, 0, 4096}}));
  const auto w1 = sim.run_until(100.0);
  CHECK(w1.records.empty());
  CHECK(w1.busy_us == doctest::Approx(100.0 / 32));
  CHECK(sim.in_flight() == 1);
  const auto w2 = sim.run_until(1000.0);
  CHECK(w2.records.size() == 1);
  CHECK(w1.busy_us + w2.busy_us == doctest::Approx(service_time(sata, 4096, true) / 32));
  CHECK(sim.done());
  CHECK_THROWS_AS(sim.run_until(10.0), std::invalid_argument);
  CHECK_THROWS_AS(sim.load(make(1 << 20, {})), std::logic_error);
}

TEST_CASE("readahead turns sequential misses into hits") {
  const auto nvme = DeviceProfile::nvme();
  const Trace t = gen_sequential(0, 900, 4096, 200.0, 1 << 24);
  for (std::uint32_t ra : {0u, 1u, 4u, 8u}) {
    Simulator sim(nvme, cfg(ra, 8, 4096), 1);
    const auto res = sim.run(t, 1e6);
    std::size_t hits = 0;
    for (std::size_t i = 100; i < res.records.size(); ++i) hits += res.records[i].pages_hit;
    const double rate = static_cast<double>(hits) / static_cast<double>(res.records.size() - 100);
    CHECK(rate == doctest::Approx(static_cast<double>(ra) / (ra + 1.0)).epsilon(0.01));
  }
}

TEST_CASE("random reads do not trigger readahead") {
  const auto nvme = DeviceProfile::nvme();
  const Trace t = gen_random(1 << 30, 300, 4096, 1.0, 200.0, 4);
  Simulator sim(nvme, cfg(64, 8, 4096), 1);
  sim.run(t, 1e6);
  CHECK(sim.cache().size() <= 300);
}

TEST_CASE("writes occupy the device and populate the cache") {
  const auto sata = DeviceProfile::sata();
  Simulator sim(sata, cfg(0, 8, 64), 1);
  const auto res = sim.run(make(1 << 20, {{0, Op::Write, 8192, 8192}, {5000, Op::Read, 8192, 4096}}), 1e6);
  CHECK_FALSE(res.records[0].cache_hit);
  CHECK(res.records[0].latency_us() > 400.0);
  CHECK(res.records[0].pages_read == 0);
  CHECK(res.records[1].cache_hit);
}

TEST_CASE("apply_config resizes the cache and admits queued work") {
  const auto sata = DeviceProfile::sata();
  Simulator sim(sata, cfg(0, 1, 64), 1);
  std::vector<IoRequest> reqs;
  for (int i = 0; i < 8; ++i) reqs.push_back({0, Op::Read, static_cast<std::uint64_t>(i) << 20, 4096});
  sim.load(make(1 << 24, reqs));
  sim.run_until(1.0);
  CHECK(sim.in_flight() == 1);
  CHECK(sim.admission_backlog() == 7);
  const TunableConfig prev = sim.apply_config(cfg(0, 4, 4));
  CHECK(prev.queue_depth == 1);
  CHECK(sim.in_flight() == 4);
  CHECK(sim.cache().capacity() == 4);
  CHECK(sim.cache().size() == 4);
  CHECK_THROWS_AS(sim.apply_config(cfg(3, 4, 4)), std::invalid_argument);
}

TEST_CASE("simulator is deterministic") {
  const Trace t = gen_random(1 << 26, 2000, 8192, 0.7, 30.0, 8);
  Simulator a(DeviceProfile::sata(), cfg(8, 4, 256), 3);
  Simulator b(DeviceProfile::sata(), cfg(8, 4, 256), 3);
  const auto ra = a.run(t, 10000.0);
  const auto rb = b.run(t, 10000.0);
  CHECK(ra.records == rb.records);
  CHECK(ra.samples == rb.samples);
}
