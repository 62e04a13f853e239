#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlstorage/simenv.hpp"

namespace rlstorage {

enum class Feature : std::uint8_t {
  MeanRequestBytes,
  ReadFraction,
  Sequentiality,
  ArrivalRate,
  MeanLatency,
  CacheHitRate,
  Utilization,
};

inline constexpr std::size_t kFeatureCount = 7;

const char* feature_name(Feature f);
std::optional<Feature> feature_from_name(const std::string& name);

/// Windowed observation of the I/O stream.
struct FeatureVector {
  double mean_request_bytes = 0.0;
  double read_fraction = 0.0;
  double sequentiality = 0.0;
  double arrival_rate_per_s = 0.0;
  double mean_latency_us = 0.0;
  double cache_hit_rate = 0.0;
  double utilization = 0.0;

  double get(Feature f) const;
  std::array<double, kFeatureCount> as_array() const;
  bool operator==(const FeatureVector&) const = default;
};

/// Per-feature bin edges. A feature with k edges has k + 1 bins; values
/// below the first edge land in bin 0, values at or above edge j in bin j + 1.
struct BinningScheme {
  std::vector<Feature> features;
  std::vector<std::vector<double>> edges;

  /// Sequentiality, read fraction, utilization and cache hit rate, each split
  /// at 0.33 and 0.66: 81 states.
  static BinningScheme standard();

  void validate() const;
  std::size_t bins(std::size_t i) const { return edges[i].size() + 1; }
  std::size_t state_count() const;
};

using StateId = std::uint32_t;

std::size_t bin_index(double value, std::span<const double> edges);

/// Mixed-radix encoding, first feature most significant.
StateId encode_bins(const BinningScheme& scheme, std::span<const std::size_t> bins);
std::vector<std::size_t> decode_state(const BinningScheme& scheme, StateId state);

StateId discretize(const FeatureVector& v, const BinningScheme& scheme);

struct FeatureBounds {
  std::array<double, kFeatureCount> lo{};
  std::array<double, kFeatureCount> hi{};

  static FeatureBounds standard();
  void validate() const;
};

/// (x - lo) / (hi - lo) clamped to [0, 1], in FeatureVector field order.
std::vector<float> normalize(const FeatureVector& v, const FeatureBounds& bounds);

/// Feature vector for a window of completions (no carryover).
FeatureVector compute_features(std::span<const CompletionRecord> records, double window_us,
                               double utilization);

/// Stateful collector: an empty window repeats the previous vector.
class DataCollector {
 public:
  FeatureVector extract(std::span<const CompletionRecord> records, double window_us, double utilization);
  void reset() { last_.reset(); }

 private:
  std::optional<FeatureVector> last_;
};

}  // namespace rlstorage
