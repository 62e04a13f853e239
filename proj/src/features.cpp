#include "rlstorage/features.hpp"

#include <algorithm>
#include <stdexcept>

namespace rlstorage {
namespace {

constexpr std::array<const char*, kFeatureCount> kNames = {
    "mean_request_bytes", "read_fraction",   "sequentiality", "arrival_rate_per_s",
    "mean_latency_us",    "cache_hit_rate", "utilization",
};

}  // namespace

const char* feature_name(Feature f) { return kNames[static_cast<std::size_t>(f)]; }

std::optional<Feature> feature_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (name == kNames[i]) return static_cast<Feature>(i);
  return std::nullopt;
}

double FeatureVector::get(Feature f) const { return as_array()[static_cast<std::size_t>(f)]; }

std::array<double, kFeatureCount> FeatureVector::as_array() const {
  return {mean_request_bytes, read_fraction,  sequentiality, arrival_rate_per_s,
          mean_latency_us,    cache_hit_rate, utilization};
}

BinningScheme BinningScheme::standard() {
  BinningScheme s;
  s.features = {Feature::Sequentiality, Feature::ReadFraction, Feature::Utilization, Feature::CacheHitRate};
  s.edges.assign(4, {0.33, 0.66});
  return s;
}

void BinningScheme::validate() const {
  if (features.empty()) throw std::invalid_argument("binning scheme has no features");
  if (features.size() != edges.size()) throw std::invalid_argument("binning scheme: features/edges mismatch");
  for (const auto& e : edges) {
    if (e.empty()) throw std::invalid_argument("binning scheme: feature without edges");
    for (std::size_t i = 1; i < e.size(); ++i)
      if (!(e[i] > e[i - 1])) throw std::invalid_argument("binning scheme: edges not strictly increasing");
  }
  if (state_count() > (std::size_t{1} << 31)) throw std::invalid_argument("binning scheme: too many states");
}

std::size_t BinningScheme::state_count() const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < edges.size(); ++i) n *= bins(i);
  return n;
}

std::size_t bin_index(double value, std::span<const double> edges) {
  return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), value) - edges.begin());
}

StateId encode_bins(const BinningScheme& scheme, std::span<const std::size_t> bins) {
  if (bins.size() != scheme.features.size()) throw std::invalid_argument("bin tuple has wrong arity");
  std::size_t id = 0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i] >= scheme.bins(i)) throw std::invalid_argument("bin index out of range");
    id = id * scheme.bins(i) + bins[i];
  }
  return static_cast<StateId>(id);
}

std::vector<std::size_t> decode_state(const BinningScheme& scheme, StateId state) {
  if (state >= scheme.state_count()) throw std::invalid_argument("state id out of range");
  std::vector<std::size_t> bins(scheme.features.size());
  std::size_t rest = state;
  for (std::size_t i = bins.size(); i-- > 0;) {
    bins[i] = rest % scheme.bins(i);
    rest /= scheme.bins(i);
  }
  return bins;
}

StateId discretize(const FeatureVector& v, const BinningScheme& scheme) {
  std::vector<std::size_t> bins(scheme.features.size());
  for (std::size_t i = 0; i < bins.size(); ++i) bins[i] = bin_index(v.get(scheme.features[i]), scheme.edges[i]);
  return encode_bins(scheme, bins);
}

FeatureBounds FeatureBounds::standard() {
  FeatureBounds b;
  b.lo.fill(0.0);
  b.hi = {512.0 * 1024.0, 1.0, 1.0, 50000.0, 20000.0, 1.0, 1.0};
  return b;
}

void FeatureBounds::validate() const {
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (!(lo[i] < hi[i]))
      throw std::invalid_argument(std::string("degenerate normalization bounds for ") +
                                  feature_name(static_cast<Feature>(i)));
}

std::vector<float> normalize(const FeatureVector& v, const FeatureBounds& bounds) {
  bounds.validate();
  const auto x = v.as_array();
  std::vector<float> out(kFeatureCount);
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    out[i] = static_cast<float>(std::clamp((x[i] - bounds.lo[i]) / (bounds.hi[i] - bounds.lo[i]), 0.0, 1.0));
  return out;
}

FeatureVector compute_features(std::span<const CompletionRecord> records, double window_us,
                               double utilization) {
  if (!(window_us > 0.0)) throw std::invalid_argument("window_us must be positive");
  FeatureVector v;
  v.utilization = std::clamp(utilization, 0.0, 1.0);
  if (records.empty()) return v;

  // completion order differs from issue order once queue depth exceeds one
  std::vector<const CompletionRecord*> by_issue;
  by_issue.reserve(records.size());
  for (const auto& r : records) by_issue.push_back(&r);
  std::sort(by_issue.begin(), by_issue.end(),
            [](const CompletionRecord* a, const CompletionRecord* b) { return a->index < b->index; });

  const double n = static_cast<double>(records.size());
  double bytes = 0.0, latency = 0.0;
  std::size_t reads = 0, contiguous = 0;
  std::uint64_t pages_read = 0, pages_hit = 0;
  for (std::size_t i = 0; i < by_issue.size(); ++i) {
    const auto& r = *by_issue[i];
    bytes += static_cast<double>(r.request.size);
    latency += r.latency_us();
    if (r.request.op == Op::Read) ++reads;
    pages_read += r.pages_read;
    pages_hit += r.pages_hit;
    if (i > 0 && r.request.offset == by_issue[i - 1]->request.end()) ++contiguous;
  }
  v.mean_request_bytes = bytes / n;
  v.read_fraction = static_cast<double>(reads) / n;
  v.sequentiality = records.size() > 1 ? static_cast<double>(contiguous) / (n - 1.0) : 0.0;
  v.arrival_rate_per_s = n / (window_us * 1e-6);
  v.mean_latency_us = latency / n;
  v.cache_hit_rate = pages_read > 0 ? static_cast<double>(pages_hit) / static_cast<double>(pages_read) : 0.0;
  return v;
}

FeatureVector DataCollector::extract(std::span<const CompletionRecord> records, double window_us,
                                     double utilization) {
  if (records.empty()) return last_.value_or(FeatureVector{});
  last_ = compute_features(records, window_us, utilization);
  return *last_;
}

}  // namespace rlstorage
