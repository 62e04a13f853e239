#include <cstdio>
#include <string>

#include "rlstorage/harness.hpp"

namespace rlstorage {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string fixed(double v, int decimals) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::string summary_csv(const Report& report) {
  std::string out = std::string(kSummaryCsvHeader) + "\n";
  for (const auto& r : report.rows) {
    out += r.experiment + "," + r.workload + "," + r.device + "," + r.policy + ",";
    out += num(r.throughput_ratio) + "," + num(r.latency_ratio) + "," + num(r.gain) + "," + num(r.objective) + ",";
    out += (r.c_model ? std::to_string(*r.c_model) : std::string()) + ",";
    out += std::to_string(r.agent_bytes) + "," + num(r.runtime_ms) + "\n";
  }
  return out;
}

std::string text_table(const Report& report) {
  std::string out = "experiment " + report.experiment + "\n";
  out += "workload         device  policy     throughput_MBps  thr_ratio  lat_ratio  mean_lat_us  p99_lat_us"
         "  hit_rate  util   gain       objective  c_model  bytes\n";
  for (const auto& r : report.rows) {
    std::string line = r.workload;
    line.resize(std::max<std::size_t>(line.size(), 16), ' ');
    std::string dev = r.device, pol = r.policy;
    dev.resize(std::max<std::size_t>(dev.size(), 6), ' ');
    pol.resize(std::max<std::size_t>(pol.size(), 9), ' ');
    line += " " + dev + "  " + pol;
    line += pad(fixed(r.throughput / 1e6, 3), 17);
    line += pad(fixed(r.throughput_ratio, 3), 11);
    line += pad(fixed(r.latency_ratio, 3), 11);
    line += pad(fixed(r.mean_latency_us, 1), 13);
    line += pad(fixed(r.p99_latency_us, 1), 12);
    line += pad(fixed(r.hit_rate, 3), 10);
    line += pad(fixed(r.utilization, 3), 6);
    line += pad(fixed(r.gain, 3), 9);
    line += pad(fixed(r.objective, 4), 12);
    line += pad(r.c_model ? std::to_string(*r.c_model) : "-", 9);
    line += pad(std::to_string(r.agent_bytes), 7);
    out += line + "\n";
  }
  out += "per-seed throughput ratio vs reference:\n";
  for (const auto& r : report.rows) {
    out += "  " + r.policy + ":";
    for (double v : r.seed_throughput_ratios) out += " " + fixed(v, 3);
    out += "\n";
  }
  out += "decision-loop wall time / simulated time (CPU overhead proxy):\n";
  for (const auto& r : report.rows) out += "  " + r.policy + ": " + fixed(r.decision_overhead * 100.0, 4) + "%\n";
  return out;
}

// One gnuplot-style block per run and series; blocks are separated by two
// blank lines so `index` can address them.
std::string plot_data(const Report& report) {
  std::string out;
  for (const auto& run : report.runs) {
    const auto tag = report.experiment + " " + run.policy + " seed=" + std::to_string(run.seed) +
                     " episode=" + std::to_string(run.episode);
    const auto thr = run.result.throughput_series();
    out += "# " + tag + " throughput_Bps\n";
    for (std::size_t i = 0; i < thr.size(); ++i) out += std::to_string(i) + " " + num(thr[i]) + "\n";
    out += "\n\n# " + tag + " queue_depth\n";
    for (const auto& iv : run.result.intervals)
      out += std::to_string(iv.interval) + " " + std::to_string(iv.config.queue_depth) + "\n";
    out += "\n\n# " + tag + " readahead\n";
    for (const auto& iv : run.result.intervals)
      out += std::to_string(iv.interval) + " " + std::to_string(iv.config.readahead_pages) + "\n";
    out += "\n\n";
  }
  return out;
}

}  // namespace

std::string emit_report(const Report& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv:
      return summary_csv(report);
    case ReportFormat::Text:
      return text_table(report);
    case ReportFormat::PlotData:
      return plot_data(report);
  }
  return {};
}

void append_metrics_csv(std::string& out, const std::string& experiment, const std::string& workload,
                        const std::string& device, const std::string& policy, std::uint64_t seed,
                        const EpisodeResult& result) {
  for (const auto& iv : result.intervals) {
    const MetricsSample& m = iv.metrics;
    out += experiment + "," + workload + "," + device + "," + policy + "," + std::to_string(seed) + ",";
    out += std::to_string(iv.interval) + "," + num(m.iops) + "," + num(m.mean_latency_us) + ",";
    out += num(m.p99_latency_us) + "," + num(m.cache_hit_rate) + "," + num(m.utilization) + "," + num(iv.reward) + ",";
    out += std::to_string(iv.config.readahead_pages) + "," + std::to_string(iv.config.queue_depth) + ",";
    out += std::to_string(iv.config.cache_pages) + "\n";
  }
}

std::string metrics_csv(const Report& report) {
  std::string out = std::string(kMetricsCsvHeader) + "\n";
  const std::string workload = report.rows.empty() ? std::string() : report.rows.front().workload;
  const std::string device = report.rows.empty() ? std::string() : report.rows.front().device;
  for (const auto& run : report.runs)
    append_metrics_csv(out, report.experiment, workload, device, run.policy, run.seed, run.result);
  return out;
}

std::string emit_ablation(const AblationReport& report) {
  std::string out = "experiment,variant,feedback,collector,throughput_bps,throughput_delta,gain\n";
  for (const auto& v : report.variants) {
    double thr = 0.0;
    for (double t : v.seed_throughput) thr += t;
    if (!v.seed_throughput.empty()) thr /= static_cast<double>(v.seed_throughput.size());
    out += report.experiment + "," + v.name + "," + (v.feedback ? "on" : "off") + "," +
           (v.collector ? "on" : "off") + "," + num(thr) + "," + num(v.throughput_delta) + "," + num(v.gain) + "\n";
  }
  return out;
}

std::string emit_depth_ablation(const std::vector<DepthResult>& results) {
  std::string out = "weight_layers,layer_sizes,c_model,parameters,throughput_ratio,inference_us\n";
  for (const auto& d : results) {
    std::string sizes;
    for (std::size_t i = 0; i < d.layer_sizes.size(); ++i) sizes += (i ? "-" : "") + std::to_string(d.layer_sizes[i]);
    out += std::to_string(d.weight_layers) + "," + sizes + "," + std::to_string(d.c_model) + "," +
           std::to_string(d.parameters) + "," + num(d.throughput_ratio) + "," + num(d.inference_us) + "\n";
  }
  return out;
}

}  // namespace rlstorage
