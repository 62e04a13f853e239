#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rlstorage/harness.hpp"

namespace py = pybind11;
using namespace rlstorage;

namespace {

ExperimentSpec experiment(const std::string& config_text, const std::map<std::string, std::string>& overrides) {
  Config c = Config::parse(config_text, "<python>");
  for (const auto& [k, v] : overrides) c.set(k, v);
  return experiment_from_config(c);
}

py::dict sample_dict(const MetricsSample& m) {
  py::dict d;
  d["window_us"] = m.window_us;
  d["completions"] = m.completions;
  d["iops"] = m.iops;
  d["mean_latency_us"] = m.mean_latency_us;
  d["p99_latency_us"] = m.p99_latency_us;
  d["cache_hit_rate"] = m.cache_hit_rate;
  d["utilization"] = m.utilization;
  d["bytes_transferred"] = m.bytes_transferred;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Storage simulator and RL tuner";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<DeviceProfile>(m, "DeviceProfile")
      .def_static("nvme", &DeviceProfile::nvme)
      .def_static("sata", &DeviceProfile::sata)
      .def_static("preset", &DeviceProfile::preset)
      .def_readonly("name", &DeviceProfile::name)
      .def_readonly("base_latency_us", &DeviceProfile::base_latency_us)
      .def_readonly("per_byte_us", &DeviceProfile::per_byte_us)
      .def_readonly("seek_penalty_us", &DeviceProfile::seek_penalty_us)
      .def_readonly("internal_parallelism", &DeviceProfile::internal_parallelism);

  py::class_<TunableConfig>(m, "TunableConfig")
      .def(py::init([](std::uint32_t ra, std::uint32_t qd, std::uint32_t cache) {
             TunableConfig c{ra, qd, cache};
             c.validate();
             return c;
           }),
           py::arg("readahead_pages") = 8, py::arg("queue_depth") = 8, py::arg("cache_pages") = 1024)
      .def_readonly("readahead_pages", &TunableConfig::readahead_pages)
      .def_readonly("queue_depth", &TunableConfig::queue_depth)
      .def_readonly("cache_pages", &TunableConfig::cache_pages)
      .def(py::self == py::self)
      .def("__repr__", [](const TunableConfig& c) {
        return "TunableConfig(readahead_pages=" + std::to_string(c.readahead_pages) +
               ", queue_depth=" + std::to_string(c.queue_depth) + ", cache_pages=" + std::to_string(c.cache_pages) +
               ")";
      });

  py::class_<Trace>(m, "Trace")
      .def("__len__", [](const Trace& t) { return t.requests.size(); })
      .def_property_readonly("address_space_bytes", [](const Trace& t) { return t.header.address_space_bytes; })
      .def_property_readonly("description", [](const Trace& t) { return t.header.description; })
      .def("requests",
           [](const Trace& t) {
             py::list out;
             for (const auto& r : t.requests)
               out.append(py::make_tuple(r.arrival_us, r.op == Op::Read ? "R" : "W", r.offset, r.size));
             return out;
           },
           "List of (arrival_us, op, offset, size) tuples.")
      .def("to_text", [](const Trace& t) { return write_trace(t); })
      .def_static("from_text", [](const std::string& s) { return read_trace(s); })
      .def("save", [](const Trace& t, const std::string& path) { save_trace(t, path); })
      .def_static("load", &load_trace)
      .def(py::self == py::self);

  m.def("preset_names", &builtin_preset_names);
  m.def(
      "make_trace",
      [](const std::string& preset, const std::string& device, std::uint64_t ops, std::uint64_t seed) {
        WorkloadSpec w;
        w.preset = preset;
        w.ops = ops;
        builtin_preset(preset);  // rejects unknown names before generation
        return make_trace(w, DeviceProfile::preset(device), seed);
      },
      py::arg("preset"), py::arg("device") = "sata", py::arg("ops") = 10000, py::arg("seed") = 1);

  m.def(
      "simulate",
      [](const Trace& trace, const std::string& device, const TunableConfig& config, double window_us) {
        Simulator sim(DeviceProfile::preset(device), config, 0);
        RunResult r;
        {
          py::gil_scoped_release release;
          r = sim.run(trace, window_us);
        }
        py::list samples;
        for (const auto& s : r.samples) samples.append(sample_dict(s));
        py::list latencies;
        for (const auto& c : r.records) latencies.append(c.latency_us());
        py::dict d;
        d["samples"] = samples;
        d["latencies_us"] = latencies;
        d["makespan_us"] = r.records.empty() ? 0.0 : r.records.back().complete_us;
        return d;
      },
      py::arg("trace"), py::arg("device") = "sata", py::arg("config") = TunableConfig{},
      py::arg("window_us") = 10000.0);

  py::class_<ExperimentSpec>(m, "ExperimentSpec")
      .def_readwrite("name", &ExperimentSpec::name)
      .def_readwrite("device", &ExperimentSpec::device)
      .def_readwrite("seeds", &ExperimentSpec::seeds)
      .def_readwrite("train_episodes", &ExperimentSpec::train_episodes)
      .def_readwrite("eval_episodes", &ExperimentSpec::eval_episodes)
      .def_readwrite("initial", &ExperimentSpec::initial)
      .def_property(
          "ops", [](const ExperimentSpec& s) { return s.workload.ops; },
          [](ExperimentSpec& s, std::uint64_t v) { s.workload.ops = v; })
      .def_property(
          "workload", [](const ExperimentSpec& s) { return s.workload.preset; },
          [](ExperimentSpec& s, const std::string& v) { s.workload.preset = v; })
      .def_property_readonly("agent", [](const ExperimentSpec& s) { return std::string(agent_kind_name(s.agent)); })
      .def("validate", &ExperimentSpec::validate);

  m.def("experiment", &experiment, py::arg("config_text") = "",
        py::arg("overrides") = std::map<std::string, std::string>{},
        "Builds an experiment from configuration text plus key=value overrides.");
  m.def("fixture_experiment", &fixture_experiment);

  py::class_<ReportRow>(m, "ReportRow")
      .def_readonly("experiment", &ReportRow::experiment)
      .def_readonly("workload", &ReportRow::workload)
      .def_readonly("device", &ReportRow::device)
      .def_readonly("policy", &ReportRow::policy)
      .def_readonly("throughput", &ReportRow::throughput)
      .def_readonly("mean_latency_us", &ReportRow::mean_latency_us)
      .def_readonly("p99_latency_us", &ReportRow::p99_latency_us)
      .def_readonly("hit_rate", &ReportRow::hit_rate)
      .def_readonly("utilization", &ReportRow::utilization)
      .def_readonly("throughput_ratio", &ReportRow::throughput_ratio)
      .def_readonly("latency_ratio", &ReportRow::latency_ratio)
      .def_readonly("gain", &ReportRow::gain)
      .def_readonly("objective", &ReportRow::objective)
      .def_readonly("c_model", &ReportRow::c_model)
      .def_readonly("agent_bytes", &ReportRow::agent_bytes)
      .def_readonly("runtime_ms", &ReportRow::runtime_ms)
      .def_readonly("seed_throughput_ratios", &ReportRow::seed_throughput_ratios);

  py::class_<Report>(m, "Report")
      .def_readonly("experiment", &Report::experiment)
      .def_readonly("rows", &Report::rows)
      .def("row", &Report::row, py::return_value_policy::reference_internal)
      .def(
          "emit", [](const Report& r, const std::string& fmt) { return emit_report(r, report_format_from_name(fmt)); },
          py::arg("format") = "csv")
      .def("metrics_csv", &metrics_csv);

  m.def(
      "run_experiment",
      [](const ExperimentSpec& spec) {
        py::gil_scoped_release release;
        return run_experiment(spec);
      },
      py::arg("spec"));

  m.def(
      "run_ablation",
      [](const ExperimentSpec& spec) {
        AblationReport a;
        {
          py::gil_scoped_release release;
          a = run_ablation(spec);
        }
        return emit_ablation(a);
      },
      py::arg("spec"), "Runs the four feedback/collector variants and returns the ablation CSV.");

  m.def("model_complexity", &model_complexity, py::arg("weight_layers"), py::arg("n_in"), py::arg("n_out"));

  m.def(
      "default_agent_bytes",
      [](const ExperimentSpec& spec, std::uint64_t seed) {
        const auto a = make_agent(spec, seed);
        const auto bytes = save_agent(*a);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
      },
      py::arg("spec"), py::arg("seed") = 1, "Serialized form of a freshly initialized agent.");
}
