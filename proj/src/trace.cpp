#include "rlstorage/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rlstorage/rng.hpp"

namespace rlstorage {
namespace {

constexpr std::string_view kHeaderPrefix = "#rlstorage-trace v1 address_space=";
constexpr std::string_view kDescriptionPrefix = "#description ";

void check_block_size(std::uint64_t block_size) {
  if (block_size == 0 || block_size % kSectorBytes != 0)
    throw std::invalid_argument("block size must be a positive multiple of 512 bytes");
}

void check_fraction(double f, const char* name) {
  if (!(f >= 0.0 && f <= 1.0))
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

std::uint64_t arrival_at(std::uint64_t base, std::uint64_t i, double inter_arrival_us) {
  return base + static_cast<std::uint64_t>(std::llround(static_cast<double>(i) * inter_arrival_us));
}

// Emits `count` requests of one phase. The cursor carries the end of the
// previous request so that sequential requests continue whatever came before.
void emit_phase(std::vector<IoRequest>& out, Rng& rng, Pattern pattern, double sequential_fraction,
                std::uint64_t address_space, std::uint64_t block_size, double read_fraction,
                std::uint64_t count, std::uint64_t start_us, double inter_arrival_us,
                std::uint64_t& cursor) {
  const std::uint64_t positions = address_space / block_size;
  for (std::uint64_t i = 0; i < count; ++i) {
    bool sequential = pattern == Pattern::Sequential;
    if (pattern == Pattern::Mixed) sequential = uniform01(rng) < sequential_fraction;

    std::uint64_t offset;
    if (sequential) {
      offset = cursor;
      if (offset + block_size > address_space) offset = 0;
    } else {
      offset = uniform_below(rng, positions) * block_size;
    }
    const Op op = uniform01(rng) < read_fraction ? Op::Read : Op::Write;
    out.push_back({arrival_at(start_us, i, inter_arrival_us), op, offset, block_size});
    cursor = offset + block_size;
  }
}

template <typename T>
bool parse_uint(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

void Trace::validate() const {
  std::uint64_t prev_arrival = 0;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& r = requests[i];
    const std::string at = " (request " + std::to_string(i) + ")";
    if (r.size == 0 || r.size % kSectorBytes != 0)
      throw std::invalid_argument("request size must be a positive multiple of 512" + at);
    if (r.offset % kSectorBytes != 0)
      throw std::invalid_argument("request offset must be 512-byte aligned" + at);
    if (r.offset > header.address_space_bytes || r.size > header.address_space_bytes - r.offset)
      throw std::invalid_argument("request exceeds declared address space" + at);
    if (r.arrival_us < prev_arrival)
      throw std::invalid_argument("requests out of arrival order" + at);
    prev_arrival = r.arrival_us;
  }
}

void PhaseSpec::validate() const {
  check_block_size(block_size_bytes);
  check_fraction(read_fraction, "read_fraction");
  check_fraction(sequential_fraction, "sequential_fraction");
  if (!(target_utilization > 0.0 && target_utilization <= 1.0))
    throw std::invalid_argument("target_utilization must lie in (0, 1]");
}

Trace gen_sequential(std::uint64_t start_offset, std::uint64_t count, std::uint64_t block_size,
                     double inter_arrival_us, std::uint64_t address_space) {
  check_block_size(block_size);
  if (count == 0) throw std::invalid_argument("count must be at least 1");
  if (start_offset % kSectorBytes != 0)
    throw std::invalid_argument("start offset must be 512-byte aligned");
  const std::uint64_t end = start_offset + count * block_size;
  if (address_space == 0) address_space = end;
  if (end > address_space) throw std::invalid_argument("trace exceeds declared address space");

  Trace t;
  t.header.address_space_bytes = address_space;
  t.header.description = "sequential";
  t.requests.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i)
    t.requests.push_back({arrival_at(0, i, inter_arrival_us), Op::Read, start_offset + i * block_size,
                          block_size});
  return t;
}

Trace gen_random(std::uint64_t address_space, std::uint64_t count, std::uint64_t block_size,
                 double read_fraction, double inter_arrival_us, std::uint64_t seed) {
  check_block_size(block_size);
  check_fraction(read_fraction, "read_fraction");
  if (count == 0) throw std::invalid_argument("count must be at least 1");
  if (address_space < block_size) throw std::invalid_argument("address space smaller than block size");

  Trace t;
  t.header.address_space_bytes = address_space;
  t.header.description = "random";
  t.requests.reserve(count);
  Rng rng(seed);
  std::uint64_t cursor = 0;
  emit_phase(t.requests, rng, Pattern::Random, 0.0, address_space, block_size, read_fraction, count, 0,
             inter_arrival_us, cursor);
  return t;
}

Trace gen_phased(const std::vector<PhaseSpec>& phases, std::uint64_t address_space,
                 const CapacityFn& capacity_iops, std::uint64_t seed) {
  if (phases.empty()) throw std::invalid_argument("phase list is empty");
  for (const auto& p : phases) {
    p.validate();
    if (address_space < p.block_size_bytes)
      throw std::invalid_argument("address space smaller than block size");
  }

  Trace t;
  t.header.address_space_bytes = address_space;
  t.header.description = "phased";
  std::uint64_t start_us = 0;
  std::uint64_t cursor = 0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const auto& p = phases[i];
    const double capacity = capacity_iops(p.block_size_bytes, p.pattern);
    if (!(capacity > 0.0)) throw std::invalid_argument("reference capacity must be positive");
    const double inter_arrival_us = 1e6 / (p.target_utilization * capacity);
    const auto count = static_cast<std::uint64_t>(
        std::ceil(static_cast<double>(p.duration_us) / inter_arrival_us));
    Rng rng(i == 0 ? seed : mix_seed(seed, i));
    emit_phase(t.requests, rng, p.pattern, p.sequential_fraction, address_space, p.block_size_bytes,
               p.read_fraction, count, start_us, inter_arrival_us, cursor);
    start_us += p.duration_us;
  }
  return t;
}

TraceParseError::TraceParseError(std::size_t line, const std::string& what)
    : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}

std::string write_trace(const Trace& trace) {
  if (trace.header.description.find('\n') != std::string::npos)
    throw std::invalid_argument("trace description must be a single line");
  std::string out;
  out.reserve(32 * trace.requests.size() + 64);
  out += kHeaderPrefix;
  out += std::to_string(trace.header.address_space_bytes);
  out += '\n';
  if (!trace.header.description.empty()) {
    out += kDescriptionPrefix;
    out += trace.header.description;
    out += '\n';
  }
  for (const auto& r : trace.requests) {
    out += std::to_string(r.arrival_us);
    out += r.op == Op::Read ? ",R," : ",W,";
    out += std::to_string(r.offset);
    out += ',';
    out += std::to_string(r.size);
    out += '\n';
  }
  return out;
}

Trace read_trace(std::string_view text) {
  Trace t;
  std::size_t line_no = 0;
  bool have_header = false;
  std::uint64_t prev_arrival = 0;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (!have_header) {
      if (!line.starts_with(kHeaderPrefix)) throw TraceHeaderError("missing #rlstorage-trace v1 header");
      if (!parse_uint(line.substr(kHeaderPrefix.size()), t.header.address_space_bytes))
        throw TraceHeaderError("malformed address_space in header");
      have_header = true;
      continue;
    }
    if (line.starts_with(kDescriptionPrefix)) {
      t.header.description = std::string(line.substr(kDescriptionPrefix.size()));
      continue;
    }
    if (line.empty() && text.empty()) break;

    std::string_view fields[4];
    std::size_t n = 0;
    for (std::string_view rest = line;; ++n) {
      const auto comma = rest.find(',');
      if (n == 4) throw TraceParseError(line_no, "expected 4 fields");
      fields[n] = rest.substr(0, comma);
      if (comma == std::string_view::npos) {
        ++n;
        break;
      }
      rest = rest.substr(comma + 1);
    }
    if (n != 4) throw TraceParseError(line_no, "expected 4 fields");

    IoRequest r;
    if (!parse_uint(fields[0], r.arrival_us)) throw TraceParseError(line_no, "bad arrival_us");
    if (fields[1] == "R") {
      r.op = Op::Read;
    } else if (fields[1] == "W") {
      r.op = Op::Write;
    } else {
      throw TraceParseError(line_no, "op must be R or W");
    }
    if (!parse_uint(fields[2], r.offset)) throw TraceParseError(line_no, "bad offset");
    if (!parse_uint(fields[3], r.size)) throw TraceParseError(line_no, "bad size");
    if (r.size == 0 || r.size % kSectorBytes != 0)
      throw TraceParseError(line_no, "size must be a positive multiple of 512");
    if (r.offset % kSectorBytes != 0) throw TraceParseError(line_no, "offset must be 512-byte aligned");
    if (r.offset > t.header.address_space_bytes || r.size > t.header.address_space_bytes - r.offset)
      throw TraceParseError(line_no, "request exceeds address space");
    if (r.arrival_us < prev_arrival) throw TraceParseError(line_no, "arrival out of order");
    prev_arrival = r.arrival_us;
    t.requests.push_back(r);
  }
  if (!have_header) throw TraceHeaderError("missing #rlstorage-trace v1 header");
  return t;
}

void save_trace(const Trace& trace, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << write_trace(trace);
}

Trace load_trace(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return read_trace(ss.str());
}

}  // namespace rlstorage
