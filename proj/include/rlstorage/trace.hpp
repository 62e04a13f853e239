#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rlstorage {

inline constexpr std::uint64_t kSectorBytes = 512;

enum class Op : std::uint8_t { Read, Write };

/// One block-level operation.
struct IoRequest {
  std::uint64_t arrival_us = 0;
  Op op = Op::Read;
  std::uint64_t offset = 0;
  std::uint64_t size = 0;

  std::uint64_t end() const { return offset + size; }
  bool operator==(const IoRequest&) const = default;
};

struct TraceHeader {
  std::uint64_t address_space_bytes = 0;
  std::string description;

  bool operator==(const TraceHeader&) const = default;
};

struct Trace {
  TraceHeader header;
  std::vector<IoRequest> requests;

  /// Throws std::invalid_argument if any request is misaligned, out of the
  /// address space, or out of arrival order.
  void validate() const;

  bool operator==(const Trace&) const = default;
};

enum class Pattern : std::uint8_t { Sequential, Random, Mixed };

struct PhaseSpec {
  std::uint64_t duration_us = 0;
  Pattern pattern = Pattern::Random;
  double sequential_fraction = 0.0;  // used by Pattern::Mixed
  std::uint64_t block_size_bytes = 4096;
  double read_fraction = 1.0;
  double target_utilization = 0.5;

  void validate() const;
};

/// Requests per second the reference device completes at full utilization
/// for a given block size and access pattern. gen_phased divides by this to
/// turn target_utilization into an inter-arrival time.
using CapacityFn = std::function<double(std::uint64_t block_size, Pattern pattern)>;

Trace gen_sequential(std::uint64_t start_offset, std::uint64_t count, std::uint64_t block_size,
                     double inter_arrival_us, std::uint64_t address_space = 0);

Trace gen_random(std::uint64_t address_space, std::uint64_t count, std::uint64_t block_size,
                 double read_fraction, double inter_arrival_us, std::uint64_t seed);

Trace gen_phased(const std::vector<PhaseSpec>& phases, std::uint64_t address_space,
                 const CapacityFn& capacity_iops, std::uint64_t seed);

/// Parse failure at a specific 1-based line.
class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class TraceHeaderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string write_trace(const Trace& trace);
Trace read_trace(std::string_view text);

void save_trace(const Trace& trace, const std::string& path);
Trace load_trace(const std::string& path);

}  // namespace rlstorage
