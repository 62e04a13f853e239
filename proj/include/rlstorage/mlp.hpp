#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rlstorage/binio.hpp"
#include "rlstorage/rng.hpp"

namespace rlstorage {

inline std::uint64_t model_complexity(std::uint64_t layers, std::uint64_t n_in, std::uint64_t n_out) {
  return layers * (n_in * n_out);
}

/// Fully connected feedforward network: ReLU hidden layers, identity output.
///
/// Parameters live in one flat buffer, layer by layer, each layer holding its
/// row-major (out x in) weights followed by its biases. Gradients use the
/// same layout.
template <std::floating_point T>
class BasicMlp {
 public:
  using Params = std::vector<T>;

  BasicMlp() = default;

  /// Glorot-uniform weights, zero biases.
  BasicMlp(std::vector<std::size_t> layer_sizes, std::uint64_t seed) : sizes_(std::move(layer_sizes)) {
    check_sizes(sizes_);
    layout();
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const double limit = std::sqrt(6.0 / static_cast<double>(sizes_[l] + sizes_[l + 1]));
      T* w = params_.data() + w_off_[l];
      for (std::size_t k = 0; k < sizes_[l] * sizes_[l + 1]; ++k)
        w[k] = static_cast<T>(uniform_real(rng, -limit, limit));
    }
  }

  static BasicMlp zeros(std::vector<std::size_t> layer_sizes) {
    BasicMlp m;
    m.sizes_ = std::move(layer_sizes);
    check_sizes(m.sizes_);
    m.layout();
    return m;
  }

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t weight_layers() const { return sizes_.size() - 1; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const { return params_.size(); }

  Params& params() { return params_; }
  const Params& params() const { return params_; }

  T& weight(std::size_t layer, std::size_t out, std::size_t in) {
    return params_[w_off_[layer] + out * sizes_[layer] + in];
  }
  T& bias(std::size_t layer, std::size_t out) { return params_[b_off_[layer] + out]; }

  std::vector<T> forward(std::span<const T> input) const {
    auto acts = activations(input);
    return std::move(acts.back());
  }

  /// Reverse-mode gradient of <output_gradient, forward(input)> with respect
  /// to every parameter.
  Params backward(std::span<const T> input, std::span<const T> output_gradient) const {
    if (output_gradient.size() != output_size()) throw std::invalid_argument("output gradient size mismatch");
    const auto acts = activations(input);
    Params grad(params_.size(), T(0));
    std::vector<T> delta(output_gradient.begin(), output_gradient.end());

    for (std::size_t l = weight_layers(); l-- > 0;) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      const std::vector<T>& a = acts[l];
      const T* w = params_.data() + w_off_[l];
      T* gw = grad.data() + w_off_[l];
      T* gb = grad.data() + b_off_[l];
      for (std::size_t o = 0; o < out; ++o) {
        gb[o] = delta[o];
        for (std::size_t i = 0; i < in; ++i) gw[o * in + i] = delta[o] * a[i];
      }
      if (l == 0) break;
      std::vector<T> prev(in, T(0));
      for (std::size_t o = 0; o < out; ++o)
        for (std::size_t i = 0; i < in; ++i) prev[i] += w[o * in + i] * delta[o];
      // acts[l] is the ReLU output of layer l - 1
      for (std::size_t i = 0; i < in; ++i)
        if (!(a[i] > T(0))) prev[i] = T(0);
      delta = std::move(prev);
    }
    return grad;
  }

  void sgd_step(std::span<const T> gradients, T learning_rate) {
    if (gradients.size() != params_.size()) throw std::invalid_argument("gradient size mismatch");
    for (std::size_t k = 0; k < params_.size(); ++k) params_[k] -= learning_rate * gradients[k];
  }

  /// L * (N_in * N_out) with L the number of weight layers. Hidden widths do
  /// not enter; parameter_count() is the true size.
  std::uint64_t complexity() const { return model_complexity(weight_layers(), input_size(), output_size()); }

  bool operator==(const BasicMlp& o) const { return sizes_ == o.sizes_ && params_ == o.params_; }

 private:
  static void check_sizes(const std::vector<std::size_t>& sizes) {
    if (sizes.size() < 3) throw std::invalid_argument("network needs at least one hidden layer");
    for (auto s : sizes)
      if (s < 1) throw std::invalid_argument("layer sizes must be >= 1");
  }

  void layout() {
    std::size_t off = 0;
    w_off_.clear();
    b_off_.clear();
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      w_off_.push_back(off);
      off += sizes_[l] * sizes_[l + 1];
      b_off_.push_back(off);
      off += sizes_[l + 1];
    }
    params_.assign(off, T(0));
  }

  // acts[0] = input, acts[l] = output of weight layer l - 1 (post-activation).
  std::vector<std::vector<T>> activations(std::span<const T> input) const {
    if (input.size() != input_size()) throw std::invalid_argument("input size mismatch");
    std::vector<std::vector<T>> acts;
    acts.reserve(sizes_.size());
    acts.emplace_back(input.begin(), input.end());
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const std::size_t in = sizes_[l], out = sizes_[l + 1];
      const T* w = params_.data() + w_off_[l];
      const T* b = params_.data() + b_off_[l];
      const bool hidden = l + 2 < sizes_.size();
      std::vector<T> next(out);
      for (std::size_t o = 0; o < out; ++o) {
        T z = b[o];
        for (std::size_t i = 0; i < in; ++i) z += w[o * in + i] * acts[l][i];
        next[o] = hidden && z < T(0) ? T(0) : z;
      }
      acts.push_back(std::move(next));
    }
    return acts;
  }

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> w_off_, b_off_;
  Params params_;
};

using Mlp = BasicMlp<float>;

inline constexpr std::uint8_t kMlpFormatVersion = 1;

/// `RLSQ`, version, layer count, layer sizes, then float32 parameters in
/// layer order (weights row-major, then biases). Little-endian.
inline void write_mlp(ByteWriter& w, const Mlp& mlp) {
  w.magic("RLSQ");
  w.u8(kMlpFormatVersion);
  w.u32(static_cast<std::uint32_t>(mlp.layer_sizes().size()));
  for (auto s : mlp.layer_sizes()) w.u32(static_cast<std::uint32_t>(s));
  for (float p : mlp.params()) w.f32(p);
}

inline Mlp read_mlp(ByteReader& r) {
  r.expect_magic("RLSQ");
  if (r.u8() != kMlpFormatVersion) throw FormatError("unsupported network format version");
  const std::uint32_t count = r.u32();
  if (count < 3 || count > 64) throw FormatError("implausible layer count");
  std::vector<std::size_t> sizes(count);
  for (auto& s : sizes) {
    s = r.u32();
    if (s == 0 || s > (1u << 16)) throw FormatError("implausible layer size");
  }
  Mlp m = Mlp::zeros(sizes);
  if (r.remaining() < 4 * m.parameter_count()) throw FormatError("truncated byte stream");
  for (float& p : m.params()) {
    p = r.f32();
    if (!std::isfinite(p)) throw FormatError("non-finite network parameter");
  }
  return m;
}

inline std::vector<std::uint8_t> save_mlp(const Mlp& mlp) {
  ByteWriter w;
  write_mlp(w, mlp);
  return w.take();
}

inline Mlp load_mlp(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Mlp m = read_mlp(r);
  if (r.remaining() != 0) throw FormatError("trailing bytes after network");
  return m;
}

}  // namespace rlstorage
