#pragma once

// Independent reference implementations used only by tests. Each one is
// written the slow, obvious way and shares no code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <list>
#include <vector>

namespace oracle {

inline double discounted_return(const std::vector<double>& r, double gamma) {
  double total = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) total += std::pow(gamma, static_cast<double>(t)) * r[t];
  return total;
}

inline double q_update(double q, double reward, const std::vector<double>& next_row, double alpha, double gamma) {
  double best = next_row[0];
  for (double v : next_row) best = std::max(best, v);
  return q + alpha * (reward + gamma * best - q);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double perf_total(const std::vector<double>& w, const std::vector<double>& c, double gamma_adj,
                         const std::vector<double>& q) {
  double qs = 0.0;
  for (double v : q) qs += v;
  return dot(w, c) + gamma_adj * qs;
}

inline double util_eff(double p, const std::vector<double>& d) {
  double s = 0.0;
  for (double v : d) s += v;
  return p / s;
}

inline double gain(const std::vector<double>& f, const std::vector<double>& b, double beta) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] - b[i];
  return beta * s;
}

inline double smooth(double q_opt, double q_curr, double alpha) { return alpha * (q_opt - q_curr); }

inline std::uint64_t complexity(std::uint64_t layers, std::uint64_t n_in, std::uint64_t n_out) {
  std::uint64_t c = 0;
  for (std::uint64_t l = 0; l < layers; ++l) c += n_in * n_out;
  return c;
}

inline double nearest_rank(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  std::size_t rank = 1;
  while (static_cast<double>(rank) < q * static_cast<double>(v.size())) ++rank;
  return v[rank - 1];
}

// Linear-scan LRU: front is most recent.
struct ListLru {
  std::size_t capacity;
  std::list<std::uint64_t> pages;
  std::uint64_t hits = 0, misses = 0, evictions = 0;

  void access(std::uint64_t p) {
    auto it = std::find(pages.begin(), pages.end(), p);
    if (it != pages.end()) {
      ++hits;
      pages.erase(it);
      pages.push_front(p);
      return;
    }
    ++misses;
    pages.push_front(p);
    if (pages.size() > capacity) {
      pages.pop_back();
      ++evictions;
    }
  }
};

// Three-state chain. Action 1 moves right (staying in state 2 pays 1),
// action 0 moves left (staying in state 0 pays 0.2).
struct ChainMdp {
  static constexpr int kStates = 3, kActions = 2;

  static std::pair<int, double> step(int s, int a) {
    if (a == 1) return s == 2 ? std::pair{2, 1.0} : std::pair{s + 1, 0.0};
    return s == 0 ? std::pair{0, 0.2} : std::pair{s - 1, 0.0};
  }

  static std::array<std::array<double, kActions>, kStates> value_iteration(double gamma, double tol = 1e-9) {
    std::array<std::array<double, kActions>, kStates> q{};
    while (true) {
      double delta = 0.0;
      auto next = q;
      for (int s = 0; s < kStates; ++s)
        for (int a = 0; a < kActions; ++a) {
          auto [s2, r] = step(s, a);
          next[s][a] = r + gamma * std::max(q[s2][0], q[s2][1]);
          delta = std::max(delta, std::abs(next[s][a] - q[s][a]));
        }
      q = next;
      if (delta < tol) return q;
    }
  }
};

inline double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / scale;
}

}  // namespace oracle
