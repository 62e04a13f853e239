#include <cmath>
#include <cstring>

#include "doctest.h"
#include "oracles.hpp"
#include "rlstorage/mlp.hpp"
#include "rlstorage/rng.hpp"

using namespace rlstorage;

TEST_CASE("layout and parameter count") {
  const Mlp m({7, 16, 16, 7}, 1);
  CHECK(m.weight_layers() == 3);
  CHECK(m.input_size() == 7);
  CHECK(m.output_size() == 7);
  CHECK(m.parameter_count() == 7 * 16 + 16 + 16 * 16 + 16 + 16 * 7 + 7);
  CHECK(m.complexity() == 3 * 7 * 7);
  CHECK_THROWS_AS(Mlp({7, 7}, 1), std::invalid_argument);
  CHECK_THROWS_AS(Mlp({7, 0, 7}, 1), std::invalid_argument);
}

TEST_CASE("model complexity") {
  CHECK(model_complexity(1, 1, 1) == 1);
  CHECK(model_complexity(3, 7, 7) == 147);
  CHECK(model_complexity(4, 7, 7) == 196);
  CHECK(model_complexity(5, 7, 7) == 245);
}

TEST_CASE("glorot init is seeded and bounded, biases zero") {
  const Mlp a({4, 8, 3}, 5), b({4, 8, 3}, 5), c({4, 8, 3}, 6);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  Mlp m = a;
  const double limit0 = std::sqrt(6.0 / (4 + 8));
  for (std::size_t o = 0; o < 8; ++o) {
    CHECK(m.bias(0, o) == 0.0f);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(m.weight(0, o, i)) <= limit0);
  }
}

TEST_CASE("forward by hand") {
  auto m = Mlp::zeros({2, 2, 1});
  m.weight(0, 0, 0) = 1.0f;
  m.weight(0, 0, 1) = -1.0f;
  m.weight(0, 1, 0) = 0.5f;
  m.bias(0, 1) = 0.25f;
  m.weight(1, 0, 0) = 2.0f;
  m.weight(1, 0, 1) = 3.0f;
  m.bias(1, 0) = -1.0f;
  // hidden = relu([1*1 - 1*2, 0.5*1 + 0.25]) = [0, 0.75]; out = 3*0.75 - 1
  const std::vector<float> x = {1.0f, 2.0f};
  CHECK(m.forward(x)[0] == doctest::Approx(1.25));
  // the output layer is linear
  m.bias(1, 0) = -10.0f;
  CHECK(m.forward(x)[0] == doctest::Approx(-7.75));
  const std::vector<float> wrong = {1.0f};
  CHECK_THROWS_AS(m.forward(wrong), std::invalid_argument);
}

TEST_CASE("backward matches finite differences in double precision") {
  BasicMlp<double> m({5, 9, 6, 3}, 21);
  Rng rng(3);
  std::vector<double> x(5), g(3);
  for (auto& v : x) v = uniform_real(rng, -1, 1);
  for (auto& v : g) v = uniform_real(rng, -1, 1);
  const auto grad = m.backward(x, g);
  auto loss = [&](const BasicMlp<double>& net) {
    const auto y = net.forward(x);
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) s += g[k] * y[k];
    return s;
  };
  const double h = 1e-6;
  for (std::size_t k = 0; k < m.parameter_count(); ++k) {
    BasicMlp<double> plus = m, minus = m;
    plus.params()[k] += h;
    minus.params()[k] -= h;
    const double fd = (loss(plus) - loss(minus)) / (2 * h);
    CHECK(std::abs(fd - grad[k]) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("sgd step lowers squared error") {
  Mlp m({3, 8, 2}, 4);
  const std::vector<float> x = {0.2f, -0.4f, 0.9f};
  const std::vector<float> target = {1.0f, -1.0f};
  auto err = [&] {
    const auto y = m.forward(x);
    return (y[0] - target[0]) * (y[0] - target[0]) + (y[1] - target[1]) * (y[1] - target[1]);
  };
  const float before = err();
  for (int k = 0; k < 50; ++k) {
    const auto y = m.forward(x);
    const std::vector<float> dy = {2 * (y[0] - target[0]), 2 * (y[1] - target[1])};
    m.sgd_step(m.backward(x, dy), 0.05f);
  }
  CHECK(err() < 0.01f * before);
}

TEST_CASE("network serialization") {
  const Mlp m({7, 16, 16, 7}, 9);
  const auto bytes = save_mlp(m);
  CHECK(bytes.size() == 4 + 1 + 4 + 4 * 4 + 4 * m.parameter_count());
  CHECK(load_mlp(bytes) == m);

  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(load_mlp(truncated), FormatError);
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(load_mlp(trailing), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(load_mlp(magic), FormatError);
  auto version = bytes;
  version[4] = 99;
  CHECK_THROWS_AS(load_mlp(version), FormatError);
  auto nan = bytes;
  const float q = std::nanf("");
  std::memcpy(nan.data() + bytes.size() - 4, &q, 4);
  CHECK_THROWS_AS(load_mlp(nan), FormatError);
}
