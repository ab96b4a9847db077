#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "monoguard/errors.hpp"
#include "monoguard/network.hpp"

using namespace monoguard;
using namespace monoguard::testing;

TEST_CASE("forward on hand-built networks") {
  const std::vector<double> two{2.0};
  CHECK(Forward(Ramp(), two) == 2.0);
  const std::vector<double> half{0.5};
  CHECK(Forward(Tent1D(), half) == 0.5);
  CHECK(Forward(Tent1D(), two) == 0.0);
  for (int k = 1; k <= 7; ++k) {
    const std::vector<double> x{static_cast<double>(k)};
    CHECK(Forward(House1D(), x) == doctest::Approx(HouseValues()[k - 1]));
  }
}

TEST_CASE("forward rejects bad inputs") {
  const std::vector<double> wrong_dim{1.0, 2.0};
  CHECK_THROWS_AS(Forward(Ramp(), wrong_dim), InvalidInputError);
  const std::vector<double> outside{10.5};
  CHECK_THROWS_AS(Forward(Ramp(), outside), InvalidInputError);
  const std::vector<double> edge{10.0 + 5e-10};
  CHECK(Forward(Ramp(), edge) == doctest::Approx(10.0));
  const std::vector<double> nan{std::nan("")};
  CHECK_THROWS(Forward(Ramp(), nan));
}

TEST_CASE("trace exposes preactivations") {
  const std::vector<double> half{0.5};
  ForwardTrace t = Trace(Tent1D(), half);
  CHECK(t.output == 0.5);
  REQUIRE(t.preactivations.size() == 2);
  CHECK(t.preactivations[0] == 0.5);
  CHECK(t.preactivations[1] == -0.5);

  const std::vector<double> two{2.0};
  t = Trace(Tent1D(), two);
  CHECK(t.output == 0.0);
  CHECK(t.preactivations == std::vector<double>{2.0, 1.0});

  const std::vector<double> neg{-1.0};
  t = Trace(Ramp(), neg);
  CHECK(t.output == 0.0);
  CHECK(t.preactivations == std::vector<double>{-1.0});
}

TEST_CASE("network construction validates shape") {
  Layer hidden = MakeLayer({{1.0}}, {0.0}, Activation::kRelu);
  Layer out = MakeLayer({{1.0}}, {0.0}, Activation::kLinear);
  CHECK_THROWS_AS(Network({hidden, hidden}, InputBox::Uniform(1, 0, 1)),
                  InvalidInputError);
  CHECK_THROWS_AS(Network({out, out}, InputBox::Uniform(1, 0, 1)),
                  InvalidInputError);
  Layer two_out = MakeLayer({{1.0}, {1.0}}, {0.0, 0.0}, Activation::kLinear);
  CHECK_THROWS_AS(Network({hidden, two_out}, InputBox::Uniform(1, 0, 1)),
                  InvalidInputError);
  CHECK_THROWS_AS(Network({hidden, out}, InputBox::Uniform(2, 0, 1)),
                  InvalidInputError);
  CHECK_THROWS_AS(Network({hidden, out}, InputBox::Uniform(1, 1, 0)),
                  InvalidInputError);
  Layer inf = MakeLayer({{INFINITY}}, {0.0}, Activation::kRelu);
  CHECK_THROWS_AS(Network({inf, out}, InputBox::Uniform(1, 0, 1)),
                  InvalidInputError);
  CHECK(Network({out}, InputBox::Uniform(1, 0, 1)).hidden_neuron_count() == 0);
}

TEST_CASE("canonicalize reflects decreasing features") {
  const Network neg = Neg();
  const MonotoneSpec spec({{0, Direction::kDecreasing}});
  const CanonicalModel c = Canonicalize(neg, spec);
  CHECK(c.spec.IsCanonical());
  CHECK(c.spec.entries()[0].direction == Direction::kIncreasing);
  CHECK(c.net.input_box().lower[0] == -3.0);
  CHECK(c.net.input_box().upper[0] == 3.0);
  CHECK(c.net.layers()[0].weights(0, 0) == 1.0);
  for (double x = -3.0; x <= 3.0; x += 0.25) {
    const std::vector<double> p{x};
    const std::vector<double> q{-x};
    CHECK(Forward(c.net, q) == Forward(neg, p));
    CHECK(Forward(c.net, q) == std::max(0.0, 1.0 - x));
  }

  const MonotoneSpec inc = MonotoneSpec::AllIncreasing({0});
  CHECK(Canonicalize(neg, inc).net == neg);
  CHECK(Canonicalize(neg, inc).spec == inc);
}

TEST_CASE("canonicalize on an asymmetric box and property") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Network net = RandomNetwork(rng, 3, {5, 4}, -1.0, 2.0);
    std::vector<MonotoneFeature> entries;
    for (std::size_t i = 0; i < 3; ++i) {
      if (rng() % 2) {
        entries.push_back({i, rng() % 2 ? Direction::kDecreasing
                                        : Direction::kIncreasing});
      }
    }
    const MonotoneSpec spec(entries);
    const CanonicalModel c = Canonicalize(net, spec);
    for (const MonotoneFeature& e : spec.entries()) {
      if (e.direction == Direction::kDecreasing) {
        CHECK(c.net.input_box().lower[e.index] == -2.0);
        CHECK(c.net.input_box().upper[e.index] == 1.0);
      }
    }
    for (int s = 0; s < 20; ++s) {
      const std::vector<double> x = RandomPoint(rng, net.input_box());
      const FeatureVector rx = ReflectPoint(x, spec);
      CHECK(c.net.input_box().Contains(rx));
      CHECK(Forward(c.net, rx) == doctest::Approx(Forward(net, x)).epsilon(1e-12));
      CHECK(ReflectPoint(rx, spec) == x);
    }
    // Applying the reflection again with the original directions restores
    // the network exactly.
    const CanonicalModel back = Canonicalize(c.net, spec);
    CHECK(back.net == net);
  }
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(MonotoneSpec({{0, Direction::kIncreasing},
                                {0, Direction::kDecreasing}}),
                  InvalidInputError);
  const MonotoneSpec spec = MonotoneSpec::AllIncreasing({2, 0});
  CHECK(spec.indices() == std::vector<std::size_t>{0, 2});
  CHECK_THROWS_AS(spec.Validate(2), InvalidInputError);
  CHECK_NOTHROW(spec.Validate(3));
  CHECK_THROWS_AS(Canonicalize(Ramp(), spec), InvalidInputError);
}

TEST_CASE("json round trip") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Network net = RandomNetwork(rng, 2, {3, 3}, -0.3, 1.7);
    CHECK(NetworkFromJson(NetworkToJson(net)) == net);
  }
  const Network ramp = Ramp();
  const auto path = std::filesystem::temp_directory_path() / "mg_ramp.json";
  SaveNetwork(ramp, path);
  CHECK(LoadNetwork(path) == ramp);
  std::filesystem::remove(path);

  const Network classifier(Tent1D().layers(), Tent1D().input_box(),
                           OutputKind::kBinaryLogit);
  CHECK(NetworkFromJson(NetworkToJson(classifier)).output_kind() ==
        OutputKind::kBinaryLogit);
  CHECK_THROWS_AS(LoadNetwork("/nonexistent/net.json"), ParseError);
}

TEST_CASE("json schema errors name the offending path") {
  const std::string base =
      R"({"input_dim": 1, "input_box": {"lower": [0], "upper": [1]},
          "output_kind": "regression")";
  try {
    NetworkFromJson(base + "}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.path() == "layers");
  }
  const std::string hidden_linear =
      base + R"(, "layers": [
        {"weights": [[1.0]], "biases": [0.0], "activation": "linear"},
        {"weights": [[1.0]], "biases": [0.0], "activation": "linear"}]})";
  try {
    NetworkFromJson(hidden_linear);
    FAIL("expected a validation error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("relu") != std::string::npos);
  }
  const std::string bad_activation =
      base + R"(, "layers": [
        {"weights": [[1.0]], "biases": [0.0], "activation": "tanh"}]})";
  try {
    NetworkFromJson(bad_activation);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.path() == "layers[0].activation");
  }
  CHECK_THROWS_AS(NetworkFromJson("{not json"), ParseError);
  CHECK_THROWS_AS(
      NetworkFromJson(base + R"(, "layers": [{"weights": [[1.0, 2.0]],
        "biases": [0.0], "activation": "linear"}]})"),
      ParseError);
}

TEST_CASE("monotone spec json") {
  const MonotoneSpec spec({{3, Direction::kDecreasing},
                           {1, Direction::kIncreasing}});
  CHECK(MonotoneSpecFromJson(MonotoneSpecToJson(spec)) == spec);
  CHECK_THROWS_AS(MonotoneSpecFromJson(R"({"features": [{"index": 0,
      "direction": "sideways"}]})"),
                  ParseError);
  CHECK_THROWS_AS(MonotoneSpecFromJson(R"({"feature": []})"), ParseError);
}

TEST_CASE("piecewise linearity within one activation pattern") {
  std::mt19937_64 rng(3);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Network net = RandomNetwork(rng, 3, {6, 5});
    const std::vector<double> x = RandomPoint(rng, net.input_box());
    std::vector<double> y = x;
    for (double& v : y) {
      v = std::clamp(v + 0.02 * std::normal_distribution<>(0, 1)(rng), 0.0, 1.0);
    }
    auto signs = [&](const std::vector<double>& p) {
      std::vector<bool> s;
      for (double v : Trace(net, p).preactivations) s.push_back(v > 0);
      return s;
    };
    const auto sx = signs(x);
    if (sx != signs(y)) continue;
    const double t = std::uniform_real_distribution<>(0, 1)(rng);
    std::vector<double> m(3);
    for (int i = 0; i < 3; ++i) m[i] = t * x[i] + (1 - t) * y[i];
    if (signs(m) != sx) continue;
    ++checked;
    const double expect = t * Forward(net, x) + (1 - t) * Forward(net, y);
    CHECK(Forward(net, m) ==
          doctest::Approx(expect).epsilon(1e-7).scale(1.0));
  }
  CHECK(checked > 50);
}

TEST_CASE("trace output equals forward") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    Network net = RandomNetwork(rng, 2, {4, 4, 3});
    const std::vector<double> x = RandomPoint(rng, net.input_box());
    const ForwardTrace t = Trace(net, x);
    CHECK(t.output == Forward(net, x));
    CHECK(t.preactivations.size() == net.hidden_neuron_count());
  }
}
