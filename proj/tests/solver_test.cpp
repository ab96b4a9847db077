#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "monoguard/errors.hpp"
#include "monoguard/solver.hpp"
#include "oracles.hpp"

using namespace monoguard;
using namespace monoguard::testing;

namespace {

BoxQuery Line(double lo, double hi) {
  BoxQuery q;
  q.Free(0, lo, hi);
  return q;
}

// Random query over the net's box: each coordinate free with probability
// 1/2 (at least one free, at most `max_free`), otherwise fixed.
BoxQuery RandomQuery(std::mt19937_64& rng, const Network& net,
                     std::size_t max_free) {
  const std::size_t d = net.input_dim();
  std::vector<double> x = RandomPoint(rng, net.input_box());
  BoxQuery q = BoxQuery::AtPoint(x);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_free = 1 + rng() % std::min(d, max_free);
  for (std::size_t k = 0; k < n_free; ++k) {
    const std::size_t i = order[k];
    double a = std::uniform_real_distribution<>(net.input_box().lower[i],
                                                net.input_box().upper[i])(rng);
    double b = std::uniform_real_distribution<>(net.input_box().lower[i],
                                                net.input_box().upper[i])(rng);
    if (a > b) std::swap(a, b);
    q.Free(i, a, b);
  }
  return q;
}

std::vector<std::size_t> FreeIndices(const BoxQuery& q) {
  std::vector<std::size_t> out;
  for (const auto& [i, iv] : q.free) out.push_back(i);
  return out;
}

GridOracleResult Oracle(const Network& net, const BoxQuery& q, bool maximize,
                        int points) {
  const Network* target = &net;
  Network negated = net;
  if (!maximize) {
    std::vector<Layer> layers = net.layers();
    layers.back().weights *= -1.0;
    layers.back().biases *= -1.0;
    negated = Network(layers, net.input_box());
    target = &negated;
  }
  PlainEvaluator f(*target, q.Lower(net.input_dim()), FreeIndices(q));
  std::vector<double> lo, hi;
  for (const auto& [i, iv] : q.free) {
    lo.push_back(iv.lo);
    hi.push_back(iv.hi);
  }
  GridOracleResult r = GridMaximum(f, lo, hi, points);
  if (!maximize) {
    r.value = -r.value;
    r.upper = -r.upper;
  }
  return r;
}

bool InsideQuery(const BoxQuery& q, const FeatureVector& x) {
  for (const auto& [i, v] : q.fixed) {
    if (x[i] != v) return false;
  }
  for (const auto& [i, iv] : q.free) {
    if (!iv.Contains(x[i], 1e-12)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("interval bounds") {
  const Network one({MakeLayer({{1.0, -1.0}}, {0.0}, Activation::kRelu),
                     MakeLayer({{1.0}}, {0.0}, Activation::kLinear)},
                    InputBox::Uniform(2, 0.0, 1.0));
  BoxQuery q;
  q.Free(0, 0, 1).Free(1, 0, 1);
  IntervalBounds b = ComputeIntervalBounds(one, q);
  CHECK(b.preactivations[0][0] == Interval{-1.0, 1.0});
  CHECK(b.output == Interval{0.0, 1.0});

  b = ComputeIntervalBounds(Tent1D(), Line(0, 2));
  CHECK(b.preactivations[0][0] == Interval{0.0, 2.0});
  CHECK(b.preactivations[0][1] == Interval{-1.0, 1.0});
  CHECK(b.output == Interval{-2.0, 2.0});

  const std::vector<double> x{0.5};
  b = ComputeIntervalBounds(Tent1D(), BoxQuery::AtPoint(x));
  const ForwardTrace t = Trace(Tent1D(), x);
  CHECK(b.preactivations[0][0] == Interval{t.preactivations[0], t.preactivations[0]});
  CHECK(b.preactivations[0][1] == Interval{t.preactivations[1], t.preactivations[1]});
  CHECK(b.output == Interval{t.output, t.output});
}

TEST_CASE("interval bounds enclose sampled values") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    Network net = RandomNetwork(rng, 3, {5, 4});
    BoxQuery q = RandomQuery(rng, net, 3);
    IntervalBounds b = ComputeIntervalBounds(net, q);
    for (int s = 0; s < 50; ++s) {
      std::vector<double> x = q.Lower(3);
      for (const auto& [i, iv] : q.free) {
        x[i] = std::uniform_real_distribution<>(iv.lo, iv.hi)(rng);
      }
      const ForwardTrace t = Trace(net, x);
      std::size_t n = 0;
      for (const auto& layer : b.preactivations) {
        for (const Interval& iv : layer) {
          CHECK(iv.Contains(t.preactivations[n++], 1e-12));
        }
      }
      CHECK(b.output.Contains(t.output, 1e-12));
    }
  }
}

TEST_CASE("query validation") {
  BoxQuery q;
  CHECK_THROWS_AS(Maximize(Ramp(), q), InvalidInputError);
  q.Free(0, -20, 0);
  CHECK_THROWS_AS(Maximize(Ramp(), q), InvalidInputError);
  q.Free(0, 1, 0);
  CHECK_THROWS_AS(Maximize(Ramp(), q), InvalidInputError);
  BoxQuery both = Line(0, 1);
  both.fixed[0] = 0.5;
  CHECK_THROWS_AS(Maximize(Ramp(), both), InvalidInputError);
  SolverConfig cfg;
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(Maximize(Ramp(), Line(0, 1), cfg), InvalidInputError);
  cfg = {};
  cfg.max_nodes = 0;
  CHECK_THROWS_AS(Maximize(Ramp(), Line(0, 1), cfg), InvalidInputError);
  CHECK_THROWS_AS(LineExtremumExact(Tent2D(), [] {
                    BoxQuery b;
                    b.Free(0, 0, 1).Free(1, 0, 1);
                    return b;
                  }(), Sense::kMaximize),
                  InvalidInputError);
}

TEST_CASE("maximize and minimize on hand-built networks") {
  ExtremumResult r = Maximize(Tent1D(), Line(0, 2));
  CHECK(r.witness[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.witness_value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.gap <= 1e-6);
  CHECK(r.complete);

  r = Maximize(Ramp(), Line(0, 3));
  CHECK(r.witness[0] == 3.0);
  CHECK(r.witness_value == 3.0);

  r = Maximize(House1D(), Line(1, 4));
  CHECK(r.witness[0] == doctest::Approx(2.0));
  CHECK(r.witness_value == doctest::Approx(13.0));
  CHECK(r.certified_bound >= 13.0 - 1e-9);

  r = Minimize(Tent1D(), Line(0, 2));
  CHECK(r.witness_value == doctest::Approx(0.0).scale(1.0));
  CHECK((std::abs(r.witness[0]) < 1e-9 || std::abs(r.witness[0] - 2.0) < 1e-9));
  CHECK(r.certified_bound <= r.witness_value + 1e-12);

  r = Minimize(House1D(), Line(3, 7));
  CHECK(r.witness[0] == doctest::Approx(4.0));
  CHECK(r.witness_value == doctest::Approx(9.0));

  const std::vector<double> x{0.7};
  r = Minimize(Tent1D(), BoxQuery::AtPoint(x));
  CHECK(r.witness_value == Forward(Tent1D(), x));
  CHECK(r.gap == 0.0);
  r = Maximize(Tent1D(), BoxQuery::AtPoint(x));
  CHECK(r.witness_value == Forward(Tent1D(), x));
  CHECK(r.gap == 0.0);

  BoxQuery q;
  q.Free(0, 0, 2).Free(1, 0, 2);
  r = Maximize(Tent2D(), q);
  CHECK(r.witness_value == doctest::Approx(2.0));
  CHECK(r.witness[0] == doctest::Approx(1.0));
  CHECK(r.witness[1] == doctest::Approx(1.0));
}

TEST_CASE("joint maximum over the bumps network") {
  BoxQuery q;
  q.Free(0, 0, 8).Free(1, 0, 8);
  ExtremumResult r = Maximize(ThreeBumps(), q);
  CHECK(r.witness_value == doctest::Approx(3.0));
  CHECK(r.witness[0] == doctest::Approx(3.0));
  CHECK(r.witness[1] == doctest::Approx(3.0));
}

TEST_CASE("budget exhaustion is reported, not thrown") {
  std::mt19937_64 rng(23);
  Network net = RandomNetwork(rng, 2, {16, 16});
  BoxQuery q;
  q.Free(0, 0, 1).Free(1, 0, 1);
  SolverConfig cfg;
  cfg.max_nodes = 1;
  cfg.epsilon = 1e-12;
  ExtremumResult r = Maximize(net, q, cfg);
  CHECK_FALSE(r.complete);
  CHECK(r.certified_bound >= r.witness_value);
  const ExtremumResult full = Maximize(net, q);
  CHECK(full.complete);
  CHECK(r.certified_bound >= full.witness_value - 1e-9);
}

TEST_CASE("line extremum") {
  ExtremumResult r = LineExtremumExact(House1D(), Line(1, 3), Sense::kMaximize);
  CHECK(r.witness[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.witness_value == doctest::Approx(13.0).epsilon(1e-12));
  CHECK(r.gap == 0.0);

  r = LineExtremumExact(Tent1D(), Line(0, 0.5), Sense::kMaximize);
  CHECK(r.witness[0] == 0.5);
  CHECK(r.witness_value == 0.5);

  r = LineExtremumExact(House1D(), Line(3, 7), Sense::kMinimize);
  CHECK(r.witness[0] == doctest::Approx(4.0));
  CHECK(r.witness_value == doctest::Approx(9.0));

  r = LineExtremumExact(Tent1D(), Line(0, 2), Sense::kMinimize);
  CHECK(r.witness[0] == 0.0);  // ties resolve to the smallest t
}

TEST_CASE("house interpolant breakpoints") {
  // One neuron switches at each of x = 1..6; the first sits on the left end
  // of the box.
  PlainEvaluator f(House1D(), {1.0}, {0});
  const std::vector<double> oracle = SampledBreakpoints(f, 1.0, 7.0, 6001);
  REQUIRE(oracle.size() == 6);
  const std::vector<double> found = LineBreakpoints(House1D(), Line(1, 7));
  REQUIRE(found.size() == oracle.size());
  for (std::size_t i = 0; i < found.size(); ++i) {
    CHECK(found[i] == doctest::Approx(oracle[i]).epsilon(1e-9));
    CHECK(found[i] == doctest::Approx(static_cast<double>(i + 1)));
  }
  CHECK(found.front() == 1.0);
  CHECK(LineBreakpoints(House1D(), Line(1.5, 2.5)).size() == 1);
  CHECK(LineBreakpoints(House1D(), Line(1.5, 2.0)).empty());
  CHECK(LineBreakpoints(House1D(), Line(2.0, 2.5)).size() == 1);
}

TEST_CASE("soundness against the grid oracle") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 1 + rng() % 3;
    const int width = 2 + static_cast<int>(rng() % 6);
    Network net = RandomNetwork(rng, d, {width});
    BoxQuery q = RandomQuery(rng, net, 2);
    const bool maximize = trial % 2 == 0;
    const ExtremumResult r = maximize ? Maximize(net, q) : Minimize(net, q);
    const GridOracleResult g = Oracle(net, q, maximize, 1001);
    CAPTURE(trial);
    CHECK(r.complete);
    CHECK(InsideQuery(q, r.witness));
    CHECK(r.witness_value == doctest::Approx(Forward(net, r.witness)).epsilon(1e-12).scale(1.0));
    if (maximize) {
      CHECK(r.certified_bound >= g.value);
      CHECK(r.witness_value >= g.value - 1e-6);
      CHECK(r.witness_value <= g.upper);
    } else {
      CHECK(r.certified_bound <= g.value);
      CHECK(r.witness_value <= g.value + 1e-6);
      CHECK(r.witness_value >= g.upper);
    }
    CHECK(r.gap >= -1e-9);
    CHECK(r.gap <= 1e-6);
  }
}

TEST_CASE("exact vertex oracle on one-hidden-layer networks") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t d = 1 + rng() % 3;
    Network net = RandomNetwork(rng, d, {1 + static_cast<int>(rng() % 8)});
    BoxQuery q = RandomQuery(rng, net, 2);
    std::vector<double> lo, hi;
    for (const auto& [i, iv] : q.free) {
      lo.push_back(iv.lo);
      hi.push_back(iv.hi);
    }
    const auto [z, best] =
        ArrangementMaximum(net, q.Lower(d), FreeIndices(q), lo, hi);
    const ExtremumResult r = Maximize(net, q);
    CAPTURE(trial);
    CHECK(r.witness_value <= best + 1e-9);
    CHECK(r.witness_value >= best - 1e-6);
    CHECK(r.certified_bound >= best - 1e-9);
  }
}

TEST_CASE("deeper networks against a plain grid") {
  // witness >= true max - epsilon >= grid max - epsilon, and the certified
  // bound can never fall below any grid value.
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    Network net = RandomNetwork(rng, 2, {6, 6, 4});
    BoxQuery q;
    q.Free(0, 0, 1).Free(1, 0, 1);
    const ExtremumResult r = Maximize(net, q);
    const GridOracleResult g =
        Oracle(net, q, true, 801);
    CAPTURE(trial);
    CHECK(r.witness_value >= g.value - 1e-6);
    CHECK(r.certified_bound >= g.value);
  }
}

TEST_CASE("line extremum agrees with maximize and the breakpoint oracle") {
  std::mt19937_64 rng(37);
  SolverConfig tight;
  tight.epsilon = 1e-9;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t d = 1 + rng() % 3;
    Network net = RandomNetwork(rng, d, {1 + static_cast<int>(rng() % 8), 4});
    BoxQuery q = RandomQuery(rng, net, 1);
    const std::size_t i = q.free.begin()->first;
    const Interval iv = q.free.begin()->second;
    for (Sense sense : {Sense::kMaximize, Sense::kMinimize}) {
      const bool maximize = sense == Sense::kMaximize;
      const ExtremumResult line = LineExtremumExact(net, q, sense);
      const ExtremumResult bb = maximize ? Maximize(net, q, tight)
                                         : Minimize(net, q, tight);
      PlainEvaluator f(net, q.Lower(d), {i});
      const auto [t, v] = BreakpointExtremum(f, iv.lo, iv.hi, 4001, maximize);
      CAPTURE(trial);
      CHECK(std::abs(line.witness_value - bb.witness_value) <= 1e-6);
      CHECK(std::abs(line.witness_value - v) <= 1e-9);
      CHECK(InsideQuery(q, line.witness));
    }
  }
}

TEST_CASE("maximum grows with the box") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    Network net = RandomNetwork(rng, 2, {6});
    BoxQuery outer = RandomQuery(rng, net, 2);
    BoxQuery inner = outer;
    for (auto& [i, iv] : inner.free) {
      const double a = std::uniform_real_distribution<>(iv.lo, iv.hi)(rng);
      const double b = std::uniform_real_distribution<>(iv.lo, iv.hi)(rng);
      iv = {std::min(a, b), std::max(a, b)};
    }
    const double small = Maximize(net, inner).witness_value;
    const double big = Maximize(net, outer).witness_value;
    CHECK(small <= big + 1e-6);
    CHECK(Minimize(net, outer).witness_value <=
          Minimize(net, inner).witness_value + 1e-6);
  }
}

TEST_CASE("pair counterexamples") {
  const SolverConfig cfg;
  PairSearchResult r = FindPairCounterexample(Ramp(), 0, cfg, PairSearchMode::kMaximal);
  CHECK(r.status == VerifyStatus::kMonotone);
  CHECK_FALSE(r.pair);
  r = FindPairCounterexample(Ramp(), 0, cfg, PairSearchMode::kAny);
  CHECK(r.status == VerifyStatus::kMonotone);

  r = FindPairCounterexample(Tent1D(), 0, cfg, PairSearchMode::kMaximal);
  REQUIRE(r.pair);
  CHECK(r.pair->x[0] == doctest::Approx(1.0));
  CHECK(r.pair->x_prime[0] == doctest::Approx(2.0));
  CHECK(r.pair->violation == doctest::Approx(1.0));

  r = FindPairCounterexample(House1D(), 0, cfg, PairSearchMode::kMaximal);
  REQUIRE(r.pair);
  PlainEvaluator f(House1D(), {1.0}, {0});
  const auto [arg, best] = GridMaxViolation1D(f, 1.0, 7.0, 60001);
  CHECK(best == doctest::Approx(4.0));
  CHECK(r.pair->violation == doctest::Approx(best).epsilon(1e-6));
  CHECK(r.pair->x[0] == doctest::Approx(arg.first));
  CHECK(r.pair->x_prime[0] == doctest::Approx(arg.second));
  CHECK(r.certified_bound <= 4.0 + 1e-6 + 1e-9);

  r = FindPairCounterexample(House1D(), 0, cfg, PairSearchMode::kAny);
  REQUIRE(r.pair);
  CHECK(r.status == VerifyStatus::kCounterexample);
  CHECK(r.pair->x[0] <= r.pair->x_prime[0]);
  CHECK(r.pair->violation > cfg.delta);

  CHECK_THROWS_AS(FindPairCounterexample(Ramp(), 1, cfg, PairSearchMode::kAny),
                  InvalidInputError);
}

TEST_CASE("pair search on tent2d respects the other coordinate") {
  const SolverConfig cfg;
  PairSearchResult r =
      FindPairCounterexample(Tent2D(), 1, cfg, PairSearchMode::kMaximal);
  REQUIRE(r.pair);
  CHECK(r.pair->violation == doctest::Approx(1.0));
  CHECK(r.pair->x[0] == r.pair->x_prime[0]);
  CHECK(r.pair->x[1] <= r.pair->x_prime[1]);
}

TEST_CASE("pair search properties on random networks") {
  std::mt19937_64 rng(43);
  const SolverConfig cfg;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + rng() % 3;
    Network net = RandomNetwork(rng, d, {4, 3});
    const std::size_t feature = rng() % d;
    const PairSearchResult r =
        FindPairCounterexample(net, feature, cfg, PairSearchMode::kMaximal);
    CAPTURE(trial);
    REQUIRE(r.status != VerifyStatus::kInconclusive);
    if (r.pair) {
      const PairCounterexample& p = *r.pair;
      CHECK(p.x[feature] <= p.x_prime[feature]);
      for (std::size_t i = 0; i < d; ++i) {
        if (i != feature) CHECK(std::abs(p.x[i] - p.x_prime[i]) <= 1e-12);
      }
      CHECK(p.violation > 0.0);
      CHECK(p.violation ==
            doctest::Approx(Forward(net, p.x) - Forward(net, p.x_prime)));
      CHECK(r.certified_bound <= p.violation + cfg.epsilon + 1e-9);
    }
    if (d == 1) {
      PlainEvaluator f(net, {0.0}, {0});
      const double best = GridMaxViolation1D(f, 0.0, 1.0, 20001).second;
      if (best > 1e-6) {
        REQUIRE(r.pair);
        CHECK(r.pair->violation >= best - 1e-6);
      } else {
        CHECK((!r.pair || r.pair->violation <= 1e-5));
      }
    }
  }
}

TEST_CASE("nonnegative weights certify monotonicity") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + rng() % 3;
    Network net = RandomNetwork(rng, d, {5, 4});
    const std::size_t feature = rng() % d;
    std::vector<Layer> layers = net.layers();
    layers[0].weights.col(static_cast<Eigen::Index>(feature)) =
        layers[0].weights.col(static_cast<Eigen::Index>(feature)).cwiseAbs();
    for (std::size_t l = 1; l < layers.size(); ++l) {
      layers[l].weights = layers[l].weights.cwiseAbs();
    }
    const Network mono(layers, net.input_box());
    const PairSearchResult r =
        FindPairCounterexample(mono, feature, {}, PairSearchMode::kAny);
    CHECK(r.status == VerifyStatus::kMonotone);
  }
}
