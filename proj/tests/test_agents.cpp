#include <catch2/catch_amalgamated.hpp>

#include "idt/agents.hpp"
#include "idt/constructions.hpp"
#include "oracles.hpp"

using namespace idt;
using Catch::Approx;

namespace {

double surrogate_objective(double q, double c, Surrogate v, double w) {
  const auto V = [&](double t) {
    switch (v) {
      case Surrogate::Hinge: return std::max(0.0, 1.0 + t);
      case Surrogate::Logistic: return std::log1p(std::exp(t));
      default: return (1.0 + t) * (1.0 + t);
    }
  };
  return (1.0 - q) * c * V(w) + q * (1.0 - c) * V(-w);
}

// Two parallel unit segments sharing the posterior q = x1; the second
// coordinate is a pure group marker.
PiecewiseDistribution two_group_uniform() {
  return PiecewiseDistribution(
      2, {Piece{Segment{{0.0, 0.0}, {1.0, 0.0}, 1.0}, 0.5, AffinePosterior{0.0, {1.0, 0.0}}},
          Piece{Segment{{0.0, 1.0}, {1.0, 0.0}, 1.0}, 0.5, AffinePosterior{0.0, {1.0, 0.0}}}});
}

GroupWiseAgent two_group_agent(double c0, double c1) {
  GroupWiseAgent gw;
  gw.attribute = AttributeMap{{0.0, 1.0}, {0.5}};
  gw.groups = {LeafAgent{OptimalBayesAgent{c0}}, LeafAgent{OptimalBayesAgent{c1}}};
  return gw;
}

}  // namespace

TEST_CASE("decide") {
  SECTION("optimal decision maker thresholds the posterior at c") {
    const PiecewiseDistribution d(
        1, {Piece{PointMass{{0.0}}, 1.0, AffinePosterior{0.7, {0.0}}}});
    const std::vector<double> x{0.0};
    REQUIRE(decide(OptimalBayesAgent{0.5}, d, x) == 1);
    REQUIRE(decide(OptimalBayesAgent{0.7}, d, x) == 1);  // >= convention
    REQUIRE(decide(OptimalBayesAgent{0.75}, d, x) == 0);
  }
  SECTION("class-restricted agent plays its cached optimal rule") {
    const auto bundle = md_unsmooth_instance(0.05);
    const auto& fam = std::get<ExplicitFamily>(*bundle.family);
    const Agent agent = ClassRestrictedAgent{fam.classes[0].second, 0.4};
    const std::vector<double> x{0.3, 0.9};
    REQUIRE(decide(agent, bundle.distribution, x) == 1);
    const std::vector<double> neg{-0.3, -0.9};
    REQUIRE(decide(agent, bundle.distribution, neg) == 0);
  }
  SECTION("surrogate minimizer agrees with the Bayes rule off the boundary") {
    std::vector<Piece> pieces;
    pieces.push_back(Piece{PointMass{{0.0}}, 0.5, AffinePosterior{0.41, {0.0}}});
    pieces.push_back(Piece{PointMass{{1.0}}, 0.5, AffinePosterior{0.39, {0.0}}});
    const PiecewiseDistribution d(1, std::move(pieces));
    const Agent agent = SurrogateMinimizerAgent{Surrogate::Logistic, 0.4};
    const std::vector<double> hi{0.0}, lo{1.0};
    REQUIRE(decide(agent, d, hi) == 1);
    REQUIRE(decide(agent, d, lo) == 0);
  }
  SECTION("agents validate their loss parameter") {
    const PiecewiseDistribution d(
        1, {Piece{PointMass{{0.0}}, 1.0, AffinePosterior{0.7, {0.0}}}});
    const std::vector<double> x{0.0};
    REQUIRE_THROWS_AS(decide(OptimalBayesAgent{0.0}, d, x), ParameterRangeError);
    REQUIRE_THROWS_AS(decide(OptimalBayesAgent{1.0}, d, x), ParameterRangeError);
  }
}

TEST_CASE("pointwise surrogate argmin") {
  SECTION("boundary indifference at q = c") {
    for (Surrogate v : {Surrogate::Hinge, Surrogate::Logistic, Surrogate::Square}) {
      const double w = pointwise_surrogate_argmin(0.37, 0.37, v);
      REQUIRE(std::abs(surrogate_objective(0.37, 0.37, v, w) -
                       surrogate_objective(0.37, 0.37, v, 0.0)) <= 1e-9);
    }
  }
  SECTION("square surrogate matches its closed form") {
    // w* = (q(1-c) - (1-q)c) / (q(1-c) + (1-q)c)
    REQUIRE(pointwise_surrogate_argmin(0.75, 0.25, Surrogate::Square) ==
            Approx(0.8).margin(1e-8));
    for (double q : {0.1, 0.33, 0.6, 0.9}) {
      for (double c : {0.2, 0.5, 0.7}) {
        const double a = (1.0 - q) * c, b = q * (1.0 - c);
        REQUIRE(pointwise_surrogate_argmin(q, c, Surrogate::Square) ==
                Approx((b - a) / (a + b)).margin(1e-8));
      }
    }
  }
  SECTION("certain class-1 evidence pushes the logistic minimizer positive") {
    REQUIRE(pointwise_surrogate_argmin(1.0, 0.5, Surrogate::Logistic) > 0.0);
  }
  SECTION("hinge's flat minimizer interval resolves to its midpoint") {
    REQUIRE(pointwise_surrogate_argmin(0.5, 0.5, Surrogate::Hinge) == 0.0);
    REQUIRE(pointwise_surrogate_argmin(0.9, 0.2, Surrogate::Hinge) == 1.0);
    REQUIRE(pointwise_surrogate_argmin(0.1, 0.8, Surrogate::Hinge) == -1.0);
  }
  SECTION("thresholded minimizers reproduce Bayes decisions on a q grid") {
    for (Surrogate v : {Surrogate::Hinge, Surrogate::Logistic, Surrogate::Square}) {
      for (double c : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        for (int i = 0; i < 1000; ++i) {
          const double q = (i + 0.5) / 1000.0;
          if (std::abs(q - c) <= 1e-6) continue;
          const int bayes = q >= c ? 1 : 0;
          const int via_surrogate = pointwise_surrogate_argmin(q, c, v) >= 0.0 ? 1 : 0;
          REQUIRE(via_surrogate == bayes);
        }
      }
    }
  }
}

TEST_CASE("generate_log") {
  SECTION("deterministic log on a certain point mass") {
    const PiecewiseDistribution d(
        1, {Piece{PointMass{{0.25}}, 1.0, AffinePosterior{1.0, {0.0}}}});
    const DecisionLog log = generate_log(OptimalBayesAgent{0.5}, d, 3, 9);
    REQUIRE(log.records.size() == 3);
    for (const auto& rec : log.records) {
      REQUIRE(rec.x[0] == 0.25);
      REQUIRE(rec.yhat == 1);
      REQUIRE_FALSE(rec.attribute.has_value());
    }
    REQUIRE(log.meta.m == 3);
    REQUIRE(log.meta.distribution_digest == d.digest());
  }
  SECTION("every record matches the agent's rule") {
    const auto bundle = optimal_lower(0.05, 1.0);
    const double c = bundle.candidate_c[0];
    const DecisionLog log = generate_log(bundle.agents[0], bundle.distribution, 100, 4);
    for (const auto& rec : log.records)
      REQUIRE(rec.yhat == (bundle.distribution.posterior(rec.x) >= c ? 1 : 0));
  }
  SECTION("identical inputs give bit-identical logs") {
    const auto dist = two_group_uniform();
    const Agent agent = GroupWiseAgent(two_group_agent(0.4, 0.6));
    const DecisionLog a = generate_log(agent, dist, 500, 77);
    const DecisionLog b = generate_log(agent, dist, 500, 77);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      REQUIRE(a.records[i].x == b.records[i].x);
      REQUIRE(a.records[i].yhat == b.records[i].yhat);
      REQUIRE(a.records[i].attribute == b.records[i].attribute);
    }
  }
  SECTION("class-restricted logs satisfy the cached rule exactly") {
    const auto bundle = md_unsmooth_instance(0.05);
    const DecisionLog log = generate_log(bundle.agents[0], bundle.distribution, 2000, 3);
    const auto& rule = bundle.stated_rules[0];
    for (const auto& rec : log.records)
      REQUIRE(rec.yhat == apply_rule(rule, bundle.distribution, rec.x));
  }
  SECTION("group-wise agents stamp attributes and split positive rates") {
    const auto dist = two_group_uniform();
    const Agent agent = GroupWiseAgent(two_group_agent(0.4, 0.6));
    const DecisionLog log = generate_log(agent, dist, 10000, 21);
    std::size_t n0 = 0, n1 = 0, pos0 = 0, pos1 = 0;
    for (const auto& rec : log.records) {
      REQUIRE(rec.attribute.has_value());
      if (*rec.attribute == 0) {
        ++n0;
        pos0 += rec.yhat;
      } else {
        ++n1;
        pos1 += rec.yhat;
      }
    }
    // P(q >= 0.4) = 0.6 vs P(q >= 0.6) = 0.4: four-sigma binomial separation
    const double r0 = static_cast<double>(pos0) / n0;
    const double r1 = static_cast<double>(pos1) / n1;
    REQUIRE(r0 == Approx(0.6).margin(4.0 * std::sqrt(0.24 / n0)));
    REQUIRE(r1 == Approx(0.4).margin(4.0 * std::sqrt(0.24 / n1)));
    REQUIRE(r0 > r1);
  }
}
