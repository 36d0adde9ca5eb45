#include <catch2/catch_amalgamated.hpp>

#include "idt/constructions.hpp"
#include "idt/estimators.hpp"
#include "oracles.hpp"

using namespace idt;
using Catch::Approx;

TEST_CASE("parameter guards reject the complements of the hypotheses") {
  REQUIRE_THROWS_AS(optimal_lower(0.3, 1.0), ParameterRangeError);
  REQUIRE_THROWS_AS(optimal_lower(0.05, 3.0), ParameterRangeError);
  REQUIRE_THROWS_AS(near_optimal_counterexample(1.5, 0.05), ParameterRangeError);
  REQUIRE_THROWS_AS(near_optimal_counterexample(1.0, 0.25), ParameterRangeError);
  REQUIRE_THROWS_AS(suboptimal_lower(0.2, 0.1), ParameterRangeError);
  REQUIRE_THROWS_AS(suboptimal_lower(0.05, 0.2), ParameterRangeError);
  REQUIRE_THROWS_AS(suboptimal_dim_lower(8, 1e-3, 0.5, {1, 1, 1, 1, 1, 1}), ParameterRangeError);
  REQUIRE_THROWS_AS(suboptimal_dim_lower(6, 1.0, 0.5, {1, 1, 1, 1}), ParameterRangeError);
  REQUIRE_THROWS_AS(suboptimal_dim_lower(6, 1e-3, 0.5, {1, 2, 1, 1}), ParameterRangeError);
  REQUIRE_THROWS_AS(md_unsmooth_instance(0.2), ParameterRangeError);
  REQUIRE_THROWS_AS(make_construction("nope", {}), ParseError);
}

TEST_CASE("every bundle validates and re-derives its stated rules") {
  for (const std::string& name : construction_names()) {
    INFO(name);
    const auto bundle = make_construction(name, {});
    REQUIRE(bundle.agents.size() == bundle.candidate_c.size());
    REQUIRE(bundle.stated_rules.size() == bundle.candidate_c.size());
    REQUIRE_NOTHROW(verify_bundle(bundle));
  }
}

TEST_CASE("band instance constants") {
  const auto b = optimal_lower(0.05, 1.0);
  REQUIRE(b.notes.at("atom_weight") == Approx(0.4));
  REQUIRE(b.notes.at("band_weight") == Approx(0.2));
  const auto floor = b.distribution.density_floor(b.candidate_c[0], 0.05);
  REQUIRE(floor.above == Approx(0.05).margin(1e-12));
  REQUIRE(floor.below == Approx(0.05).margin(1e-12));
}

TEST_CASE("certain instance: agents are indistinguishable") {
  const auto b = no_uncertainty_instance();
  REQUIRE_FALSE(b.distribution.has_uncertainty());
  const DecisionLog l0 = generate_log(b.agents[0], b.distribution, 500, 11);
  const DecisionLog l1 = generate_log(b.agents[1], b.distribution, 500, 11);
  for (std::size_t i = 0; i < l0.records.size(); ++i)
    REQUIRE(l0.records[i].yhat == l1.records[i].yhat);
  const EstimateResult r = estimate_optimal(b.distribution, l0);
  REQUIRE(r.lo == 0.0);
  REQUIRE(r.hi == 1.0);
}

TEST_CASE("near-optimal instance") {
  const auto b = near_optimal_counterexample(1.0, 0.05);
  SECTION("the shared rule is optimal for c1 and delta-close for c2") {
    const double r1 = risk(b.distribution, b.candidate_c[0], b.stated_rules[0]);
    const double grid =
        oracles::grid_optimal_risk(b.distribution, b.stated_rules[0].score, b.candidate_c[0],
                                   -0.1, 1.1);
    REQUIRE(r1 == Approx(grid).margin(1e-9));
    const double r2 = risk(b.distribution, b.candidate_c[1], b.stated_rules[1]);
    const double opt2 =
        oracles::grid_optimal_risk(b.distribution, b.stated_rules[1].score, b.candidate_c[1],
                                   -0.1, 1.1);
    const double excess = r2 - opt2;
    REQUIRE(excess == Approx(b.notes.at("excess_risk_exact")).margin(1e-6));
    REQUIRE(excess <= b.notes.at("excess_risk_bound") + 1e-12);
    REQUIRE(b.notes.at("excess_risk_bound") <= 1.0);  // <= delta_slack
  }
  SECTION("both agents produce bit-identical logs") {
    const DecisionLog l0 = generate_log(b.agents[0], b.distribution, 300, 5);
    const DecisionLog l1 = generate_log(b.agents[1], b.distribution, 300, 5);
    for (std::size_t i = 0; i < l0.records.size(); ++i)
      REQUIRE(l0.records[i].yhat == l1.records[i].yhat);
  }
}

TEST_CASE("tilted-pair instance") {
  const double eps = 1.0 / 16.0, p_c = 0.1;
  const auto b = suboptimal_lower(eps, p_c);
  SECTION("c2 formula and its lower bound") {
    REQUIRE(b.candidate_c[1] == Approx((1.0 + 16.0 * eps) / (2.0 + 16.0 * eps)));
    REQUIRE(b.candidate_c[1] == Approx(2.0 / 3.0));
    for (double e : {0.01, 0.05, 0.125}) {
      const auto bb = suboptimal_lower(e, 0.1);
      REQUIRE(bb.candidate_c[1] >= 0.5 + 2.0 * e - 1e-12);
    }
  }
  SECTION("the agents disagree exactly on the thin band") {
    const double mass = disagreement_prob(b.distribution, b.stated_rules[0], b.stated_rules[1]);
    const double exact = 20.0 * p_c * eps * eps;
    REQUIRE(mass == Approx(exact).epsilon(0.02));  // sub-segment budget
    REQUIRE(b.notes.at("disagreement_mass_rel_error") <= 0.02);
    // at 128 eps integral: the sub-segment model is exact
    REQUIRE(mass == Approx(exact).margin(1e-12));
  }
  SECTION("disagreeing records appear only on the band") {
    const DecisionLog l0 = generate_log(b.agents[0], b.distribution, 4000, 19);
    const DecisionLog l1 = generate_log(b.agents[1], b.distribution, 4000, 19);
    for (std::size_t i = 0; i < l0.records.size(); ++i) {
      if (l0.records[i].yhat == l1.records[i].yhat) continue;
      const auto& x = l0.records[i].x;
      REQUIRE(x[1] == 1.0);
      REQUIRE(x[0] >= 0.0);
      REQUIRE(x[0] < 2.0 * eps);
    }
  }
}

TEST_CASE("sign-weighted instance") {
  SECTION("c formula for the all-ones and alternating sign vectors") {
    const auto ones = suboptimal_dim_lower(6, 1.0 / 128.0, 0.5, {1, 1, 1, 1});
    REQUIRE(ones.candidate_c[0] == Approx(0.625));  // 1/2 + 8 eps sqrt(4)
    const auto alt = suboptimal_dim_lower(6, 1.0 / 128.0, 0.5, {1, -1, 1, -1});
    REQUIRE(alt.candidate_c[0] == Approx(0.5));
  }
  SECTION("decisions depend on sigma_j only inside the band") {
    const int n = 4;
    const double eps = 1.0 / 128.0;
    const double half_width = 8.0 * eps * 2.0;  // 8 eps sqrt(n)
    const auto rule_for = [&](const std::vector<int>& sigma) {
      return DecisionRule{sign_weighted_class(n, eps, sigma).score, 0.5};
    };
    const auto base = suboptimal_dim_lower(6, eps, 0.5, {1, 1, 1, 1});
    const DecisionRule h_plus = rule_for({1, 1, 1, 1});
    const DecisionRule h_flip = rule_for({-1, 1, 1, 1});
    for (double t : {0.2, 0.5 - half_width - 1e-6, 0.5 + half_width + 1e-6, 0.9}) {
      const std::vector<double> x{1.0, 0.0, 0.0, 0.0, t};
      const bool inside = t >= 0.5 - half_width && t <= 0.5 + half_width;
      const bool differ = apply_rule(h_plus, base.distribution, x) !=
                          apply_rule(h_flip, base.distribution, x);
      if (!inside) REQUIRE_FALSE(differ);
    }
    // inside the band the decisions do differ at the segment for the flipped sign
    const std::vector<double> mid{1.0, 0.0, 0.0, 0.0, 0.5};
    REQUIRE(apply_rule(h_plus, base.distribution, mid) !=
            apply_rule(h_flip, base.distribution, mid));
  }
}

TEST_CASE("two-squares instance notes") {
  const auto b = md_unsmooth_instance(0.05);
  REQUIRE(b.candidate_c[0] == Approx(0.4));
  REQUIRE(b.candidate_c[1] == Approx(0.6));
  REQUIRE(b.family.has_value());
}

TEST_CASE("tilted-pair instance stays exact at non-aligned eps") {
  // 2 eps off the uniform grid: the forced cut keeps the band mass and the
  // stated rules exact anyway.
  const double eps = 0.07, p_c = 0.08;
  const auto b = suboptimal_lower(eps, p_c);
  const double mass = disagreement_prob(b.distribution, b.stated_rules[0], b.stated_rules[1]);
  REQUIRE(mass == Approx(20.0 * p_c * eps * eps).margin(1e-12));
  REQUIRE_NOTHROW(verify_bundle(b));
  const auto& fam = std::get<ExplicitFamily>(*b.family);
  const DecisionRule r2 = optimal_in_class(b.distribution, fam.classes[1].second, b.candidate_c[1]);
  REQUIRE(r2.threshold == Approx(0.0).margin(1e-9));
}
