#include <catch2/catch_amalgamated.hpp>

#include "idt/constructions.hpp"
#include "idt/estimators.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace idt;
using Catch::Approx;

TEST_CASE("estimate_optimal") {
  SECTION("the interval brackets between decided posteriors") {
    const auto dist = fixtures::uniform_unit_segment();
    const auto log = fixtures::make_log({{0.2}, {0.4}, {0.6}, {0.9}}, {0, 0, 1, 1});
    const EstimateResult r = estimate_optimal(dist, log);
    REQUIRE(r.lo == Approx(0.4));
    REQUIRE(r.hi == Approx(0.6));
    REQUIRE(r.c_hat == Approx(0.5));
    REQUIRE(r.diagnostics.positives == 2);
    REQUIRE(r.diagnostics.negatives == 2);
    REQUIRE(r.diagnostics.consistency_verified);
  }
  SECTION("no uncertainty leaves the full interval regardless of m") {
    const auto bundle = no_uncertainty_instance();
    for (std::size_t m : {100u, 1000u}) {
      const DecisionLog log = generate_log(bundle.agents[0], bundle.distribution, m, 5);
      const EstimateResult r = estimate_optimal(bundle.distribution, log);
      REQUIRE(r.lo == 0.0);
      REQUIRE(r.hi == 1.0);
    }
  }
  SECTION("an impossible log fails loudly") {
    const auto dist = fixtures::uniform_unit_segment();
    const auto log = fixtures::make_log({{0.6}, {0.4}}, {0, 1});
    REQUIRE_THROWS_AS(estimate_optimal(dist, log), InconsistentLogError);
    REQUIRE_THROWS_AS(estimate_optimal(dist, DecisionLog{}), EmptyLogError);
  }
  SECTION("rate example: m from the sample-complexity bound") {
    // band instance, c = 0.45, eps = 0.05, delta = 0.05:
    // ceil(log(2/delta) / (p_c eps)) = ceil(73.78) = 74
    const std::size_t m = static_cast<std::size_t>(std::ceil(std::log(40.0) / 0.05));
    REQUIRE(m == 74);
    const auto bundle = optimal_lower(0.05, 1.0);
    const double c = bundle.candidate_c[0];
    std::size_t failures = 0;
    const std::size_t T = 400;
    for (std::size_t t = 0; t < T; ++t) {
      const DecisionLog log = generate_log(bundle.agents[0], bundle.distribution, m, 1000 + t);
      const EstimateResult r = estimate_optimal(bundle.distribution, log);
      if (std::abs(r.c_hat - c) > 0.05) ++failures;
    }
    // failure probability is bounded by delta = 0.05 plus binomial noise
    REQUIRE(static_cast<double>(failures) / T <= 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / T));
  }
}

TEST_CASE("estimate_known_class") {
  SECTION("the full conditioning class reduces to the optimal regime") {
    const auto bundle = md_unsmooth_instance(0.05);
    const DecisionLog log = generate_log(OptimalBayesAgent{0.55}, bundle.distribution, 3000, 8);
    const EstimateResult opt = estimate_optimal(bundle.distribution, log);
    const ThresholdClass bayes{SubsetPosteriorScore{{1, 2}}, std::nullopt};
    const EstimateResult known = estimate_known_class(bundle.distribution, bayes, log);
    REQUIRE(known.lo == Approx(opt.lo).margin(1e-6));
    REQUIRE(known.hi == Approx(opt.hi).margin(1e-6));
  }
  SECTION("tilted-pair instance: the interval contains c2") {
    const double eps = 1.0 / 32.0;
    const auto bundle = suboptimal_lower(eps, 0.1);
    const auto& fam = std::get<ExplicitFamily>(*bundle.family);
    const double c2 = bundle.candidate_c[1];
    REQUIRE(c2 == Approx((1.0 + 16.0 * eps) / (2.0 + 16.0 * eps)));
    const DecisionLog log = generate_log(bundle.agents[1], bundle.distribution, 20000, 13);
    const EstimateResult r = estimate_known_class(bundle.distribution, fam.classes[1].second, log);
    REQUIRE(r.lo < c2);
    REQUIRE(c2 <= r.hi);
    REQUIRE(r.diagnostics.consistency_verified);
  }
  SECTION("two-squares instance: thresholds on x2 at c2 = 3/5") {
    const auto bundle = md_unsmooth_instance(0.05);
    const auto& fam = std::get<ExplicitFamily>(*bundle.family);
    const DecisionLog log = generate_log(bundle.agents[1], bundle.distribution, 10000, 2);
    const EstimateResult r = estimate_known_class(bundle.distribution, fam.classes[1].second, log);
    REQUIRE(r.lo < 0.6);
    REQUIRE(0.6 <= r.hi);
  }
}

TEST_CASE("estimate_unknown_family") {
  SECTION("a single-candidate family selects itself") {
    const auto bundle = md_unsmooth_instance(0.05);
    const auto& fam = std::get<ExplicitFamily>(*bundle.family);
    const ClassFamily only = ExplicitFamily{{fam.classes[0]}};
    const DecisionLog log = generate_log(bundle.agents[0], bundle.distribution, 5000, 31);
    const EstimateResult r = estimate_unknown_family(bundle.distribution, only, log);
    REQUIRE(r.selected_class_id == "H1");
    REQUIRE(r.lo < 0.4);
    REQUIRE(0.4 <= r.hi);
  }
  SECTION("two-squares family: both classes explain every log") {
    const auto bundle = md_unsmooth_instance(0.05);
    const DecisionLog log = generate_log(bundle.agents[0], bundle.distribution, 10000, 17);
    const EstimateResult r = estimate_unknown_family(bundle.distribution, *bundle.family, log);
    REQUIRE(r.selected_class_id == "H1");  // explicit families select by list order
    REQUIRE(r.diagnostics.consistent_classes.size() == 2);
    const auto& c1 = r.diagnostics.consistent_classes[0];
    const auto& c2 = r.diagnostics.consistent_classes[1];
    REQUIRE(c1.lo < 0.4);
    REQUIRE(0.4 <= c1.hi);
    REQUIRE(c2.lo < 0.6);
    REQUIRE(0.6 <= c2.hi);
  }
  SECTION("feature subsets select the smallest consistent subset") {
    const auto dist = fixtures::product_segments3();
    const ClassFamily family = FeatureSubsetsFamily{3, 2};
    const Agent agent = FamilyMemberAgent{family, "{2}", 0.35};
    const DecisionLog log = generate_log(agent, dist, 100000, 23);
    const EstimateResult r = estimate_unknown_family(dist, family, log);
    REQUIRE(r.selected_class_id == "{2}");
    REQUIRE(std::abs(r.c_hat - 0.35) <= 0.02);
    // consistent classes are exactly the subsets containing feature 2
    std::vector<std::string> ids;
    for (const auto& c : r.diagnostics.consistent_classes) ids.push_back(c.id);
    REQUIRE(ids == std::vector<std::string>{"{2}", "{1,2}", "{2,3}"});
  }
  SECTION("a family that cannot explain the log raises") {
    const auto dist = fixtures::uniform_unit_segment();
    // the class plays a constant rule, but the log has both decisions
    const ClassFamily family = ExplicitFamily{
        {{"frozen", ThresholdClass{AffineScore{{1.0}}, ThresholdRange{10.0, 11.0}}}}};
    const auto log = fixtures::make_log({{0.2}, {0.8}}, {0, 1});
    REQUIRE_THROWS_AS(estimate_unknown_family(dist, family, log), NoConsistentClassError);
  }
}

TEST_CASE("audit_fairness") {
  const auto dist = fixtures::two_group_uniform();
  SECTION("equal loss parameters come out calibrated") {
    const Agent agent = GroupWiseAgent(fixtures::two_group_agent(0.5, 0.5));
    const DecisionLog log = generate_log(agent, dist, 20000, 3);
    const FairnessReport report = audit_fairness(dist, log);
    REQUIRE(report.verdict == FairnessVerdict::Calibrated);
    REQUIRE_FALSE(report.witness.has_value());
    REQUIRE(report.per_group.size() == 2);
    // the sufficiency score threshold is c_hat + 1 per group
    for (const auto& [group, r] : report.per_group)
      REQUIRE(report.sufficiency_threshold.at(group) == Approx(r.c_hat + 1.0));
  }
  SECTION("distinct loss parameters with interior mass are flagged") {
    const Agent agent = GroupWiseAgent(fixtures::two_group_agent(0.4, 0.6));
    const DecisionLog log = generate_log(agent, dist, 20000, 4);
    const FairnessReport report = audit_fairness(dist, log);
    REQUIRE(report.verdict == FairnessVerdict::NotCalibrated);
    REQUIRE(report.witness.has_value());
    REQUIRE(report.witness->group_a == 0);
    REQUIRE(report.witness->group_b == 1);
    REQUIRE(report.witness->mass == Approx(0.2).margin(0.02));
  }
  SECTION("records without attributes are rejected") {
    const DecisionLog log = generate_log(OptimalBayesAgent{0.5}, dist, 100, 5);
    REQUIRE_THROWS_AS(audit_fairness(dist, log), MissingAttributeError);
  }
  SECTION("a single observed group cannot be audited") {
    GroupWiseAgent gw;
    gw.attribute = AttributeMap{{0.0, 1.0}, {}};  // no cuts: everyone is group 0
    gw.groups = {LeafAgent{OptimalBayesAgent{0.5}}};
    const DecisionLog log = generate_log(Agent{gw}, dist, 100, 6);
    REQUIRE_THROWS_AS(audit_fairness(dist, log), MissingAttributeError);
  }
}

TEST_CASE("estimator properties") {
  SECTION("the true parameter lies in the interval in every trial") {
    const auto bundle = optimal_lower(0.05, 1.0);
    for (std::size_t t = 0; t < 50; ++t) {
      const DecisionLog log = generate_log(bundle.agents[1], bundle.distribution, 200, 500 + t);
      const EstimateResult r = estimate_optimal(bundle.distribution, log);
      REQUIRE(r.lo < bundle.candidate_c[1]);
      REQUIRE(bundle.candidate_c[1] <= r.hi);
    }
    const auto squares = md_unsmooth_instance(0.05);
    const auto& fam = std::get<ExplicitFamily>(*squares.family);
    for (std::size_t t = 0; t < 50; ++t) {
      const DecisionLog log = generate_log(squares.agents[0], squares.distribution, 500, 900 + t);
      const EstimateResult r =
          estimate_known_class(squares.distribution, fam.classes[0].second, log);
      REQUIRE(r.lo < 0.4);
      REQUIRE(0.4 <= r.hi);
    }
  }
  SECTION("appending records never widens the interval") {
    const auto dist = fixtures::uniform_unit_segment();
    const DecisionLog full = generate_log(OptimalBayesAgent{0.37}, dist, 400, 12);
    double lo = 0.0, hi = 1.0;
    for (std::size_t prefix = 25; prefix <= full.records.size(); prefix += 25) {
      DecisionLog part;
      part.records.assign(full.records.begin(), full.records.begin() + prefix);
      const EstimateResult r = estimate_optimal(dist, part);
      REQUIRE(r.lo >= lo - 1e-15);
      REQUIRE(r.hi <= hi + 1e-15);
      lo = r.lo;
      hi = r.hi;
    }
  }
  SECTION("below the lower-bound sample size, one candidate must fail often") {
    // band instance with delta = 0.2: any m below log(1/(2 delta))/(8 p_c eps)
    // leaves both candidates indistinguishable too often
    const double eps = 0.05, p_c = 1.0, delta = 0.2;
    const auto bundle = optimal_lower(eps, p_c);
    const std::size_t m =
        static_cast<std::size_t>(std::log(1.0 / (2.0 * delta)) / (8.0 * p_c * eps));
    REQUIRE(m >= 1);
    const std::size_t T = 500;
    std::array<std::size_t, 2> failures{0, 0};
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t t = 0; t < T; ++t) {
        const DecisionLog log =
            generate_log(bundle.agents[i], bundle.distribution, m, 7000 + t);
        const EstimateResult r = estimate_optimal(bundle.distribution, log);
        if (std::abs(r.c_hat - bundle.candidate_c[i]) >= eps) ++failures[i];
      }
    }
    // one-sided binomial test at level 0.01 that the worst failure rate
    // exceeds delta
    const double worst = static_cast<double>(std::max(failures[0], failures[1])) / T;
    REQUIRE(worst > delta + 2.326 * std::sqrt(delta * (1.0 - delta) / T));
  }
}

TEST_CASE("sign-weighted instance: the known-class estimate recovers c-sigma") {
  const std::vector<int> sigma{1, -1, 1, 1};
  const double eps = 1.0 / 128.0;
  const auto bundle = suboptimal_dim_lower(6, eps, 0.5, sigma);
  const double c_sigma = bundle.candidate_c[0];
  REQUIRE(c_sigma == Approx(0.5 + 8.0 * eps * 2.0 * 2.0 / 4.0));
  const ThresholdClass cls = sign_weighted_class(4, eps, sigma);
  const KnownClassEstimator estimator(bundle.distribution, cls);
  for (std::uint64_t t = 0; t < 5; ++t) {
    const DecisionLog log = generate_log(bundle.agents[0], bundle.distribution, 20000, 60 + t);
    const EstimateResult r = estimator.estimate(log);
    REQUIRE(r.lo < c_sigma);
    REQUIRE(c_sigma <= r.hi);
    REQUIRE(std::abs(r.c_hat - c_sigma) < 0.05);
  }
}
