#include "idt/constructions.hpp"

#include <cmath>

namespace idt {

namespace {

AffinePosterior constant_posterior(int dim, double value) {
  return AffinePosterior{value, std::vector<double>(dim, 0.0)};
}

Agent bayes_agent(double c) { return OptimalBayesAgent{c}; }

/// Full-conditioning threshold class: thresholds on q(x) itself.
ThresholdClass bayes_class(int dim) {
  std::vector<int> all(dim);
  for (int i = 0; i < dim; ++i) all[i] = i + 1;
  return ThresholdClass{SubsetPosteriorScore{all}, std::nullopt};
}

double param(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

ConstructionBundle optimal_lower(double eps, double p_c) {
  if (!(eps > 0.0 && eps < 0.25))
    throw ParameterRangeError("optimal-lower requires 0 < eps < 1/4");
  if (!(p_c > 0.0 && p_c <= 1.0 / (8.0 * eps)))
    throw ParameterRangeError("optimal-lower requires 0 < p_c <= 1/(8 eps)");

  const double band_weight = 4.0 * eps * p_c;
  const double atom_weight = 0.5 - 2.0 * p_c * eps;
  std::vector<Piece> pieces;
  pieces.push_back(Piece{Segment{{0.5 - 2.0 * eps}, {1.0}, 4.0 * eps},
                         band_weight, AffinePosterior{0.0, {1.0}}});
  pieces.push_back(Piece{PointMass{{0.0}}, atom_weight, constant_posterior(1, 0.0)});
  pieces.push_back(Piece{PointMass{{1.0}}, atom_weight, constant_posterior(1, 1.0)});

  ConstructionBundle b{"optimal-lower", PiecewiseDistribution(1, std::move(pieces)),
                       {0.5 - eps, 0.5 + eps}, {}, {}, std::nullopt, {}, 1e-8};
  for (double c : b.candidate_c) {
    b.agents.push_back(bayes_agent(c));
    b.stated_rules.push_back(DecisionRule{bayes_class(1).score, c});
  }
  b.notes = {{"eps", eps}, {"p_c", p_c}, {"band_weight", band_weight},
             {"atom_weight", atom_weight}};
  return b;
}

ConstructionBundle no_uncertainty_instance() {
  std::vector<Piece> pieces;
  pieces.push_back(Piece{PointMass{{0.0}}, 0.5, constant_posterior(1, 0.0)});
  pieces.push_back(Piece{PointMass{{1.0}}, 0.5, constant_posterior(1, 1.0)});

  ConstructionBundle b{"no-uncertainty", PiecewiseDistribution(1, std::move(pieces)),
                       {0.25, 0.75}, {}, {}, std::nullopt, {}, 1e-8};
  for (double c : b.candidate_c) {
    b.agents.push_back(bayes_agent(c));
    b.stated_rules.push_back(DecisionRule{bayes_class(1).score, c});
  }
  return b;
}

ConstructionBundle near_optimal_counterexample(double delta_slack, double eps) {
  if (!(delta_slack > 0.0 && delta_slack <= 1.0))
    throw ParameterRangeError("near-optimal requires 0 < delta_slack <= 1");
  if (!(eps > 0.0 && eps < 0.25))
    throw ParameterRangeError("near-optimal requires 0 < eps < 1/4");

  std::vector<Piece> pieces;
  pieces.push_back(Piece{Segment{{0.5 - 2.0 * eps}, {1.0}, 4.0 * eps},
                         4.0 * eps * delta_slack, AffinePosterior{0.0, {1.0}}});
  const double atom_weight = 0.5 - 2.0 * delta_slack * eps;
  pieces.push_back(Piece{PointMass{{0.0}}, atom_weight, constant_posterior(1, 0.0)});
  pieces.push_back(Piece{PointMass{{1.0}}, atom_weight, constant_posterior(1, 1.0)});

  // The shared rule is pinned by a degenerate threshold range, so both
  // agents derive it regardless of their loss parameters.
  const double pinned = 0.5 - eps;
  const ThresholdClass shared{AffineScore{{1.0}}, ThresholdRange{pinned, pinned}};

  ConstructionBundle b{"near-optimal", PiecewiseDistribution(1, std::move(pieces)),
                       {0.5 - eps, 0.5 + eps}, {}, {}, std::nullopt, {}, 1e-8};
  for (double c : b.candidate_c) {
    b.agents.push_back(ClassRestrictedAgent{shared, c});
    b.stated_rules.push_back(DecisionRule{shared.score, pinned});
  }
  b.notes = {{"delta_slack", delta_slack},
             {"eps", eps},
             {"excess_risk_exact", 2.0 * delta_slack * eps * eps},
             {"excess_risk_bound", 4.0 * eps * delta_slack}};
  return b;
}

ConstructionBundle suboptimal_lower(double eps, double p_c) {
  if (!(eps > 0.0 && eps <= 0.125))
    throw ParameterRangeError("subopt-lower requires 0 < eps <= 1/8");
  if (!(p_c > 0.0 && p_c <= 0.1))
    throw ParameterRangeError("subopt-lower requires 0 < p_c <= 1/10");

  constexpr int kSubSegments = 64;
  std::vector<Piece> pieces;
  pieces.push_back(Piece{Segment{{-1.0, 0.0}, {1.0, 0.0}, 2.0}, 5.0 * p_c,
                         AffinePosterior{0.5, {0.5, 0.0}}});
  // Density 10 p_c x1 on the upper segment, modeled as uniform sub-segments
  // carrying the exact mass of their span.  A cut is forced at x1 = 2 eps,
  // where the two bundled rules part ways, so the disagreement band mass and
  // the in-class optimal thresholds are exact for every admissible eps.
  std::vector<double> cuts;
  for (int k = 0; k <= kSubSegments; ++k) cuts.push_back(static_cast<double>(k) / kSubSegments);
  cuts.push_back(2.0 * eps);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double x0 = cuts[k];
    const double x1 = cuts[k + 1];
    const double mass = 5.0 * p_c * (x1 * x1 - x0 * x0);
    pieces.push_back(
        Piece{Segment{{x0, 1.0}, {1.0, 0.0}, x1 - x0}, mass, constant_posterior(2, 1.0)});
  }
  pieces.push_back(Piece{PointMass{{-1.0, 0.0}}, 1.0 - 10.0 * p_c, constant_posterior(2, 0.0)});

  // Threshold ranges are the preimages, on the score axis, of the admissible
  // loss-parameter windows [3/8, 5/8] and [1/2, 3/4].
  const ThresholdClass h1{AffineScore{{1.0, 0.0}}, ThresholdRange{-0.25, 0.0625}};
  const ThresholdClass h2{AffineScore{{1.0, -2.0 * eps}},
                          ThresholdRange{-1.6 * eps, (1.0 - 8.0 * eps) / 6.0}};
  const double c2 = (1.0 + 16.0 * eps) / (2.0 + 16.0 * eps);

  ConstructionBundle b{"subopt-lower", PiecewiseDistribution(2, std::move(pieces)),
                       {0.5, c2}, {}, {}, std::nullopt, {}, 1e-3};
  b.agents.push_back(ClassRestrictedAgent{h1, 0.5});
  b.agents.push_back(ClassRestrictedAgent{h2, c2});
  b.stated_rules.push_back(DecisionRule{h1.score, 0.0});
  b.stated_rules.push_back(DecisionRule{h2.score, 0.0});
  b.family = ExplicitFamily{{{"H1", h1}, {"H2", h2}}};

  // Mass of the rules' disagreement band {x2 = 1, x1 in [0, 2 eps)} under
  // the sub-segment model, against the exact 20 p_c eps^2.
  double model_mass = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double x0 = cuts[k];
    const double x1 = cuts[k + 1];
    const double overlap = std::max(0.0, std::min(x1, 2.0 * eps) - x0);
    model_mass += 5.0 * p_c * (x1 * x1 - x0 * x0) * overlap / (x1 - x0);
  }
  const double exact_mass = 20.0 * p_c * eps * eps;
  b.notes = {{"eps", eps},
             {"p_c", p_c},
             {"c2", c2},
             {"subsegments", static_cast<double>(cuts.size() - 1)},
             {"disagreement_mass_exact", exact_mass},
             {"disagreement_mass_model", model_mass},
             {"disagreement_mass_rel_error",
              exact_mass > 0 ? std::abs(model_mass - exact_mass) / exact_mass : 0.0}};
  return b;
}

ThresholdClass sign_weighted_class(int n, double eps, const std::vector<int>& sigma) {
  if (static_cast<int>(sigma.size()) != n)
    throw ParameterRangeError("sigma must have one entry per coordinate segment");
  std::vector<double> w(n + 1, 0.0);
  const double scale = 8.0 * eps * std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    if (sigma[j] != 1 && sigma[j] != -1)
      throw ParameterRangeError("sigma entries must be +1 or -1");
    w[j] = -scale * sigma[j];
  }
  w[n] = 1.0;
  return ThresholdClass{AffineScore{std::move(w)}, ThresholdRange{0.25, 0.75}};
}

ConstructionBundle suboptimal_dim_lower(int d, double eps, double p_c,
                                        const std::vector<int>& sigma) {
  if (d < 6 || d % 4 != 2)
    throw ParameterRangeError("subopt-dim-lower requires d >= 6 with d = 2 (mod 4)");
  const int n = d - 2;
  if (!(eps > 0.0 && eps <= 1.0 / (64.0 * std::sqrt(static_cast<double>(n)))))
    throw ParameterRangeError("subopt-dim-lower requires 0 < eps <= 1/(64 sqrt(d-2))");
  if (!(p_c > 0.0 && p_c <= 1.0))
    throw ParameterRangeError("subopt-dim-lower requires 0 < p_c <= 1");

  const int dim = n + 1;
  std::vector<Piece> pieces;
  for (int j = 0; j < n; ++j) {
    std::vector<double> base(dim, 0.0);
    base[j] = 1.0;
    std::vector<double> dir(dim, 0.0);
    dir[dim - 1] = 1.0;
    std::vector<double> grad(dim, 0.0);
    grad[dim - 1] = 1.0;
    pieces.push_back(Piece{Segment{std::move(base), std::move(dir), 1.0}, p_c / n,
                           AffinePosterior{0.0, std::move(grad)}});
  }
  pieces.push_back(
      Piece{PointMass{std::vector<double>(dim, 0.0)}, 1.0 - p_c, constant_posterior(dim, 0.0)});

  ThresholdClass cls = sign_weighted_class(n, eps, sigma);
  int sum_sigma = 0;
  for (int s : sigma) sum_sigma += s;
  const double c_sigma =
      0.5 + 8.0 * eps * std::sqrt(static_cast<double>(n)) * sum_sigma / n;

  ConstructionBundle b{"subopt-dim-lower", PiecewiseDistribution(dim, std::move(pieces)),
                       {c_sigma}, {}, {}, std::nullopt, {}, 1e-8};
  b.agents.push_back(ClassRestrictedAgent{cls, c_sigma});
  b.stated_rules.push_back(DecisionRule{cls.score, 0.5});
  b.notes = {{"n", static_cast<double>(n)},
             {"eps", eps},
             {"p_c", p_c},
             {"sum_sigma", static_cast<double>(sum_sigma)},
             {"c_sigma", c_sigma},
             {"band_halfwidth", 8.0 * eps * std::sqrt(static_cast<double>(n))}};
  return b;
}

ConstructionBundle md_unsmooth_instance(double eps) {
  if (!(eps > 0.0 && eps < 0.1))
    throw ParameterRangeError("md-unsmooth requires 0 < eps < 1/10");

  std::vector<Piece> pieces;
  pieces.push_back(Piece{Rect{{-1.0, -1.0}, {0.0, 0.0}}, 0.5,
                         AffinePosterior{2.0 / 3.0, {2.0 / 15.0, 8.0 / 15.0}}});
  pieces.push_back(Piece{Rect{{0.0, 0.0}, {1.0, 1.0}}, 0.5,
                         AffinePosterior{1.0 / 3.0, {8.0 / 15.0, 2.0 / 15.0}}});

  const ThresholdClass h1{AffineScore{{1.0, 0.0}}, ThresholdRange{-1.0, 1.0}};
  const ThresholdClass h2{AffineScore{{0.0, 1.0}}, ThresholdRange{-1.0, 1.0}};

  ConstructionBundle b{"md-unsmooth", PiecewiseDistribution(2, std::move(pieces)),
                       {0.4, 0.6}, {}, {}, std::nullopt, {}, 1e-8};
  b.agents.push_back(ClassRestrictedAgent{h1, 0.4});
  b.agents.push_back(ClassRestrictedAgent{h2, 0.6});
  b.stated_rules.push_back(DecisionRule{h1.score, 0.0});
  b.stated_rules.push_back(DecisionRule{h2.score, 0.0});
  b.family = ExplicitFamily{{{"H1", h1}, {"H2", h2}}};
  b.notes = {{"eps", eps}, {"c1", 0.4}, {"c2", 0.6}};
  return b;
}

void verify_bundle(const ConstructionBundle& bundle) {
  for (std::size_t i = 0; i < bundle.agents.size(); ++i) {
    const double c = bundle.candidate_c[i];
    ThresholdClass cls = bayes_class(bundle.distribution.ambient_dimension());
    if (const auto* cr = std::get_if<ClassRestrictedAgent>(&bundle.agents[i])) cls = cr->cls;
    const DecisionRule derived = optimal_in_class(bundle.distribution, cls, c);
    const DecisionRule& stated = bundle.stated_rules[i];
    if (!same_score(derived.score, stated.score))
      throw Error(bundle.name + ": derived rule uses a different score than stated");
    if (std::abs(derived.threshold - stated.threshold) > bundle.rule_rederivation_tol)
      throw Error(bundle.name + ": stated threshold " + std::to_string(stated.threshold) +
                  " does not re-derive (got " + std::to_string(derived.threshold) + ")");
  }
}

ConstructionBundle make_construction(const std::string& name,
                                     const std::map<std::string, double>& params,
                                     const std::vector<int>& sigma) {
  if (name == "optimal-lower")
    return optimal_lower(param(params, "eps", 0.05), param(params, "p_c", 1.0));
  if (name == "no-uncertainty") return no_uncertainty_instance();
  if (name == "near-optimal")
    return near_optimal_counterexample(param(params, "delta_slack", 1.0),
                                       param(params, "eps", 0.05));
  if (name == "subopt-lower")
    return suboptimal_lower(param(params, "eps", 1.0 / 16.0), param(params, "p_c", 0.1));
  if (name == "subopt-dim-lower") {
    const int d = static_cast<int>(param(params, "d", 6.0));
    std::vector<int> sig = sigma;
    if (sig.empty()) sig.assign(d - 2, 1);
    return suboptimal_dim_lower(d, param(params, "eps", 1.0 / (64.0 * std::sqrt(d - 2.0))),
                                param(params, "p_c", 0.5), sig);
  }
  if (name == "md-unsmooth") return md_unsmooth_instance(param(params, "eps", 0.05));
  throw ParseError("unknown construction '" + name + "'");
}

std::vector<std::string> construction_names() {
  return {"optimal-lower", "no-uncertainty", "near-optimal",
          "subopt-lower", "subopt-dim-lower", "md-unsmooth"};
}

}  // namespace idt
