#include "idt/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace idt {

namespace {

double surrogate_value(Surrogate v, double w) {
  switch (v) {
    case Surrogate::Hinge: return std::max(0.0, 1.0 + w);
    case Surrogate::Logistic:
      // numerically stable ln(1 + e^w)
      return w > 0.0 ? w + std::log1p(std::exp(-w)) : std::log1p(std::exp(w));
    case Surrogate::Square: return (1.0 + w) * (1.0 + w);
  }
  return 0.0;
}

void check_c(double c) {
  if (!(c > 0.0 && c < 1.0))
    throw ParameterRangeError("agent loss parameter must lie in (0, 1)");
}

}  // namespace

double pointwise_surrogate_argmin(double q, double c, Surrogate surrogate) {
  check_c(c);
  q = std::clamp(q, 0.0, 1.0);
  const double a = (1.0 - q) * c;        // weight on V(w)
  const double b = q * (1.0 - c);        // weight on V(-w)

  if (surrogate == Surrogate::Hinge) {
    // Piecewise affine: slopes -b, a-b, a on (-inf,-1], [-1,1], [1,inf).
    if (a == b) return 0.0;            // flat minimizer interval [-1, 1]
    if (a < b) return 1.0;             // right kink (or midpoint cap for a == 0)
    return -1.0;
  }

  const auto g = [&](double w) { return a * surrogate_value(surrogate, w) + b * surrogate_value(surrogate, -w); };

  // Bracket: expand from [-1, 1] until the middle beats both ends, then
  // golden-section to 1e-10.  Degenerate weights (q in {0,1}) make the
  // objective monotone; the bracket cap keeps the result finite.
  double lo = -1.0, hi = 1.0;
  constexpr double kCap = 64.0;
  while (g(lo) <= g(std::min(lo + 1e-3, hi)) && lo > -kCap) lo = std::max(lo * 2.0, -kCap);
  while (g(hi) <= g(std::max(hi - 1e-3, lo)) && hi < kCap) hi = std::min(hi * 2.0, kCap);

  constexpr double kPhi = 0.6180339887498949;
  double x1 = hi - kPhi * (hi - lo);
  double x2 = lo + kPhi * (hi - lo);
  double f1 = g(x1), f2 = g(x2);
  while (hi - lo > 1e-10) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kPhi * (hi - lo);
      f1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kPhi * (hi - lo);
      f2 = g(x2);
    }
  }
  return 0.5 * (lo + hi);
}

int AttributeMap::label(std::span<const double> x) const {
  double s = 0.0;
  const std::size_t n = std::min(gradient.size(), x.size());
  for (std::size_t i = 0; i < n; ++i) s += gradient[i] * x[i];
  int l = 0;
  for (double cut : cuts)
    if (s >= cut) ++l;
  return l;
}

PreparedAgent::PreparedLeaf PreparedAgent::prepare_leaf(const LeafAgent& leaf,
                                                        const PiecewiseDistribution& dist) const {
  PreparedLeaf out;
  if (const auto* ob = std::get_if<OptimalBayesAgent>(&leaf)) {
    check_c(ob->c);
    out.kind = 0;
    out.c = ob->c;
  } else if (const auto* cr = std::get_if<ClassRestrictedAgent>(&leaf)) {
    check_c(cr->c);
    out.kind = 1;
    out.c = cr->c;
    out.rule = optimal_in_class(dist, cr->cls, cr->c);
  } else if (const auto* fm = std::get_if<FamilyMemberAgent>(&leaf)) {
    check_c(fm->c);
    const auto classes = enumerate_family(fm->family);
    const ThresholdClass* chosen = nullptr;
    for (const auto& [id, cls] : classes)
      if (id == fm->chosen_class_id) chosen = &cls;
    if (!chosen)
      throw ParameterRangeError("chosen class '" + fm->chosen_class_id + "' not in family");
    out.kind = 1;
    out.c = fm->c;
    out.rule = optimal_in_class(dist, *chosen, fm->c);
  } else {
    const auto& sm = std::get<SurrogateMinimizerAgent>(leaf);
    check_c(sm.c);
    out.kind = 2;
    out.c = sm.c;
    out.surrogate = sm.surrogate;
  }
  return out;
}

PreparedAgent::PreparedAgent(const Agent& spec, const PiecewiseDistribution& dist)
    : spec_(spec), dist_(&dist) {
  if (const auto* gw = std::get_if<GroupWiseAgent>(&spec_)) {
    if (gw->groups.empty()) throw ParameterRangeError("group-wise agent needs at least one group");
    for (std::size_t i = 1; i < gw->attribute.cuts.size(); ++i)
      if (!(gw->attribute.cuts[i] > gw->attribute.cuts[i - 1]))
        throw ParameterRangeError("attribute cuts must be strictly ascending");
    attribute_ = gw->attribute;
    for (const LeafAgent& leaf : gw->groups) leaves_.push_back(prepare_leaf(leaf, dist));
  } else {
    LeafAgent leaf = std::visit(
        [](const auto& a) -> LeafAgent {
          if constexpr (std::is_same_v<std::decay_t<decltype(a)>, GroupWiseAgent>)
            throw ParameterRangeError("unreachable");
          else
            return LeafAgent{a};
        },
        spec_);
    leaves_.push_back(prepare_leaf(leaf, dist));
  }
}

int PreparedAgent::decide_leaf(const PreparedLeaf& leaf, std::span<const double> x) const {
  switch (leaf.kind) {
    case 0: return dist_->posterior(x) >= leaf.c ? 1 : 0;
    case 1: return apply_rule(*leaf.rule, *dist_, x);
    default: {
      const double q = dist_->posterior(x);
      // w* = 0 resolves to 1, matching the >= convention of the Bayes rule.
      return pointwise_surrogate_argmin(q, leaf.c, leaf.surrogate) >= 0.0 ? 1 : 0;
    }
  }
}

int PreparedAgent::decide(std::span<const double> x) const {
  if (!attribute_) return decide_leaf(leaves_.front(), x);
  const int label = attribute_->label(x);
  if (label < 0 || label >= static_cast<int>(leaves_.size()))
    throw ParameterRangeError("attribute label " + std::to_string(label) +
                              " has no group agent");
  return decide_leaf(leaves_[label], x);
}

std::optional<int> PreparedAgent::attribute(std::span<const double> x) const {
  if (!attribute_) return std::nullopt;
  return attribute_->label(x);
}

int decide(const Agent& agent, const PiecewiseDistribution& dist, std::span<const double> x) {
  return PreparedAgent(agent, dist).decide(x);
}

DecisionLog generate_log(const Agent& agent, const PiecewiseDistribution& dist, std::size_t m,
                         std::uint64_t seed) {
  if (m < 1) throw ParameterRangeError("log length must be at least 1");
  const PreparedAgent prepared(agent, dist);
  DecisionLog log;
  log.records.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    SampleRecord rec;
    rec.x = dist.sample_x(seed, i);  // ground-truth label never drawn into the log
    rec.yhat = prepared.decide(rec.x);
    rec.attribute = prepared.attribute(rec.x);
    log.records.push_back(std::move(rec));
  }
  log.meta.distribution_digest = dist.digest();
  log.meta.agent = describe_agent(agent);
  log.meta.seed = seed;
  log.meta.m = m;
  return log;
}

std::string describe_agent(const Agent& agent) {
  char buf[64];
  const auto cstr = [&](double c) {
    std::snprintf(buf, sizeof(buf), "%.17g", c);
    return std::string(buf);
  };
  if (const auto* ob = std::get_if<OptimalBayesAgent>(&agent))
    return "optimal-bayes(c=" + cstr(ob->c) + ")";
  if (const auto* cr = std::get_if<ClassRestrictedAgent>(&agent))
    return "class-restricted(" + describe_score(cr->cls.score) + ",c=" + cstr(cr->c) + ")";
  if (const auto* fm = std::get_if<FamilyMemberAgent>(&agent))
    return "family-member(" + fm->chosen_class_id + ",c=" + cstr(fm->c) + ")";
  if (const auto* sm = std::get_if<SurrogateMinimizerAgent>(&agent)) {
    const char* name = sm->surrogate == Surrogate::Hinge ? "hinge"
                       : sm->surrogate == Surrogate::Logistic ? "logistic"
                                                              : "square";
    return std::string("surrogate-minimizer(") + name + ",c=" + cstr(sm->c) + ")";
  }
  const auto& gw = std::get<GroupWiseAgent>(agent);
  std::string out = "group-wise[";
  for (std::size_t i = 0; i < gw.groups.size(); ++i) {
    if (i) out += ";";
    out += describe_agent(std::visit([](const auto& a) { return Agent{a}; }, gw.groups[i]));
  }
  out += "]";
  return out;
}

}  // namespace idt
