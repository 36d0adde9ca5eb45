#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "idt/hypothesis.hpp"
#include "idt/score.hpp"

namespace idt {

/// Convex surrogate V for the indicator loss, strictly increasing near 0:
/// hinge max(0, 1+w), logistic ln(1+e^w), square (1+w)^2.
enum class Surrogate { Hinge, Logistic, Square };

struct OptimalBayesAgent {
  double c = 0.5;
};

struct ClassRestrictedAgent {
  ThresholdClass cls;
  double c = 0.5;
};

struct FamilyMemberAgent {
  ClassFamily family;
  std::string chosen_class_id;
  double c = 0.5;
};

struct SurrogateMinimizerAgent {
  Surrogate surrogate = Surrogate::Logistic;
  double c = 0.5;
};

using LeafAgent =
    std::variant<OptimalBayesAgent, ClassRestrictedAgent, FamilyMemberAgent, SurrogateMinimizerAgent>;

/// Deterministic group label: the number of cuts at or below gradient . x.
struct AttributeMap {
  std::vector<double> gradient;
  std::vector<double> cuts;  // ascending

  int label(std::span<const double> x) const;
};

/// Routes each observation to a per-group decision maker and stamps the
/// group label on the record.
struct GroupWiseAgent {
  AttributeMap attribute;
  std::vector<LeafAgent> groups;  // indexed by label
};

using Agent = std::variant<OptimalBayesAgent, ClassRestrictedAgent, FamilyMemberAgent,
                           SurrogateMinimizerAgent, GroupWiseAgent>;

/// Minimizer of (1-q) c V(w) + q (1-c) V(-w) over w.  Smooth surrogates use
/// bracketing plus golden-section search to tolerance 1e-10; the hinge's
/// flat minimizer interval resolves to its midpoint (capped at +/-1 when
/// one endpoint is infinite).
double pointwise_surrogate_argmin(double q, double c, Surrogate surrogate);

struct SampleRecord {
  std::vector<double> x;
  int yhat = 0;
  std::optional<int> attribute;
};

struct LogMetadata {
  std::string distribution_digest;
  std::string agent;
  std::uint64_t seed = 0;
  std::size_t m = 0;
};

struct DecisionLog {
  std::vector<SampleRecord> records;
  LogMetadata meta;
};

/// Immutable runtime form of an agent: optimal rules are derived eagerly at
/// construction, decisions are pure lookups afterwards.
class PreparedAgent {
public:
  PreparedAgent(const Agent& spec, const PiecewiseDistribution& dist);

  int decide(std::span<const double> x) const;
  std::optional<int> attribute(std::span<const double> x) const;
  const Agent& spec() const noexcept { return spec_; }

private:
  struct PreparedLeaf {
    int kind;                      // 0 bayes, 1 rule, 2 surrogate
    double c = 0.5;
    Surrogate surrogate = Surrogate::Logistic;
    std::optional<DecisionRule> rule;
  };
  PreparedLeaf prepare_leaf(const LeafAgent& leaf, const PiecewiseDistribution& dist) const;
  int decide_leaf(const PreparedLeaf& leaf, std::span<const double> x) const;

  Agent spec_;
  const PiecewiseDistribution* dist_;
  std::vector<PreparedLeaf> leaves_;  // one entry, or one per group
  std::optional<AttributeMap> attribute_;
};

/// One observed decision per draw: observations come from the distribution's
/// counter-based sampler (ground-truth labels are discarded), decisions from
/// the agent.  Bit-identical for identical (agent, dist, m, seed).
DecisionLog generate_log(const Agent& agent, const PiecewiseDistribution& dist, std::size_t m,
                         std::uint64_t seed);

int decide(const Agent& agent, const PiecewiseDistribution& dist, std::span<const double> x);

std::string describe_agent(const Agent& agent);

}  // namespace idt
