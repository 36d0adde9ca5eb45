#include "idt/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace idt::io {

using nlohmann::json;

namespace {

std::string dec(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double real_of(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw ParseError(std::string("bad real for ") + what + ": '" + s + "'");
    return v;
  }
  throw ParseError(std::string("expected a real (number or decimal string) for ") + what);
}

json reals_json(std::span<const double> values) {
  json arr = json::array();
  for (double v : values) arr.push_back(dec(v));
  return arr;
}

std::vector<double> reals_of(const json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string("expected an array for ") + what);
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(real_of(v, what));
  return out;
}

json piece_to_json(const Piece& p) {
  json j;
  if (const auto* pm = std::get_if<PointMass>(&p.geometry)) {
    j["kind"] = "point";
    j["geometry"] = {{"location", reals_json(pm->location)}};
  } else if (const auto* seg = std::get_if<Segment>(&p.geometry)) {
    j["kind"] = "segment";
    j["geometry"] = {{"base", reals_json(seg->base)},
                     {"direction", reals_json(seg->direction)},
                     {"length", dec(seg->length)}};
  } else {
    const auto& r = std::get<Rect>(p.geometry);
    j["kind"] = "rect";
    j["geometry"] = {{"lo", reals_json({r.lo.data(), 2})}, {"hi", reals_json({r.hi.data(), 2})}};
  }
  j["weight"] = dec(p.weight);
  j["posterior"] = {{"intercept", dec(p.posterior.intercept)},
                    {"gradient", reals_json(p.posterior.gradient)}};
  return j;
}

Piece piece_from_json(const json& j) {
  Piece p;
  const std::string kind = j.at("kind").get<std::string>();
  const json& g = j.at("geometry");
  if (kind == "point") {
    p.geometry = PointMass{reals_of(g.at("location"), "location")};
  } else if (kind == "segment") {
    p.geometry = Segment{reals_of(g.at("base"), "base"), reals_of(g.at("direction"), "direction"),
                         real_of(g.at("length"), "length")};
  } else if (kind == "rect") {
    const auto lo = reals_of(g.at("lo"), "lo");
    const auto hi = reals_of(g.at("hi"), "hi");
    if (lo.size() != 2 || hi.size() != 2) throw ParseError("rect corners must be 2-vectors");
    p.geometry = Rect{{lo[0], lo[1]}, {hi[0], hi[1]}};
  } else {
    throw ParseError("unknown piece kind '" + kind + "'");
  }
  p.weight = real_of(j.at("weight"), "weight");
  p.posterior.intercept = real_of(j.at("posterior").at("intercept"), "intercept");
  p.posterior.gradient = reals_of(j.at("posterior").at("gradient"), "gradient");
  return p;
}

json class_to_json_obj(const ThresholdClass& cls) {
  json j;
  if (const auto* aff = std::get_if<AffineScore>(&cls.score)) {
    j["kind"] = "affine";
    j["weights"] = reals_json(aff->weights);
  } else {
    j["kind"] = "subset";
    j["subset"] = std::get<SubsetPosteriorScore>(cls.score).features;
  }
  if (cls.range) j["threshold_range"] = {dec(cls.range->lo), dec(cls.range->hi)};
  return j;
}

ThresholdClass class_from_json_obj(const json& j) {
  ThresholdClass cls;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "affine") {
    cls.score = AffineScore{reals_of(j.at("weights"), "weights")};
  } else if (kind == "subset") {
    cls.score = SubsetPosteriorScore{j.at("subset").get<std::vector<int>>()};
  } else {
    throw ParseError("unknown score kind '" + kind + "'");
  }
  if (j.contains("threshold_range") && !j.at("threshold_range").is_null()) {
    const json& r = j.at("threshold_range");
    if (!r.is_array() || r.size() != 2) throw ParseError("threshold_range must be [lo, hi]");
    cls.range = ThresholdRange{real_of(r[0], "threshold_range"), real_of(r[1], "threshold_range")};
  }
  return cls;
}

json family_to_json_obj(const ClassFamily& family) {
  json j;
  if (const auto* exp = std::get_if<ExplicitFamily>(&family)) {
    j["kind"] = "explicit";
    json arr = json::array();
    for (const auto& [id, cls] : exp->classes)
      arr.push_back({{"id", id}, {"class", class_to_json_obj(cls)}});
    j["classes"] = std::move(arr);
  } else {
    const auto& fs = std::get<FeatureSubsetsFamily>(family);
    j["kind"] = "feature-subsets";
    j["n"] = fs.dimension;
    j["s"] = fs.max_cardinality;
  }
  return j;
}

ClassFamily family_from_json_obj(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "explicit") {
    ExplicitFamily fam;
    for (const auto& e : j.at("classes"))
      fam.classes.emplace_back(e.at("id").get<std::string>(), class_from_json_obj(e.at("class")));
    return fam;
  }
  if (kind == "feature-subsets")
    return FeatureSubsetsFamily{j.at("n").get<int>(), j.at("s").get<int>()};
  throw ParseError("unknown family kind '" + kind + "'");
}

const char* surrogate_name(Surrogate s) {
  switch (s) {
    case Surrogate::Hinge: return "hinge";
    case Surrogate::Logistic: return "logistic";
    default: return "square";
  }
}

Surrogate surrogate_of(const std::string& name) {
  if (name == "hinge") return Surrogate::Hinge;
  if (name == "logistic") return Surrogate::Logistic;
  if (name == "square") return Surrogate::Square;
  throw ParseError("unknown surrogate '" + name + "'");
}

json leaf_to_json_obj(const LeafAgent& leaf);

json agent_to_json_obj(const Agent& agent) {
  json j;
  if (const auto* ob = std::get_if<OptimalBayesAgent>(&agent)) {
    j["kind"] = "optimal-bayes";
    j["c"] = ob->c;
  } else if (const auto* cr = std::get_if<ClassRestrictedAgent>(&agent)) {
    j["kind"] = "class-restricted";
    j["c"] = cr->c;
    j["class"] = class_to_json_obj(cr->cls);
  } else if (const auto* fm = std::get_if<FamilyMemberAgent>(&agent)) {
    j["kind"] = "family-member";
    j["c"] = fm->c;
    j["family"] = family_to_json_obj(fm->family);
    j["chosen_class"] = fm->chosen_class_id;
  } else if (const auto* sm = std::get_if<SurrogateMinimizerAgent>(&agent)) {
    j["kind"] = "surrogate-minimizer";
    j["c"] = sm->c;
    j["surrogate"] = surrogate_name(sm->surrogate);
  } else {
    const auto& gw = std::get<GroupWiseAgent>(agent);
    j["kind"] = "group-wise";
    j["attribute"] = {{"gradient", reals_json(gw.attribute.gradient)},
                      {"cuts", reals_json(gw.attribute.cuts)}};
    json arr = json::array();
    for (const LeafAgent& leaf : gw.groups) arr.push_back(leaf_to_json_obj(leaf));
    j["groups"] = std::move(arr);
  }
  return j;
}

json leaf_to_json_obj(const LeafAgent& leaf) {
  return agent_to_json_obj(std::visit([](const auto& a) { return Agent{a}; }, leaf));
}

Agent agent_from_json_obj(const json& j);

LeafAgent leaf_from_json_obj(const json& j) {
  const Agent a = agent_from_json_obj(j);
  return std::visit(
      [](const auto& v) -> LeafAgent {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, GroupWiseAgent>)
          throw ParseError("group-wise agents cannot nest");
        else
          return LeafAgent{v};
      },
      a);
}

Agent agent_from_json_obj(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "optimal-bayes") return OptimalBayesAgent{real_of(j.at("c"), "c")};
  if (kind == "class-restricted")
    return ClassRestrictedAgent{class_from_json_obj(j.at("class")), real_of(j.at("c"), "c")};
  if (kind == "family-member")
    return FamilyMemberAgent{family_from_json_obj(j.at("family")),
                             j.at("chosen_class").get<std::string>(), real_of(j.at("c"), "c")};
  if (kind == "surrogate-minimizer")
    return SurrogateMinimizerAgent{surrogate_of(j.at("surrogate").get<std::string>()),
                                   real_of(j.at("c"), "c")};
  if (kind == "group-wise") {
    GroupWiseAgent gw;
    gw.attribute.gradient = reals_of(j.at("attribute").at("gradient"), "gradient");
    gw.attribute.cuts = reals_of(j.at("attribute").at("cuts"), "cuts");
    for (const auto& e : j.at("groups")) gw.groups.push_back(leaf_from_json_obj(e));
    return gw;
  }
  throw ParseError("unknown agent kind '" + kind + "'");
}

json estimate_to_json_obj(const EstimateResult& r) {
  json j;
  j["interval"] = {r.lo, r.hi};
  j["c_hat"] = r.c_hat;
  j["selected_class"] = r.selected_class_id ? json(*r.selected_class_id) : json(nullptr);
  json d;
  d["m"] = r.diagnostics.m;
  d["positives"] = r.diagnostics.positives;
  d["negatives"] = r.diagnostics.negatives;
  d["consistency_verified"] = r.diagnostics.consistency_verified;
  if (!r.diagnostics.consistent_classes.empty()) {
    json arr = json::array();
    for (const auto& c : r.diagnostics.consistent_classes)
      arr.push_back({{"id", c.id}, {"interval", {c.lo, c.hi}}, {"c_hat", c.c_hat}});
    d["consistent_classes"] = std::move(arr);
  }
  if (!r.diagnostics.notes.empty()) d["notes"] = r.diagnostics.notes;
  j["diagnostics"] = std::move(d);
  return j;
}

json problem_to_json_obj(const ProblemSource& problem) {
  json j;
  if (const auto* dist = std::get_if<PiecewiseDistribution>(&problem)) {
    j["distribution"] = json::parse(distribution_to_json(*dist));
  } else {
    const auto& spec = std::get<ConstructionSpec>(problem);
    json c;
    c["name"] = spec.name;
    c["params"] = spec.params;
    if (!spec.sigma.empty()) c["sigma"] = spec.sigma;
    j["construction"] = std::move(c);
  }
  return j;
}

ProblemSource problem_from_json_obj(const json& j) {
  if (j.contains("distribution"))
    return ProblemSource{distribution_from_json(j.at("distribution").dump())};
  if (j.contains("construction")) {
    const json& c = j.at("construction");
    ConstructionSpec spec;
    spec.name = c.at("name").get<std::string>();
    if (c.contains("params"))
      for (const auto& [key, value] : c.at("params").items())
        spec.params[key] = real_of(value, key.c_str());
    if (c.contains("sigma")) spec.sigma = c.at("sigma").get<std::vector<int>>();
    return spec;
  }
  throw ParseError("problem needs either 'distribution' or 'construction'");
}

std::optional<double> leaf_c(const Agent& agent) {
  if (const auto* ob = std::get_if<OptimalBayesAgent>(&agent)) return ob->c;
  if (const auto* cr = std::get_if<ClassRestrictedAgent>(&agent)) return cr->c;
  if (const auto* fm = std::get_if<FamilyMemberAgent>(&agent)) return fm->c;
  if (const auto* sm = std::get_if<SurrogateMinimizerAgent>(&agent)) return sm->c;
  return std::nullopt;
}

}  // namespace

std::string distribution_to_json(const PiecewiseDistribution& dist) {
  json j;
  j["ambient_dimension"] = dist.ambient_dimension();
  json arr = json::array();
  for (const Piece& p : dist.pieces()) arr.push_back(piece_to_json(p));
  j["pieces"] = std::move(arr);
  return j.dump(2);
}

PiecewiseDistribution distribution_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid distribution JSON: ") + e.what());
  }
  try {
    const int dim = j.at("ambient_dimension").get<int>();
    std::vector<Piece> pieces;
    for (const auto& pj : j.at("pieces")) pieces.push_back(piece_from_json(pj));
    return PiecewiseDistribution(dim, std::move(pieces));
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid distribution document: ") + e.what());
  }
}

std::string threshold_class_to_json(const ThresholdClass& cls) {
  return class_to_json_obj(cls).dump(2);
}

ThresholdClass threshold_class_from_json(const std::string& text) {
  try {
    return class_from_json_obj(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid class document: ") + e.what());
  }
}

std::string family_to_json(const ClassFamily& family) { return family_to_json_obj(family).dump(2); }

ClassFamily family_from_json(const std::string& text) {
  try {
    return family_from_json_obj(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid family document: ") + e.what());
  }
}

std::string agent_to_json(const Agent& agent) { return agent_to_json_obj(agent).dump(2); }

Agent agent_from_json(const std::string& text) {
  try {
    return agent_from_json_obj(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid agent document: ") + e.what());
  }
}

std::string log_to_jsonl(const DecisionLog& log) {
  json meta;
  meta["_meta"] = {{"distribution_digest", log.meta.distribution_digest},
                   {"agent", log.meta.agent},
                   {"seed", log.meta.seed},
                   {"m", log.meta.m}};
  std::string out = meta.dump() + "\n";
  for (const SampleRecord& rec : log.records) {
    json j;
    j["x"] = rec.x;
    j["yhat"] = rec.yhat;
    if (rec.attribute) j["attr"] = *rec.attribute;
    out += j.dump() + "\n";
  }
  return out;
}

DecisionLog log_from_jsonl(const std::string& text) {
  DecisionLog log;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid log line: ") + e.what());
    }
    if (first && j.contains("_meta")) {
      const json& m = j.at("_meta");
      log.meta.distribution_digest = m.value("distribution_digest", "");
      log.meta.agent = m.value("agent", "");
      log.meta.seed = m.value("seed", std::uint64_t{0});
      log.meta.m = m.value("m", std::size_t{0});
      first = false;
      continue;
    }
    first = false;
    SampleRecord rec;
    rec.x = reals_of(j.at("x"), "x");
    rec.yhat = j.at("yhat").get<int>();
    if (j.contains("attr") && !j.at("attr").is_null()) rec.attribute = j.at("attr").get<int>();
    log.records.push_back(std::move(rec));
  }
  if (log.meta.m == 0) {
    log.meta.m = log.records.size();
  } else if (log.meta.m != log.records.size()) {
    throw ParseError("log header declares " + std::to_string(log.meta.m) + " records, found " +
                     std::to_string(log.records.size()));
  }
  return log;
}

std::string estimate_to_json(const EstimateResult& result) {
  return estimate_to_json_obj(result).dump(2);
}

std::string fairness_to_json(const FairnessReport& report) {
  json j;
  j["verdict"] = to_string(report.verdict);
  json groups;
  for (const auto& [group, r] : report.per_group)
    groups[std::to_string(group)] = estimate_to_json_obj(r);
  j["per_group"] = std::move(groups);
  if (report.witness) {
    j["witness"] = {{"group_a", report.witness->group_a},
                    {"group_b", report.witness->group_b},
                    {"mass", report.witness->mass}};
  } else {
    j["witness"] = nullptr;
  }
  json th;
  for (const auto& [group, t] : report.sufficiency_threshold) th[std::to_string(group)] = t;
  j["sufficiency_threshold"] = std::move(th);
  return j.dump(2);
}

TrialConfig trial_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid trial config: ") + e.what());
  }
  try {
    TrialConfig config;
    config.problem = problem_from_json_obj(j.at("problem"));
    config.agent = agent_from_json_obj(j.at("agent"));
    config.regime = regime_from_string(j.value("regime", "optimal"));
    if (j.contains("class")) config.known_class = class_from_json_obj(j.at("class"));
    if (j.contains("family")) config.family = family_from_json_obj(j.at("family"));
    if (j.contains("true_c")) {
      config.true_c = real_of(j.at("true_c"), "true_c");
    } else if (auto c = leaf_c(config.agent)) {
      config.true_c = *c;
    } else {
      throw ParseError("true_c is required for group-wise agents");
    }
    config.m = j.at("m").get<std::size_t>();
    config.trials = j.value("trials", std::size_t{1});
    config.eps = real_of(j.value("eps", json(0.05)), "eps");
    config.delta = real_of(j.value("delta", json(0.1)), "delta");
    config.base_seed = j.value("base_seed", std::uint64_t{0});
    return config;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid trial config: ") + e.what());
  }
}

std::string trial_config_to_json(const TrialConfig& config) {
  json j;
  j["problem"] = problem_to_json_obj(config.problem);
  j["agent"] = agent_to_json_obj(config.agent);
  j["regime"] = to_string(config.regime);
  if (config.known_class) j["class"] = class_to_json_obj(*config.known_class);
  if (config.family) j["family"] = family_to_json_obj(*config.family);
  j["true_c"] = config.true_c;
  j["m"] = config.m;
  j["trials"] = config.trials;
  j["eps"] = config.eps;
  j["delta"] = config.delta;
  j["base_seed"] = config.base_seed;
  return j.dump(2);
}

std::string trial_report_to_json(const TrialConfig& config, const TrialReport& report) {
  json j;
  j["config"] = json::parse(trial_config_to_json(config));
  j["version"] = version_string();
  json res;
  res["failure_frequency"] = report.failure_frequency;
  res["binomial_se"] = report.binomial_se;
  res["mean_abs_error"] = report.mean_abs_error;
  res["mean_interval_width"] = report.mean_interval_width;
  res["trials"] = report.abs_errors.size();
  json errs;
  for (const auto& [category, count] : report.error_counts) errs[category] = count;
  res["error_counts"] = std::move(errs);
  json abs_errors = json::array();
  for (double v : report.abs_errors)
    abs_errors.push_back(std::isnan(v) ? json(nullptr) : json(v));
  res["abs_errors"] = std::move(abs_errors);
  json widths = json::array();
  for (double v : report.interval_widths)
    widths.push_back(std::isnan(v) ? json(nullptr) : json(v));
  res["interval_widths"] = std::move(widths);
  j["results"] = std::move(res);
  return j.dump(2);
}

std::string bundle_report_to_json(const ConstructionBundle& bundle) {
  json j;
  j["name"] = bundle.name;
  j["candidate_c"] = bundle.candidate_c;
  j["notes"] = bundle.notes;
  j["distribution_digest"] = bundle.distribution.digest();
  json agents = json::array();
  for (const Agent& a : bundle.agents) agents.push_back(describe_agent(a));
  j["agents"] = std::move(agents);
  json rules = json::array();
  for (const DecisionRule& r : bundle.stated_rules)
    rules.push_back({{"score", describe_score(r.score)}, {"threshold", r.threshold}});
  j["stated_rules"] = std::move(rules);
  if (bundle.family) j["family"] = json::parse(family_to_json(*bundle.family));
  return j.dump(2);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << content;
}

}  // namespace idt::io
