#pragma once

#include <string>

#include "idt/harness.hpp"

namespace idt::io {

// Distribution documents carry all reals as decimal strings so rational
// data round-trips exactly at double precision.
std::string distribution_to_json(const PiecewiseDistribution& dist);
PiecewiseDistribution distribution_from_json(const std::string& text);

std::string threshold_class_to_json(const ThresholdClass& cls);
ThresholdClass threshold_class_from_json(const std::string& text);

std::string family_to_json(const ClassFamily& family);
ClassFamily family_from_json(const std::string& text);

std::string agent_to_json(const Agent& agent);
Agent agent_from_json(const std::string& text);

// Decision logs are JSON Lines: a {"_meta": ...} header line, then one
// record per line {"x": [...], "yhat": 0|1, "attr": int?}.
std::string log_to_jsonl(const DecisionLog& log);
DecisionLog log_from_jsonl(const std::string& text);

std::string estimate_to_json(const EstimateResult& result);
std::string fairness_to_json(const FairnessReport& report);

TrialConfig trial_config_from_json(const std::string& text);
std::string trial_config_to_json(const TrialConfig& config);

/// Full report document: config echo, version stamp, aggregates and
/// per-trial values.  Timing is deliberately excluded so identical configs
/// produce byte-identical documents.
std::string trial_report_to_json(const TrialConfig& config, const TrialReport& report);

std::string bundle_report_to_json(const ConstructionBundle& bundle);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace idt::io
