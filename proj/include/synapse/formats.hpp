#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "synapse/baseline.hpp"
#include "synapse/connectome.hpp"
#include "synapse/metrics.hpp"
#include "synapse/mlp.hpp"
#include "synapse/psd.hpp"
#include "synapse/synapse_set.hpp"
#include "synapse/synth.hpp"
#include "synapse/tbar.hpp"

// Text formats shared by the CLI and tests. Every parser takes a `source`
// string (usually a path) and throws DataError naming it and the bad field.

namespace synapse {

using json = nlohmann::json;

// {"tbars":[{"pos":[x,y,z],"confidence":c}, ...]}, descending confidence.
std::string tbars_to_json(std::span<const TbarPrediction> tbars);
std::vector<TbarPrediction> tbars_from_json(const std::string& text, const std::string& source);

// {"synapses":[{"tbar":{"pos":[...],"confidence":c},
//               "partners":[{"body":id,"confidence":c,"pos":[...]}]}]}
// "pos" on partners is optional; "body" may be omitted when "pos" is given.
std::string synapses_to_json(const SynapseSet& set);
SynapseSet synapses_from_json(const std::string& text, const std::string& source);

// {"layer_sizes":[...],"layers":[{"weights":[row-major],"biases":[...]}],
//  "feature_mean":[...],"feature_std":[...]}
json mlp_to_json(const MlpModel& model);
MlpModel mlp_from_json(const json& j, const std::string& source);

// {"kind":"patch-mlp","patch_radius":r,"mlp":{...}}
std::string scorer_to_json(const PatchMlpScorer& scorer);
PatchMlpScorer scorer_from_json(const std::string& text, const std::string& source);

// "pre,post,weight" (directed) or "a,b,weight" (undirected, a <= b), rows in
// ascending key order.
std::string graph_to_csv(const ConnectomeGraph& g);
ConnectomeGraph graph_from_csv(const std::string& text, const std::string& source);

// "threshold,precision,recall,tp,fp,fn"; undefined values are empty fields.
std::string pr_curve_to_csv(const PrCurve& curve);
PrCurve pr_curve_from_csv(const std::string& text, const std::string& source);

// "kind,pre,post,gt_weight,pred_weight" rows then "normalizer,<n>".
std::string added_missed_to_csv(const AddedMissed& am);

// "pre,post,gt_weight,pred_weight,within_band".
std::string scatter_to_csv(const std::vector<ScatterRecord>& records);

// Config sections. Missing keys keep their defaults; unknown keys and wrong
// types throw DataError naming `source` and the key.
void read_config(const json& j, DetectorConfig& cfg, const std::string& source);
void read_config(const json& j, PartnerConfig& cfg, const std::string& source);
void read_config(const json& j, TrainSpec& spec, const std::string& source);
void read_config(const json& j, BaselineConfig& cfg, const std::string& source);
void read_config(const json& j, SynthSpec& spec, const std::string& source);

json config_to_json(const DetectorConfig& cfg);
json config_to_json(const PartnerConfig& cfg);
json config_to_json(const TrainSpec& spec);
json config_to_json(const BaselineConfig& cfg);
json config_to_json(const SynthSpec& spec);

}  // namespace synapse
