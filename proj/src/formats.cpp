#include "synapse/formats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

namespace synapse {

namespace {

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(source + ": not valid JSON (" + e.what() + ")");
  }
}

[[noreturn]] void bad(const std::string& source, const std::string& field, const std::string& what) {
  throw DataError(source + ": field '" + field + "' " + what);
}

const json& member(const json& j, const char* key, const std::string& source, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(source, where + key, "is missing");
  return j.at(key);
}

double as_number(const json& j, const std::string& source, const std::string& field) {
  if (!j.is_number()) bad(source, field, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(source, field, "must be finite");
  return v;
}

long long as_integer(const json& j, const std::string& source, const std::string& field) {
  if (!j.is_number_integer()) bad(source, field, "must be an integer");
  return j.get<long long>();
}

Point3 as_point(const json& j, const std::string& source, const std::string& field) {
  if (!j.is_array() || j.size() != 3) bad(source, field, "must be an array [x, y, z]");
  return {static_cast<int>(as_integer(j[0], source, field)), static_cast<int>(as_integer(j[1], source, field)),
          static_cast<int>(as_integer(j[2], source, field))};
}

double as_confidence(const json& j, const std::string& source, const std::string& field) {
  const double c = as_number(j, source, field);
  if (c < 0.0 || c > 1.0) bad(source, field, "must lie in [0, 1]");
  return c;
}

std::vector<double> as_doubles(const json& j, const std::string& source, const std::string& field) {
  if (!j.is_array()) bad(source, field, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], source, field + "[" + std::to_string(i) + "]"));
  return out;
}

json point_json(Point3 p) { return json::array({p.x, p.y, p.z}); }

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

long long parse_int_cell(const std::string& s, const std::string& source, const std::string& field) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    bad(source, field, "must be an integer, got '" + s + "'");
  }
}

double parse_double_cell(const std::string& s, const std::string& source, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    bad(source, field, "must be a finite number, got '" + s + "'");
  }
}

std::string optional_cell(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

// Applies `handlers[key](value)` for each key, rejecting unknown ones.
template <typename Handlers>
void read_keys(const json& j, const std::string& source, const std::string& section, Handlers&& handlers) {
  if (!j.is_object()) bad(source, section, "must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!handlers(key, value, section + "." + key)) bad(source, section + "." + key, "is not a known setting");
  }
}

}  // namespace

std::string tbars_to_json(std::span<const TbarPrediction> tbars) {
  std::vector<TbarPrediction> sorted(tbars.begin(), tbars.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TbarPrediction& a, const TbarPrediction& b) { return a.confidence > b.confidence; });
  json arr = json::array();
  for (const auto& t : sorted) arr.push_back({{"pos", point_json(t.pos)}, {"confidence", t.confidence}});
  return json{{"tbars", arr}}.dump(1) + "\n";
}

std::vector<TbarPrediction> tbars_from_json(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  const json& arr = member(j, "tbars", source, "");
  if (!arr.is_array()) bad(source, "tbars", "must be an array");
  std::vector<TbarPrediction> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "tbars[" + std::to_string(i) + "].";
    out.push_back({as_point(member(arr[i], "pos", source, where), source, where + "pos"),
                   as_confidence(member(arr[i], "confidence", source, where), source, where + "confidence")});
  }
  return out;
}

std::string synapses_to_json(const SynapseSet& set) {
  json arr = json::array();
  for (const auto& s : set.synapses) {
    json partners = json::array();
    for (const auto& p : s.partners) {
      json pj{{"body", p.body}, {"confidence", p.confidence}};
      if (p.pos) pj["pos"] = point_json(*p.pos);
      partners.push_back(std::move(pj));
    }
    arr.push_back({{"tbar", {{"pos", point_json(s.tbar.pos)}, {"confidence", s.tbar.confidence}}},
                   {"partners", std::move(partners)}});
  }
  return json{{"synapses", arr}}.dump(1) + "\n";
}

SynapseSet synapses_from_json(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  const json& arr = member(j, "synapses", source, "");
  if (!arr.is_array()) bad(source, "synapses", "must be an array");
  SynapseSet out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "synapses[" + std::to_string(i) + "].";
    const json& tj = member(arr[i], "tbar", source, where);
    Synapse s;
    s.tbar.pos = as_point(member(tj, "pos", source, where + "tbar."), source, where + "tbar.pos");
    s.tbar.confidence = tj.contains("confidence") ? as_confidence(tj["confidence"], source, where + "tbar.confidence") : 1.0;
    const json& pj = arr[i].contains("partners") ? arr[i]["partners"] : json::array();
    if (!pj.is_array()) bad(source, where + "partners", "must be an array");
    for (std::size_t k = 0; k < pj.size(); ++k) {
      const std::string pw = where + "partners[" + std::to_string(k) + "].";
      Partner p;
      if (pj[k].contains("body")) {
        const long long body = as_integer(pj[k]["body"], source, pw + "body");
        if (body < 0 || body > 0xFFFFFFFFLL) bad(source, pw + "body", "must be a non-negative 32-bit id");
        p.body = static_cast<BodyId>(body);
      }
      if (pj[k].contains("pos")) p.pos = as_point(pj[k]["pos"], source, pw + "pos");
      if (!pj[k].contains("body") && !p.pos) bad(source, pw + "body", "is missing (and no 'pos' given)");
      p.confidence = pj[k].contains("confidence") ? as_confidence(pj[k]["confidence"], source, pw + "confidence") : 1.0;
      s.partners.push_back(p);
    }
    out.synapses.push_back(std::move(s));
  }
  return out;
}

json mlp_to_json(const MlpModel& model) {
  json layers = json::array();
  for (const auto& l : model.layers) layers.push_back({{"weights", l.weights}, {"biases", l.biases}});
  return {{"layer_sizes", model.layer_sizes},
          {"layers", layers},
          {"feature_mean", model.feature_mean},
          {"feature_std", model.feature_std}};
}

MlpModel mlp_from_json(const json& j, const std::string& source) {
  MlpModel m;
  const json& sizes = member(j, "layer_sizes", source, "");
  if (!sizes.is_array() || sizes.size() < 2) bad(source, "layer_sizes", "must list at least two layer sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto s = as_integer(sizes[i], source, "layer_sizes");
    if (s <= 0) bad(source, "layer_sizes", "must be positive");
    m.layer_sizes.push_back(static_cast<int>(s));
  }
  const json& layers = member(j, "layers", source, "");
  if (!layers.is_array() || layers.size() != sizes.size() - 1) {
    bad(source, "layers", "must hold one entry per weight layer");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string where = "layers[" + std::to_string(l) + "].";
    DenseLayer layer;
    layer.inputs = m.layer_sizes[l];
    layer.outputs = m.layer_sizes[l + 1];
    layer.weights = as_doubles(member(layers[l], "weights", source, where), source, where + "weights");
    layer.biases = as_doubles(member(layers[l], "biases", source, where), source, where + "biases");
    if (layer.weights.size() != static_cast<std::size_t>(layer.inputs) * layer.outputs) {
      bad(source, where + "weights", "has the wrong length for layer_sizes");
    }
    if (layer.biases.size() != static_cast<std::size_t>(layer.outputs)) {
      bad(source, where + "biases", "has the wrong length for layer_sizes");
    }
    m.layers.push_back(std::move(layer));
  }
  m.feature_mean = as_doubles(member(j, "feature_mean", source, ""), source, "feature_mean");
  m.feature_std = as_doubles(member(j, "feature_std", source, ""), source, "feature_std");
  const auto dim = static_cast<std::size_t>(m.layer_sizes.front());
  if (m.feature_mean.size() != dim) bad(source, "feature_mean", "length must equal the input size");
  if (m.feature_std.size() != dim) bad(source, "feature_std", "length must equal the input size");
  for (double s : m.feature_std)
    if (!(s > 0.0)) bad(source, "feature_std", "entries must be positive");
  if (m.layer_sizes.back() != 1) bad(source, "layer_sizes", "must end with a single output unit");
  return m;
}

std::string scorer_to_json(const PatchMlpScorer& scorer) {
  return json{{"kind", "patch-mlp"}, {"patch_radius", scorer.patch_radius()}, {"mlp", mlp_to_json(scorer.model())}}
             .dump(1) +
         "\n";
}

PatchMlpScorer scorer_from_json(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  const json& kind = member(j, "kind", source, "");
  if (kind != "patch-mlp") bad(source, "kind", "must be 'patch-mlp'");
  const auto radius = as_integer(member(j, "patch_radius", source, ""), source, "patch_radius");
  try {
    return PatchMlpScorer(static_cast<int>(radius), mlp_from_json(member(j, "mlp", source, ""), source + " (mlp)"));
  } catch (const InvalidArgument& e) {
    bad(source, "patch_radius", e.what());
  }
}

std::string graph_to_csv(const ConnectomeGraph& g) {
  std::string out = g.directed() ? "pre,post,weight\n" : "a,b,weight\n";
  for (const auto& [e, w] : g.edges()) out += fmt::format("{},{},{}\n", e.pre, e.post, w);
  return out;
}

ConnectomeGraph graph_from_csv(const std::string& text, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty()) bad(source, "header", "is missing");
  bool directed = true;
  if (lines[0] == "a,b,weight") {
    directed = false;
  } else if (lines[0] != "pre,post,weight") {
    bad(source, "header", "must be 'pre,post,weight' or 'a,b,weight'");
  }
  ConnectomeGraph g(directed);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv(lines[i]);
    const std::string row = "line " + std::to_string(i + 1) + " ";
    if (cells.size() != 3) bad(source, row + "row", "must have 3 columns");
    const auto a = parse_int_cell(cells[0], source, row + (directed ? "pre" : "a"));
    const auto b = parse_int_cell(cells[1], source, row + (directed ? "post" : "b"));
    const auto w = parse_int_cell(cells[2], source, row + "weight");
    if (a <= 0 || b <= 0 || a > 0xFFFFFFFFLL || b > 0xFFFFFFFFLL) bad(source, row + "body", "ids must be nonzero");
    if (w < 1) bad(source, row + "weight", "must be >= 1");
    if (g.weight(static_cast<BodyId>(a), static_cast<BodyId>(b)) != 0) bad(source, row + "edge", "is duplicated");
    g.add(static_cast<BodyId>(a), static_cast<BodyId>(b), w);
  }
  return g;
}

std::string pr_curve_to_csv(const PrCurve& curve) {
  std::string out = "threshold,precision,recall,tp,fp,fn\n";
  for (const auto& p : curve) {
    out += fmt::format("{},{},{},{},{},{}\n", p.threshold, optional_cell(p.precision), optional_cell(p.recall), p.tp,
                       p.fp, p.fn);
  }
  return out;
}

PrCurve pr_curve_from_csv(const std::string& text, const std::string& source) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "threshold,precision,recall,tp,fp,fn") {
    bad(source, "header", "must be 'threshold,precision,recall,tp,fp,fn'");
  }
  PrCurve curve;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv(lines[i]);
    const std::string row = "line " + std::to_string(i + 1) + " ";
    if (cells.size() != 6) bad(source, row + "row", "must have 6 columns");
    PrPoint p;
    p.threshold = parse_double_cell(cells[0], source, row + "threshold");
    if (!cells[1].empty()) p.precision = parse_double_cell(cells[1], source, row + "precision");
    if (!cells[2].empty()) p.recall = parse_double_cell(cells[2], source, row + "recall");
    p.tp = parse_int_cell(cells[3], source, row + "tp");
    p.fp = parse_int_cell(cells[4], source, row + "fp");
    p.fn = parse_int_cell(cells[5], source, row + "fn");
    curve.push_back(p);
  }
  return curve;
}

std::string added_missed_to_csv(const AddedMissed& am) {
  std::string out = "kind,pre,post,gt_weight,pred_weight\n";
  for (const auto& e : am.added)
    out += fmt::format("added,{},{},{},{}\n", e.edge.pre, e.edge.post, e.gt_weight, e.pred_weight);
  for (const auto& e : am.missed)
    out += fmt::format("missed,{},{},{},{}\n", e.edge.pre, e.edge.post, e.gt_weight, e.pred_weight);
  out += fmt::format("normalizer,{}\n", am.normalizer);
  return out;
}

std::string scatter_to_csv(const std::vector<ScatterRecord>& records) {
  std::string out = "pre,post,gt_weight,pred_weight,within_band\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{}\n", r.edge.pre, r.edge.post, r.gt_weight, r.pred_weight, r.within_band ? 1 : 0);
  }
  return out;
}

void read_config(const json& j, DetectorConfig& cfg, const std::string& source) {
  read_keys(j, source, "detector", [&](const std::string& key, const json& v, const std::string& field) {
    if (key == "positive_radius") cfg.positive_radius = as_number(v, source, field);
    else if (key == "smooth_sigma") cfg.smooth_sigma = as_number(v, source, field);
    else if (key == "score_threshold") cfg.score_threshold = as_number(v, source, field);
    else if (key == "nms_radius") cfg.nms_radius = as_number(v, source, field);
    else if (key == "shift_radius") cfg.shift_radius = as_number(v, source, field);
    else return false;
    return true;
  });
}

void read_config(const json& j, PartnerConfig& cfg, const std::string& source) {
  read_keys(j, source, "partner", [&](const std::string& key, const json& v, const std::string& field) {
    if (key == "candidate_radius") cfg.candidate_radius = as_number(v, source, field);
    else if (key == "dilation_radii") cfg.dilation_radii = as_doubles(v, source, field);
    else if (key == "dark_threshold") cfg.dark_threshold = static_cast<int>(as_integer(v, source, field));
    else if (key == "decision_threshold") cfg.decision_threshold = as_number(v, source, field);
    else return false;
    return true;
  });
}

void read_config(const json& j, TrainSpec& spec, const std::string& source) {
  read_keys(j, source, "train", [&](const std::string& key, const json& v, const std::string& field) {
    if (key == "learning_rate") spec.learning_rate = as_number(v, source, field);
    else if (key == "epochs") spec.epochs = static_cast<int>(as_integer(v, source, field));
    else if (key == "batch_size") spec.batch_size = static_cast<int>(as_integer(v, source, field));
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(as_integer(v, source, field));
    else if (key == "hidden_sizes") {
      if (!v.is_array()) bad(source, field, "must be an array of integers");
      spec.hidden_sizes.clear();
      for (const auto& h : v) spec.hidden_sizes.push_back(static_cast<int>(as_integer(h, source, field)));
    } else return false;
    return true;
  });
}

void read_config(const json& j, BaselineConfig& cfg, const std::string& source) {
  read_keys(j, source, "baseline", [&](const std::string& key, const json& v, const std::string& field) {
    if (key == "sample_count") cfg.sample_count = as_integer(v, source, field);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(as_integer(v, source, field));
    else if (key == "directed") {
      if (!v.is_boolean()) bad(source, field, "must be a boolean");
      cfg.directed = v.get<bool>();
    } else return false;
    return true;
  });
}

void read_config(const json& j, SynthSpec& spec, const std::string& source) {
  read_keys(j, source, "synth", [&](const std::string& key, const json& v, const std::string& field) {
    auto as_int = [&] { return static_cast<int>(as_integer(v, source, field)); };
    if (key == "size") spec.size = as_int();
    else if (key == "bodies") spec.bodies = as_int();
    else if (key == "tbars") spec.tbars = as_int();
    else if (key == "min_partners") spec.min_partners = as_int();
    else if (key == "max_partners") spec.max_partners = as_int();
    else if (key == "noise_sigma") spec.noise_sigma = as_number(v, source, field);
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(as_integer(v, source, field));
    else if (key == "body_intensity") spec.body_intensity = as_int();
    else if (key == "body_intensity_jitter") spec.body_intensity_jitter = as_int();
    else if (key == "membrane_intensity") spec.membrane_intensity = as_int();
    else if (key == "blob_intensity") spec.blob_intensity = as_int();
    else if (key == "psd_intensity") spec.psd_intensity = as_int();
    else if (key == "blob_radius") spec.blob_radius = as_number(v, source, field);
    else if (key == "psd_radius") spec.psd_radius = as_number(v, source, field);
    else if (key == "min_contact_distance") spec.min_contact_distance = as_number(v, source, field);
    else if (key == "max_contact_distance") spec.max_contact_distance = as_number(v, source, field);
    else if (key == "partner_reach") spec.partner_reach = as_number(v, source, field);
    else if (key == "min_tbar_spacing") spec.min_tbar_spacing = as_number(v, source, field);
    else if (key == "margin") spec.margin = as_int();
    else return false;
    return true;
  });
}

json config_to_json(const DetectorConfig& c) {
  return {{"positive_radius", c.positive_radius},
          {"smooth_sigma", c.smooth_sigma},
          {"score_threshold", c.score_threshold},
          {"nms_radius", c.nms_radius},
          {"shift_radius", c.shift_radius}};
}

json config_to_json(const PartnerConfig& c) {
  return {{"candidate_radius", c.candidate_radius},
          {"dilation_radii", c.dilation_radii},
          {"dark_threshold", c.dark_threshold},
          {"decision_threshold", c.decision_threshold}};
}

json config_to_json(const TrainSpec& s) {
  return {{"learning_rate", s.learning_rate},
          {"epochs", s.epochs},
          {"batch_size", s.batch_size},
          {"seed", s.seed},
          {"hidden_sizes", s.hidden_sizes}};
}

json config_to_json(const BaselineConfig& c) {
  return {{"sample_count", c.sample_count}, {"seed", c.seed}, {"directed", c.directed}};
}

json config_to_json(const SynthSpec& s) {
  return {{"size", s.size},
          {"bodies", s.bodies},
          {"tbars", s.tbars},
          {"min_partners", s.min_partners},
          {"max_partners", s.max_partners},
          {"noise_sigma", s.noise_sigma},
          {"seed", s.seed},
          {"body_intensity", s.body_intensity},
          {"body_intensity_jitter", s.body_intensity_jitter},
          {"membrane_intensity", s.membrane_intensity},
          {"blob_intensity", s.blob_intensity},
          {"psd_intensity", s.psd_intensity},
          {"blob_radius", s.blob_radius},
          {"psd_radius", s.psd_radius},
          {"min_contact_distance", s.min_contact_distance},
          {"max_contact_distance", s.max_contact_distance},
          {"partner_reach", s.partner_reach},
          {"min_tbar_spacing", s.min_tbar_spacing},
          {"margin", s.margin}};
}

}  // namespace synapse
