// synapse: command-line front end for the T-bar / PSD detection pipeline and
// its connectome evaluation.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 internal error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "manifest.hpp"
#include "synapse/baseline.hpp"
#include "synapse/connectome.hpp"
#include "synapse/formats.hpp"
#include "synapse/metrics.hpp"
#include "synapse/psd.hpp"
#include "synapse/synth.hpp"
#include "synapse/tbar.hpp"
#include "synapse/volume_io.hpp"

namespace fs = std::filesystem;
using namespace synapse;
using cli::Manifest;
using cli::OutputStage;

namespace {

/// Bad flag combinations or values; exits with status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  DetectorConfig detector;
  PartnerConfig partner;
  TrainSpec tbar_train;
  TrainSpec psd_train;
  int patch_radius = 2;
  double match_distance = 27.0;
  BaselineConfig baseline;
  SynthSpec synth;
};

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string output_dir = ".";
};

RunConfig load_config(const Globals& g) {
  RunConfig rc;
  if (!g.config_path.empty()) {
    const std::string source = g.config_path;
    json j;
    try {
      j = json::parse(read_file(g.config_path));
    } catch (const json::parse_error& e) {
      throw DataError(source + ": not valid JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw DataError(source + ": config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "detector") read_config(value, rc.detector, source);
      else if (key == "partner") read_config(value, rc.partner, source);
      else if (key == "tbar_train") read_config(value, rc.tbar_train, source);
      else if (key == "psd_train") read_config(value, rc.psd_train, source);
      else if (key == "baseline") read_config(value, rc.baseline, source);
      else if (key == "synth") read_config(value, rc.synth, source);
      else if (key == "scorer") {
        if (!value.is_object() || value.size() != 1 || !value.contains("patch_radius") ||
            !value["patch_radius"].is_number_integer()) {
          throw DataError(source + ": field 'scorer.patch_radius' must be the only key and an integer");
        }
        rc.patch_radius = value["patch_radius"].get<int>();
      } else if (key == "match") {
        if (!value.is_object() || value.size() != 1 || !value.contains("max_distance") ||
            !value["max_distance"].is_number()) {
          throw DataError(source + ": field 'match.max_distance' must be the only key and a number");
        }
        rc.match_distance = value["max_distance"].get<double>();
      } else {
        throw DataError(source + ": field '" + key + "' is not a known config section");
      }
    }
  }
  if (g.seed) {
    rc.tbar_train.seed = rc.psd_train.seed = rc.baseline.seed = rc.synth.seed = *g.seed;
  }
  return rc;
}

template <typename T>
void override_with(T& target, const std::optional<T>& flag) {
  if (flag) target = *flag;
}

template <typename Cfg>
void validated(const Cfg& cfg) {
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

GrayVolume load_gray(const std::string& path, Manifest& m) {
  auto v = read_gray(path);
  m.input(path);
  m.input(raw_path_for(path));
  return v;
}

LabelVolume load_labels(const std::string& path, Manifest& m) {
  auto v = read_labels(path);
  m.input(path);
  m.input(raw_path_for(path));
  return v;
}

std::string load_text(const std::string& path, Manifest& m) {
  auto text = read_file(path);
  m.input(path);
  return text;
}

void stage_volume(OutputStage& stage, const std::string& name, const EncodedVolume& v) {
  stage.add(name, v.header);
  stage.add(raw_path_for(name).string(), v.raw);
}

std::string manifest_name(const std::string& output) { return fs::path(output).replace_extension(".manifest.json").string(); }

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int i = 0; i <= 20; ++i) t.push_back(i / 20.0);
  return t;
}

std::vector<double> sorted_thresholds(std::vector<double> t) {
  if (t.empty()) return default_thresholds();
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw UsageError("--thresholds must be strictly increasing");
  return t;
}

std::string psd_model_to_json(const MlpModel& model, const PartnerConfig& cfg) {
  return json{{"kind", "psd-mlp"}, {"partner", config_to_json(cfg)}, {"mlp", mlp_to_json(model)}}.dump(1) + "\n";
}

std::pair<MlpModel, PartnerConfig> psd_model_from_json(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(source + ": not valid JSON (" + e.what() + ")");
  }
  if (!j.is_object() || j.value("kind", "") != "psd-mlp") throw DataError(source + ": field 'kind' must be 'psd-mlp'");
  if (!j.contains("partner")) throw DataError(source + ": field 'partner' is missing");
  if (!j.contains("mlp")) throw DataError(source + ": field 'mlp' is missing");
  PartnerConfig cfg;
  read_config(j["partner"], cfg, source);
  return {mlp_from_json(j["mlp"], source), cfg};
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::optional<int> size, bodies, tbars, min_partners, max_partners;
  std::optional<double> noise;
  std::string prefix;
};

void run_synth(const Globals& g, const SynthArgs& a) {
  auto rc = load_config(g);
  auto& spec = rc.synth;
  override_with(spec.size, a.size);
  override_with(spec.bodies, a.bodies);
  override_with(spec.tbars, a.tbars);
  override_with(spec.min_partners, a.min_partners);
  override_with(spec.max_partners, a.max_partners);
  override_with(spec.noise_sigma, a.noise);
  validated(spec);

  const auto scene = generate_scene(spec);
  OutputStage stage(g.output_dir);
  stage_volume(stage, a.prefix + "gray.json", encode_volume(scene.gray));
  stage_volume(stage, a.prefix + "labels.json", encode_volume(scene.labels));
  stage.add(a.prefix + "groundtruth.json", synapses_to_json(scene.ground_truth));
  Manifest m("synth");
  m.config("synth", config_to_json(spec));
  m.seed(spec.seed);
  m.finish(stage, a.prefix + "synth.manifest.json");
  stage.commit();
}

struct TbarTrainArgs {
  std::string gray, groundtruth, out = "tbar_model.json";
  std::optional<double> positive_radius, learning_rate;
  std::optional<int> patch_radius, epochs, batch_size;
  std::vector<int> hidden;
};

void run_tbar_train(const Globals& g, const TbarTrainArgs& a) {
  auto rc = load_config(g);
  override_with(rc.detector.positive_radius, a.positive_radius);
  override_with(rc.patch_radius, a.patch_radius);
  override_with(rc.tbar_train.learning_rate, a.learning_rate);
  override_with(rc.tbar_train.epochs, a.epochs);
  override_with(rc.tbar_train.batch_size, a.batch_size);
  if (!a.hidden.empty()) rc.tbar_train.hidden_sizes = a.hidden;
  validated(rc.detector);
  validated(rc.tbar_train);
  if (rc.patch_radius < 0) throw UsageError("--patch-radius must be >= 0");

  Manifest m("tbar-train");
  const auto gray = load_gray(a.gray, m);
  const auto gt = synapses_from_json(load_text(a.groundtruth, m), a.groundtruth);
  const auto annotations = gt.tbar_positions();
  const auto labels = make_voxel_labels(annotations, gray.dims(), rc.detector.positive_radius);
  const auto scorer = reference_scorer_train(gray, labels, rc.patch_radius, rc.tbar_train);

  OutputStage stage(g.output_dir);
  stage.add(a.out, scorer_to_json(scorer));
  m.config("detector", {{"positive_radius", rc.detector.positive_radius}});
  m.config("scorer", {{"patch_radius", rc.patch_radius}});
  m.config("tbar_train", config_to_json(rc.tbar_train));
  m.seed(rc.tbar_train.seed);
  m.note("positive_voxels", count_set(labels));
  m.finish(stage, manifest_name(a.out));
  stage.commit();
}

struct TbarPredictArgs {
  std::string gray, model, out = "tbars.json";
  std::optional<double> smooth_sigma, threshold, nms_radius, shift_radius;
};

void run_tbar_predict(const Globals& g, const TbarPredictArgs& a) {
  auto rc = load_config(g);
  override_with(rc.detector.smooth_sigma, a.smooth_sigma);
  override_with(rc.detector.score_threshold, a.threshold);
  override_with(rc.detector.nms_radius, a.nms_radius);
  override_with(rc.detector.shift_radius, a.shift_radius);
  validated(rc.detector);

  Manifest m("tbar-predict");
  const auto gray = load_gray(a.gray, m);
  const auto scorer = scorer_from_json(load_text(a.model, m), a.model);
  const auto tbars = detect_tbars(gray, scorer, rc.detector, g.threads);

  OutputStage stage(g.output_dir);
  stage.add(a.out, tbars_to_json(tbars));
  m.config("detector", config_to_json(rc.detector));
  m.note("tbars", tbars.size());
  m.finish(stage, manifest_name(a.out));
  stage.commit();
}

struct TbarShiftArgs {
  std::string gray, tbars, out = "tbars_shifted.json";
  std::optional<double> shift_radius;
};

void run_tbar_shift(const Globals& g, const TbarShiftArgs& a) {
  auto rc = load_config(g);
  override_with(rc.detector.shift_radius, a.shift_radius);
  validated(rc.detector);

  Manifest m("tbar-shift");
  const auto gray = load_gray(a.gray, m);
  const auto tbars = tbars_from_json(load_text(a.tbars, m), a.tbars);
  for (const auto& t : tbars)
    if (!gray.contains(t.pos)) throw DataError(a.tbars + ": T-bar " + to_string(t.pos) + " lies outside the volume");
  const auto shifted = shift_predictions(tbars, gray, rc.detector.shift_radius);

  OutputStage stage(g.output_dir);
  stage.add(a.out, tbars_to_json(shifted));
  m.config("detector", {{"shift_radius", rc.detector.shift_radius}});
  m.finish(stage, manifest_name(a.out));
  stage.commit();
}

struct PsdTrainArgs {
  std::string gray, labels, groundtruth, out = "psd_model.json";
  std::optional<double> candidate_radius, learning_rate;
  std::vector<double> dilation_radii;
  std::optional<int> dark_threshold, epochs, batch_size;
  std::vector<int> hidden;
  double psd_shift_radius = 0.0;
};

void run_psd_train(const Globals& g, const PsdTrainArgs& a) {
  auto rc = load_config(g);
  override_with(rc.partner.candidate_radius, a.candidate_radius);
  override_with(rc.partner.dark_threshold, a.dark_threshold);
  if (!a.dilation_radii.empty()) rc.partner.dilation_radii = a.dilation_radii;
  override_with(rc.psd_train.learning_rate, a.learning_rate);
  override_with(rc.psd_train.epochs, a.epochs);
  override_with(rc.psd_train.batch_size, a.batch_size);
  if (!a.hidden.empty()) rc.psd_train.hidden_sizes = a.hidden;
  validated(rc.partner);
  validated(rc.psd_train);

  Manifest m("psd-train");
  const auto gray = load_gray(a.gray, m);
  const auto labels = load_labels(a.labels, m);
  if (gray.dims() != labels.dims()) throw DataError(a.labels + ": dims differ from " + a.gray);
  const auto raw_gt = synapses_from_json(load_text(a.groundtruth, m), a.groundtruth);
  const auto gt = resolve_partner_bodies(raw_gt, labels, &gray, a.psd_shift_radius);
  const auto model = psd_train(gray, labels, gt, rc.partner, rc.psd_train, g.threads);

  OutputStage stage(g.output_dir);
  stage.add(a.out, psd_model_to_json(model, rc.partner));
  m.config("partner", config_to_json(rc.partner));
  m.config("psd_train", config_to_json(rc.psd_train));
  m.config("ground_truth", {{"psd_shift_radius", a.psd_shift_radius}});
  m.seed(rc.psd_train.seed);
  m.finish(stage, manifest_name(a.out));
  stage.commit();
}

struct PsdPredictArgs {
  std::string gray, labels, tbars, model, out = "synapses.json";
  double tbar_threshold = 0.0;
  std::optional<double> decision_threshold;
};

void run_psd_predict(const Globals& g, const PsdPredictArgs& a) {
  auto rc = load_config(g);
  Manifest m("psd-predict");
  auto [model, partner] = psd_model_from_json(load_text(a.model, m), a.model);
  // Feature settings come from the model; only the decision threshold is free.
  partner.decision_threshold = rc.partner.decision_threshold;
  override_with(partner.decision_threshold, a.decision_threshold);
  validated(partner);
  if (!(a.tbar_threshold >= 0.0 && a.tbar_threshold <= 1.0)) throw UsageError("--tbar-threshold must be in [0, 1]");

  const auto gray = load_gray(a.gray, m);
  const auto labels = load_labels(a.labels, m);
  if (gray.dims() != labels.dims()) throw DataError(a.labels + ": dims differ from " + a.gray);
  const auto all = tbars_from_json(load_text(a.tbars, m), a.tbars);
  for (const auto& t : all)
    if (!gray.contains(t.pos)) throw DataError(a.tbars + ": T-bar " + to_string(t.pos) + " lies outside the volume");
  const auto tbars = filter_by_confidence(all, a.tbar_threshold);
  const auto synapses = predict_partners(gray, labels, tbars, model, partner, g.threads);

  OutputStage stage(g.output_dir);
  stage.add(a.out, synapses_to_json(synapses));
  m.config("partner", config_to_json(partner));
  m.config("tbar_filter", {{"tbar_threshold", a.tbar_threshold}});
  m.note("tbars", tbars.size());
  m.finish(stage, manifest_name(a.out));
  stage.commit();
}

struct GraphBuildArgs {
  std::string synapses, labels, out = "graph.csv", gray, filter_groundtruth;
  double psd_threshold = 0.0;
  double psd_shift_radius = 0.0;
  bool ground_truth = false;
  bool undirected = false;
};

void run_graph_build(const Globals& g, const GraphBuildArgs& a) {
  Manifest m("graph-build");
  const auto labels = load_labels(a.labels, m);
  auto set = synapses_from_json(load_text(a.synapses, m), a.synapses);
  if (a.psd_shift_radius > 0.0 && a.gray.empty()) throw UsageError("--psd-shift-radius needs --gray");
  std::optional<GrayVolume> gray;
  if (!a.gray.empty()) gray = load_gray(a.gray, m);
  set = resolve_partner_bodies(set, labels, gray ? &*gray : nullptr, a.psd_shift_radius);
  if (a.ground_truth) set = collapse_ground_truth(set, labels);

  BuildReport report;
  auto graph = build_graph(set, labels, a.ground_truth ? 0.0 : a.psd_threshold, &report);
  if (!a.filter_groundtruth.empty()) {
    auto gt = synapses_from_json(load_text(a.filter_groundtruth, m), a.filter_groundtruth);
    gt = resolve_partner_bodies(gt, labels, gray ? &*gray : nullptr, a.psd_shift_radius);
    graph = filter_bodies(graph, BodyFilter::from_ground_truth(gt, labels));
  }
  if (a.undirected) graph = undirect_graph(graph);

  OutputStage stage(g.output_dir);
  stage.add(a.out, graph_to_csv(graph));
  m.config("graph", {{"psd_threshold", a.psd_threshold},
                     {"ground_truth", a.ground_truth},
                     {"undirected", a.undirected},
                     {"psd_shift_radius", a.psd_shift_radius},
                     {"orphan_filter", !a.filter_groundtruth.empty()}});
  m.note("skipped_tbars", report.skipped_tbars);
  m.finish(stage, manifest_name(a.out));
  stage.commit();
}

struct EvalArgs {
  std::string mode;
  std::string tbars, groundtruth, labels, pred_graph, gt_graph, synapses, filter_groundtruth, out;
  bool same_segment = false;
  bool undirected = false;
  std::optional<double> max_distance;
  std::vector<double> thresholds;
  std::optional<std::int64_t> t, t1, t2;
};

void run_eval(const Globals& g, const EvalArgs& a) {
  auto rc = load_config(g);
  Manifest m("eval-pr");
  OutputStage stage(g.output_dir);
  auto require = [](const std::string& value, const char* flag, const std::string& mode) {
    if (value.empty()) throw UsageError(std::string("--mode ") + mode + " requires " + flag);
  };
  json settings{{"mode", a.mode}};
  std::string out = a.out;

  if (a.mode == "tbar") {
    require(a.tbars, "--tbars", a.mode);
    require(a.groundtruth, "--groundtruth", a.mode);
    if (a.same_segment) require(a.labels, "--labels", a.mode);
    MatchSpec spec;
    spec.max_distance = a.max_distance.value_or(rc.match_distance);
    spec.require_same_segment = a.same_segment;
    std::optional<LabelVolume> labels;
    if (a.same_segment) {
      labels = load_labels(a.labels, m);
      spec.segmentation = &*labels;
    }
    validated(spec);
    const auto pred = tbars_from_json(load_text(a.tbars, m), a.tbars);
    const auto gt = synapses_from_json(load_text(a.groundtruth, m), a.groundtruth).tbar_positions();
    const auto thresholds = sorted_thresholds(a.thresholds);
    if (out.empty()) out = "tbar_pr.csv";
    stage.add(out, pr_curve_to_csv(tbar_pr_curve(pred, gt, spec, thresholds)));
    settings["max_distance"] = spec.max_distance;
    settings["same_segment"] = a.same_segment;
    settings["thresholds"] = thresholds;
  } else if (a.mode == "weighted" || a.mode == "unweighted" || a.mode == "thresholded" || a.mode == "asymmetric") {
    MetricMode mode;
    if (a.mode == "weighted") mode = MetricMode::weighted();
    if (a.mode == "unweighted") mode = MetricMode::unweighted();
    if (a.mode == "thresholded") {
      if (!a.t) throw UsageError("--mode thresholded requires --t");
      mode = MetricMode::thresholded(*a.t);
      settings["t"] = *a.t;
    }
    if (a.mode == "asymmetric") {
      if (!a.t1 || !a.t2) throw UsageError("--mode asymmetric requires --t1 and --t2");
      mode = MetricMode::asymmetric(*a.t1, *a.t2);
      settings["t1"] = *a.t1;
      settings["t2"] = *a.t2;
    }
    validated(mode);
    require(a.gt_graph, "--gt-graph", a.mode);
    const auto gt = graph_from_csv(load_text(a.gt_graph, m), a.gt_graph);
    if (out.empty()) out = "graph_pr.csv";
    if (!a.pred_graph.empty()) {
      if (!a.synapses.empty()) throw UsageError("give either --pred-graph or --synapses, not both");
      auto pred = graph_from_csv(load_text(a.pred_graph, m), a.pred_graph);
      auto truth = gt;
      if (a.undirected) {
        pred = undirect_graph(pred);
        truth = undirect_graph(truth);
      }
      stage.add(out, pr_curve_to_csv({evaluate_graphs(pred, truth, mode)}));
    } else {
      require(a.synapses, "--synapses or --pred-graph", a.mode);
      require(a.labels, "--labels", a.mode);
      const auto labels = load_labels(a.labels, m);
      const auto synapses = synapses_from_json(load_text(a.synapses, m), a.synapses);
      GraphEvalParams params;
      params.undirected = a.undirected;
      if (!a.filter_groundtruth.empty()) {
        const auto fgt = resolve_partner_bodies(
            synapses_from_json(load_text(a.filter_groundtruth, m), a.filter_groundtruth), labels, nullptr, 0.0);
        params.filter = BodyFilter::from_ground_truth(fgt, labels);
      }
      const auto thresholds = sorted_thresholds(a.thresholds);
      stage.add(out, pr_curve_to_csv(graph_pr_curve(synapses, labels, gt, mode, thresholds, params)));
      settings["thresholds"] = thresholds;
      settings["orphan_filter"] = !a.filter_groundtruth.empty();
    }
    settings["undirected"] = a.undirected;
  } else if (a.mode == "added-missed" || a.mode == "scatter") {
    require(a.pred_graph, "--pred-graph", a.mode);
    require(a.gt_graph, "--gt-graph", a.mode);
    auto pred = graph_from_csv(load_text(a.pred_graph, m), a.pred_graph);
    auto gt = graph_from_csv(load_text(a.gt_graph, m), a.gt_graph);
    if (a.undirected) {
      pred = undirect_graph(pred);
      gt = undirect_graph(gt);
    }
    settings["undirected"] = a.undirected;
    if (a.mode == "added-missed") {
      if (!a.t1 || !a.t2) throw UsageError("--mode added-missed requires --t1 and --t2");
      validated(MetricMode::asymmetric(*a.t1, *a.t2));
      if (out.empty()) out = "added_missed.csv";
      stage.add(out, added_missed_to_csv(connections_added_missed(pred, gt, *a.t1, *a.t2)));
      settings["t1"] = *a.t1;
      settings["t2"] = *a.t2;
    } else {
      if (out.empty()) out = "scatter.csv";
      stage.add(out, scatter_to_csv(count_scatter(pred, gt)));
    }
  } else {
    throw UsageError("unknown --mode '" + a.mode + "'");
  }
  m.config("eval", settings);
  m.finish(stage, manifest_name(out));
  stage.commit();
}

struct BaselineArgs {
  std::string labels, out = "baseline.csv", gt_graph, curve_out = "baseline_pr.csv", mode = "unweighted";
  std::optional<std::int64_t> samples;
  std::vector<std::int64_t> sample_counts;
  std::optional<std::int64_t> t, t1, t2;
  bool undirected = false;
};

void run_baseline(const Globals& g, const BaselineArgs& a) {
  auto rc = load_config(g);
  override_with(rc.baseline.sample_count, a.samples);
  if (a.undirected) rc.baseline.directed = false;
  validated(rc.baseline);

  Manifest m("baseline");
  const auto labels = load_labels(a.labels, m);
  OutputStage stage(g.output_dir);
  stage.add(a.out, graph_to_csv(proximity_baseline(labels, rc.baseline)));
  m.config("baseline", config_to_json(rc.baseline));
  m.seed(rc.baseline.seed);

  if (!a.gt_graph.empty()) {
    MetricMode mode;
    if (a.mode == "weighted") mode = MetricMode::weighted();
    else if (a.mode == "unweighted") mode = MetricMode::unweighted();
    else if (a.mode == "thresholded" && a.t) mode = MetricMode::thresholded(*a.t);
    else if (a.mode == "asymmetric" && a.t1 && a.t2) mode = MetricMode::asymmetric(*a.t1, *a.t2);
    else throw UsageError("baseline --mode must be weighted, unweighted, thresholded --t or asymmetric --t1 --t2");
    validated(mode);
    if (a.sample_counts.empty()) throw UsageError("--gt-graph requires --sample-counts");
    const auto gt = graph_from_csv(load_text(a.gt_graph, m), a.gt_graph);
    const auto curve = baseline_curve(labels, gt, a.sample_counts, mode, !rc.baseline.directed, rc.baseline.seed);
    stage.add(a.curve_out, pr_curve_to_csv(curve));
    m.config("baseline_curve", {{"mode", a.mode}, {"sample_counts", a.sample_counts}});
  }
  m.finish(stage, manifest_name(a.out));
  stage.commit();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polyadic synapse detection and connectome evaluation"};
  app.set_version_flag("--version", cli::kToolVersion);
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config_path, "JSON file with detector/partner/train/baseline/synth settings")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for every randomized stage");
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  app.add_option("--output-dir", g.output_dir, "Directory receiving outputs and manifests");

  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  SynthArgs synth;
  auto* c_synth = sub("synth", "Generate a synthetic labelled scene with planted synapses");
  c_synth->add_option("--size", synth.size, "Cube side in voxels");
  c_synth->add_option("--bodies", synth.bodies);
  c_synth->add_option("--tbars", synth.tbars);
  c_synth->add_option("--min-partners", synth.min_partners);
  c_synth->add_option("--max-partners", synth.max_partners);
  c_synth->add_option("--noise", synth.noise, "Gaussian noise sigma in intensity levels");
  c_synth->add_option("--prefix", synth.prefix, "Prefix for output file names");
  c_synth->callback([&] { run_synth(g, synth); });

  TbarTrainArgs tt;
  auto* c_tt = sub("tbar-train", "Train the reference patch scorer from T-bar point annotations");
  c_tt->add_option("--gray", tt.gray)->required()->check(CLI::ExistingFile);
  c_tt->add_option("--groundtruth", tt.groundtruth)->required()->check(CLI::ExistingFile);
  c_tt->add_option("--out", tt.out);
  c_tt->add_option("--positive-radius", tt.positive_radius);
  c_tt->add_option("--patch-radius", tt.patch_radius);
  c_tt->add_option("--epochs", tt.epochs);
  c_tt->add_option("--batch-size", tt.batch_size);
  c_tt->add_option("--learning-rate", tt.learning_rate);
  c_tt->add_option("--hidden", tt.hidden)->delimiter(',');
  c_tt->callback([&] { run_tbar_train(g, tt); });

  TbarPredictArgs tp;
  auto* c_tp = sub("tbar-predict", "Detect T-bars: score, smooth, non-maxima suppression, shift");
  c_tp->add_option("--gray", tp.gray)->required()->check(CLI::ExistingFile);
  c_tp->add_option("--model", tp.model)->required()->check(CLI::ExistingFile);
  c_tp->add_option("--out", tp.out);
  c_tp->add_option("--smooth-sigma", tp.smooth_sigma);
  c_tp->add_option("--threshold", tp.threshold);
  c_tp->add_option("--nms-radius", tp.nms_radius);
  c_tp->add_option("--shift-radius", tp.shift_radius);
  c_tp->callback([&] { run_tbar_predict(g, tp); });

  TbarShiftArgs ts;
  auto* c_ts = sub("tbar-shift", "Move T-bar predictions to the brightest nearby voxel");
  c_ts->add_option("--gray", ts.gray)->required()->check(CLI::ExistingFile);
  c_ts->add_option("--tbars", ts.tbars)->required()->check(CLI::ExistingFile);
  c_ts->add_option("--out", ts.out);
  c_ts->add_option("--shift-radius", ts.shift_radius);
  c_ts->callback([&] { run_tbar_shift(g, ts); });

  PsdTrainArgs pt;
  auto* c_pt = sub("psd-train", "Train the post-synaptic partner classifier");
  c_pt->add_option("--gray", pt.gray)->required()->check(CLI::ExistingFile);
  c_pt->add_option("--labels", pt.labels)->required()->check(CLI::ExistingFile);
  c_pt->add_option("--groundtruth", pt.groundtruth)->required()->check(CLI::ExistingFile);
  c_pt->add_option("--out", pt.out);
  c_pt->add_option("--candidate-radius", pt.candidate_radius);
  c_pt->add_option("--dilation-radii", pt.dilation_radii)->delimiter(',');
  c_pt->add_option("--dark-threshold", pt.dark_threshold);
  c_pt->add_option("--epochs", pt.epochs);
  c_pt->add_option("--batch-size", pt.batch_size);
  c_pt->add_option("--learning-rate", pt.learning_rate);
  c_pt->add_option("--hidden", pt.hidden)->delimiter(',');
  c_pt->add_option("--psd-shift-radius", pt.psd_shift_radius, "Shift PSD annotations before resolving bodies");
  c_pt->callback([&] { run_psd_train(g, pt); });

  PsdPredictArgs pp;
  auto* c_pp = sub("psd-predict", "Predict post-synaptic partners for T-bars");
  c_pp->add_option("--gray", pp.gray)->required()->check(CLI::ExistingFile);
  c_pp->add_option("--labels", pp.labels)->required()->check(CLI::ExistingFile);
  c_pp->add_option("--tbars", pp.tbars)->required()->check(CLI::ExistingFile);
  c_pp->add_option("--model", pp.model)->required()->check(CLI::ExistingFile);
  c_pp->add_option("--out", pp.out);
  c_pp->add_option("--tbar-threshold", pp.tbar_threshold, "Keep T-bars with confidence >= this (e.g. 0.73)");
  c_pp->add_option("--decision-threshold", pp.decision_threshold);
  c_pp->callback([&] { run_psd_predict(g, pp); });

  GraphBuildArgs gb;
  auto* c_gb = sub("graph-build", "Build a connectome graph CSV from a synapse file");
  c_gb->add_option("--synapses", gb.synapses)->required()->check(CLI::ExistingFile);
  c_gb->add_option("--labels", gb.labels)->required()->check(CLI::ExistingFile);
  c_gb->add_option("--out", gb.out);
  c_gb->add_option("--psd-threshold", gb.psd_threshold);
  c_gb->add_flag("--ground-truth", gb.ground_truth, "Collapse duplicate partners and autapses first");
  c_gb->add_flag("--undirected", gb.undirected);
  c_gb->add_option("--gray", gb.gray)->check(CLI::ExistingFile);
  c_gb->add_option("--psd-shift-radius", gb.psd_shift_radius);
  c_gb->add_option("--filter-groundtruth", gb.filter_groundtruth, "Drop orphan bodies not in this ground truth")
      ->check(CLI::ExistingFile);
  c_gb->callback([&] { run_graph_build(g, gb); });

  EvalArgs ev;
  auto* c_ev = sub("eval-pr", "Precision/recall and related connectome metrics");
  c_ev->add_option("--mode", ev.mode)
      ->required()
      ->check(CLI::IsMember({"tbar", "weighted", "unweighted", "thresholded", "asymmetric", "added-missed", "scatter"}));
  c_ev->add_option("--tbars", ev.tbars)->check(CLI::ExistingFile);
  c_ev->add_option("--groundtruth", ev.groundtruth)->check(CLI::ExistingFile);
  c_ev->add_option("--labels", ev.labels)->check(CLI::ExistingFile);
  c_ev->add_flag("--same-segment", ev.same_segment);
  c_ev->add_option("--max-distance", ev.max_distance);
  c_ev->add_option("--pred-graph", ev.pred_graph)->check(CLI::ExistingFile);
  c_ev->add_option("--gt-graph", ev.gt_graph)->check(CLI::ExistingFile);
  c_ev->add_option("--synapses", ev.synapses)->check(CLI::ExistingFile);
  c_ev->add_option("--filter-groundtruth", ev.filter_groundtruth)->check(CLI::ExistingFile);
  c_ev->add_option("--thresholds", ev.thresholds)->delimiter(',');
  c_ev->add_option("--t", ev.t);
  c_ev->add_option("--t1", ev.t1);
  c_ev->add_option("--t2", ev.t2);
  c_ev->add_flag("--undirected", ev.undirected);
  c_ev->add_option("--out", ev.out);
  c_ev->callback([&] { run_eval(g, ev); });

  BaselineArgs bl;
  auto* c_bl = sub("baseline", "Body-proximity baseline connectome");
  c_bl->add_option("--labels", bl.labels)->required()->check(CLI::ExistingFile);
  c_bl->add_option("--out", bl.out);
  c_bl->add_option("--samples", bl.samples);
  c_bl->add_flag("--undirected", bl.undirected);
  c_bl->add_option("--gt-graph", bl.gt_graph)->check(CLI::ExistingFile);
  c_bl->add_option("--sample-counts", bl.sample_counts)->delimiter(',');
  c_bl->add_option("--mode", bl.mode);
  c_bl->add_option("--t", bl.t);
  c_bl->add_option("--t1", bl.t1);
  c_bl->add_option("--t2", bl.t2);
  c_bl->add_option("--curve-out", bl.curve_out);
  c_bl->callback([&] { run_baseline(g, bl); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const InvalidArgument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const TrainingDiverged& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
