// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
//
//   acceptance [--work-dir DIR]
//
// Criteria 6, 8 and 9 drive the synapse CLI; 7 reuses the T-bar model that
// criterion 6 trains.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "support/oracles.hpp"
#include "synapse/formats.hpp"
#include "synapse/metrics.hpp"
#include "synapse/mlp.hpp"
#include "synapse/psd.hpp"
#include "synapse/synth.hpp"
#include "synapse/tbar.hpp"
#include "synapse/volume_io.hpp"

namespace fs = std::filesystem;
using namespace synapse;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::int64_t random_threshold_pair(oracle::Rng& rng, std::int64_t& t2) {
  const auto t1 = oracle::uniform_int(rng, 2, 16);
  t2 = oracle::uniform_int(rng, 1, static_cast<int>(t1) - 1);
  return t1;
}

ConnectomeGraph random_graph(oracle::Rng& rng, int max_weight) {
  const int nodes = oracle::uniform_int(rng, 1, 30);
  return oracle::random_graph(rng, nodes, max_weight, oracle::uniform_real(rng, 0.02, 0.5));
}

// ---------------------------------------------------------------------------
// 1-5: library properties
// ---------------------------------------------------------------------------

Outcome metric_oracles() {
  const auto start = Clock::now();
  oracle::Rng rng(101);
  int formula = 0, bound = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pred = random_graph(rng, 15), gt = random_graph(rng, 15);
    std::int64_t t2 = 0;
    const auto t1 = random_threshold_pair(rng, t2);
    const auto a = asymmetric_pr(pred, gt, t1, t2);
    if (!oracle::agrees(a, oracle::asymmetric(pred, gt, t1, t2))) ++formula;

    const auto s = thresholded_pr(pred, gt, t1);
    const auto below = [](const std::optional<double>& lo, const std::optional<double>& hi) {
      return lo.has_value() == hi.has_value() && (!lo || *lo <= *hi + 1e-12);
    };
    if (!below(s.precision, a.precision) || !below(s.recall, a.recall)) ++bound;
  }
  const double secs = seconds_since(start);
  return {formula == 0 && bound == 0 && secs < 10,
          fmt::format("{} formula mismatches, {} bound violations, {:.2f} s", formula, bound, secs)};
}

Outcome consistency_identities() {
  oracle::Rng rng(102);
  int threshold_one = 0, missed = 0, binary = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pred = random_graph(rng, 15), gt = random_graph(rng, 15);
    if (!(thresholded_pr(pred, gt, 1) == unweighted_pr(pred, gt))) ++threshold_one;

    std::int64_t t2 = 0;
    const auto t1 = random_threshold_pair(rng, t2);
    const auto am = connections_added_missed(pred, gt, t1, t2);
    const auto recall = asymmetric_pr(pred, gt, t1, t2).recall;
    if (am.normalizer == 0) {
      if (recall || !am.missed.empty()) ++missed;
    } else {
      const double lhs = static_cast<double>(am.missed.size()) / static_cast<double>(am.normalizer);
      if (!recall || std::abs(lhs - (1.0 - *recall)) > 1e-12) ++missed;
    }

    const auto bp = random_graph(rng, 1), bg = random_graph(rng, 1);
    const auto w = weighted_pr(bp, bg), u = unweighted_pr(bp, bg);
    if (!oracle::same(w.precision, u.precision) || !oracle::same(w.recall, u.recall) || w.tp != u.tp ||
        w.fp != u.fp || w.fn != u.fn)
      ++binary;
  }
  return {threshold_one + missed + binary == 0,
          fmt::format("violations: thresholded(1) vs unweighted {}, missed vs recall {}, weighted vs unweighted on 0/1 {}",
                      threshold_one, missed, binary)};
}

Outcome weighted_example() {
  ConnectomeGraph gt, pred;
  gt.add(1, 2, 9);
  pred.add(1, 2, 7);
  const auto p = weighted_pr(pred, gt);
  const auto via_mode = evaluate_graphs(pred, gt, MetricMode::weighted());
  const bool ok = p.recall && *p.recall == 7.0 / 9.0 && p.precision && *p.precision == 1.0 && via_mode == p;
  return {ok, fmt::format("recall {} (7/9 = {}), precision {}", p.recall.value_or(-1), 7.0 / 9.0,
                          p.precision.value_or(-1))};
}

Outcome morphology_oracles() {
  const auto start = Clock::now();
  oracle::Rng rng(104);
  int dilation = 0, sphere = 0, bright = 0, iface = 0, suppress = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto dims = oracle::random_dims(rng, 8);
    const auto labels = oracle::random_labels(rng, dims, 4);
    const auto gray = oracle::random_gray(rng, dims);
    const auto radius = [&] { return oracle::uniform_real(rng, 0.0, 3.5); };
    const auto point = [&] {
      return Point3{oracle::uniform_int(rng, 0, dims.nx - 1), oracle::uniform_int(rng, 0, dims.ny - 1),
                    oracle::uniform_int(rng, 0, dims.nz - 1)};
    };

    const auto body = static_cast<BodyId>(oracle::uniform_int(rng, 1, 4));
    const double r = radius();
    if (!(dilate_segment(labels, body, r) == oracle::dilate(labels, body, r))) ++dilation;

    const auto c = point();
    const double rs = radius();
    const auto expect = oracle::sphere_bodies(labels, c, rs);
    if (bodies_in_sphere(labels, c, rs) != std::vector<BodyId>(expect.begin(), expect.end())) ++sphere;
    if (!(brightest_in_ball(gray, c, rs) == oracle::brightest(gray, c, rs))) ++bright;

    const auto a = static_cast<BodyId>(oracle::uniform_int(rng, 1, 3));
    const auto b = static_cast<BodyId>(oracle::uniform_int(rng, a + 1, 4));
    const double d = radius();
    if (!(interface_mask(labels, a, b, d) == oracle::interface(labels, a, b, d))) ++iface;

    // coarse levels so that ties are common
    ScalarField field(dims);
    for (std::size_t i = 0; i < field.size(); ++i) field[i] = oracle::uniform_int(rng, 0, 8) / 8.0;
    const double threshold = oracle::uniform_int(rng, 0, 8) / 8.0;
    const double rn = radius();
    if (!(nms(field, threshold, rn) == oracle::nms(field, threshold, rn))) ++suppress;
  }
  const double secs = seconds_since(start);
  const int total = dilation + sphere + bright + iface + suppress;
  return {total == 0 && secs < 30,
          fmt::format("mismatches: dilation {}, sphere bodies {}, brightest {}, interface {}, nms {}; {:.2f} s", dilation,
                      sphere, bright, iface, suppress, secs)};
}

Outcome gradient_check() {
  oracle::Rng rng(105);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> sizes{oracle::uniform_int(rng, 1, 8)};
    const int hidden = oracle::uniform_int(rng, 0, 2);
    for (int h = 0; h < hidden; ++h) sizes.push_back(oracle::uniform_int(rng, 1, 8));
    sizes.push_back(1);
    auto model = mlp_init(sizes, rng());
    for (auto& layer : model.layers) {
      for (auto& w : layer.weights) w = oracle::uniform_real(rng, -2, 2);
      for (auto& b : layer.biases) b = oracle::uniform_real(rng, -2, 2);
    }
    Sample s;
    for (int i = 0; i < sizes.front(); ++i) s.features.push_back(oracle::uniform_real(rng, -2, 2));
    s.label = oracle::uniform_int(rng, 0, 1);
    worst = std::max(worst, mlp_gradient_check(model, s));
  }
  return {worst < 1e-5, fmt::format("max relative error {:.3g}", worst)};
}

// ---------------------------------------------------------------------------
// CLI driven criteria
// ---------------------------------------------------------------------------

const char* kPlantedConfig = R"({
  "synth": {"size": 64, "bodies": 8, "tbars": 12, "min_partners": 1, "max_partners": 3, "noise_sigma": 10},
  "detector": {"positive_radius": 2, "smooth_sigma": 1, "score_threshold": 0.05, "nms_radius": 6, "shift_radius": 2},
  "scorer": {"patch_radius": 2},
  "tbar_train": {"epochs": 100},
  "partner": {"candidate_radius": 8},
  "psd_train": {"epochs": 300},
  "match": {"max_distance": 5}
})";

class Cli {
 public:
  Cli(fs::path dir, int threads) : dir_(std::move(dir)), threads_(threads) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write_file(dir_ / "cfg.json", kPlantedConfig);
  }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }
  const fs::path& dir() const { return dir_; }

  /// Runs one command; returns false (and remembers it) on a nonzero exit.
  bool operator()(const std::string& args) {
    const std::string cmd = fmt::format("{} --output-dir {} --threads {} --config {} {} >> {} 2>&1", SYNAPSE_CLI_PATH,
                                        dir_.string(), threads_, p("cfg.json"), args, p("log.txt"));
    const int status = std::system(cmd.c_str());
    if (WIFEXITED(status) && WEXITSTATUS(status) == 0) return true;
    if (failed_.empty()) failed_ = args;
    return false;
  }

  const std::string& failed() const { return failed_; }

 private:
  fs::path dir_;
  int threads_;
  std::string failed_;
};

PrCurve read_curve(const fs::path& path) { return pr_curve_from_csv(read_file(path), path.string()); }

bool reaches(const PrCurve& curve, double precision, double recall) {
  return std::any_of(curve.begin(), curve.end(), [&](const PrPoint& pt) {
    return pt.precision && pt.recall && *pt.precision >= precision && *pt.recall >= recall;
  });
}

/// Lowest threshold with the best min(precision, recall).
double operating_threshold(const PrCurve& curve) {
  const double best = break_even(curve);
  for (const auto& pt : curve)
    if (pt.precision && pt.recall && std::min(*pt.precision, *pt.recall) == best) return pt.threshold;
  return 0.5;
}

Outcome planted_run(const fs::path& work) {
  const auto start = Clock::now();
  Cli run(work / "planted", 1);
  const bool ok =
      run("--seed 1 synth --prefix train_") && run("--seed 2 synth --prefix test_") &&
      run("tbar-train --gray " + run.p("train_gray.json") + " --groundtruth " + run.p("train_groundtruth.json")) &&
      run("tbar-predict --gray " + run.p("train_gray.json") + " --model " + run.p("tbar_model.json") +
          " --out train_tbars.json") &&
      run("eval-pr --mode tbar --same-segment --tbars " + run.p("train_tbars.json") + " --groundtruth " +
          run.p("train_groundtruth.json") + " --labels " + run.p("train_labels.json") + " --out train_tbar_pr.csv") &&
      run("tbar-predict --gray " + run.p("test_gray.json") + " --model " + run.p("tbar_model.json")) &&
      run("eval-pr --mode tbar --same-segment --tbars " + run.p("tbars.json") + " --groundtruth " +
          run.p("test_groundtruth.json") + " --labels " + run.p("test_labels.json")) &&
      run("psd-train --gray " + run.p("train_gray.json") + " --labels " + run.p("train_labels.json") +
          " --groundtruth " + run.p("train_groundtruth.json"));
  if (!ok) return {false, "command failed: " + run.failed()};

  // T-bar operating threshold picked on the training scene only
  const double tbar_threshold = operating_threshold(read_curve(run.dir() / "train_tbar_pr.csv"));
  const bool ok2 =
      run("psd-predict --gray " + run.p("test_gray.json") + " --labels " + run.p("test_labels.json") + " --tbars " +
          run.p("tbars.json") + " --model " + run.p("psd_model.json") +
          fmt::format(" --tbar-threshold {}", tbar_threshold)) &&
      run("graph-build --ground-truth --synapses " + run.p("test_groundtruth.json") + " --labels " +
          run.p("test_labels.json") + " --out gt_graph.csv") &&
      run("eval-pr --mode unweighted --synapses " + run.p("synapses.json") + " --labels " + run.p("test_labels.json") +
          " --gt-graph " + run.p("gt_graph.csv"));
  if (!ok2) return {false, "command failed: " + run.failed()};
  const double secs = seconds_since(start);

  const auto tbar = read_curve(run.dir() / "tbar_pr.csv");
  const double graph = break_even(read_curve(run.dir() / "graph_pr.csv"));
  const bool tbar_ok = reaches(tbar, 0.9, 0.9);
  return {tbar_ok && graph >= 0.9 && secs < 300,
          fmt::format("T-bar P,R >= 0.9 reached: {} (break-even {:.3f}); graph break-even {:.3f}; "
                      "tbar threshold {}; {:.1f} s",
                      tbar_ok ? "yes" : "no", break_even(tbar), graph, tbar_threshold, secs)};
}

/// Best recall among points with precision >= p (0 when there are none).
double recall_at(const PrCurve& curve, double p) {
  double best = 0.0;
  for (const auto& pt : curve)
    if (pt.precision && pt.recall && *pt.precision >= p - 1e-12) best = std::max(best, *pt.recall);
  return best;
}

Outcome segment_ordering(const fs::path& work) {
  const auto model_path = work / "planted" / "tbar_model.json";
  if (!fs::exists(model_path)) return {false, "no trained T-bar model (planted run failed)"};
  const auto scorer = scorer_from_json(read_file(model_path), model_path.string());

  SynthSpec spec;
  spec.bodies = 10;
  spec.tbars = 20;
  spec.min_tbar_spacing = 12;
  spec.seed = 3;
  const auto scene = generate_scene(spec);
  const auto gt = scene.ground_truth.tbar_positions();

  DetectorConfig det;
  det.positive_radius = 2;
  det.score_threshold = 0.05;
  det.nms_radius = 6;
  det.shift_radius = 0;
  const auto detections = detect_tbars(scene.gray, scorer, det);

  // Displace 20% of the true detections into a neighbouring body.
  const MatchSpec same_segment{8.0, true, &scene.labels};
  const MatchSpec distance_only{8.0, false, nullptr};
  const auto matched = match_tbars(detections, gt, same_segment).matches;
  std::vector<TbarPrediction> hits;
  for (const auto& [pi, gi] : matched) hits.push_back(detections[pi]);
  const auto moved = displace_into_neighbors(hits, scene.labels, 0.2, 17);
  auto preds = detections;
  for (const auto i : moved.displaced) preds[matched[i].first] = moved.predictions[i];
  const auto wanted = static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(gt.size())));
  if (moved.displaced.size() < wanted)
    return {false, fmt::format("only {} of {} T-bars could be displaced", moved.displaced.size(), wanted)};

  std::vector<double> thresholds;
  for (int i = 0; i <= 20; ++i) thresholds.push_back(i / 20.0);
  const auto seg = tbar_pr_curve(preds, gt, same_segment, thresholds);
  const auto dist = tbar_pr_curve(preds, gt, distance_only, thresholds);
  const auto shifted = tbar_pr_curve(shift_predictions(preds, scene.gray, 5.0), gt, same_segment, thresholds);

  // Curve dominance: distance-only is at least as good at every threshold
  // and strictly better in both precision and recall at some threshold.
  int violations = 0, strict = 0;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const auto& s = seg[i];
    const auto& d = dist[i];
    if (s.precision && (!d.precision || *d.precision < *s.precision)) ++violations;
    if (s.recall && (!d.recall || *d.recall < *s.recall)) ++violations;
    if (s.precision && s.recall && d.precision && d.recall && *d.precision > *s.precision && *d.recall > *s.recall)
      ++strict;
  }

  // Shifting must raise the best recall reachable at each precision level.
  int not_improved = 0;
  std::string levels;
  for (const double p : {0.5, 0.6, 0.7, 0.8, 0.9}) {
    const double r_seg = recall_at(seg, p), r_shift = recall_at(shifted, p);
    if (!(r_shift > r_seg)) ++not_improved;
    levels += fmt::format("{}{}: {:.2f} -> {:.2f}", levels.empty() ? "" : ", ", p, r_seg, r_shift);
  }
  return {violations == 0 && strict > 0 && not_improved == 0,
          fmt::format("{} of {} T-bars displaced; distance-only vs segment: {} violations, strictly better at {} "
                      "thresholds; recall at precision with shift ({})",
                      moved.displaced.size(), gt.size(), violations, strict, levels)};
}

Outcome baseline_inferior(const fs::path& work) {
  const auto dir = work / "planted";
  if (!fs::exists(dir / "graph_pr.csv") || !fs::exists(dir / "gt_graph.csv"))
    return {false, "no pipeline curve (planted run failed)"};
  const auto gt = graph_from_csv(read_file(dir / "gt_graph.csv"), "gt_graph.csv");
  std::string counts;
  for (const double m : {0.5, 1.0, 2.0, 4.0, 16.0}) {
    const auto n = std::max<std::int64_t>(1, std::llround(m * static_cast<double>(gt.total_weight())));
    counts += (counts.empty() ? "" : ",") + std::to_string(n);
  }

  Cli run(work / "baseline", 1);
  if (!run("baseline --labels " + (dir / "test_labels.json").string() + " --gt-graph " +
           (dir / "gt_graph.csv").string() + " --mode unweighted --sample-counts " + counts))
    return {false, "command failed: " + run.failed()};

  const auto pipeline = read_curve(dir / "graph_pr.csv");
  const auto baseline = read_curve(run.dir() / "baseline_pr.csv");
  int undominated = 0;
  double best_p = 0, best_r = 0;
  for (const auto& b : baseline) {
    const double bp = b.precision.value_or(0), br = b.recall.value_or(0);
    best_p = std::max(best_p, bp);
    best_r = std::max(best_r, br);
    const bool dominated = std::any_of(pipeline.begin(), pipeline.end(), [&](const PrPoint& pt) {
      return pt.precision && pt.recall && *pt.precision > bp && *pt.recall > br;
    });
    if (!dominated) ++undominated;
  }
  return {undominated == 0 && !baseline.empty(),
          fmt::format("sample counts {}: {} undominated points; baseline max P {:.3f}, max R {:.3f}; "
                      "pipeline break-even {:.3f}",
                      counts, undominated, best_p, best_r, break_even(pipeline))};
}

/// Every subcommand, every eval mode.
bool full_chain(Cli& run) {
  const auto in = [&](const std::string& name) { return run.p(name); };
  return run("synth --prefix train_") && run("--seed 2 synth --prefix test_") &&
         run("tbar-train --gray " + in("train_gray.json") + " --groundtruth " + in("train_groundtruth.json")) &&
         run("tbar-predict --gray " + in("test_gray.json") + " --model " + in("tbar_model.json")) &&
         run("tbar-shift --gray " + in("test_gray.json") + " --tbars " + in("tbars.json")) &&
         run("psd-train --gray " + in("train_gray.json") + " --labels " + in("train_labels.json") +
             " --groundtruth " + in("train_groundtruth.json")) &&
         run("psd-predict --gray " + in("test_gray.json") + " --labels " + in("test_labels.json") + " --tbars " +
             in("tbars.json") + " --model " + in("psd_model.json") + " --tbar-threshold 0.65") &&
         run("graph-build --synapses " + in("synapses.json") + " --labels " + in("test_labels.json")) &&
         run("graph-build --ground-truth --synapses " + in("test_groundtruth.json") + " --labels " +
             in("test_labels.json") + " --out gt_graph.csv") &&
         run("eval-pr --mode tbar --same-segment --tbars " + in("tbars.json") + " --groundtruth " +
             in("test_groundtruth.json") + " --labels " + in("test_labels.json")) &&
         run("eval-pr --mode weighted --synapses " + in("synapses.json") + " --labels " + in("test_labels.json") +
             " --gt-graph " + in("gt_graph.csv") + " --out weighted.csv") &&
         run("eval-pr --mode unweighted --pred-graph " + in("graph.csv") + " --gt-graph " + in("gt_graph.csv") +
             " --out unweighted.csv") &&
         run("eval-pr --mode thresholded --t 2 --synapses " + in("synapses.json") + " --labels " +
             in("test_labels.json") + " --gt-graph " + in("gt_graph.csv") + " --out thresholded.csv") &&
         run("eval-pr --mode asymmetric --t1 2 --t2 1 --synapses " + in("synapses.json") + " --labels " +
             in("test_labels.json") + " --gt-graph " + in("gt_graph.csv") + " --out asymmetric.csv") &&
         run("eval-pr --mode added-missed --t1 2 --t2 1 --pred-graph " + in("graph.csv") + " --gt-graph " +
             in("gt_graph.csv")) &&
         run("eval-pr --mode scatter --pred-graph " + in("graph.csv") + " --gt-graph " + in("gt_graph.csv")) &&
         run("baseline --labels " + in("test_labels.json")) &&
         run("baseline --labels " + in("test_labels.json") + " --gt-graph " + in("gt_graph.csv") +
             " --mode unweighted --sample-counts 10,100,1000");
}

std::map<std::string, std::string> outputs_of(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name != "log.txt" && name != "cfg.json") out[name] = read_file(e.path());
  }
  return out;
}

Outcome determinism(const fs::path& work) {
  Cli first(work / "det_a", 1), second(work / "det_b", 1), wide(work / "det_c", 4);
  for (auto* run : {&first, &second, &wide})
    if (!full_chain(*run)) return {false, "command failed: " + run->failed()};
  const auto a = outputs_of(first.dir()), b = outputs_of(second.dir()), c = outputs_of(wide.dir());
  int differ = 0;
  std::string example;
  for (const auto& [name, bytes] : a) {
    const auto ib = b.find(name), ic = c.find(name);
    if (ib == b.end() || ib->second != bytes || ic == c.end() || ic->second != bytes) {
      ++differ;
      if (example.empty()) example = name;
    }
  }
  const bool same_sets = a.size() == b.size() && a.size() == c.size();
  return {differ == 0 && same_sets,
          fmt::format("{} files compared across 3 runs (threads 1, 1, 4); {} differ{}", a.size(), differ,
                      example.empty() ? "" : " e.g. " + example)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synapse acceptance suite"};
  std::string work_dir = (fs::temp_directory_path() / "synapse_acceptance").string();
  app.add_option("--work-dir", work_dir, "Scratch directory for CLI runs");
  CLI11_PARSE(app, argc, argv);
  const fs::path work(work_dir);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric formulas vs oracle, asymmetric upper bound", metric_oracles},
      {"consistency identities", consistency_identities},
      {"weighted PR example 9 vs 7", weighted_example},
      {"morphology and NMS vs brute force", morphology_oracles},
      {"MLP gradient check", gradient_check},
      {"end-to-end planted run", [&] { return planted_run(work); }},
      {"segment constraint and shift ordering", [&] { return segment_ordering(work); }},
      {"proximity baseline dominated", [&] { return baseline_inferior(work); }},
      {"determinism across runs and thread counts", [&] { return determinism(work); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    fmt::print("criterion {} {}: {} ({})\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
