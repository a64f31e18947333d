#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "synapse/formats.hpp"
#include "synapse/volume_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string err;
};

class Workspace {
 public:
  explicit Workspace(const std::string& name) : dir_(fs::temp_directory_path() / ("synapse_cli_" + name)) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }
  std::string p(const std::string& name) const { return path(name).string(); }

  Run run(const std::string& args) const {
    const auto err = dir_ / "stderr.txt";
    const std::string cmd = std::string(SYNAPSE_CLI_PATH) + " --output-dir " + dir_.string() + " " + args + " > " +
                            (dir_ / "stdout.txt").string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    std::ifstream in(err);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
  }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  bool has_partial_files() const {
    for (const auto& e : fs::directory_iterator(dir_))
      if (e.path().extension() == ".partial") return true;
    return false;
  }

 private:
  fs::path dir_;
};

const char* kSmallConfig = R"({
  "synth": {"size": 32, "bodies": 5, "tbars": 3, "min_tbar_spacing": 10, "margin": 4},
  "detector": {"positive_radius": 2, "nms_radius": 6, "shift_radius": 2},
  "scorer": {"patch_radius": 1},
  "tbar_train": {"epochs": 5, "hidden_sizes": [4]},
  "partner": {"candidate_radius": 6},
  "psd_train": {"epochs": 20},
  "match": {"max_distance": 5},
  "baseline": {"sample_count": 50}
})";

}  // namespace

TEST_CASE("full chain exits 0 and writes manifests") {
  Workspace w("chain");
  w.write("cfg.json", kSmallConfig);
  const std::string cfg = "--config " + w.p("cfg.json") + " ";

  REQUIRE(w.run(cfg + "synth --prefix train_").code == 0);
  REQUIRE(w.run(cfg + "--seed 2 synth --prefix test_").code == 0);
  CHECK(fs::exists(w.path("train_gray.raw")));
  CHECK(fs::exists(w.path("train_synth.manifest.json")));

  REQUIRE(w.run(cfg + "tbar-train --gray " + w.p("train_gray.json") + " --groundtruth " + w.p("train_groundtruth.json")).code == 0);
  REQUIRE(w.run(cfg + "tbar-predict --gray " + w.p("test_gray.json") + " --model " + w.p("tbar_model.json")).code == 0);
  REQUIRE(w.run(cfg + "tbar-shift --gray " + w.p("test_gray.json") + " --tbars " + w.p("tbars.json")).code == 0);
  REQUIRE(w.run(cfg + "psd-train --gray " + w.p("train_gray.json") + " --labels " + w.p("train_labels.json") +
                " --groundtruth " + w.p("train_groundtruth.json")).code == 0);
  REQUIRE(w.run(cfg + "psd-predict --gray " + w.p("test_gray.json") + " --labels " + w.p("test_labels.json") +
                " --tbars " + w.p("tbars.json") + " --model " + w.p("psd_model.json") + " --tbar-threshold 0.6").code == 0);
  REQUIRE(w.run(cfg + "graph-build --synapses " + w.p("synapses.json") + " --labels " + w.p("test_labels.json")).code == 0);
  REQUIRE(w.run(cfg + "graph-build --ground-truth --synapses " + w.p("test_groundtruth.json") + " --labels " +
                w.p("test_labels.json") + " --out gt_graph.csv").code == 0);
  REQUIRE(w.run(cfg + "eval-pr --mode tbar --same-segment --tbars " + w.p("tbars.json") + " --groundtruth " +
                w.p("test_groundtruth.json") + " --labels " + w.p("test_labels.json")).code == 0);
  REQUIRE(w.run(cfg + "eval-pr --mode unweighted --synapses " + w.p("synapses.json") + " --labels " +
                w.p("test_labels.json") + " --gt-graph " + w.p("gt_graph.csv") + " --out un.csv").code == 0);
  REQUIRE(w.run(cfg + "eval-pr --mode thresholded --t 1 --synapses " + w.p("synapses.json") + " --labels " +
                w.p("test_labels.json") + " --gt-graph " + w.p("gt_graph.csv") + " --out t1.csv").code == 0);
  REQUIRE(w.run(cfg + "eval-pr --mode added-missed --t1 2 --t2 1 --pred-graph " + w.p("graph.csv") + " --gt-graph " +
                w.p("gt_graph.csv")).code == 0);
  REQUIRE(w.run(cfg + "eval-pr --mode scatter --pred-graph " + w.p("graph.csv") + " --gt-graph " + w.p("gt_graph.csv")).code == 0);
  REQUIRE(w.run(cfg + "baseline --labels " + w.p("test_labels.json") + " --gt-graph " + w.p("gt_graph.csv") +
                " --sample-counts 5,50").code == 0);

  for (const auto* m : {"tbar_model.manifest.json", "tbars.manifest.json", "tbars_shifted.manifest.json",
                        "psd_model.manifest.json", "synapses.manifest.json", "graph.manifest.json", "gt_graph.manifest.json",
                        "tbar_pr.manifest.json", "un.manifest.json", "added_missed.manifest.json", "scatter.manifest.json",
                        "baseline.manifest.json"})
    CHECK_MESSAGE(fs::exists(w.path(m)), m);

  // thresholded at t = 1 is the unweighted curve
  const auto un = synapse::pr_curve_from_csv(synapse::read_file(w.path("un.csv")), "un.csv");
  const auto t1 = synapse::pr_curve_from_csv(synapse::read_file(w.path("t1.csv")), "t1.csv");
  CHECK(un == t1);

  const auto manifest = nlohmann::json::parse(synapse::read_file(w.path("synapses.manifest.json")));
  CHECK(manifest["command"] == "psd-predict");
  CHECK(manifest["version"] == "1.0.0");
  CHECK(manifest["inputs"].size() == 6);
  CHECK(manifest["config"]["tbar_filter"]["tbar_threshold"] == 0.6);

  // every emitted file parses back to an equal value
  const auto tbars = synapse::tbars_from_json(synapse::read_file(w.path("tbars.json")), "tbars.json");
  CHECK(synapse::tbars_to_json(tbars) == synapse::read_file(w.path("tbars.json")));
  const auto syn = synapse::synapses_from_json(synapse::read_file(w.path("synapses.json")), "s");
  CHECK(synapse::synapses_to_json(syn) == synapse::read_file(w.path("synapses.json")));
  const auto g = synapse::graph_from_csv(synapse::read_file(w.path("graph.csv")), "g");
  CHECK(synapse::graph_to_csv(g) == synapse::read_file(w.path("graph.csv")));
  CHECK(synapse::pr_curve_to_csv(un) == synapse::read_file(w.path("un.csv")));
  CHECK_FALSE(w.has_partial_files());
}

TEST_CASE("usage errors exit 2") {
  Workspace w("usage");
  CHECK(w.run("").code == 2);
  CHECK(w.run("frobnicate").code == 2);
  CHECK(w.run("synth --no-such-flag").code == 2);
  CHECK(w.run("eval-pr --mode sideways").code == 2);
  CHECK(w.run("eval-pr --mode thresholded --gt-graph " + w.p("x")).code == 2);
  w.write("g.csv", "pre,post,weight\n1,2,3\n");
  CHECK(w.run("eval-pr --mode asymmetric --t1 5 --t2 5 --pred-graph " + w.p("g.csv") + " --gt-graph " + w.p("g.csv")).code == 2);
  CHECK(w.run("synth --size 4").code == 2);
  CHECK(w.run("--threads 0 synth").code == 2);
}

TEST_CASE("data errors exit 3, name the file and leave nothing behind") {
  Workspace w("data");
  w.write("bad.csv", "pre,post,weight\n1,2,notanumber\n");
  w.write("g.csv", "pre,post,weight\n1,2,3\n");
  const auto r = w.run("eval-pr --mode unweighted --pred-graph " + w.p("bad.csv") + " --gt-graph " + w.p("g.csv"));
  CHECK(r.code == 3);
  CHECK(r.err.find("bad.csv") != std::string::npos);
  CHECK(r.err.find("weight") != std::string::npos);
  CHECK_FALSE(fs::exists(w.path("graph_pr.csv")));
  CHECK_FALSE(fs::exists(w.path("graph_pr.manifest.json")));

  w.write("cfg.json", R"({"detector": {"nms_radius": "wide"}})");
  const auto c = w.run("--config " + w.p("cfg.json") + " synth");
  CHECK(c.code == 3);
  CHECK(c.err.find("nms_radius") != std::string::npos);
  CHECK_FALSE(fs::exists(w.path("gray.json")));

  w.write("gray.json", R"({"dims":[2,2,2],"dtype":"u8","order":"x-fastest"})");
  w.write("gray.raw", "abc");
  w.write("model.json", "{}");
  const auto v = w.run("tbar-predict --gray " + w.p("gray.json") + " --model " + w.p("model.json"));
  CHECK(v.code == 3);
  CHECK(v.err.find("gray.json") != std::string::npos);
  CHECK_FALSE(fs::exists(w.path("tbars.json")));
  CHECK_FALSE(w.has_partial_files());
}
