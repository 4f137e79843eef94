// Copyright 2026 The partgraph Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "partgraph/adjacency.h"
#include "partgraph/condnet.h"
#include "partgraph/errors.h"
#include "partgraph/io.h"
#include "partgraph/losses.h"
#include "partgraph/metrics.h"
#include "partgraph/morphology.h"
#include "partgraph/parallel.h"
#include "partgraph/synth.h"

namespace partgraph::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// 9 significant digits, as a JSON number.
json num9(double v) { return json(std::strtod(fmt9(v).c_str(), nullptr)); }

// Writes `text` to `path`, or to `out` when path is empty.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw FormatError("failed writing " + path);
}

std::string magic_of(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  char m[4] = {};
  f.read(m, 4);
  return std::string(m, static_cast<std::size_t>(f.gcount()));
}

// A label map from a SEGMAP/PGM file, or the argmax of a PROB file.
LabelMap load_labels(const fs::path& path) {
  if (magic_of(path) == "PROB") return argmax_map(load_prob_map(path));
  return load_map(path);
}

// ---------------------------------------------------------------------------
// Options shared through the JSON config. A config value applies only when
// the matching flag was not given on the command line.

struct Binding {
  std::string key;
  CLI::Option* option;
  std::function<void(const json&)> apply;
};

class Command {
 public:
  Command(CLI::App& app, const std::string& name, const std::string& help)
      : sub_(app.add_subcommand(name, help)) {}

  CLI::App* app() const { return sub_; }

  template <typename T>
  CLI::Option* option(const std::string& flags, const std::string& key, T& var,
                      const std::string& help) {
    CLI::Option* o = sub_->add_option(flags, var, help)->capture_default_str();
    if (!key.empty()) {
      bindings_.push_back({key, o, [&var](const json& j) { var = j.get<T>(); }});
    }
    return o;
  }

  CLI::Option* flag(const std::string& flags, const std::string& key,
                    bool& var, bool config_value_sets, const std::string& help) {
    CLI::Option* o = sub_->add_flag(flags, var, help);
    if (!key.empty()) {
      bindings_.push_back({key, o, [&var, config_value_sets](const json& j) {
                             var = j.get<bool>() == config_value_sets;
                           }});
    }
    return o;
  }

  void apply_config(const json& cfg) const {
    for (const Binding& b : bindings_) {
      if (b.option->count() > 0 || !cfg.contains(b.key)) continue;
      try {
        b.apply(cfg.at(b.key));
      } catch (const json::exception&) {
        throw UsageError("config key \"" + b.key + "\" has the wrong type");
      }
    }
  }

  void collect_keys(std::set<std::string>& keys) const {
    for (const Binding& b : bindings_) keys.insert(b.key);
  }

 private:
  CLI::App* sub_;
  std::vector<Binding> bindings_;
};

struct AdjacencyFlags {
  int threshold = 4;
  std::string shape = "square";
  std::string method = "dilate";
  std::string weighting = "weighted";
  bool exclude_background = false;
  std::string dilation = "hard";
  double beta = 20.0;

  void add(Command& c, bool with_method) {
    c.option("--T", "T", threshold, "distance threshold in pixels");
    c.option("--shape", "shape", shape, "structuring element: square|diamond");
    if (with_method) {
      c.option("--method", "method", method,
               "adjacency: dilate|exact (dilate_intersect|exact_distance)");
    }
    c.option("--weighting", "weighting", weighting, "weighted|unweighted");
    c.flag("--exclude-background", "include_background", exclude_background,
           false, "zero the background row and column");
    c.option("--dilation", "dilation", dilation,
             "soft dilation on probabilities: hard|smooth");
    c.option("--beta", "beta", beta, "smooth-max sharpness");
  }

  AdjacencyConfig build() const {
    AdjacencyConfig cfg;
    cfg.threshold = threshold;
    cfg.shape = parse_element_shape(shape);
    cfg.method = parse_adjacency_method(method);
    cfg.weighting = parse_edge_weighting(weighting);
    cfg.include_background = !exclude_background;
    cfg.soft = {parse_dilation_mode(dilation), beta};
    cfg.validate();
    return cfg;
  }
};

// Converts configuration-level DomainErrors into usage errors.
template <typename Fn>
auto configured(Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

// ---------------------------------------------------------------------------
// dilate

struct DilateArgs {
  std::string in, out;
  int radius = 2;
  std::string shape = "square";
};

void run_dilate(const DilateArgs& a, std::ostream& out) {
  const StructuringElement elem = configured([&] {
    StructuringElement e{parse_element_shape(a.shape), a.radius};
    if (e.radius < 0) throw DomainError("--radius must be >= 0");
    return e;
  });
  const LabelMap map = load_labels(a.in);
  BinaryMask mask(map.width(), map.height());
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) mask.set(x, y, map.at(x, y) != 0);
  }
  const BinaryMask d = dilate(mask, elem);
  std::vector<std::uint16_t> bits(d.pixel_count());
  for (std::size_t p = 0; p < bits.size(); ++p) bits[p] = d[p] ? 1 : 0;
  save_map(LabelMap(map.width(), map.height(), 2, std::move(bits)), a.out);
  out << "dilated " << mask.count() << " -> " << d.count() << " of "
      << d.pixel_count() << " pixels\n";
}

// ---------------------------------------------------------------------------
// graph

struct GraphArgs {
  std::string in, out;
  int parts = 0;
  std::string format = "csv";
  bool raw = false;
  AdjacencyFlags adj;
};

std::string matrix_csv(const AdjacencyMatrix& m) {
  std::string s;
  for (int i = 0; i < m.size(); ++i) {
    for (int j = 0; j < m.size(); ++j) {
      if (j) s += ',';
      s += fmt9(m(i, j));
    }
    s += '\n';
  }
  return s;
}

json matrix_json(const AdjacencyMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.size(); ++j) row.push_back(num9(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

void run_graph(const GraphArgs& a, std::ostream& out) {
  const AdjacencyConfig cfg = configured([&] {
    if (a.format != "csv" && a.format != "json") {
      throw DomainError("--format must be csv or json");
    }
    if (a.parts < 0) throw DomainError("--parts must be >= 0");
    return a.adj.build();
  });
  AdjacencyMatrix raw(1, {0.0}, MatrixKind::kRawCounts);
  AdjacencyMatrix normalized = raw;
  if (magic_of(a.in) == "PROB") {
    const ProbMap probs = load_prob_map(a.in);
    if (a.parts && a.parts != probs.num_classes()) {
      throw DomainError("--parts " + std::to_string(a.parts) +
                        " but the probability map has " +
                        std::to_string(probs.num_classes()) + " channels");
    }
    SoftAdjacency soft = soft_adjacency(probs, cfg);
    raw = std::move(soft.raw);
    normalized = std::move(soft.normalized);
  } else {
    const LabelMap map = load_map(a.in);
    raw = adjacency_from_labels(map, a.parts ? a.parts : map.num_classes(), cfg);
    normalized = normalize_rows(raw);
  }
  const AdjacencyMatrix& m = a.raw ? raw : normalized;
  if (a.format == "csv") {
    emit(matrix_csv(m), a.out, out);
  } else {
    const json doc = {{"num_parts", m.size()},
                      {"kind", a.raw ? "raw_counts" : "normalized"},
                      {"T", cfg.threshold},
                      {"method", to_string(cfg.method)},
                      {"weighting", to_string(cfg.weighting)},
                      {"matrix", matrix_json(m)}};
    emit(doc.dump() + "\n", a.out, out);
  }
}

// ---------------------------------------------------------------------------
// loss

struct LossArgs {
  std::string pred, gt, gt_objects, mapping, out;
  double lambda1 = 1e-3;
  double lambda2 = 1e-1;
  bool as_json = false;
  AdjacencyFlags adj;
};

json report_json(const LossReport& r) {
  return {{"ce", num9(r.ce)},
          {"rec", num9(r.rec)},
          {"gm", num9(r.gm)},
          {"total", num9(r.total)}};
}

void run_loss(const LossArgs& a, std::ostream& out) {
  const auto [cfg, weights] = configured([&] {
    if (a.mapping.empty()) throw DomainError("--mapping (or config \"labelset\") is required");
    const LossWeights w{a.lambda1, a.lambda2};
    w.validate();
    return std::pair{a.adj.build(), w};
  });
  const ProbMap pred = load_prob_map(a.pred);
  const LabelMap parts = load_labels(a.gt);
  const LabelSet labels = load_label_set(a.mapping);
  const LabelMap objects = a.gt_objects.empty()
                               ? project_labels(parts, labels.mapping)
                               : load_labels(a.gt_objects);
  const TotalLoss t =
      total_loss(pred, parts, objects, labels.mapping, cfg, weights);
  const LossReport& r = t.report;
  if (!std::isfinite(r.total)) {
    throw NumericError("loss is not finite (ce " + fmt9(r.ce) + ", rec " +
                       fmt9(r.rec) + ", gm " + fmt9(r.gm) + ")");
  }
  if (a.as_json) {
    emit(report_json(r).dump(2) + "\n", a.out, out);
  } else {
    emit("ce " + fmt9(r.ce) + "\nrec " + fmt9(r.rec) + "\ngm " + fmt9(r.gm) +
             "\ntotal " + fmt9(r.total) + "\n",
         a.out, out);
  }
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
  std::string pred, gt, pred_dir, gt_dir, labelset, out;
  bool csv = false;
  bool as_json = false;
};

void run_metrics(const MetricsArgs& a, std::ostream& out) {
  configured([&] {
    if (a.labelset.empty()) throw DomainError("--labelset (or config \"labelset\") is required");
    if (a.csv && a.as_json) throw DomainError("choose one of --json and --csv");
    const bool files = !a.pred.empty() || !a.gt.empty();
    const bool dirs = !a.pred_dir.empty() || !a.gt_dir.empty();
    if (files == dirs) {
      throw DomainError("give either --pred/--gt or --pred-dir/--gt-dir");
    }
    if (files && (a.pred.empty() || a.gt.empty())) {
      throw DomainError("--pred and --gt go together");
    }
    if (dirs && (a.pred_dir.empty() || a.gt_dir.empty())) {
      throw DomainError("--pred-dir and --gt-dir go together");
    }
    return 0;
  });
  const LabelSet labels = load_label_set(a.labelset);
  const int n = labels.num_parts();

  std::vector<std::pair<fs::path, fs::path>> pairs;
  if (!a.pred.empty()) {
    pairs.emplace_back(a.pred, a.gt);
  } else {
    if (!fs::is_directory(a.gt_dir)) throw FormatError(a.gt_dir + " is not a directory");
    std::vector<fs::path> names;
    for (const auto& e : fs::directory_iterator(a.gt_dir)) {
      if (e.is_regular_file()) names.push_back(e.path().filename());
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) throw FormatError(a.gt_dir + " contains no files");
    for (const auto& name : names) {
      const fs::path p = fs::path(a.pred_dir) / name;
      if (!fs::exists(p)) throw FormatError("no prediction for " + name.string() +
                                            " in " + a.pred_dir);
      pairs.emplace_back(p, fs::path(a.gt_dir) / name);
    }
  }

  ConfusionMatrix cm(n);
  for (const auto& [pred_path, gt_path] : pairs) {
    const LabelMap pred = load_labels(pred_path);
    const LabelMap gt = load_labels(gt_path);
    try {
      cm += confusion(pred, gt, n);
    } catch (const DomainError& e) {
      throw DomainError(pred_path.string() + " vs " + gt_path.string() + ": " +
                        e.what());
    }
  }
  const MetricReport r = report(cm, labels);
  emit(a.csv ? report_to_csv(r, labels) : report_to_json(r, labels), a.out,
       out);
}

// ---------------------------------------------------------------------------
// train-toy

struct TrainArgs {
  int steps = 200;
  double lr = 5e-3;
  double lambda1 = 1e-3;
  double lambda2 = 1e-1;
  std::uint64_t seed = 7;
  int batch_size = 0;
  int scenes = 20;
  int heldout = 10;
  std::string conditioning = "multi";
  std::string scene_spec, trace, params_out;
  AdjacencyFlags adj;
};

std::string trace_csv(const std::vector<LossReport>& trace) {
  std::string s = "step,ce,rec,gm,total\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const LossReport& r = trace[i];
    s += std::to_string(i) + ',' + fmt9(r.ce) + ',' + fmt9(r.rec) + ',' +
         fmt9(r.gm) + ',' + fmt9(r.total) + '\n';
  }
  return s;
}

void run_train(const TrainArgs& a, const json& config, CLI::Option* cond_opt,
               std::ostream& out) {
  struct Setup {
    SceneSpec spec;
    ToyNetConfig net;
    TrainConfig train;
    LossWeights weights;
    AdjacencyConfig adj;
  };
  const Setup s = configured([&] {
    Setup s;
    if (!a.scene_spec.empty()) {
      s.spec = parse_scene_spec(read_text_file(a.scene_spec));
    } else if (config.contains("scene")) {
      s.spec = parse_scene_spec(config.at("scene").dump());
    }
    s.spec.validate();
    if (config.contains("net")) {
      const json& n = config.at("net");
      s.net = parse_toy_net_config(n.dump());
      if ((n.contains("num_parts") && s.net.num_parts != s.spec.num_parts()) ||
          (n.contains("num_objects") &&
           s.net.num_objects != s.spec.num_objects + 1)) {
        throw DomainError("network part/object counts disagree with the scenes");
      }
      if (n.contains("conditioning") && cond_opt->count() == 0) {
        s.net.conditioning = parse_conditioning(n.at("conditioning").get<std::string>());
      } else {
        s.net.conditioning = parse_conditioning(a.conditioning);
      }
    } else {
      s.net.conditioning = parse_conditioning(a.conditioning);
    }
    s.net.num_parts = s.spec.num_parts();
    s.net.num_objects = s.spec.num_objects + 1;
    s.net.validate();
    if (a.scenes < 1) throw DomainError("--scenes must be >= 1");
    if (a.heldout < 0) throw DomainError("--heldout must be >= 0");
    if (s.spec.width % (1 << s.net.stages) || s.spec.height % (1 << s.net.stages)) {
      throw DomainError("scene size must be divisible by 2^stages");
    }
    s.train.steps = a.steps;
    s.train.lr = a.lr;
    s.train.seed = a.seed;
    s.train.batch_size = a.batch_size;
    if (a.steps < 1) throw DomainError("--steps must be >= 1");
    if (!(a.lr >= 0.0)) throw DomainError("--lr must be >= 0");
    if (a.batch_size < 0) throw DomainError("--batch-size must be >= 0");
    s.weights = {a.lambda1, a.lambda2};
    s.weights.validate();
    s.adj = a.adj.build();
    return s;
  });

  const std::vector<Scene> all = generate_batch(s.spec, a.scenes + a.heldout);
  const std::vector<Scene> train_set(all.begin(), all.begin() + a.scenes);
  const std::vector<Scene> heldout_set(all.begin() + a.scenes, all.end());

  const TrainResult r = train_toy(train_set, s.net, s.weights, s.adj, s.train);
  if (!a.trace.empty()) emit(trace_csv(r.trace), a.trace, out);
  if (!a.params_out.empty()) save_params(r.params, a.params_out);

  json doc = {{"steps", s.train.steps},
              {"scenes", a.scenes},
              {"conditioning", to_string(s.net.conditioning)},
              {"weighting", to_string(s.adj.weighting)},
              {"lambda1", s.weights.lambda1},
              {"lambda2", s.weights.lambda2},
              {"initial", report_json(r.trace.front())},
              {"final", report_json(r.trace.back())}};
  if (!heldout_set.empty()) {
    doc["heldout"] = report_json(
        evaluate_toy(heldout_set, s.net, r.params, s.weights, s.adj));
    doc["heldout_scenes"] = a.heldout;
  }
  out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string spec, out_dir;
  int count = 20;
  std::uint64_t seed = 0;
};

void run_synth(const SynthArgs& a, const json& config, CLI::Option* seed_opt,
               std::ostream& out) {
  const SceneSpec spec = configured([&] {
    SceneSpec s;
    if (!a.spec.empty()) {
      s = parse_scene_spec(read_text_file(a.spec));
    } else if (config.contains("scene")) {
      s = parse_scene_spec(config.at("scene").dump());
    }
    if (seed_opt->count() > 0 || config.contains("seed")) s.seed = a.seed;
    if (a.count < 1) throw DomainError("--count must be >= 1");
    s.validate();
    return s;
  });
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  const std::vector<Scene> scenes = generate_batch(spec, a.count);
  save_label_set(LabelSet(scene_mapping(spec)), dir / "labelset.json");
  emit(scene_spec_to_json(spec), (dir / "spec.json").string(), out);
  for (std::size_t k = 0; k < scenes.size(); ++k) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "scene_%04zu", k);
    const Scene& s = scenes[k];
    save_map(s.parts, dir / (std::string(stem) + ".parts.segmap"));
    save_map(s.objects, dir / (std::string(stem) + ".objects.segmap"));
    save_prob_map(one_hot(s.objects, s.mapping.num_objects()),
                  dir / (std::string(stem) + ".objects.probmap"));
    save_ppm(s.rgb, dir / (std::string(stem) + ".ppm"));
  }
  out << "wrote " << scenes.size() << " scenes to " << dir.string() << "\n";
}

std::string version_text() {
  return std::string("partgraph ") + PARTGRAPH_VERSION + "\n" +
         "segmap format " + std::to_string(kSegmapVersion) + "\n" +
         "probmap format " + std::to_string(kProbmapVersion) + "\n" +
         "params format " + std::to_string(kParamsVersion) + "\n";
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Part-adjacency graphs, graph-matching losses and a toy "
               "object-conditioned part segmentation network.",
               "partgraph"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  bool version = false;
  int threads = 1;
  std::string config_path;
  app.add_flag("--version", version, "print version and format versions");
  CLI::Option* threads_opt =
      app.add_option("--threads", threads, "worker thread cap")->capture_default_str();
  app.add_option("--config", config_path,
                 "JSON config; command-line flags take precedence");

  DilateArgs dilate_args;
  Command dilate_cmd(app, "dilate", "dilate the nonzero pixels of a label map");
  dilate_cmd.option("--in", "", dilate_args.in, "input map")->required();
  dilate_cmd.option("--out", "", dilate_args.out, "output map (.segmap or .pgm)")->required();
  dilate_cmd.option("--radius", "radius", dilate_args.radius, "element radius");
  dilate_cmd.option("--shape", "shape", dilate_args.shape, "square|diamond");

  GraphArgs graph_args;
  Command graph_cmd(app, "graph", "part adjacency matrix of a label or probability map");
  graph_cmd.option("--in", "", graph_args.in, "label map or probability map")->required();
  graph_cmd.option("--parts", "num_parts", graph_args.parts,
                   "number of parts (0: from the map)");
  graph_cmd.option("--format", "format", graph_args.format, "csv|json");
  graph_cmd.flag("--raw", "", graph_args.raw, true, "print raw counts, not normalized rows");
  graph_cmd.option("--out", "", graph_args.out, "output file (default stdout)");
  graph_args.adj.add(graph_cmd, /*with_method=*/true);

  LossArgs loss_args;
  Command loss_cmd(app, "loss", "loss terms of a predicted part probability map");
  loss_cmd.option("--pred", "", loss_args.pred, "predicted probability map")->required();
  loss_cmd.option("--gt", "", loss_args.gt, "ground-truth part map")->required();
  loss_cmd.option("--gt-objects", "", loss_args.gt_objects,
                  "ground-truth object map (default: projected parts)");
  loss_cmd.option("--mapping,--labelset", "labelset", loss_args.mapping,
                  "label set JSON with the parts-to-objects mapping");
  loss_cmd.option("--lambda1", "lambda1", loss_args.lambda1, "reconstruction weight");
  loss_cmd.option("--lambda2", "lambda2", loss_args.lambda2, "graph-matching weight");
  loss_cmd.flag("--json", "", loss_args.as_json, true, "JSON output");
  loss_cmd.option("--out", "", loss_args.out, "output file (default stdout)");
  loss_args.adj.add(loss_cmd, /*with_method=*/false);

  MetricsArgs metrics_args;
  Command metrics_cmd(app, "metrics", "IoU/PA metrics of predictions against ground truth");
  metrics_cmd.option("--pred", "", metrics_args.pred, "single prediction map");
  metrics_cmd.option("--gt", "", metrics_args.gt, "single ground-truth map");
  metrics_cmd.option("--pred-dir", "", metrics_args.pred_dir, "prediction directory");
  metrics_cmd.option("--gt-dir", "", metrics_args.gt_dir,
                     "ground-truth directory (files matched by name)");
  metrics_cmd.option("--labelset", "labelset", metrics_args.labelset, "label set JSON");
  metrics_cmd.flag("--json", "", metrics_args.as_json, true, "JSON output (default)");
  metrics_cmd.flag("--csv", "", metrics_args.csv, true, "CSV output");
  metrics_cmd.option("--out", "", metrics_args.out, "output file (default stdout)");

  TrainArgs train_args;
  Command train_cmd(app, "train-toy", "train the toy network on synthetic scenes");
  train_cmd.option("--steps", "steps", train_args.steps, "SGD steps");
  train_cmd.option("--lr", "lr", train_args.lr, "base learning rate");
  train_cmd.option("--lambda1", "lambda1", train_args.lambda1, "reconstruction weight");
  train_cmd.option("--lambda2", "lambda2", train_args.lambda2, "graph-matching weight");
  train_cmd.option("--seed", "seed", train_args.seed, "parameter seed");
  train_cmd.option("--batch-size", "batch_size", train_args.batch_size,
                   "scenes per step (0: all)");
  train_cmd.option("--scenes", "scenes", train_args.scenes, "training scenes");
  train_cmd.option("--heldout", "heldout", train_args.heldout, "held-out scenes");
  CLI::Option* cond_opt = train_cmd.option("--conditioning", "conditioning",
                                           train_args.conditioning, "multi|single|off");
  train_cmd.option("--scene-spec", "", train_args.scene_spec, "scene spec JSON");
  train_cmd.option("--trace", "", train_args.trace, "per-step loss trace CSV");
  train_cmd.option("--params-out", "", train_args.params_out, "trained parameters (TPRM)");
  train_args.adj.add(train_cmd, /*with_method=*/false);

  SynthArgs synth_args;
  Command synth_cmd(app, "synth", "generate synthetic part/object scenes");
  synth_cmd.option("--spec", "", synth_args.spec, "scene spec JSON");
  synth_cmd.option("--out-dir", "", synth_args.out_dir, "output directory")->required();
  synth_cmd.option("--count", "count", synth_args.count, "number of scenes");
  CLI::Option* seed_opt =
      synth_cmd.option("--seed", "seed", synth_args.seed, "scene seed (overrides the spec)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "partgraph: " << e.what() << "\n" << "Run 'partgraph --help' for usage.\n";
    return kExitUsage;
  }

  if (version) {
    out << version_text();
    return kExitOk;
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return kExitUsage;
  }

  const std::vector<const Command*> commands = {
      &dilate_cmd, &graph_cmd, &loss_cmd, &metrics_cmd, &train_cmd, &synth_cmd};
  try {
    json config = json::object();
    if (!config_path.empty()) {
      try {
        config = json::parse(read_text_file(config_path));
      } catch (const json::exception& e) {
        throw FormatError("malformed config " + config_path + ": " + e.what());
      }
      if (!config.is_object()) throw FormatError("config must be a JSON object");
      std::set<std::string> known = {"threads", "net", "scene"};
      for (const Command* c : commands) c->collect_keys(known);
      for (const auto& [key, value] : config.items()) {
        if (!known.contains(key)) throw UsageError("unknown config key \"" + key + "\"");
      }
      if (threads_opt->count() == 0 && config.contains("threads")) {
        threads = config.at("threads").get<int>();
      }
    }
    if (threads < 1) throw UsageError("--threads must be >= 1");
    set_thread_limit(threads);

    const CLI::App* sub = app.get_subcommands().front();
    for (const Command* c : commands) {
      if (c->app() == sub) c->apply_config(config);
    }
    if (sub == dilate_cmd.app()) run_dilate(dilate_args, out);
    if (sub == graph_cmd.app()) run_graph(graph_args, out);
    if (sub == loss_cmd.app()) run_loss(loss_args, out);
    if (sub == metrics_cmd.app()) run_metrics(metrics_args, out);
    if (sub == train_cmd.app()) run_train(train_args, config, cond_opt, out);
    if (sub == synth_cmd.app()) run_synth(synth_args, config, seed_opt, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "partgraph: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "partgraph: numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const json::exception& e) {
    err << "partgraph: config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "partgraph: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace partgraph::cli
