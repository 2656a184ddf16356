// seco: connectivity-level pseudo-label refinement from the command line.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "seco/augment.hpp"
#include "seco/backend.hpp"
#include "seco/error.hpp"
#include "seco/features.hpp"
#include "seco/io.hpp"
#include "seco/json_io.hpp"
#include "seco/metrics.hpp"
#include "seco/pipeline.hpp"
#include "seco/psa.hpp"
#include "seco/scc.hpp"
#include "seco/synth.hpp"

namespace fs = std::filesystem;
using namespace seco;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

// Tunables shared by psa/scc/refine. Precedence: flags > --config file > defaults.
struct Tunables {
  std::string config_path;
  double area_factor = 1.5;
  int adjacency = 8;
  int min_seed_area = 16;
  double overlap_thresh = 0.5;
  int min_area = 16;
  double min_labeled_frac = 0.01;
  double tau_ns = 0.60;
  double tau_cr = 0.95;
  int warmup_iters = 5000;
  int batch_size = 64;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  int em_max_iters = 100;
  double em_tol = 1e-6;
  std::string gmm_scope = "shard";
};

struct TunableFlags {
  std::map<std::string, std::vector<CLI::Option*>> opts;
};

void add_psa_flags(CLI::App* cmd, Tunables& t, TunableFlags& f) {
  f.opts["area_factor"].push_back(cmd->add_option("--area-factor", t.area_factor, "Box prompt area enlargement"));
  f.opts["adjacency"].push_back(cmd->add_option("--adjacency", t.adjacency, "Component adjacency (4 or 8)")->check(CLI::IsMember({4, 8})));
  f.opts["min_seed_area"].push_back(cmd->add_option("--min-seed-area", t.min_seed_area, "Smallest things seed that is prompted"));
  f.opts["overlap_thresh"].push_back(cmd->add_option("--overlap-thresh", t.overlap_thresh, "Merge overlap threshold"));
  f.opts["min_area"].push_back(cmd->add_option("--min-area", t.min_area, "Smallest connectivity kept after merging"));
  f.opts["min_labeled_frac"].push_back(cmd->add_option("--min-labeled-frac", t.min_labeled_frac, "Stuff alignment vote floor"));
}

void add_scc_flags(CLI::App* cmd, Tunables& t, TunableFlags& f) {
  f.opts["tau_ns"].push_back(cmd->add_option("--tau-ns", t.tau_ns, "Noise threshold on eta"));
  f.opts["tau_cr"].push_back(cmd->add_option("--tau-cr", t.tau_cr, "Correction threshold on classifier confidence"));
  f.opts["warmup_iters"].push_back(cmd->add_option("--warmup-iters", t.warmup_iters, "SGD iterations"));
  f.opts["batch_size"].push_back(cmd->add_option("--batch-size", t.batch_size, "SGD minibatch size"));
  f.opts["learning_rate"].push_back(cmd->add_option("--learning-rate", t.learning_rate, "SGD learning rate"));
  f.opts["momentum"].push_back(cmd->add_option("--momentum", t.momentum, "SGD momentum"));
  f.opts["seed"].push_back(cmd->add_option("--seed", t.seed, "Random seed"));
  f.opts["em_max_iters"].push_back(cmd->add_option("--em-max-iters", t.em_max_iters, "EM iteration cap"));
  f.opts["em_tol"].push_back(cmd->add_option("--em-tol", t.em_tol, "EM log-likelihood tolerance"));
  f.opts["gmm_scope"].push_back(cmd->add_option("--gmm-scope", t.gmm_scope, "Fit the mixture per shard or per image")
                            ->check(CLI::IsMember({"shard", "image"})));
}

template <typename T>
void take(const Json& j, const char* key, T& out, const TunableFlags& f) {
  if (!j.contains(key)) return;
  if (auto it = f.opts.find(key); it != f.opts.end())
    for (const CLI::Option* opt : it->second)
      if (opt->count() > 0) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config key '") + key + "': " + e.what());
  }
}

void apply_config(Tunables& t, const TunableFlags& f) {
  if (t.config_path.empty()) return;
  const Json j = parse_json_file(t.config_path);
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  take(j, "area_factor", t.area_factor, f);
  take(j, "adjacency", t.adjacency, f);
  take(j, "min_seed_area", t.min_seed_area, f);
  take(j, "overlap_thresh", t.overlap_thresh, f);
  take(j, "min_area", t.min_area, f);
  take(j, "min_labeled_frac", t.min_labeled_frac, f);
  take(j, "tau_ns", t.tau_ns, f);
  take(j, "tau_cr", t.tau_cr, f);
  take(j, "warmup_iters", t.warmup_iters, f);
  take(j, "batch_size", t.batch_size, f);
  take(j, "learning_rate", t.learning_rate, f);
  take(j, "momentum", t.momentum, f);
  take(j, "seed", t.seed, f);
  take(j, "em_max_iters", t.em_max_iters, f);
  take(j, "em_tol", t.em_tol, f);
  take(j, "gmm_scope", t.gmm_scope, f);
}

PsaConfig psa_config(const Tunables& t) {
  PsaConfig c;
  c.things.area_factor = t.area_factor;
  c.things.adjacency = t.adjacency == 4 ? Adjacency::Four : Adjacency::Eight;
  c.things.min_seed_area = t.min_seed_area;
  c.merge.overlap_thresh = t.overlap_thresh;
  c.merge.min_area = t.min_area;
  c.stuff.min_labeled_frac = t.min_labeled_frac;
  if (c.things.area_factor < 1.0) throw Error(ErrorCode::ConfigError, "area_factor must be >= 1");
  return c;
}

SccConfig scc_config(const Tunables& t) {
  SccConfig c;
  c.tau_ns = t.tau_ns;
  c.tau_cr = t.tau_cr;
  c.warmup_iters = t.warmup_iters;
  c.batch_size = t.batch_size;
  c.learning_rate = t.learning_rate;
  c.momentum = t.momentum;
  c.seed = t.seed;
  c.em_max_iters = t.em_max_iters;
  c.em_tol = t.em_tol;
  c.validate();
  return c;
}

GmmScope gmm_scope(const Tunables& t) { return t.gmm_scope == "image" ? GmmScope::Image : GmmScope::Shard; }

std::string default_backend() {
  const char* env = std::getenv("SECO_BACKEND");
  return env ? env : "";
}

std::unique_ptr<SegmenterBackend> open_backend(const std::string& spec) {
  if (spec.empty()) throw CLI::ValidationError("--backend", "required (or set SECO_BACKEND)");
  try {
    return make_backend(spec);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) throw CLI::ValidationError("--backend", e.what());
    throw;
  }
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int run_psa_cmd(const fs::path& image, const fs::path& pseudo_path, const fs::path& taxonomy,
                const std::string& backend_spec, const Tunables& t, const fs::path& out) {
  const Taxonomy tax = load_taxonomy(taxonomy);
  const auto backend = open_backend(backend_spec);
  const ImageRef ref = ImageRef::from_file(image);
  const LabelMap pseudo = load_label_map(pseudo_path, &tax);
  const MergeResult merged = run_psa(pseudo, tax, *backend, ref, psa_config(t));
  write_psa_outputs(out, ref.id, merged);
  std::cout << "psa: " << merged.connectivities.size() << " connectivities -> " << out.string() << '\n';
  return 0;
}

int run_scc_cmd(const fs::path& conn_path, const std::string& features, const fs::path& taxonomy,
                const std::optional<fs::path>& image, const Tunables& t, const fs::path& out) {
  const Taxonomy tax = load_taxonomy(taxonomy);
  const SccConfig cfg = scc_config(t);
  const ConnectivitySet set = load_connectivity_set(conn_path);
  std::optional<fs::path> image_path = image;
  if (!image_path && features.rfind("handcrafted:", 0) == 0) image_path = fs::path(features.substr(12));
  FeatureMap fm = make_feature_extractor(features)->extract();
  if (fm.height != set.height || fm.width != set.width)
    throw Error(ErrorCode::DimMismatch, "feature map dims differ from the connectivity set");
  std::vector<SccImage> images{SccImage{set.image_id, std::move(fm), set.connectivities}};
  const SccResult res = run_scc(images, tax.size(), cfg, gmm_scope(t));
  print_warnings(res.warnings);
  write_refined_outputs(out, set.image_id, res.refined.front(), set.height, set.width, image_path);
  write_loss_report(out, res.refined, res.gmm.empty() ? std::nullopt : res.gmm.front(), res.warnings);
  const auto& r = res.refined.front();
  std::cout << "scc: clean " << r.clean.size() << ", corrected " << r.corrected.size() << ", dropped "
            << r.dropped.size() << " -> " << out.string() << '\n';
  return 0;
}

int run_refine_cmd(const fs::path& manifest, const fs::path& taxonomy, const std::string& backend_spec,
                   const Tunables& t, int workers, const std::optional<fs::path>& out) {
  const Taxonomy tax = load_taxonomy(taxonomy);
  const auto backend = open_backend(backend_spec);
  RefineOptions opts;
  opts.psa = psa_config(t);
  opts.scc = scc_config(t);
  opts.scope = gmm_scope(t);
  opts.workers = workers;
  opts.shard_out = out ? *out : manifest.parent_path();
  if (opts.shard_out.empty()) opts.shard_out = ".";
  const auto entries = load_manifest(manifest);
  const RefineResult res = refine(entries, tax, *backend, opts);
  print_warnings(res.scc.warnings);
  std::size_t clean = 0, corrected = 0, dropped = 0;
  for (const auto& r : res.scc.refined) {
    clean += r.clean.size();
    corrected += r.corrected.size();
    dropped += r.dropped.size();
  }
  std::cout << "refine: " << entries.size() << " images; clean " << clean << ", corrected " << corrected
            << ", dropped " << dropped << '\n';
  return 0;
}

int run_eval_cmd(const fs::path& pred_path, const fs::path& gt_path, const fs::path& taxonomy, bool as_json,
                 const std::optional<fs::path>& conns) {
  const Taxonomy tax = load_taxonomy(taxonomy);
  const LabelMap pred = load_label_map(pred_path, &tax);
  const LabelMap gt = load_label_map(gt_path, &tax);
  Metrics m = evaluate(pred, gt, tax);
  if (conns) {
    const Json j = parse_json_file(*conns);
    std::vector<Connectivity> list;
    for (const auto& c : j.at("connectivities")) {
      if (c.contains("partition") && c["partition"] == "dropped") continue;
      list.push_back(connectivity_from_json(c));
    }
    m.connectivity_label_accuracy = connectivity_label_accuracy(list, gt);
  }
  if (as_json) {
    std::cout << to_json(m, tax).dump(1) << '\n';
    return 0;
  }
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "miou " << m.miou << "\npixel_accuracy " << m.pixel_accuracy << "\ncoverage " << m.coverage
            << "\nlabeled_accuracy " << m.labeled_accuracy << '\n';
  if (m.connectivity_label_accuracy) std::cout << "connectivity_label_accuracy " << *m.connectivity_label_accuracy << '\n';
  for (int c = 0; c < tax.size(); ++c) {
    const auto& v = m.per_class_iou[static_cast<std::size_t>(c)];
    std::cout << "iou " << tax[c].name << ' ';
    if (v)
      std::cout << *v << '\n';
    else
      std::cout << "absent\n";
  }
  return 0;
}

int run_synth_cmd(const fs::path& config, const fs::path& out, std::optional<int> cases_flag) {
  const Json j = parse_json_file(config);
  const SynthConfig base = synth_config_from_json(j);
  int cases = cases_flag.value_or(j.value("cases", 1));
  if (cases < 1) throw Error(ErrorCode::ConfigError, "cases must be >= 1");
  fs::create_directories(out);
  write_json_file(out / "taxonomy.json", to_json(synth_taxonomy(base)));
  Json manifest = Json::array();
  for (int i = 0; i < cases; ++i) {
    std::ostringstream name;
    name << "case_" << std::setw(3) << std::setfill('0') << i;
    SynthConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(i);
    const SynthCase c = synth_case(cfg, name.str());
    write_synth_case(c, out / name.str());
    manifest.push_back({{"image", name.str() + "/image.png"},
                        {"pseudo", name.str() + "/pseudo.png"},
                        {"out", name.str() + "/refined"}});
  }
  write_json_file(out / "manifest.json", manifest);
  std::cout << "synth: " << cases << " cases -> " << out.string() << '\n';
  return 0;
}

int run_augment_cmd(const fs::path& pool_from, const fs::path& dst_image_path, const fs::path& dst_label_path,
                    const fs::path& taxonomy, std::uint64_t seed, int n_paste, const std::string& placement,
                    const fs::path& out) {
  const Taxonomy tax = load_taxonomy(taxonomy);
  if (!fs::is_directory(pool_from)) throw Error(ErrorCode::FileError, pool_from.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(pool_from))
    if (e.is_regular_file() && e.path().filename() == "refined.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<RefinedImage> images;
  for (const auto& f : files) {
    const Json j = parse_json_file(f);
    if (!j.contains("image_path")) throw Error(ErrorCode::FormatError, f.string() + " has no image_path");
    images.push_back({j["image_path"].get<std::string>(), refined_set_from_json(j)});
  }
  const ResamplePool pool = build_resample_pool(images, tax);
  CopyPasteConfig cfg;
  cfg.n_paste = n_paste;
  cfg.placement = placement == "random" ? Placement::UniformRandom : Placement::Original;
  const CopyPasteResult res = copy_paste(pool, load_rgb(dst_image_path), load_label_map(dst_label_path, &tax), seed,
                                         cfg, [](const std::string& ref) { return load_rgb(ref); });
  save_rgb(res.image, out / "image.png");
  save_label_map(res.label, out / "label.png");
  std::cout << "augment: pasted " << res.pastes.size() << " connectivities from " << pool.minority_classes.size()
            << " minority classes -> " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Connectivity-level pseudo-label refinement"};
  app.require_subcommand(1);

  Tunables t;
  TunableFlags flags;
  fs::path image, pseudo, taxonomy, out, conn_path, manifest, pred, gt, config, dst_image, dst_label, pool_from;
  std::string backend = default_backend(), features, placement = "original";
  std::optional<fs::path> scc_image, refine_out, eval_conns;
  std::optional<int> cases;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool as_json = false;
  std::uint64_t aug_seed = 0;
  int n_paste = 1;

  auto* psa = app.add_subcommand("psa", "Aggregate a pseudo-label into connectivities");
  psa->add_option("--image", image, "RGB image")->required();
  psa->add_option("--pseudo", pseudo, "Pseudo-label PNG")->required();
  psa->add_option("--taxonomy", taxonomy, "Taxonomy JSON")->required();
  psa->add_option("--backend", backend, "file:DIR or http://HOST:PORT (default $SECO_BACKEND)");
  psa->add_option("--config", t.config_path, "JSON config");
  add_psa_flags(psa, t, flags);
  psa->add_option("--out", out, "Output directory")->required();

  auto* scc = app.add_subcommand("scc", "Detect and correct noisy connectivities");
  scc->add_option("--connectivities", conn_path, "connectivities.json from psa")->required();
  scc->add_option("--features", features, "handcrafted:IMAGE or file:SECOFM1")->required();
  scc->add_option("--taxonomy", taxonomy, "Taxonomy JSON")->required();
  scc->add_option("--image", scc_image, "Source image path recorded for augment");
  scc->add_option("--config", t.config_path, "JSON config");
  add_scc_flags(scc, t, flags);
  scc->add_option("--out", out, "Output directory")->required();

  auto* ref = app.add_subcommand("refine", "psa then scc over a manifest");
  ref->add_option("--manifest", manifest, "JSON list of {image, pseudo, out}")->required();
  ref->add_option("--taxonomy", taxonomy, "Taxonomy JSON")->required();
  ref->add_option("--backend", backend, "file:DIR or http://HOST:PORT (default $SECO_BACKEND)");
  ref->add_option("--workers", workers, "Parallel aggregation workers")->check(CLI::PositiveNumber);
  ref->add_option("--config", t.config_path, "JSON config");
  add_psa_flags(ref, t, flags);
  add_scc_flags(ref, t, flags);
  ref->add_option("--out", refine_out, "Directory for shard-level outputs (default: manifest directory)");

  auto* ev = app.add_subcommand("eval", "Score a label map against ground truth");
  ev->add_option("--pred", pred, "Predicted label PNG")->required();
  ev->add_option("--gt", gt, "Ground-truth label PNG")->required();
  ev->add_option("--taxonomy", taxonomy, "Taxonomy JSON")->required();
  ev->add_option("--connectivities", eval_conns, "connectivities.json or refined.json to score");
  ev->add_flag("--json", as_json, "Emit JSON");

  auto* syn = app.add_subcommand("synth", "Generate synthetic cases");
  syn->add_option("--config", config, "Synth config JSON")->required();
  syn->add_option("--cases", cases, "Number of cases (overrides the config)");
  syn->add_option("--out", out, "Output directory")->required();

  auto* aug = app.add_subcommand("augment", "Copy-paste minority-class connectivities");
  aug->add_option("--pool-from", pool_from, "Directory searched for refined.json files")->required();
  aug->add_option("--dst-image", dst_image, "Destination RGB image")->required();
  aug->add_option("--dst-label", dst_label, "Destination label PNG")->required();
  aug->add_option("--taxonomy", taxonomy, "Taxonomy JSON")->required();
  aug->add_option("--seed", aug_seed, "Random seed")->required();
  aug->add_option("--n-paste", n_paste, "Connectivities to paste")->check(CLI::NonNegativeNumber);
  aug->add_option("--placement", placement, "original or random")->check(CLI::IsMember({"original", "random"}));
  aug->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
    if (*psa || *scc || *ref) apply_config(t, flags);
    if (*psa) return run_psa_cmd(image, pseudo, taxonomy, backend, t, out);
    if (*scc) return run_scc_cmd(conn_path, features, taxonomy, scc_image, t, out);
    if (*ref) return run_refine_cmd(manifest, taxonomy, backend, t, workers, refine_out);
    if (*ev) return run_eval_cmd(pred, gt, taxonomy, as_json, eval_conns);
    if (*syn) return run_synth_cmd(config, out, cases);
    if (*aug) return run_augment_cmd(pool_from, dst_image, dst_label, taxonomy, aug_seed, n_paste, placement, out);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::BackendUnavailable ? kExitBackend : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
