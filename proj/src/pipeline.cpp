#include "seco/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

#include "seco/error.hpp"
#include "seco/features.hpp"
#include "seco/io.hpp"
#include "seco/json_io.hpp"

namespace seco {
namespace {

struct LossRow {
  double loss;
  Partition part;
};

std::vector<LossRow> collect_losses(const std::vector<RefinedSet>& refined) {
  std::vector<LossRow> rows;
  for (const auto& r : refined) {
    for (const auto& c : r.clean) rows.push_back({c.loss.value_or(0.0), Partition::Clean});
    for (const auto& c : r.corrected) rows.push_back({c.loss.value_or(0.0), Partition::Corrected});
    for (const auto& c : r.dropped) rows.push_back({c.loss.value_or(0.0), Partition::Dropped});
  }
  return rows;
}

double hist_upper(const std::vector<LossRow>& rows) {
  double hi = 0.0;
  for (const auto& r : rows) hi = std::max(hi, r.loss);
  return hi > 0.0 ? hi * 1.0001 : 1.0;
}

}  // namespace

std::vector<RefineEntry> load_manifest(const std::filesystem::path& path) {
  const Json j = parse_json_file(path);
  if (!j.is_array()) throw Error(ErrorCode::FormatError, "manifest must be a JSON list");
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  std::vector<RefineEntry> out;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("image") || !item.contains("pseudo") || !item.contains("out"))
      throw Error(ErrorCode::FormatError, "manifest entries need image, pseudo and out");
    RefineEntry e{resolve(item["image"].get<std::string>()), resolve(item["pseudo"].get<std::string>()),
                  resolve(item["out"].get<std::string>()), std::nullopt};
    if (item.contains("features")) e.features = resolve(item["features"].get<std::string>());
    out.push_back(std::move(e));
  }
  return out;
}

void write_psa_outputs(const std::filesystem::path& dir, const std::string& image_id, const MergeResult& psa) {
  ConnectivitySet set{image_id, psa.label.height, psa.label.width, psa.connectivities};
  write_json_file(dir / "connectivities.json", to_json(set));
  save_label_map(psa.label, dir / "psa.png");
}

void write_refined_outputs(const std::filesystem::path& dir, const std::string& image_id, const RefinedSet& refined,
                           int height, int width, const std::optional<std::filesystem::path>& image_path) {
  Json j = to_json(refined, image_id, height, width);
  if (image_path) j["image_path"] = std::filesystem::absolute(*image_path).lexically_normal().string();
  write_json_file(dir / "refined.json", j);
  save_label_map(render_pseudo_label(refined, height, width), dir / "refined.png");
}

RgbImage render_loss_histogram(const std::vector<RefinedSet>& refined, const std::optional<GmmFit>& gmm, int bins,
                               int width, int height) {
  const auto rows = collect_losses(refined);
  const double hi = hist_upper(rows);
  std::vector<std::array<int, 3>> counts(static_cast<std::size_t>(bins), {0, 0, 0});
  for (const auto& r : rows) {
    const int b = std::min(bins - 1, static_cast<int>(r.loss / hi * bins));
    ++counts[static_cast<std::size_t>(b)][static_cast<std::size_t>(r.part)];
  }
  int peak = 1;
  for (const auto& c : counts) peak = std::max(peak, c[0] + c[1] + c[2]);

  RgbImage img(width, height);
  std::fill(img.data.begin(), img.data.end(), 255);
  const int margin = 20;
  const int plot_w = width - 2 * margin, plot_h = height - 2 * margin;
  auto put = [&](int x, int y, std::array<std::uint8_t, 3> rgb) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    std::copy(rgb.begin(), rgb.end(), img.pixel(x, y));
  };
  const std::array<std::array<std::uint8_t, 3>, 3> colors = {{{70, 130, 180}, {60, 170, 90}, {200, 70, 60}}};
  for (int b = 0; b < bins; ++b) {
    const int x0 = margin + b * plot_w / bins;
    const int x1 = margin + (b + 1) * plot_w / bins - 2;
    int base = 0;
    for (std::size_t p = 0; p < 3; ++p) {
      const int n = counts[static_cast<std::size_t>(b)][p];
      const int y_lo = base * plot_h / peak;
      const int y_hi = (base + n) * plot_h / peak;
      for (int y = y_lo; y < y_hi; ++y)
        for (int x = x0; x <= x1; ++x) put(x, height - margin - 1 - y, colors[p]);
      base += n;
    }
  }
  for (int x = margin; x < width - margin; ++x) put(x, height - margin, {0, 0, 0});
  for (int y = margin; y <= height - margin; ++y) put(margin - 1, y, {0, 0, 0});

  if (gmm && !rows.empty()) {
    // Mixture density scaled to expected counts per bin.
    const double bin_w = hi / bins;
    auto density = [&](double x) {
      double d = 0.0;
      for (const auto* c : {&gmm->low, &gmm->high})
        d += c->weight * std::exp(-(x - c->mean) * (x - c->mean) / (2 * c->variance)) /
             std::sqrt(2 * std::numbers::pi * c->variance);
      return d * static_cast<double>(rows.size()) * bin_w;
    };
    int prev_y = -1;
    for (int px = 0; px < plot_w; ++px) {
      const double x = (px + 0.5) / plot_w * hi;
      const double v = std::min(density(x), static_cast<double>(peak));
      const int y = height - margin - 1 - static_cast<int>(v * plot_h / peak);
      const int from = prev_y < 0 ? y : std::min(prev_y, y), to = prev_y < 0 ? y : std::max(prev_y, y);
      for (int yy = from; yy <= to; ++yy) put(margin + px, yy, {20, 20, 20});
      prev_y = y;
    }
  }
  return img;
}

void write_loss_report(const std::filesystem::path& dir, const std::vector<RefinedSet>& refined,
                       const std::optional<GmmFit>& gmm, const std::vector<std::string>& warnings) {
  constexpr int kBins = 40;
  const auto rows = collect_losses(refined);
  const double hi = hist_upper(rows);
  std::vector<std::array<int, 3>> counts(kBins, {0, 0, 0});
  for (const auto& r : rows)
    ++counts[static_cast<std::size_t>(std::min(kBins - 1, static_cast<int>(r.loss / hi * kBins)))]
            [static_cast<std::size_t>(r.part)];
  std::ostringstream csv;
  csv.precision(10);
  csv << "bin_lo,bin_hi,clean,corrected,dropped\n";
  for (int b = 0; b < kBins; ++b)
    csv << hi * b / kBins << ',' << hi * (b + 1) / kBins << ',' << counts[b][0] << ',' << counts[b][1] << ','
        << counts[b][2] << '\n';
  write_file(dir / "loss_hist.csv", csv.str());
  save_rgb(render_loss_histogram(refined, gmm), dir / "loss_hist.png");
  Json report{{"connectivities", rows.size()}, {"warnings", warnings}};
  if (gmm) report["gmm"] = to_json(*gmm);
  write_json_file(dir / "gmm.json", report);
}

RefineResult refine(const std::vector<RefineEntry>& entries, const Taxonomy& tax, const SegmenterBackend& backend,
                    const RefineOptions& options) {
  options.scc.validate();
  const std::size_t n = entries.size();
  RefineResult result;
  result.image_ids.resize(n);
  result.heights.resize(n);
  result.widths.resize(n);
  result.psa.resize(n);
  std::vector<SccImage> scc_inputs(n);

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const RefineEntry& e = entries[i];
        const ImageRef ref = ImageRef::from_file(e.image);
        const LabelMap pseudo = load_label_map(e.pseudo, &tax);
        if (pseudo.width != ref.width || pseudo.height != ref.height)
          throw Error(ErrorCode::DimMismatch, e.pseudo.string() + " does not match " + e.image.string());
        result.image_ids[i] = ref.id;
        result.heights[i] = ref.height;
        result.widths[i] = ref.width;
        result.psa[i] = run_psa(pseudo, tax, backend, ref, options.psa);
        FeatureMap fm = e.features ? PrecomputedExtractor(*e.features).extract() : HandcraftedExtractor(e.image).extract();
        if (fm.height != ref.height || fm.width != ref.width)
          throw Error(ErrorCode::DimMismatch, "feature map does not match " + e.image.string());
        scc_inputs[i] = SccImage{ref.id, std::move(fm), result.psa[i].connectivities};
        write_psa_outputs(e.out, ref.id, result.psa[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(std::max<std::size_t>(n, 1))));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);

  result.scc = run_scc(scc_inputs, tax.size(), options.scc, options.scope);
  for (std::size_t i = 0; i < n; ++i)
    write_refined_outputs(entries[i].out, result.image_ids[i], result.scc.refined[i], result.heights[i], result.widths[i],
                          entries[i].image);
  if (!options.shard_out.empty()) {
    std::optional<GmmFit> fit;
    if (options.scope == GmmScope::Shard && !result.scc.gmm.empty()) fit = result.scc.gmm.front();
    write_loss_report(options.shard_out, result.scc.refined, fit, result.scc.warnings);
  }
  return result;
}

}  // namespace seco
