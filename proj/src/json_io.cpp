#include "seco/json_io.hpp"

#include <algorithm>

#include "seco/error.hpp"
#include "seco/io.hpp"

namespace seco {
namespace {

template <typename T>
T get_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::FormatError, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

Json to_json(const MaskRLE& rle) {
  return Json{{"height", rle.height}, {"width", rle.width}, {"counts", rle.counts}};
}

MaskRLE rle_from_json(const Json& j) {
  MaskRLE rle;
  rle.height = get_field<int>(j, "height");
  rle.width = get_field<int>(j, "width");
  rle.counts = get_field<std::vector<std::uint32_t>>(j, "counts");
  rle.validate();
  return rle;
}

Json to_json(const Taxonomy& tax) {
  Json arr = Json::array();
  for (const auto& c : tax.classes()) arr.push_back({{"name", c.name}, {"kind", std::string(to_string(c.kind))}});
  return arr;
}

Taxonomy taxonomy_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::FormatError, "taxonomy must be a JSON list");
  std::vector<ClassInfo> classes;
  for (const auto& item : j) {
    classes.push_back({get_field<std::string>(item, "name"), parse_class_kind(get_field<std::string>(item, "kind"))});
  }
  return Taxonomy(std::move(classes));
}

Taxonomy load_taxonomy(const std::filesystem::path& path) { return taxonomy_from_json(parse_json_file(path)); }

Json to_json(const MaskSet& set) {
  Json masks = Json::array();
  for (const auto& m : set.masks)
    masks.push_back({{"id", m.id}, {"source", std::string(to_string(m.source))}, {"rle", to_json(m.rle)}});
  return Json{{"image_id", set.image_id}, {"height", set.height}, {"width", set.width}, {"masks", masks}};
}

MaskSet mask_set_from_json(const Json& j) {
  MaskSet set;
  set.image_id = get_field<std::string>(j, "image_id");
  set.height = get_field<int>(j, "height");
  set.width = get_field<int>(j, "width");
  const Json masks = get_field<Json>(j, "masks");
  if (!masks.is_array()) throw Error(ErrorCode::FormatError, "'masks' must be a list");
  for (const auto& m : masks) {
    MaskEntry e;
    e.id = get_field<int>(m, "id");
    e.source = m.contains("source") ? parse_mask_source(get_field<std::string>(m, "source")) : MaskSource::Auto;
    e.rle = rle_from_json(get_field<Json>(m, "rle"));
    set.masks.push_back(std::move(e));
  }
  set.validate();
  return set;
}

MaskSet load_mask_set(const std::filesystem::path& path) { return mask_set_from_json(parse_json_file(path)); }

Json to_json(const Connectivity& c) {
  Json j{{"id", c.id},
         {"label", c.label},
         {"provenance", std::string(to_string(c.provenance))},
         {"area", c.area},
         {"seed_area", c.seed_area},
         {"mask", to_json(c.mask)}};
  if (c.loss) j["loss"] = *c.loss;
  if (c.eta) j["eta"] = *c.eta;
  if (c.probs) j["probs"] = *c.probs;
  if (c.original_label) j["original_label"] = *c.original_label;
  return j;
}

Connectivity connectivity_from_json(const Json& j) {
  Connectivity c;
  c.id = get_field<int>(j, "id");
  c.label = get_field<int>(j, "label");
  c.provenance = parse_provenance(get_field<std::string>(j, "provenance"));
  c.mask = rle_from_json(get_field<Json>(j, "mask"));
  c.area = j.contains("area") ? get_field<std::int64_t>(j, "area") : static_cast<std::int64_t>(c.mask.area());
  if (c.area != static_cast<std::int64_t>(c.mask.area()))
    throw Error(ErrorCode::FormatError, "connectivity " + std::to_string(c.id) + " area disagrees with its mask");
  if (j.contains("seed_area")) c.seed_area = get_field<std::int64_t>(j, "seed_area");
  if (j.contains("loss")) c.loss = get_field<double>(j, "loss");
  if (j.contains("eta")) c.eta = get_field<double>(j, "eta");
  if (j.contains("probs")) c.probs = get_field<std::vector<double>>(j, "probs");
  if (j.contains("original_label")) c.original_label = get_field<int>(j, "original_label");
  return c;
}

Json to_json(const ConnectivitySet& set) {
  Json arr = Json::array();
  for (const auto& c : set.connectivities) arr.push_back(to_json(c));
  return Json{{"image_id", set.image_id}, {"height", set.height}, {"width", set.width}, {"connectivities", arr}};
}

ConnectivitySet connectivity_set_from_json(const Json& j) {
  ConnectivitySet set;
  set.image_id = get_field<std::string>(j, "image_id");
  set.height = get_field<int>(j, "height");
  set.width = get_field<int>(j, "width");
  for (const auto& c : get_field<Json>(j, "connectivities")) {
    set.connectivities.push_back(connectivity_from_json(c));
    const auto& mask = set.connectivities.back().mask;
    if (mask.height != set.height || mask.width != set.width)
      throw Error(ErrorCode::DimMismatch, "connectivity mask dims differ from the set dims");
  }
  return set;
}

ConnectivitySet load_connectivity_set(const std::filesystem::path& path) {
  return connectivity_set_from_json(parse_json_file(path));
}

Json to_json(const GmmFit& fit) {
  auto comp = [](const GmmComponent& c) {
    return Json{{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}};
  };
  return Json{{"low", comp(fit.low)},
              {"high", comp(fit.high)},
              {"log_likelihood", fit.log_likelihood},
              {"iterations", fit.iterations}};
}

Json to_json(const RefinedSet& refined, const std::string& image_id, int height, int width) {
  std::vector<std::pair<Partition, const Connectivity*>> rows;
  for (const auto& c : refined.clean) rows.emplace_back(Partition::Clean, &c);
  for (const auto& c : refined.corrected) rows.emplace_back(Partition::Corrected, &c);
  for (const auto& c : refined.dropped) rows.emplace_back(Partition::Dropped, &c);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second->id < b.second->id; });
  Json arr = Json::array();
  for (const auto& [part, c] : rows) {
    Json j = to_json(*c);
    j["partition"] = std::string(to_string(part));
    arr.push_back(std::move(j));
  }
  return Json{{"image_id", image_id},
              {"height", height},
              {"width", width},
              {"thresholds", {{"tau_ns", refined.tau_ns}, {"tau_cr", refined.tau_cr}}},
              {"connectivities", arr}};
}

RefinedSet refined_set_from_json(const Json& j) {
  RefinedSet out;
  const Json th = get_field<Json>(j, "thresholds");
  out.tau_ns = get_field<double>(th, "tau_ns");
  out.tau_cr = get_field<double>(th, "tau_cr");
  for (const auto& item : get_field<Json>(j, "connectivities")) {
    Connectivity c = connectivity_from_json(item);
    switch (parse_partition(get_field<std::string>(item, "partition"))) {
      case Partition::Clean: out.clean.push_back(std::move(c)); break;
      case Partition::Corrected: out.corrected.push_back(std::move(c)); break;
      case Partition::Dropped: out.dropped.push_back(std::move(c)); break;
    }
  }
  return out;
}

Json parse_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::FormatError, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_file(path, j.dump(1) + "\n"); }

}  // namespace seco
