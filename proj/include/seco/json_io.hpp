#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "seco/types.hpp"

namespace seco {

using Json = nlohmann::json;

/// Connectivities of one image, the unit written by psa and read by scc.
struct ConnectivitySet {
  std::string image_id;
  int height = 0;
  int width = 0;
  std::vector<Connectivity> connectivities;
};

Json to_json(const MaskRLE& rle);
MaskRLE rle_from_json(const Json& j);

Json to_json(const Taxonomy& tax);
Taxonomy taxonomy_from_json(const Json& j);
Taxonomy load_taxonomy(const std::filesystem::path& path);

Json to_json(const MaskSet& set);
MaskSet mask_set_from_json(const Json& j);
MaskSet load_mask_set(const std::filesystem::path& path);

Json to_json(const Connectivity& c);
Connectivity connectivity_from_json(const Json& j);

Json to_json(const ConnectivitySet& set);
ConnectivitySet connectivity_set_from_json(const Json& j);
ConnectivitySet load_connectivity_set(const std::filesystem::path& path);

Json to_json(const GmmFit& fit);

/// Every connectivity with its "partition" tag plus the thresholds.
Json to_json(const RefinedSet& refined, const std::string& image_id, int height, int width);
RefinedSet refined_set_from_json(const Json& j);

Json parse_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline; byte-stable for equal values.
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace seco
