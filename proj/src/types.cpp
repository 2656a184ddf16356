#include "seco/types.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "seco/error.hpp"

namespace seco {

void LabelMap::validate(int num_classes) const {
  if (data.size() != static_cast<std::size_t>(width) * height)
    throw Error(ErrorCode::FormatError, "label map data length does not match dims");
  for (std::uint8_t v : data) {
    if (v != kVoid && v >= num_classes)
      throw Error(ErrorCode::ClassOutOfRange,
                  "label value " + std::to_string(v) + " with K=" + std::to_string(num_classes));
  }
}

Taxonomy::Taxonomy(std::vector<ClassInfo> classes) : classes_(std::move(classes)) {
  if (classes_.empty()) throw Error(ErrorCode::FormatError, "taxonomy has no classes");
  if (classes_.size() > static_cast<std::size_t>(kMaxClasses))
    throw Error(ErrorCode::FormatError, "taxonomy has more than 254 classes");
  std::set<std::string> names;
  for (const auto& c : classes_) {
    if (!names.insert(c.name).second)
      throw Error(ErrorCode::FormatError, "duplicate class name '" + c.name + "'");
  }
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count_if(data.begin(), data.end(), [](auto v) { return v != 0; }));
}

std::uint64_t MaskRLE::area() const noexcept {
  std::uint64_t a = 0;
  for (std::size_t i = 1; i < counts.size(); i += 2) a += counts[i];
  return a;
}

void MaskRLE::validate() const {
  if (height <= 0 || width <= 0) throw Error(ErrorCode::FormatError, "mask dims must be positive");
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total != static_cast<std::uint64_t>(height) * width)
    throw Error(ErrorCode::SumMismatch, "run lengths sum to " + std::to_string(total) + ", expected " +
                                            std::to_string(static_cast<std::uint64_t>(height) * width));
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] == 0) throw Error(ErrorCode::FormatError, "interior zero-length run");
  }
}

void MaskSet::validate() const {
  std::set<int> ids;
  for (const auto& m : masks) {
    if (m.id < 0) throw Error(ErrorCode::FormatError, "negative mask id");
    if (!ids.insert(m.id).second) throw Error(ErrorCode::FormatError, "duplicate mask id " + std::to_string(m.id));
    if (m.rle.height != height || m.rle.width != width)
      throw Error(ErrorCode::DimMismatch, "mask " + std::to_string(m.id) + " dims differ from the set dims");
    m.rle.validate();
  }
}

double Connectivity::max_prob() const {
  if (!probs || probs->empty()) throw Error(ErrorCode::MissingStatistics, "connectivity has no probabilities");
  return *std::max_element(probs->begin(), probs->end());
}

int Connectivity::argmax_prob() const {
  if (!probs || probs->empty()) throw Error(ErrorCode::MissingStatistics, "connectivity has no probabilities");
  return static_cast<int>(std::max_element(probs->begin(), probs->end()) - probs->begin());
}

std::vector<Connectivity> RefinedSet::all() const {
  std::vector<Connectivity> out = clean;
  out.insert(out.end(), corrected.begin(), corrected.end());
  return out;
}

void SccConfig::validate() const {
  if (!(tau_ns > 0.0 && tau_ns < 1.0)) throw Error(ErrorCode::ConfigError, "tau_ns must lie in (0,1)");
  if (!(tau_cr > 0.0 && tau_cr < 1.0)) throw Error(ErrorCode::ConfigError, "tau_cr must lie in (0,1)");
  if (warmup_iters < 1) throw Error(ErrorCode::ConfigError, "warmup_iters must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::ConfigError, "batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::ConfigError, "learning_rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw Error(ErrorCode::ConfigError, "momentum must lie in [0,1)");
  if (em_max_iters < 1) throw Error(ErrorCode::ConfigError, "em_max_iters must be >= 1");
}

std::string_view to_string(ClassKind kind) { return kind == ClassKind::Stuff ? "stuff" : "things"; }

std::string_view to_string(MaskSource source) { return source == MaskSource::Auto ? "auto" : "prompt"; }

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::ThingsPrompt: return "things_prompt";
    case Provenance::StuffAlign: return "stuff_align";
    case Provenance::Corrected: return "corrected";
  }
  return "";
}

std::string_view to_string(Partition partition) {
  switch (partition) {
    case Partition::Clean: return "clean";
    case Partition::Corrected: return "corrected";
    case Partition::Dropped: return "dropped";
  }
  return "";
}

ClassKind parse_class_kind(std::string_view s) {
  if (s == "stuff") return ClassKind::Stuff;
  if (s == "things" || s == "thing") return ClassKind::Things;
  throw Error(ErrorCode::FormatError, "unknown class kind '" + std::string(s) + "'");
}

MaskSource parse_mask_source(std::string_view s) {
  if (s == "auto") return MaskSource::Auto;
  if (s == "prompt") return MaskSource::Prompt;
  throw Error(ErrorCode::FormatError, "unknown mask source '" + std::string(s) + "'");
}

Provenance parse_provenance(std::string_view s) {
  if (s == "things_prompt") return Provenance::ThingsPrompt;
  if (s == "stuff_align") return Provenance::StuffAlign;
  if (s == "corrected") return Provenance::Corrected;
  throw Error(ErrorCode::FormatError, "unknown provenance '" + std::string(s) + "'");
}

Partition parse_partition(std::string_view s) {
  if (s == "clean") return Partition::Clean;
  if (s == "corrected") return Partition::Corrected;
  if (s == "dropped") return Partition::Dropped;
  throw Error(ErrorCode::FormatError, "unknown partition '" + std::string(s) + "'");
}

}  // namespace seco
