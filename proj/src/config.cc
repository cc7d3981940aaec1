#include "roadinfer/config.h"

#include <charconv>
#include <cstdio>
#include <functional>
#include <sstream>

#include "roadinfer/error.h"
#include "roadinfer/io.h"

namespace roadinfer {
namespace {

struct Field {
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw InvalidInputError("config " + key + ": not a number: '" + v + "'");
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidInputError("config " + key + ": not an integer: '" + v + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw InvalidInputError("config " + key + ": not an unsigned integer: '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidInputError("config " + key + ": not a boolean: '" + v + "'");
}

std::string show(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

#define REAL(key, member)                                                     \
  {                                                                           \
    key, Field {                                                              \
      [](PipelineConfig& c, const std::string& v) { c.member = parse_double(key, v); }, \
          [](const PipelineConfig& c) { return show(c.member); }              \
    }                                                                         \
  }
#define INT(key, member, type)                                                \
  {                                                                           \
    key, Field {                                                              \
      [](PipelineConfig& c, const std::string& v) {                           \
        c.member = static_cast<type>(parse_int(key, v));                      \
      },                                                                      \
          [](const PipelineConfig& c) { return std::to_string(c.member); }    \
    }                                                                         \
  }
#define BOOL(key, member)                                                     \
  {                                                                           \
    key, Field {                                                              \
      [](PipelineConfig& c, const std::string& v) { c.member = parse_bool(key, v); }, \
          [](const PipelineConfig& c) { return std::string(c.member ? "true" : "false"); } \
    }                                                                         \
  }
#define TEXT(key, member)                                                     \
  {                                                                           \
    key, Field {                                                              \
      [](PipelineConfig& c, const std::string& v) { c.member = v; },          \
          [](const PipelineConfig& c) { return c.member; }                    \
    }                                                                         \
  }

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> kFields = {
      REAL("tile.resolution", tile.resolution),
      INT("tile.width_px", tile.width_px, int),
      INT("tile.height_px", tile.height_px, int),
      REAL("tile.margin", tile_margin),
      {"segment.backend",
       Field{[](PipelineConfig& c, const std::string& v) {
               c.segmenter.backend = segmenter_backend_from_string(v);
             },
             [](const PipelineConfig& c) {
               return std::string(to_string(c.segmenter.backend));
             }}},
      REAL("segment.kde_sigma_px", segmenter.kde_sigma_px),
      REAL("segment.kde_threshold", segmenter.kde_threshold),
      REAL("segment.binarize_threshold", segmenter.binarize_threshold),
      TEXT("segment.external_mask_path_template", segmenter.external_mask_path_template),
      INT("label.min_trace_support", label.min_trace_support, int),
      INT("label.centerline_thickness_px", label.centerline_thickness_px, int),
      REAL("cploss.sigma", cp_loss.sigma),
      REAL("cploss.binarize_threshold", cp_loss.binarize_threshold),
      REAL("cploss.epsilon", cp_loss.epsilon),
      REAL("clean.min_dead_end_len", cleaning.min_dead_end_len),
      REAL("clean.collapse_edge_len", cleaning.collapse_edge_len),
      REAL("gapfill.max_gap_len", gap_fill.max_gap_len),
      REAL("gapfill.max_turn_deg", gap_fill.max_turn_deg),
      REAL("gapfill.extension_probe_len", gap_fill.extension_probe_len),
      INT("disambiguation.min_transition_support",
          disambiguation.min_transition_support, int),
      REAL("match.candidate_radius", match.candidate_radius),
      REAL("match.emission_sigma", match.emission_sigma),
      REAL("match.alpha_seg", match.alpha_seg),
      REAL("match.alpha_gap", match.alpha_gap),
      REAL("match.route_beta", match.route_beta),
      REAL("match.max_route_factor", match.max_route_factor),
      INT("match.max_candidates", match.max_candidates, std::size_t),
      REAL("geo.interpolation_interval", geo.interpolation_interval),
      REAL("geo.match_radius", geo.match_radius),
      REAL("itopo.node_match_radius", itopo.node_match_radius),
      REAL("itopo.traversal_radius", itopo.traversal_radius),
      BOOL("refine.gap_fill", enable_gap_fill),
      BOOL("refine.prune_gap", enable_prune_gap),
      BOOL("refine.disambiguate", enable_disambiguation),
      TEXT("io.traces", traces_path),
      TEXT("io.points", points_path),
      TEXT("io.ground_truth", ground_truth_path),
      TEXT("io.output_dir", output_dir),
      {"run.seed", Field{[](PipelineConfig& c, const std::string& v) {
                           c.seed = parse_u64("run.seed", v);
                         },
                         [](const PipelineConfig& c) { return std::to_string(c.seed); }}},
      INT("run.workers", workers, int),
      BOOL("run.keep_intermediate", keep_intermediate),
  };
  return kFields;
}

#undef REAL
#undef INT
#undef BOOL
#undef TEXT

}  // namespace

void PipelineConfig::validate() const {
  tile.validate();
  if (!(tile_margin >= 0.0)) throw InvalidInputError("tile.margin must be >= 0");
  segmenter.validate();
  label.validate();
  cp_loss.validate();
  cleaning.validate();
  gap_fill.validate();
  disambiguation.validate();
  match.validate();
  geo.validate();
  itopo.validate();
  if (workers < 0) throw InvalidInputError("run.workers must be >= 0");
}

void set_config_value(PipelineConfig& config, const std::string& key,
                      const std::string& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw InvalidInputError("unknown config key: " + key);
  it->second.set(config, value);
  // iTOPO compares with the same GEO settings.
  config.itopo.geo = config.geo;
}

void apply_config_text(PipelineConfig& config, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidInputError("config line " + std::to_string(lineno) +
                              ": expected key=value");
    }
    try {
      set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const InvalidInputError& e) {
      throw InvalidInputError("config line " + std::to_string(lineno) + ": " +
                              e.what());
    }
  }
}

PipelineConfig load_config(const std::string& path) {
  PipelineConfig config;
  apply_config_text(config, read_file(path));
  return config;
}

std::map<std::string, std::string> config_snapshot(const PipelineConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& [key, field] : fields()) out[key] = field.get(config);
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [key, field] : fields()) out.push_back(key);
  return out;
}

}  // namespace roadinfer
