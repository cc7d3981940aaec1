#include "roadinfer/io.h"

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "roadinfer/error.h"

namespace roadinfer {
namespace {

using nlohmann::json;

constexpr char kRasterMagic[4] = {'P', '2', 'R', 'R'};
constexpr std::uint16_t kRasterVersion = 1;
constexpr std::size_t kRasterHeaderSize = 4 + 2 + 1 + 4 + 4 + 8 + 8 + 8;

json frame_json(const LocalFrame& frame) {
  return {{"origin_lat", frame.origin_lat}, {"origin_lon", frame.origin_lon}};
}

LocalFrame frame_from(const json& doc) {
  LocalFrame frame;
  if (doc.contains("local_frame")) {
    const json& f = doc.at("local_frame");
    frame.origin_lat = f.at("origin_lat").get<double>();
    frame.origin_lon = f.at("origin_lon").get<double>();
    frame.validate();
  }
  return frame;
}

json coords(const LocalPoint& p) { return json::array({p.x, p.y, p.z}); }

LocalPoint point_from(const json& c) {
  if (!c.is_array() || c.size() < 2) throw FormatError("bad coordinate");
  LocalPoint p{c.at(0).get<double>(), c.at(1).get<double>(), 0.0};
  if (c.size() > 2) p.z = c.at(2).get<double>();
  return p;
}

std::vector<LocalPoint> points_from(const json& arr) {
  std::vector<LocalPoint> out;
  for (const json& c : arr) out.push_back(point_from(c));
  return out;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + upto, '\n');
    throw FormatError(what + ": line " + std::to_string(line) + ": " + e.what());
  }
}

const json& features_of(const json& doc, const std::string& what) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc.at("features").is_array()) {
    throw FormatError(what + ": expected a GeoJSON FeatureCollection");
  }
  return doc.at("features");
}

// Runs `fn` for every feature, tagging errors with the feature index.
template <typename Fn>
void for_each_feature(const json& features, const std::string& what, Fn&& fn) {
  for (std::size_t i = 0; i < features.size(); ++i) {
    try {
      fn(features[i]);
    } catch (const json::exception& e) {
      throw FormatError(what + ": feature " + std::to_string(i) + ": " + e.what());
    } catch (const Error& e) {
      throw FormatError(what + ": feature " + std::to_string(i) + ": " + e.what());
    }
  }
}

template <typename T>
void put(std::string& out, T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    out.append(reinterpret_cast<const char*>(b), sizeof(T));
  } else {
    out.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw FormatError("raster file truncated");
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(b, b + sizeof(T));
  }
  T v;
  std::memcpy(&v, b, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string_view provenance_color(Provenance p) {
  switch (p) {
    case Provenance::kGapFill:
      return "#d62728";
    case Provenance::kGroundTruth:
      return "#2ca02c";
    case Provenance::kSegmentation:
      break;
  }
  return "#1f77b4";
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("cannot write " + path);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string graph_to_geojson(const RoadGraph& graph) {
  json features = json::array();
  for (const auto& [id, p] : graph.nodes()) {
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", coords(p)}}},
                        {"properties", {{"node_id", to_int(id)}, {"z", p.z}}}});
  }
  for (const auto& [id, e] : graph.edges()) {
    json line = json::array();
    for (const auto& p : e.polyline) line.push_back(coords(p));
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", line}}},
                        {"properties",
                         {{"edge_id", to_int(id)},
                          {"node_a", to_int(e.a)},
                          {"node_b", to_int(e.b)},
                          {"provenance", std::string(to_string(e.provenance))}}}});
  }
  json doc = {{"type", "FeatureCollection"},
              {"local_frame", frame_json(graph.frame())},
              {"features", features}};
  return doc.dump(1) + "\n";
}

RoadGraph graph_from_geojson(const std::string& text) {
  const json doc = parse_json(text, "graph");
  const json& features = features_of(doc, "graph");
  RoadGraph g(frame_from(doc));
  // Nodes first so edges may precede them in the file.
  for_each_feature(features, "graph", [&](const json& f) {
    const json& geom = f.at("geometry");
    if (geom.at("type") != "Point") return;
    const json& props = f.at("properties");
    LocalPoint p = point_from(geom.at("coordinates"));
    if (props.contains("z")) p.z = props.at("z").get<double>();
    g.add_node(NodeId{props.at("node_id").get<std::int64_t>()}, p);
  });
  for_each_feature(features, "graph", [&](const json& f) {
    const json& geom = f.at("geometry");
    const std::string type = geom.at("type").get<std::string>();
    if (type == "Point") return;
    if (type != "LineString") throw FormatError("unexpected geometry " + type);
    const json& props = f.at("properties");
    const NodeId a{props.at("node_a").get<std::int64_t>()};
    const NodeId b{props.at("node_b").get<std::int64_t>()};
    for (NodeId n : {a, b}) {
      if (!g.has_node(n)) {
        throw FormatError("edge references missing node " + std::to_string(to_int(n)));
      }
    }
    g.add_edge(EdgeId{props.at("edge_id").get<std::int64_t>()}, a, b,
               points_from(geom.at("coordinates")),
               provenance_from_string(props.at("provenance").get<std::string>()));
  });
  try {
    g.validate();
  } catch (const InvariantError& e) {
    throw FormatError(std::string("graph: ") + e.what());
  }
  return g;
}

void write_graph(const std::string& path, const RoadGraph& graph) {
  write_file(path, graph_to_geojson(graph));
}

RoadGraph read_graph(const std::string& path) {
  try {
    return graph_from_geojson(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string traces_to_geojson(const std::vector<GnssTrace>& traces,
                              const LocalFrame& frame) {
  json features = json::array();
  for (const GnssTrace& t : traces) {
    json line = json::array();
    for (const auto& p : t.points) line.push_back(coords(p));
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", line}}},
                        {"properties", {{"trace_id", t.trace_id}}}});
  }
  json doc = {{"type", "FeatureCollection"},
              {"local_frame", frame_json(frame)},
              {"features", features}};
  return doc.dump() + "\n";
}

void write_traces(const std::string& path, const std::vector<GnssTrace>& traces,
                  const LocalFrame& frame, const TraceOracle* oracle) {
  write_file(path, traces_to_geojson(traces, frame));
  if (!oracle) return;
  std::string text;
  for (const auto& [id, edges] : oracle->edges) {
    for (std::size_t i = 0; i < edges.size(); ++i) {
      text += std::to_string(id) + " " + std::to_string(i) + " " +
              std::to_string(to_int(edges[i])) + "\n";
    }
  }
  write_file(path + ".oracle", text);
}

std::vector<GnssTrace> read_traces(const std::string& path, LocalFrame* frame,
                                   TraceOracle* oracle) {
  const json doc = parse_json(read_file(path), path);
  const json& features = features_of(doc, path);
  if (frame) *frame = frame_from(doc);
  std::vector<GnssTrace> out;
  for_each_feature(features, path, [&](const json& f) {
    const json& geom = f.at("geometry");
    if (geom.at("type") != "LineString") throw FormatError("trace is not a LineString");
    GnssTrace t;
    t.trace_id = f.at("properties").at("trace_id").get<TraceId>();
    t.points = points_from(geom.at("coordinates"));
    if (t.points.size() < 2) throw FormatError("trace has fewer than 2 points");
    out.push_back(std::move(t));
  });
  if (oracle) {
    std::ifstream in(path + ".oracle");
    if (in) {
      std::string line;
      int lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        TraceId id;
        std::size_t idx;
        std::int64_t edge;
        if (!(ls >> id >> idx >> edge)) {
          throw FormatError(path + ".oracle: line " + std::to_string(lineno) +
                            ": expected 'trace_id index edge_id'");
        }
        auto& v = oracle->edges[id];
        if (idx != v.size()) {
          throw FormatError(path + ".oracle: line " + std::to_string(lineno) +
                            ": point indices must be consecutive");
        }
        v.push_back(EdgeId{edge});
      }
    }
  }
  return out;
}

void write_points(const std::string& path, const std::vector<SemanticPoint>& points,
                  const LocalFrame& frame) {
  json features = json::array();
  for (SemanticClass cls : {SemanticClass::kLaneMarking, SemanticClass::kRoadBoundary}) {
    json pts = json::array();
    for (const auto& p : points) {
      if (p.semantic_class == cls) pts.push_back(coords(p.position));
    }
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "MultiPoint"}, {"coordinates", pts}}},
                        {"properties", {{"class", std::string(to_string(cls))}}}});
  }
  json doc = {{"type", "FeatureCollection"},
              {"local_frame", frame_json(frame)},
              {"features", features}};
  write_file(path, doc.dump() + "\n");
}

std::vector<SemanticPoint> read_points(const std::string& path) {
  const json doc = parse_json(read_file(path), path);
  std::vector<SemanticPoint> out;
  for_each_feature(features_of(doc, path), path, [&](const json& f) {
    const json& geom = f.at("geometry");
    if (geom.at("type") != "MultiPoint") throw FormatError("expected MultiPoint");
    const SemanticClass cls =
        semantic_class_from_string(f.at("properties").at("class").get<std::string>());
    for (const json& c : geom.at("coordinates")) out.push_back({point_from(c), cls});
  });
  return out;
}

std::string raster_to_bytes(const RasterTile& tile) {
  tile.validate();
  std::string out;
  out.reserve(kRasterHeaderSize + tile.values.size() * 4);
  out.append(kRasterMagic, 4);
  put<std::uint16_t>(out, kRasterVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(tile.channel));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tile.spec.width_px));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tile.spec.height_px));
  put<double>(out, tile.spec.origin.x);
  put<double>(out, tile.spec.origin.y);
  put<double>(out, tile.spec.resolution);
  for (double v : tile.values) put<float>(out, static_cast<float>(v));
  return out;
}

RasterTile raster_from_bytes(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kRasterMagic, 4) != 0) {
    throw FormatError("not a raster file (bad magic)");
  }
  std::size_t pos = 4;
  const auto version = get<std::uint16_t>(bytes, pos);
  if (version != kRasterVersion) {
    throw FormatError("unsupported raster version " + std::to_string(version));
  }
  const auto channel = get<std::uint8_t>(bytes, pos);
  if (channel > static_cast<std::uint8_t>(Channel::kLabel)) {
    throw FormatError("unknown raster channel tag " + std::to_string(channel));
  }
  TileSpec spec;
  spec.width_px = static_cast<int>(get<std::uint32_t>(bytes, pos));
  spec.height_px = static_cast<int>(get<std::uint32_t>(bytes, pos));
  spec.origin.x = get<double>(bytes, pos);
  spec.origin.y = get<double>(bytes, pos);
  spec.resolution = get<double>(bytes, pos);
  try {
    spec.validate();
  } catch (const InvalidInputError& e) {
    throw FormatError(std::string("raster header: ") + e.what());
  }
  if (bytes.size() != kRasterHeaderSize + spec.pixel_count() * 4) {
    throw FormatError("raster file truncated or oversized");
  }
  RasterTile tile(spec, static_cast<Channel>(channel));
  for (double& v : tile.values) v = get<float>(bytes, pos);
  return tile;
}

void write_raster(const std::string& path, const RasterTile& tile) {
  write_file(path, raster_to_bytes(tile));
}

RasterTile read_raster(const std::string& path) {
  try {
    return raster_from_bytes(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string raster_to_pgm(const RasterTile& tile) {
  if (tile.channel != Channel::kProbability && tile.channel != Channel::kLabel) {
    throw InvalidInputError("PGM export needs a Probability or Label raster");
  }
  tile.validate();
  std::string out = "P5\n" + std::to_string(tile.spec.width_px) + " " +
                    std::to_string(tile.spec.height_px) + "\n65535\n";
  for (int y = tile.spec.height_px - 1; y >= 0; --y) {
    for (int x = 0; x < tile.spec.width_px; ++x) {
      const auto v = static_cast<std::uint16_t>(std::lround(tile.at(x, y) * 65535.0));
      out.push_back(static_cast<char>(v >> 8));
      out.push_back(static_cast<char>(v & 0xff));
    }
  }
  return out;
}

void write_pgm(const std::string& path, const RasterTile& tile) {
  write_file(path, raster_to_pgm(tile));
}

void write_matches(const std::string& path, const std::vector<MatchResult>& matches) {
  std::string text;
  for (const MatchResult& m : matches) {
    json assignments = json::array();
    json offsets = json::array();
    for (std::size_t i = 0; i < m.assignments.size(); ++i) {
      const auto& a = m.assignments[i];
      assignments.push_back(a ? json(to_int(*a)) : json(nullptr));
      const bool has = i < m.arc_offsets.size() && !std::isnan(m.arc_offsets[i]);
      offsets.push_back(has ? json(m.arc_offsets[i]) : json(nullptr));
    }
    json line = {{"trace_id", m.trace_id},
                 {"assignments", assignments},
                 {"arc_offsets", offsets}};
    text += line.dump() + "\n";
  }
  write_file(path, text);
}

std::vector<MatchResult> read_matches(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<MatchResult> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = parse_json(line, path + ": line " + std::to_string(lineno));
    try {
      MatchResult m;
      m.trace_id = j.at("trace_id").get<TraceId>();
      for (const json& a : j.at("assignments")) {
        m.assignments.push_back(a.is_null() ? std::nullopt
                                            : std::optional(EdgeId{a.get<std::int64_t>()}));
      }
      if (j.contains("arc_offsets")) {
        for (const json& s : j.at("arc_offsets")) {
          m.arc_offsets.push_back(s.is_null() ? std::nan("") : s.get<double>());
        }
      }
      out.push_back(std::move(m));
    } catch (const json::exception& e) {
      throw FormatError(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string render_svg(const RoadGraph& graph, const SvgOptions& options) {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  bool have = false;
  auto grow = [&](const LocalPoint& lo, const LocalPoint& hi) {
    if (!have) {
      x0 = lo.x, y0 = lo.y, x1 = hi.x, y1 = hi.y;
      have = true;
    } else {
      x0 = std::min(x0, lo.x), y0 = std::min(y0, lo.y);
      x1 = std::max(x1, hi.x), y1 = std::max(y1, hi.y);
    }
  };
  if (auto b = graph.bounds()) grow(b->first, b->second);
  if (options.overlay) {
    if (auto b = options.overlay->bounds()) grow(b->first, b->second);
  }
  if (options.backdrop) {
    const TileSpec& s = options.backdrop->spec;
    grow(s.origin, {s.origin.x + s.width_m(), s.origin.y + s.height_m(), 0.0});
  }
  const double margin = 10.0;
  x0 -= margin, y0 -= margin, x1 += margin, y1 += margin;
  const double w = x1 - x0, h = y1 - y0;
  const double scale = options.width_px / w;
  auto sx = [&](double x) { return fmt((x - x0) * scale); };
  auto sy = [&](double y) { return fmt((y1 - y) * scale); };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    fmt(w * scale) + "\" height=\"" + fmt(h * scale) +
                    "\" viewBox=\"0 0 " + fmt(w * scale) + " " + fmt(h * scale) +
                    "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  if (options.backdrop) {
    const RasterTile& r = *options.backdrop;
    const int step = std::max(1, std::max(r.spec.width_px, r.spec.height_px) / 200);
    double peak = 0.0;
    for (double v : r.values) peak = std::max(peak, v);
    out += "<g>\n";
    for (int by = 0; by < r.spec.height_px; by += step) {
      for (int bx = 0; bx < r.spec.width_px; bx += step) {
        double v = 0.0;
        for (int y = by; y < std::min(by + step, r.spec.height_px); ++y) {
          for (int x = bx; x < std::min(bx + step, r.spec.width_px); ++x) {
            v = std::max(v, r.at(x, y));
          }
        }
        if (v <= 0.0 || peak <= 0.0) continue;
        const double cx = r.spec.origin.x + bx * r.spec.resolution;
        const double cy = r.spec.origin.y + (by + step) * r.spec.resolution;
        const double side = step * r.spec.resolution * scale;
        out += "<rect x=\"" + sx(cx) + "\" y=\"" + sy(cy) + "\" width=\"" +
               fmt(side) + "\" height=\"" + fmt(side) +
               "\" fill=\"black\" fill-opacity=\"" + fmt(0.4 * v / peak) + "\"/>\n";
      }
    }
    out += "</g>\n";
  }

  auto draw_edges = [&](const RoadGraph& g, bool muted) {
    for (const auto& [id, e] : g.edges()) {
      out += "<polyline points=\"";
      for (std::size_t i = 0; i < e.polyline.size(); ++i) {
        if (i) out += ' ';
        out += sx(e.polyline[i].x) + "," + sy(e.polyline[i].y);
      }
      out += "\" fill=\"none\" stroke=\"" +
             std::string(muted ? "#999999" : provenance_color(e.provenance)) +
             "\" stroke-width=\"" + (muted ? "6" : "2") + "\"" +
             (muted ? " stroke-opacity=\"0.5\"" : "") + "/>\n";
    }
  };
  if (options.overlay) draw_edges(*options.overlay, true);
  draw_edges(graph, false);
  for (const auto& [id, p] : graph.nodes()) {
    out += "<circle cx=\"" + sx(p.x) + "\" cy=\"" + sy(p.y) + "\" r=\"" +
           fmt(1.5 + 1.0 * graph.degree(id)) + "\" fill=\"black\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

void write_svg(const std::string& path, const RoadGraph& graph,
               const SvgOptions& options) {
  write_file(path, render_svg(graph, options));
}

}  // namespace roadinfer
