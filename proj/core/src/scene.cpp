// Copyright 2026 The Forge Authors
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

#include "forge/scene.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "forge/errors.hpp"

namespace forge {

using nlohmann::json;

void RunConfig::validate() const {
  if (clip_length < 1) throw Error("config: clip length T must be >= 1");
  if (overlap >= clip_length) {
    throw Error("config: overlap N = " + std::to_string(overlap) + " must be < T = " +
                std::to_string(clip_length));
  }
  if (steps < 1) throw Error("config: steps must be >= 1");
  if (!std::isfinite(cfg_scale)) throw Error("config: cfg scale must be finite");
  if (image_height < 8 || image_width < 8) throw Error("config: resolution below one latent cell");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw Error("config: fps must be positive");
  if (schedule_length < 2 || steps > schedule_length) {
    throw Error("config: schedule length must be >= max(2, steps)");
  }
}

void ConfigOverrides::apply_to(RunConfig& cfg) const {
  if (clip_length) cfg.clip_length = *clip_length;
  if (motion_frames) cfg.motion_frames = *motion_frames;
  if (overlap) cfg.overlap = *overlap;
  if (steps) cfg.steps = *steps;
  if (cfg_scale) cfg.cfg_scale = *cfg_scale;
  if (image_height) cfg.image_height = *image_height;
  if (image_width) cfg.image_width = *image_width;
  if (fps) cfg.fps = *fps;
  if (seed) cfg.seed = *seed;
}

RunConfig resolve_config(const ConfigOverrides& scene, const ConfigOverrides& cli) {
  RunConfig cfg;
  scene.apply_to(cfg);
  cli.apply_to(cfg);
  cfg.validate();
  return cfg;
}

const std::vector<std::string>& default_box_classes() {
  static const std::vector<std::string> names{
      "car",   "truck",      "construction_vehicle", "bus",        "trailer",
      "barrier", "motorcycle", "bicycle",            "pedestrian", "traffic_cone"};
  return names;
}

const std::vector<std::string>& default_road_classes() {
  static const std::vector<std::string> names{"drivable_area", "lane_divider", "ped_crossing",
                                              "walkway"};
  return names;
}

void Scene::validate() const {
  rig.validate();
  layout.validate();
  if (layout.num_classes != road_classes.size()) {
    throw Error("scene: layout class count differs from road class names");
  }
  for (const auto& b : boxes) {
    b.validate();
    if (static_cast<std::size_t>(b.class_id) >= box_classes.size()) {
      throw Error("scene: box class id outside box class list");
    }
  }
  for (const auto& p : ego_track) p.validate();
}

namespace {

bool same(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

bool same(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

}  // namespace

bool identical(const Scene& a, const Scene& b) {
  if (a.rig.size() != b.rig.size() || a.boxes.size() != b.boxes.size() ||
      a.ego_track.size() != b.ego_track.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.rig.size(); ++i) {
    const auto& x = a.rig.cameras[i];
    const auto& y = b.rig.cameras[i];
    if (x.name != y.name || !same(x.intrinsics, y.intrinsics) || !same(x.rotation, y.rotation) ||
        !same(x.translation, y.translation) || x.image_height != y.image_height ||
        x.image_width != y.image_width) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.boxes.size(); ++i) {
    const auto& x = a.boxes[i];
    const auto& y = b.boxes[i];
    if (!same(x.center, y.center) || !same(x.size, y.size) || !same(x.yaw, y.yaw) ||
        x.class_id != y.class_id) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.ego_track.size(); ++i) {
    if (!same(a.ego_track[i].world_from_ego, b.ego_track[i].world_from_ego) ||
        !same(a.ego_track[i].timestamp, b.ego_track[i].timestamp)) {
      return false;
    }
  }
  const auto& la = a.layout;
  const auto& lb = b.layout;
  return a.box_classes == b.box_classes && a.road_classes == b.road_classes &&
         la.rows == lb.rows && la.cols == lb.cols && same(la.resolution, lb.resolution) &&
         same(la.origin, lb.origin) && la.num_classes == lb.num_classes && la.cells == lb.cells &&
         a.prompt == b.prompt && a.overrides == b.overrides;
}

// ---------------------------------------------------------------- parsing

namespace {

std::string at_index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(child(path, key), "required field missing");
  return *it;
}

void require_object(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw SchemaError(path.empty() ? "<document>" : path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw SchemaError(child(path, key), "unknown field");
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError(path, "value must be finite");
  return v;
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw SchemaError(path, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, std::size_t n, const std::string& path) {
  if (!j.is_array() || j.size() != n) {
    throw SchemaError(path, "expected an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(number(j[i], at_index(path, i)));
  return out;
}

Eigen::Vector3d vec3(const json& j, const std::string& path) {
  const auto v = numbers(j, 3, path);
  return {v[0], v[1], v[2]};
}

Eigen::Matrix3d mat3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw SchemaError(path, "expected a 3x3 nested array");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    const auto row = numbers(j[r], 3, at_index(path, r));
    for (int c = 0; c < 3; ++c) m(r, c) = row[c];
  }
  return m;
}

std::vector<std::string> names(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a non-empty array of names");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(text(j[i], at_index(path, i)));
  return out;
}

bool is_rotation(const Eigen::Matrix3d& r) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-9 &&
         std::abs(r.determinant() - 1.0) <= 1e-9;
}

Camera parse_camera(const json& j, const std::string& path) {
  require_object(j, path, {"name", "intrinsics", "rotation", "translation", "image_size"});
  Camera cam;
  cam.name = text(require(j, "name", path), child(path, "name"));
  cam.intrinsics = mat3(require(j, "intrinsics", path), child(path, "intrinsics"));
  cam.rotation = mat3(require(j, "rotation", path), child(path, "rotation"));
  cam.translation = vec3(require(j, "translation", path), child(path, "translation"));
  const auto& size = require(j, "image_size", path);
  const std::string size_path = child(path, "image_size");
  if (!size.is_array() || size.size() != 2) throw SchemaError(size_path, "expected [height, width]");
  const std::size_t h = count(size[0], at_index(size_path, 0));
  const std::size_t w = count(size[1], at_index(size_path, 1));
  if (h == 0 || w == 0) throw SchemaError(size_path, "image size must be positive");
  cam.image_height = static_cast<int>(h);
  cam.image_width = static_cast<int>(w);
  const auto& k = cam.intrinsics;
  if (k(1, 0) != 0.0 || k(2, 0) != 0.0 || k(2, 1) != 0.0 || k(2, 2) != 1.0 || !(k(0, 0) > 0.0) ||
      !(k(1, 1) > 0.0)) {
    throw SchemaError(child(path, "intrinsics"),
                      "must be upper-triangular with positive focals and K[2][2] = 1");
  }
  if (!is_rotation(cam.rotation)) {
    throw SchemaError(child(path, "rotation"), "not orthonormal with determinant +1");
  }
  return cam;
}

int class_index(const json& j, const std::vector<std::string>& classes, const std::string& path) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (classes[i] == name) return static_cast<int>(i);
    }
    throw SchemaError(path, "unknown class '" + name + "'");
  }
  const std::size_t id = count(j, path);
  if (id >= classes.size()) throw SchemaError(path, "class id " + std::to_string(id) + " out of range");
  return static_cast<int>(id);
}

Box3D parse_box(const json& j, const std::vector<std::string>& classes, const std::string& path) {
  require_object(j, path, {"center", "size", "yaw", "class"});
  Box3D b;
  b.center = vec3(require(j, "center", path), child(path, "center"));
  b.size = vec3(require(j, "size", path), child(path, "size"));
  if ((b.size.array() <= 0.0).any()) throw SchemaError(child(path, "size"), "sizes must be positive");
  b.yaw = number(require(j, "yaw", path), child(path, "yaw"));
  if (!(b.yaw > -std::numbers::pi && b.yaw <= std::numbers::pi)) {
    throw SchemaError(child(path, "yaw"), "must lie in (-pi, pi]");
  }
  b.class_id = class_index(require(j, "class", path), classes, child(path, "class"));
  return b;
}

BevLayout parse_layout(const json& j, std::vector<std::string>& classes, const std::string& path) {
  require_object(j, path, {"rows", "cols", "resolution", "origin", "classes", "rle"});
  classes = j.contains("classes") ? names(j["classes"], child(path, "classes")) : default_road_classes();
  if (classes.size() > 32) throw SchemaError(child(path, "classes"), "at most 32 road classes");
  BevLayout l;
  l.rows = count(require(j, "rows", path), child(path, "rows"));
  l.cols = count(require(j, "cols", path), child(path, "cols"));
  if (l.rows == 0 || l.cols == 0) throw SchemaError(path, "grid must be non-empty");
  l.resolution = number(require(j, "resolution", path), child(path, "resolution"));
  if (!(l.resolution > 0.0)) throw SchemaError(child(path, "resolution"), "must be positive");
  const auto origin = numbers(require(j, "origin", path), 2, child(path, "origin"));
  l.origin = {origin[0], origin[1]};
  l.num_classes = classes.size();
  const std::uint32_t allowed = l.num_classes == 32 ? ~0u : (1u << l.num_classes) - 1u;

  const auto& rle = require(j, "rle", path);
  const std::string rle_path = child(path, "rle");
  if (!rle.is_array()) throw SchemaError(rle_path, "expected an array of [bits, run] pairs");
  l.cells.reserve(l.rows * l.cols);
  for (std::size_t i = 0; i < rle.size(); ++i) {
    const std::string run_path = at_index(rle_path, i);
    if (!rle[i].is_array() || rle[i].size() != 2) throw SchemaError(run_path, "expected [bits, run]");
    const std::size_t bits = count(rle[i][0], run_path + "[0]");
    const std::size_t run = count(rle[i][1], run_path + "[1]");
    if (bits > allowed) throw SchemaError(run_path, "category bits exceed class count");
    if (run == 0) throw SchemaError(run_path, "run length must be positive");
    if (l.cells.size() + run > l.rows * l.cols) throw SchemaError(run_path, "runs overflow the grid");
    l.cells.insert(l.cells.end(), run, static_cast<std::uint32_t>(bits));
  }
  if (l.cells.size() != l.rows * l.cols) {
    throw SchemaError(rle_path, "runs cover " + std::to_string(l.cells.size()) + " of " +
                                    std::to_string(l.rows * l.cols) + " cells");
  }
  return l;
}

EgoPose parse_pose(const json& j, const std::string& path) {
  require_object(j, path, {"timestamp", "translation", "rotation", "yaw"});
  EgoPose p;
  p.timestamp = number(require(j, "timestamp", path), child(path, "timestamp"));
  const Eigen::Vector3d t = vec3(require(j, "translation", path), child(path, "translation"));
  Eigen::Matrix3d r;
  if (j.contains("rotation") == j.contains("yaw")) {
    throw SchemaError(path, "exactly one of rotation or yaw is required");
  }
  if (j.contains("rotation")) {
    r = mat3(j["rotation"], child(path, "rotation"));
    if (!is_rotation(r)) throw SchemaError(child(path, "rotation"), "not a rotation");
  } else {
    r = yaw_rotation(number(j["yaw"], child(path, "yaw")));
  }
  p.world_from_ego = make_pose(r, t);
  return p;
}

ConfigOverrides parse_overrides(const json& j, const std::string& path) {
  require_object(j, path,
                 {"clip_length", "motion_frames", "overlap", "steps", "cfg_scale", "image_height",
                  "image_width", "fps", "seed"});
  ConfigOverrides o;
  const auto size_field = [&](const char* key, std::optional<std::size_t>& dst) {
    if (j.contains(key)) dst = count(j[key], child(path, key));
  };
  size_field("clip_length", o.clip_length);
  size_field("motion_frames", o.motion_frames);
  size_field("overlap", o.overlap);
  size_field("steps", o.steps);
  size_field("image_height", o.image_height);
  size_field("image_width", o.image_width);
  if (j.contains("cfg_scale")) o.cfg_scale = number(j["cfg_scale"], child(path, "cfg_scale"));
  if (j.contains("fps")) o.fps = number(j["fps"], child(path, "fps"));
  if (j.contains("seed")) o.seed = count(j["seed"], child(path, "seed"));
  return o;
}

}  // namespace

Scene parse_scene(const std::string& text_in) {
  json doc;
  try {
    doc = json::parse(text_in);
  } catch (const json::parse_error& e) {
    throw SchemaError("<document>", e.what());
  }
  require_object(doc, "",
                 {"cameras", "box_classes", "boxes", "layout", "ego_track", "prompt", "config"});
  Scene s;
  const auto& cams = require(doc, "cameras", "");
  if (!cams.is_array() || cams.empty()) throw SchemaError("cameras", "expected a non-empty array");
  for (std::size_t i = 0; i < cams.size(); ++i) {
    s.rig.cameras.push_back(parse_camera(cams[i], at_index("cameras", i)));
  }
  s.box_classes = doc.contains("box_classes") ? names(doc["box_classes"], "box_classes")
                                              : default_box_classes();
  if (doc.contains("boxes")) {
    const auto& boxes = doc["boxes"];
    if (!boxes.is_array()) throw SchemaError("boxes", "expected an array");
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      s.boxes.push_back(parse_box(boxes[i], s.box_classes, at_index("boxes", i)));
    }
  }
  if (doc.contains("layout")) {
    s.layout = parse_layout(doc["layout"], s.road_classes, "layout");
  } else {
    s.road_classes = default_road_classes();
    s.layout = BevLayout::empty(1, 1, 1.0, Eigen::Vector2d::Zero(), s.road_classes.size());
  }
  if (doc.contains("ego_track")) {
    const auto& track = doc["ego_track"];
    if (!track.is_array()) throw SchemaError("ego_track", "expected an array");
    for (std::size_t i = 0; i < track.size(); ++i) {
      s.ego_track.push_back(parse_pose(track[i], at_index("ego_track", i)));
    }
  }
  if (doc.contains("prompt")) s.prompt = text(doc["prompt"], "prompt");
  if (doc.contains("config")) s.overrides = parse_overrides(doc["config"], "config");
  return s;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open scene file " + path.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  try {
    return parse_scene(buf.str());
  } catch (const SchemaError& e) {
    throw SchemaError(e.field(), std::string(e.what()) + " (in " + path.string() + ")");
  }
}

namespace {

json to_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

json to_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

std::string scene_to_string(const Scene& s) {
  json doc;
  json cams = json::array();
  for (const auto& c : s.rig.cameras) {
    cams.push_back({{"name", c.name},
                    {"intrinsics", to_json(c.intrinsics)},
                    {"rotation", to_json(c.rotation)},
                    {"translation", to_json(c.translation)},
                    {"image_size", {c.image_height, c.image_width}}});
  }
  doc["cameras"] = cams;
  doc["box_classes"] = s.box_classes;
  json boxes = json::array();
  for (const auto& b : s.boxes) {
    boxes.push_back({{"center", to_json(b.center)},
                     {"size", to_json(b.size)},
                     {"yaw", b.yaw},
                     {"class", s.box_classes.at(static_cast<std::size_t>(b.class_id))}});
  }
  doc["boxes"] = boxes;

  json rle = json::array();
  for (std::size_t i = 0; i < s.layout.cells.size();) {
    std::size_t j = i;
    while (j < s.layout.cells.size() && s.layout.cells[j] == s.layout.cells[i]) ++j;
    rle.push_back({s.layout.cells[i], j - i});
    i = j;
  }
  doc["layout"] = {{"rows", s.layout.rows},
                   {"cols", s.layout.cols},
                   {"resolution", s.layout.resolution},
                   {"origin", {s.layout.origin.x(), s.layout.origin.y()}},
                   {"classes", s.road_classes},
                   {"rle", rle}};

  json track = json::array();
  for (const auto& p : s.ego_track) {
    track.push_back({{"timestamp", p.timestamp},
                     {"translation", to_json(Eigen::Vector3d(p.world_from_ego.block<3, 1>(0, 3)))},
                     {"rotation", to_json(Eigen::Matrix3d(p.world_from_ego.block<3, 3>(0, 0)))}});
  }
  doc["ego_track"] = track;
  doc["prompt"] = s.prompt;

  json cfg = json::object();
  const auto& o = s.overrides;
  if (o.clip_length) cfg["clip_length"] = *o.clip_length;
  if (o.motion_frames) cfg["motion_frames"] = *o.motion_frames;
  if (o.overlap) cfg["overlap"] = *o.overlap;
  if (o.steps) cfg["steps"] = *o.steps;
  if (o.cfg_scale) cfg["cfg_scale"] = *o.cfg_scale;
  if (o.image_height) cfg["image_height"] = *o.image_height;
  if (o.image_width) cfg["image_width"] = *o.image_width;
  if (o.fps) cfg["fps"] = *o.fps;
  if (o.seed) cfg["seed"] = *o.seed;
  if (!cfg.empty()) doc["config"] = cfg;
  return doc.dump(2) + "\n";
}

void save_scene(const std::filesystem::path& path, const Scene& scene) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write scene file " + path.string());
  os << scene_to_string(scene);
}

// ---------------------------------------------------------------- streams

EgoPose track_pose(const std::vector<EgoPose>& track, std::size_t index, double fps) {
  if (track.empty()) {
    EgoPose p;
    p.timestamp = static_cast<double>(index) / fps;
    return p;
  }
  if (index < track.size()) return track[index];
  const EgoPose& last = track.back();
  EgoPose p = last;
  const std::size_t extra = index - (track.size() - 1);
  p.timestamp = last.timestamp + static_cast<double>(extra) / fps;
  if (track.size() == 1) return p;
  const Eigen::Matrix4d step = relative_pose(track[track.size() - 2], last);
  for (std::size_t i = 0; i < extra; ++i) p.world_from_ego = p.world_from_ego * step;
  return p;
}

TrackSceneStream::TrackSceneStream(const Scene& scene, double fps, std::optional<std::size_t> limit)
    : scene_(scene), fps_(fps), limit_(limit) {
  if (!(fps > 0.0)) throw Error("scene stream: fps must be positive");
}

std::optional<SceneFrame> TrackSceneStream::frame(std::size_t index) {
  if (limit_ && index >= *limit_) return std::nullopt;
  return SceneFrame{index, track_pose(scene_.ego_track, index, fps_), scene_.boxes};
}

}  // namespace forge
