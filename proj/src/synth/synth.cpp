/*
 * Copyright 2026 The cle-screen Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "synth/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <thread>

#include "common/error.hpp"
#include "common/hashing.hpp"
#include "common/log.hpp"

namespace cle::synth {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, std::string_view what) {
  if (!j.is_object()) fail(ErrorCode::kInvalidArgument, std::string(what) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) {
      fail(ErrorCode::kInvalidArgument, "unknown " + std::string(what) + " key '" + key + "'");
    }
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (image_size < 16) fail(ErrorCode::kInvalidArgument, "image_size must be at least 16");
  if (!(fov_radius > 0.0) || 2.0 * fov_radius > image_size) {
    fail(ErrorCode::kInvalidArgument, "fov_radius must be positive and fit inside the image");
  }
  if (fov_center_jitter < 0.0 || noise_std < 0.0) {
    fail(ErrorCode::kInvalidArgument, "fov_center_jitter and noise_std must be >= 0");
  }
  if (jobs < 1) fail(ErrorCode::kInvalidArgument, "jobs must be >= 1");
  for (const auto* t : {&healthy, &carcinoma}) {
    if (!(t->cell_diameter_mean >= 3.0) || t->cell_diameter_std < 0.0 || !(t->membrane_width > 0.0) ||
        t->membrane_break_prob < 0.0 || t->membrane_break_prob > 1.0 || t->jitter < 0.0 || t->interior_std < 0.0) {
      fail(ErrorCode::kInvalidArgument, "invalid texture parameters");
    }
  }
  std::set<std::string> ids;
  for (const auto& d : datasets) {
    if (!ingest::is_valid_dataset_id(d.id)) fail(ErrorCode::kInvalidArgument, "invalid dataset id '" + d.id + "'");
    if (!ids.insert(d.id).second) fail(ErrorCode::kInvalidArgument, "duplicate dataset id '" + d.id + "'");
    if (d.n_patients < 0 || d.n_patients > 99 || d.sequences_per_patient < 1 || d.sequences_per_patient > 99 ||
        d.images_per_sequence < 1 || d.images_per_sequence > 999) {
      fail(ErrorCode::kInvalidArgument, "dataset '" + d.id + "' has out-of-range counts");
    }
    if (d.sites.empty()) fail(ErrorCode::kInvalidArgument, "dataset '" + d.id + "' lists no sites");
  }
}

void to_json(json& j, const SiteSpec& s) {
  j = {{"name", s.name}, {"brightness_mean", s.brightness_mean}, {"brightness_std", s.brightness_std}};
}

void from_json(const json& j, SiteSpec& s) {
  reject_unknown(j, {"name", "brightness_mean", "brightness_std"}, "site");
  s.name = j.at("name").get<std::string>();
  s.brightness_mean = j.value("brightness_mean", s.brightness_mean);
  s.brightness_std = j.value("brightness_std", s.brightness_std);
}

void to_json(json& j, const DatasetSpec& d) {
  j = {{"id", d.id},
       {"n_patients", d.n_patients},
       {"sequences_per_patient", d.sequences_per_patient},
       {"images_per_sequence", d.images_per_sequence},
       {"sites", d.sites}};
}

void from_json(const json& j, DatasetSpec& d) {
  reject_unknown(j, {"id", "n_patients", "sequences_per_patient", "images_per_sequence", "sites"}, "dataset");
  d.id = j.at("id").get<std::string>();
  d.n_patients = j.value("n_patients", d.n_patients);
  d.sequences_per_patient = j.value("sequences_per_patient", d.sequences_per_patient);
  d.images_per_sequence = j.value("images_per_sequence", d.images_per_sequence);
  d.sites = j.at("sites").get<std::vector<SiteSpec>>();
}

void to_json(json& j, const TextureSpec& t) {
  j = {{"regular", t.regular},
       {"cell_diameter_mean", t.cell_diameter_mean},
       {"cell_diameter_std", t.cell_diameter_std},
       {"jitter", t.jitter},
       {"membrane_width", t.membrane_width},
       {"membrane_break_prob", t.membrane_break_prob},
       {"interior_level", t.interior_level},
       {"interior_std", t.interior_std}};
}

void from_json(const json& j, TextureSpec& t) {
  reject_unknown(j,
                 {"regular", "cell_diameter_mean", "cell_diameter_std", "jitter", "membrane_width",
                  "membrane_break_prob", "interior_level", "interior_std"},
                 "texture");
  t.regular = j.value("regular", t.regular);
  t.cell_diameter_mean = j.value("cell_diameter_mean", t.cell_diameter_mean);
  t.cell_diameter_std = j.value("cell_diameter_std", t.cell_diameter_std);
  t.jitter = j.value("jitter", t.jitter);
  t.membrane_width = j.value("membrane_width", t.membrane_width);
  t.membrane_break_prob = j.value("membrane_break_prob", t.membrane_break_prob);
  t.interior_level = j.value("interior_level", t.interior_level);
  t.interior_std = j.value("interior_std", t.interior_std);
}

void to_json(json& j, const SynthConfig& c) {
  j = {{"seed", c.seed},
       {"image_size", c.image_size},
       {"fov_radius", c.fov_radius},
       {"fov_center_jitter", c.fov_center_jitter},
       {"noise_std", c.noise_std},
       {"class_brightness_offset", c.class_brightness_offset},
       {"healthy", c.healthy},
       {"carcinoma", c.carcinoma},
       {"datasets", c.datasets}};
}

void from_json(const json& j, SynthConfig& c) {
  reject_unknown(j,
                 {"preset", "seed", "image_size", "fov_radius", "fov_center_jitter", "noise_std",
                  "class_brightness_offset", "healthy", "carcinoma", "datasets", "jobs"},
                 "synth config");
  // A preset supplies defaults that the remaining keys override.
  if (j.contains("preset")) c = preset(j.at("preset").get<std::string>());
  try {
    c.seed = j.value("seed", c.seed);
    c.image_size = j.value("image_size", c.image_size);
    c.fov_radius = j.value("fov_radius", c.fov_radius);
    c.fov_center_jitter = j.value("fov_center_jitter", c.fov_center_jitter);
    c.noise_std = j.value("noise_std", c.noise_std);
    c.class_brightness_offset = j.value("class_brightness_offset", c.class_brightness_offset);
    if (j.contains("healthy")) from_json(j.at("healthy"), c.healthy);
    if (j.contains("carcinoma")) from_json(j.at("carcinoma"), c.carcinoma);
    if (j.contains("datasets")) c.datasets = j.at("datasets").get<std::vector<DatasetSpec>>();
    c.jobs = j.value("jobs", c.jobs);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed synth config: ") + e.what());
  }
}

SynthConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read synth config '" + path.string() + "'");
  SynthConfig c;
  try {
    from_json(json::parse(in), c);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kInvalidArgument, "synth config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  c.validate();
  return c;
}

namespace {

TextureSpec healthy_texture() {
  TextureSpec t;
  t.regular = true;
  t.cell_diameter_mean = 14.0;
  t.cell_diameter_std = 1.0;
  t.jitter = 0.12;
  t.membrane_width = 1.1;
  t.membrane_break_prob = 0.0;
  t.interior_level = 0.3;
  t.interior_std = 0.03;
  return t;
}

TextureSpec carcinoma_texture() {
  TextureSpec t;
  t.regular = false;
  t.cell_diameter_mean = 16.0;
  t.cell_diameter_std = 9.0;
  t.membrane_width = 1.6;
  t.membrane_break_prob = 0.45;
  t.interior_level = 0.45;
  t.interior_std = 0.2;
  return t;
}

}  // namespace

SynthConfig preset(std::string_view name) {
  SynthConfig c;
  c.healthy = healthy_texture();
  c.carcinoma = carcinoma_texture();
  if (name == "reference") {
    // Palate and lip are cornified and respond weakly.
    c.datasets = {{"OC", 12, 2, 2,
                   {{"alveolar_ridge", 110.0, 10.0}, {"palate", 45.0, 6.0}, {"lip", 50.0, 6.0}}},
                  {"VC", 5, 2, 2, {{"vocal_cord", 120.0, 10.0}}}};
  } else if (name == "brightness") {
    c.class_brightness_offset = 70.0;
    c.datasets = {{"OC", 12, 2, 2, {{"alveolar_ridge", 70.0, 6.0}}}, {"VC", 5, 2, 2, {{"vocal_cord", 70.0, 6.0}}}};
  } else if (name == "texture-only") {
    c.datasets = {{"OC", 12, 2, 2, {{"alveolar_ridge", 100.0, 0.0}}}, {"VC", 5, 2, 2, {{"vocal_cord", 100.0, 0.0}}}};
  } else if (name == "separable") {
    // Exaggerated texture contrast so a short training run separates the classes.
    c.healthy.cell_diameter_mean = 10.0;
    c.healthy.cell_diameter_std = 0.5;
    c.healthy.jitter = 0.1;
    c.healthy.membrane_width = 0.9;
    c.healthy.interior_level = 0.2;
    c.healthy.interior_std = 0.02;
    c.carcinoma.cell_diameter_mean = 28.0;
    c.carcinoma.cell_diameter_std = 12.0;
    c.carcinoma.membrane_width = 2.5;
    c.carcinoma.membrane_break_prob = 0.6;
    c.carcinoma.interior_level = 0.5;
    c.carcinoma.interior_std = 0.25;
    c.datasets = {{"OC", 12, 2, 2, {{"alveolar_ridge", 100.0, 10.0}, {"palate", 85.0, 10.0}}},
                  {"VC", 5, 4, 2, {{"vocal_cord", 110.0, 10.0}}}};
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown synth preset '" + std::string(name) + "'");
  }
  return c;
}

std::vector<std::string> preset_names() { return {"reference", "brightness", "texture-only", "separable"}; }

void to_json(json& j, const GroundTruth& g) {
  json images = json::array();
  for (const auto& t : g.images) {
    images.push_back({{"image_id", t.image_id},
                      {"dataset_id", t.dataset_id},
                      {"site", t.site},
                      {"label", ingest::to_string(t.label)},
                      {"fov_center_x", t.cx},
                      {"fov_center_y", t.cy},
                      {"fov_radius", t.radius},
                      {"brightness_target", t.brightness_target}});
  }
  j = {{"config", g.config}, {"images", images}};
}

void from_json(const json& j, GroundTruth& g) {
  from_json(j.at("config"), g.config);
  g.images.clear();
  for (const auto& e : j.at("images")) {
    ImageTruth t;
    t.image_id = e.at("image_id").get<std::string>();
    t.dataset_id = e.at("dataset_id").get<std::string>();
    t.site = e.at("site").get<std::string>();
    const auto label = ingest::parse_label(e.at("label").get<std::string>());
    if (!label) fail(ErrorCode::kFormat, "bad label in ground truth for '" + t.image_id + "'");
    t.label = *label;
    t.cx = e.at("fov_center_x").get<double>();
    t.cy = e.at("fov_center_y").get<double>();
    t.radius = e.at("fov_radius").get<double>();
    t.brightness_target = e.at("brightness_target").get<double>();
    g.images.push_back(std::move(t));
  }
}

namespace {

struct Point {
  double x, y;
};

// Seeds (cell centres) covering [-margin, size + margin]^2.
std::vector<Point> place_cells(const TextureSpec& t, int size, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point> cells;
  if (t.regular) {
    const double a = std::max(4.0, t.cell_diameter_mean + t.cell_diameter_std * gauss(rng));
    const double margin = 2.0 * a;
    const double angle = unit(rng) * std::numbers::pi / 3.0;
    const double ca = std::cos(angle), sa = std::sin(angle);
    const double c = size / 2.0;
    const double half = size / 2.0 + margin;
    const double reach = half * std::numbers::sqrt2;
    const double row_h = a * std::sqrt(3.0) / 2.0;
    const double ox = unit(rng) * a, oy = unit(rng) * row_h;
    const int rows = static_cast<int>(std::ceil(reach / row_h));
    const int cols = static_cast<int>(std::ceil(reach / a));
    for (int r = -rows; r <= rows; ++r) {
      for (int q = -cols - 1; q <= cols; ++q) {
        const double lx = q * a + ((r & 1) ? a / 2.0 : 0.0) + ox + t.jitter * a * gauss(rng);
        const double ly = r * row_h + oy + t.jitter * a * gauss(rng);
        const double x = c + ca * lx - sa * ly, y = c + sa * lx + ca * ly;
        if (x >= -margin && x <= size + margin && y >= -margin && y <= size + margin) cells.push_back({x, y});
      }
    }
    return cells;
  }
  // Random packing of discs with heterogeneous diameters.
  const double d_max = t.cell_diameter_mean + 3.0 * t.cell_diameter_std;
  const double margin = d_max;
  const double extent = size + 2.0 * margin;
  const double lo = std::max(3.0, t.cell_diameter_mean - 2.0 * t.cell_diameter_std);
  std::vector<double> diameters;
  const int attempts = static_cast<int>(40.0 * extent * extent / (t.cell_diameter_mean * t.cell_diameter_mean));
  for (int k = 0; k < attempts; ++k) {
    const double d = std::clamp(t.cell_diameter_mean + t.cell_diameter_std * gauss(rng), lo, d_max);
    const Point p{unit(rng) * extent - margin, unit(rng) * extent - margin};
    bool ok = true;
    for (std::size_t i = 0; i < cells.size() && ok; ++i) {
      const double dx = cells[i].x - p.x, dy = cells[i].y - p.y;
      const double need = 0.5 * (d + diameters[i]);
      ok = dx * dx + dy * dy >= need * need;
    }
    if (ok) {
      cells.push_back(p);
      diameters.push_back(d);
    }
  }
  return cells;
}

class CellIndex {
 public:
  CellIndex(const std::vector<Point>& cells, double bucket) : cells_(cells), bucket_(bucket) {
    for (const auto& p : cells) {
      min_x_ = std::min(min_x_, p.x);
      min_y_ = std::min(min_y_, p.y);
      max_x_ = std::max(max_x_, p.x);
      max_y_ = std::max(max_y_, p.y);
    }
    nx_ = static_cast<int>((max_x_ - min_x_) / bucket_) + 1;
    ny_ = static_cast<int>((max_y_ - min_y_) / bucket_) + 1;
    buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      buckets_[index(bx(cells[i].x), by(cells[i].y))].push_back(static_cast<int>(i));
    }
  }

  // Nearest and second-nearest cell to (x, y).
  std::pair<int, int> nearest_two(double x, double y) const {
    int best = -1, second = -1;
    double d1 = INFINITY, d2 = INFINITY;
    const int cx = std::clamp(bx(x), 0, nx_ - 1), cy = std::clamp(by(y), 0, ny_ - 1);
    for (int ring = 0;; ++ring) {
      for (int gy = cy - ring; gy <= cy + ring; ++gy) {
        if (gy < 0 || gy >= ny_) continue;
        for (int gx = cx - ring; gx <= cx + ring; ++gx) {
          if (gx < 0 || gx >= nx_) continue;
          if (std::max(std::abs(gx - cx), std::abs(gy - cy)) != ring) continue;
          for (int i : buckets_[index(gx, gy)]) {
            const double dx = cells_[i].x - x, dy = cells_[i].y - y;
            const double d = dx * dx + dy * dy;
            if (d < d1) {
              d2 = d1, second = best;
              d1 = d, best = i;
            } else if (d < d2) {
              d2 = d, second = i;
            }
          }
        }
      }
      // Everything beyond this ring is at least ring * bucket away.
      const double covered = ring * bucket_;
      if (second >= 0 && covered * covered >= d2) break;
      if (ring > nx_ + ny_) break;
    }
    return {best, second};
  }

 private:
  int bx(double x) const { return static_cast<int>((x - min_x_) / bucket_); }
  int by(double y) const { return static_cast<int>((y - min_y_) / bucket_); }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * nx_ + x; }

  const std::vector<Point>& cells_;
  double bucket_;
  double min_x_ = INFINITY, min_y_ = INFINITY, max_x_ = -INFINITY, max_y_ = -INFINITY;
  int nx_ = 0, ny_ = 0;
  std::vector<std::vector<int>> buckets_;
};

bool inside_fov(const ImageTruth& t, int x, int y) {
  const double dx = x + 0.5 - t.cx, dy = y + 0.5 - t.cy;
  return dx * dx + dy * dy <= t.radius * t.radius;
}

}  // namespace

GrayImage render_image(const SynthConfig& config, const ImageTruth& truth, std::uint64_t seed) {
  const TextureSpec& tex = truth.label == ingest::Label::kCarcinoma ? config.carcinoma : config.healthy;
  const int size = config.image_size;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto cells = place_cells(tex, size, rng);
  if (cells.size() < 2) fail(ErrorCode::kInternal, "texture produced fewer than two cells");
  std::vector<double> interior(cells.size());
  for (auto& v : interior) v = std::clamp(tex.interior_level + tex.interior_std * gauss(rng), 0.0, 1.0);
  const std::uint64_t break_seed = rng();
  auto border_strength = [&](int i, int j) {
    if (tex.membrane_break_prob <= 0.0) return 1.0;
    const auto lo = static_cast<std::uint64_t>(std::min(i, j)), hi = static_cast<std::uint64_t>(std::max(i, j));
    const std::uint64_t h = splitmix64(break_seed ^ (lo << 32) ^ hi);
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return u < tex.membrane_break_prob ? 0.15 : 1.0;
  };

  const CellIndex index(cells, std::max(4.0, tex.cell_diameter_mean));
  const double inv_two_w2 = 1.0 / (2.0 * tex.membrane_width * tex.membrane_width);
  std::vector<double> texture(static_cast<std::size_t>(size) * size, 0.0);
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if (!inside_fov(truth, x, y)) continue;
      const double px = x + 0.5, py = y + 0.5;
      const auto [i, j] = index.nearest_two(px, py);
      const double d1 = std::hypot(cells[i].x - px, cells[i].y - py);
      const double d2 = std::hypot(cells[j].x - px, cells[j].y - py);
      const double sep = std::hypot(cells[i].x - cells[j].x, cells[i].y - cells[j].y);
      // Distance to the bisector between the two nearest cells.
      const double e = sep > 0.0 ? (d2 * d2 - d1 * d1) / (2.0 * sep) : 0.0;
      const double m = std::exp(-e * e * inv_two_w2) * border_strength(i, j);
      const double v = interior[i] * (1.0 - m) + m;
      texture[static_cast<std::size_t>(y) * size + x] = v;
      sum += v;
      ++count;
    }
  }

  GrayImage image(size, size, 0);
  const double scale = count > 0 && sum > 0.0 ? truth.brightness_target * static_cast<double>(count) / sum : 0.0;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      if (!inside_fov(truth, x, y)) continue;
      const double v = texture[static_cast<std::size_t>(y) * size + x] * scale + config.noise_std * gauss(rng);
      image.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return image;
}

namespace {

std::string image_id(const std::string& dataset, int p, int s, int f) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "-p%02d-s%02d-f%03d", p + 1, s + 1, f + 1);
  return dataset + buf;
}

}  // namespace

GenerateResult generate(const SynthConfig& config, const fs::path& out_dir, bool force) {
  config.validate();
  std::error_code ec;
  if (fs::exists(out_dir) && !fs::is_empty(out_dir, ec) && !force) {
    fail(ErrorCode::kIo, "output directory '" + out_dir.string() + "' is not empty (use --force to overwrite)");
  }
  const fs::path images_dir = out_dir / "images";
  fs::create_directories(images_dir);

  GroundTruth truth{config, {}};
  std::vector<ingest::ImageRecord> records;
  for (const auto& ds : config.datasets) {
    const std::uint64_t ds_seed = derive_seed(config.seed, ds.id);
    for (int p = 0; p < ds.n_patients; ++p) {
      char pid[16];
      std::snprintf(pid, sizeof pid, "-p%02d", p + 1);
      const std::string patient = ds.id + pid;
      for (int s = 0; s < ds.sequences_per_patient; ++s) {
        char sid[16];
        std::snprintf(sid, sizeof sid, "-s%02d", s + 1);
        const std::string sequence = patient + sid;
        // Alternate classes so that every patient with two or more sequences
        // contributes both.
        const auto label = (p + s) % 2 == 0 ? ingest::Label::kCarcinoma : ingest::Label::kHealthy;
        const auto& site = ds.sites[static_cast<std::size_t>(p * ds.sequences_per_patient + s) % ds.sites.size()];
        for (int f = 0; f < ds.images_per_sequence; ++f) {
          ImageTruth t;
          t.image_id = image_id(ds.id, p, s, f);
          t.dataset_id = ds.id;
          t.site = site.name;
          t.label = label;
          std::mt19937_64 rng(derive_seed(ds_seed, t.image_id));
          std::normal_distribution<double> gauss(0.0, 1.0);
          const double lo = config.fov_radius, hi = config.image_size - config.fov_radius;
          t.cx = std::clamp(config.image_size / 2.0 + config.fov_center_jitter * gauss(rng), lo, hi);
          t.cy = std::clamp(config.image_size / 2.0 + config.fov_center_jitter * gauss(rng), lo, hi);
          t.radius = config.fov_radius;
          double target = site.brightness_mean + site.brightness_std * gauss(rng);
          if (label == ingest::Label::kCarcinoma) target += config.class_brightness_offset;
          t.brightness_target = std::clamp(target, 8.0, 240.0);
          records.push_back({t.image_id, fs::absolute(images_dir / (t.image_id + ".png")).lexically_normal(), patient,
                             sequence, ds.id, site.name, label});
          truth.images.push_back(std::move(t));
        }
      }
    }
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < truth.images.size(); i = next++) {
      try {
        const auto& t = truth.images[i];
        const auto image = render_image(config, t, derive_seed(derive_seed(config.seed, "render"), t.image_id));
        write_png(records[i].path, image);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int jobs = std::min<int>(config.jobs, static_cast<int>(std::max<std::size_t>(1, truth.images.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ingest::Manifest manifest(std::move(records));
  save_manifest(manifest, out_dir / kManifestName);
  {
    std::ofstream out(out_dir / kTruthName, std::ios::binary);
    if (!out) fail(ErrorCode::kIo, "cannot write ground truth sidecar");
    out << json(truth).dump(2) << '\n';
  }
  log::info("generated " + std::to_string(manifest.size()) + " images under '" + out_dir.string() + "'");
  return {std::move(manifest), std::move(truth)};
}

GroundTruth describe(const fs::path& corpus_dir) {
  const fs::path path = corpus_dir / kTruthName;
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read '" + path.string() + "'");
  GroundTruth g;
  try {
    from_json(json::parse(in), g);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, "malformed ground truth '" + path.string() + "': " + e.what());
  }
  return g;
}

}  // namespace cle::synth
