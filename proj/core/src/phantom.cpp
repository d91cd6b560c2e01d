#include "glomseg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace glomseg {

void PhantomParams::validate() const {
  if (speckle_density < 0 || nuclei_density < 0) {
    throw std::invalid_argument("phantom params: densities must be >= 0");
  }
  if (texture_scale <= 0 || texture_octaves < 1 || nucleus_diameter <= 0) {
    throw std::invalid_argument("phantom params: texture_scale, octaves and nucleus_diameter must be positive");
  }
  auto check_color = [](const std::array<double, 3>& c, const char* name) {
    for (double v : c) {
      if (v < 0 || v > 255) {
        throw std::invalid_argument(std::string("phantom params: ") + name +
                                    " components must be in [0,255]");
      }
    }
  };
  check_color(background_mean, "background_mean");
  check_color(object_mean, "object_mean");
  check_color(nuclei_mean, "nuclei_mean");
}

PhantomParams PhantomParams::stain_b() {
  PhantomParams p;
  p.background_mean = {214, 222, 235};
  p.object_mean = {150, 168, 200};
  p.nuclei_mean = {60, 70, 120};
  return p;
}

namespace {

// Multi-octave value noise in roughly [-1, 1]: coarse lattices of normal draws,
// bilinearly interpolated, amplitude halved per octave.
std::vector<float> value_noise(int height, int width, double scale, int octaves, Rng& rng) {
  std::vector<float> field(static_cast<std::size_t>(height) * width, 0.0f);
  double amplitude = 1.0;
  double norm = 0.0;
  for (int oct = 0; oct < octaves; ++oct) {
    const double cell = std::max(2.0, scale / std::pow(2.0, oct));
    const int gx = static_cast<int>(std::ceil(width / cell)) + 2;
    const int gy = static_cast<int>(std::ceil(height / cell)) + 2;
    std::vector<double> lattice(static_cast<std::size_t>(gx) * gy);
    for (double& v : lattice) v = rng.normal();
    for (int y = 0; y < height; ++y) {
      const double fy = y / cell;
      const int iy = static_cast<int>(fy);
      const double ty = fy - iy;
      for (int x = 0; x < width; ++x) {
        const double fx = x / cell;
        const int ix = static_cast<int>(fx);
        const double tx = fx - ix;
        const double v00 = lattice[static_cast<std::size_t>(iy) * gx + ix];
        const double v01 = lattice[static_cast<std::size_t>(iy) * gx + ix + 1];
        const double v10 = lattice[static_cast<std::size_t>(iy + 1) * gx + ix];
        const double v11 = lattice[static_cast<std::size_t>(iy + 1) * gx + ix + 1];
        const double top = v00 + (v01 - v00) * tx;
        const double bot = v10 + (v11 - v10) * tx;
        field[static_cast<std::size_t>(y) * width + x] +=
            static_cast<float>(amplitude * (top + (bot - top) * ty));
      }
    }
    norm += amplitude;
    amplitude *= 0.5;
  }
  for (float& v : field) v = static_cast<float>(v / norm / 2.0);
  return field;
}

// Canonical radial coordinate: <= 1 inside the shape, 1 on the boundary.
double canonical_rho(const ShapeInstance& s, double px, double py) {
  const double dx = px - s.cx;
  const double dy = py - s.cy;
  if (const Circle* c = std::get_if<Circle>(&s.geometry)) {
    return std::sqrt(dx * dx + dy * dy) / c->r;
  }
  const Ellipse& e = std::get<Ellipse>(s.geometry);
  const double ca = std::cos(e.alpha);
  const double sa = std::sin(e.alpha);
  const double xr = ca * dx + sa * dy;
  const double yr = -sa * dx + ca * dy;
  const double u = xr / e.r1;
  const double v = yr / e.r2;
  return std::sqrt(u * u + v * v);
}

}  // namespace

PhantomPatch generate_phantom_patch(const AnnotParams& annot, const PhantomParams& phantom,
                                    std::uint64_t patch_seed) {
  annot.validate();
  phantom.validate();
  const int h = annot.patch_h;
  const int w = annot.patch_w;

  PhantomPatch patch;
  patch.image = ImageBuffer(h, w, 3);

  // Geometry reuses the annotation-model machinery (same per-shape streams).
  Rng count_rng(derive_seed(patch_seed, "glom-count"));
  const int n_shapes = sample_count(annot.mu_g, annot.sigma_g, count_rng);
  std::vector<ShapeInstance> geoms;
  geoms.reserve(static_cast<std::size_t>(n_shapes));
  for (int i = 0; i < n_shapes; ++i) {
    Rng shape_rng(derive_seed(patch_seed, "glom-shape", static_cast<std::uint64_t>(i)));
    geoms.push_back(sample_shape(annot, shape_rng));
  }
  Rng place_rng(derive_seed(patch_seed, "glom-place"));
  PlacementResult placed =
      place_non_overlapping(geoms, h, w, annot.max_placement_attempts, place_rng);
  patch.shapes = placed.placed;
  patch.gt_mask = rasterize(patch.shapes, h, w);

  Rng tex_rng(derive_seed(patch_seed, "texture"));
  const std::vector<float> tex =
      value_noise(h, w, phantom.texture_scale, phantom.texture_octaves, tex_rng);
  Rng speckle_rng(derive_seed(patch_seed, "speckle"));

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const float t = tex[p];
      const bool inside = patch.gt_mask[p] != 0;
      const bool speckle = speckle_rng.uniform() < phantom.speckle_density;
      for (int c = 0; c < 3; ++c) {
        double v;
        if (inside) {
          v = phantom.object_mean[c] + phantom.object_std[c] * t * 4.0;
          if (speckle) v *= 1.0 - phantom.speckle_darkness;
        } else {
          v = phantom.background_mean[c] + phantom.background_std[c] * t * 4.0;
        }
        patch.image.at(y, x, c) = static_cast<float>(v / 255.0);
      }
    }
  }

  // Boundary ring, drawn per shape over the ring band only.
  for (const ShapeInstance& s : patch.shapes) {
    const double r = s.max_semi_axis();
    const int y0 = std::max(0, static_cast<int>(std::floor(s.cy - r - 2.0)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(s.cy + r + 2.0)));
    const int x0 = std::max(0, static_cast<int>(std::floor(s.cx - r - 2.0)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(s.cx + r + 2.0)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double rho = canonical_rho(s, x + 0.5, y + 0.5);
        if (rho >= 1.0 - phantom.ring_width && rho <= 1.0) {
          for (int c = 0; c < 3; ++c) {
            patch.image.at(y, x, c) *= static_cast<float>(1.0 - phantom.ring_darkness);
          }
        }
      }
    }
  }

  // Nuclei dots, denser inside glomeruli by nuclei_inside_factor: candidates
  // arrive at the inside rate, outside ones are thinned.
  Rng dot_rng(derive_seed(patch_seed, "nuclei-dots"));
  const double factor = std::max(1.0, phantom.nuclei_inside_factor);
  const int n_candidates =
      static_cast<int>(std::lround(phantom.nuclei_density * factor * h * w));
  const double keep_outside = 1.0 / factor;
  const double dot_r = phantom.nucleus_diameter / 2.0;
  for (int i = 0; i < n_candidates; ++i) {
    const double cx = dot_rng.uniform(0.0, static_cast<double>(w));
    const double cy = dot_rng.uniform(0.0, static_cast<double>(h));
    const double keep_draw = dot_rng.uniform();
    const int py = std::clamp(static_cast<int>(cy), 0, h - 1);
    const int px = std::clamp(static_cast<int>(cx), 0, w - 1);
    const bool inside = patch.gt_mask[static_cast<std::size_t>(py) * w + px] != 0;
    if (!inside && keep_draw >= keep_outside) continue;
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - dot_r)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(cy + dot_r)));
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - dot_r)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(cx + dot_r)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        if (dx * dx + dy * dy > dot_r * dot_r) continue;
        for (int c = 0; c < 3; ++c) {
          patch.image.at(y, x, c) = static_cast<float>(phantom.nuclei_mean[c] / 255.0);
        }
      }
    }
  }

  // Soften edges slightly, per channel, then clip.
  std::vector<float> plane(static_cast<std::size_t>(h) * w);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t p = 0; p < plane.size(); ++p) plane[p] = patch.image.data[p * 3 + c];
    gaussian_blur(plane, h, w, 0.5);
    for (std::size_t p = 0; p < plane.size(); ++p) {
      patch.image.data[p * 3 + c] = std::clamp(plane[p], 0.0f, 1.0f);
    }
  }
  return patch;
}

std::vector<PhantomPatch> generate_phantom_set(const AnnotParams& annot,
                                               const PhantomParams& phantom, int count,
                                               std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("generate_phantom_set: count must be >= 1");
  std::vector<PhantomPatch> patches;
  patches.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    patches.push_back(generate_phantom_patch(
        annot, phantom, derive_seed(seed, "phantom-patch", static_cast<std::uint64_t>(i))));
  }
  return patches;
}

PhantomParams phantom_params_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read phantom params: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  PhantomParams p;
  p.ring_darkness = j.value("ring_darkness", p.ring_darkness);
  p.ring_width = j.value("ring_width", p.ring_width);
  p.speckle_density = j.value("speckle_density", p.speckle_density);
  p.speckle_darkness = j.value("speckle_darkness", p.speckle_darkness);
  p.texture_scale = j.value("texture_scale", p.texture_scale);
  p.texture_octaves = j.value("texture_octaves", p.texture_octaves);
  p.nuclei_density = j.value("nuclei_density", p.nuclei_density);
  p.nuclei_inside_factor = j.value("nuclei_inside_factor", p.nuclei_inside_factor);
  p.nucleus_diameter = j.value("nucleus_diameter", p.nucleus_diameter);
  auto read_color = [&j](const char* key, std::array<double, 3>& dst) {
    if (j.contains(key)) {
      const auto& arr = j.at(key);
      for (int i = 0; i < 3; ++i) dst[i] = arr.at(i).get<double>();
    }
  };
  read_color("background_mean", p.background_mean);
  read_color("background_std", p.background_std);
  read_color("object_mean", p.object_mean);
  read_color("object_std", p.object_std);
  read_color("nuclei_mean", p.nuclei_mean);
  p.validate();
  return p;
}

}  // namespace glomseg
