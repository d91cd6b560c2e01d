#include "glomseg/annot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace glomseg {

bool is_multiclass(Setting s) { return s == Setting::MC || s == Setting::ME; }

bool is_elliptic(Setting s) { return s == Setting::SE || s == Setting::ME; }

Setting setting_from_string(const std::string& name) {
  if (name == "SC") return Setting::SC;
  if (name == "SE") return Setting::SE;
  if (name == "MC") return Setting::MC;
  if (name == "ME") return Setting::ME;
  throw std::invalid_argument("unknown setting '" + name + "' (expected SC, SE, MC or ME)");
}

std::string to_string(Setting s) {
  switch (s) {
    case Setting::SC: return "SC";
    case Setting::SE: return "SE";
    case Setting::MC: return "MC";
    case Setting::ME: return "ME";
  }
  return "?";
}

void AnnotParams::validate() const {
  if (sigma_g < 0 || sigma_r < 0 || sigma_e < 0 || sigma_n < 0 || sigma_fn < 0 || sigma_fs < 0) {
    throw std::invalid_argument("annotation params: all sigmas must be >= 0");
  }
  if (mu_g <= 0 || mu_r <= 0 || d_n <= 0) {
    throw std::invalid_argument("annotation params: mu_g, mu_r and d_n must be > 0");
  }
  if (mu_n < 0) {
    throw std::invalid_argument("annotation params: mu_n must be >= 0");
  }
  const double min_extent = 2.0 * (mu_r + 3.0 * sigma_r);
  if (patch_h <= min_extent || patch_w <= min_extent) {
    throw std::invalid_argument("annotation params: patch dimensions must exceed 2*(mu_r+3*sigma_r) = " +
                                std::to_string(min_extent));
  }
  if (max_placement_attempts < 1) {
    throw std::invalid_argument("annotation params: max_placement_attempts must be >= 1");
  }
}

double ShapeInstance::max_semi_axis() const {
  if (const Circle* c = std::get_if<Circle>(&geometry)) return c->r;
  const Ellipse& e = std::get<Ellipse>(geometry);
  return std::max(e.r1, e.r2);
}

bool ShapeInstance::contains(double px, double py) const {
  const double dx = px - cx;
  const double dy = py - cy;
  if (const Circle* c = std::get_if<Circle>(&geometry)) {
    return dx * dx + dy * dy <= c->r * c->r;
  }
  const Ellipse& e = std::get<Ellipse>(geometry);
  const double ca = std::cos(e.alpha);
  const double sa = std::sin(e.alpha);
  const double xr = ca * dx + sa * dy;
  const double yr = -sa * dx + ca * dy;
  const double u = xr / e.r1;
  const double v = yr / e.r2;
  return u * u + v * v <= 1.0;
}

int sample_count(double mu, double sigma, Rng& rng) {
  const double draw = rng.normal(mu, sigma);
  const long rounded = std::lround(draw);
  return rounded > 0 ? static_cast<int>(rounded) : 0;
}

ShapeInstance sample_shape(const AnnotParams& params, Rng& rng) {
  constexpr double kMinRadius = 2.0;
  ShapeInstance shape;
  const double r1 = std::max(kMinRadius, rng.normal(params.mu_r, params.sigma_r));
  if (!is_elliptic(params.setting)) {
    shape.geometry = Circle{r1};
    return shape;
  }
  const double r_delta = rng.normal(0.0, params.sigma_e);
  const double r2 = std::max(kMinRadius, r1 + r_delta);
  const double alpha = rng.uniform(0.0, 2.0 * std::numbers::pi);
  shape.geometry = Ellipse{r1, r2, alpha};
  return shape;
}

namespace {

// Uniform-grid neighborhood index over accepted centers. Cell size is twice
// the largest semi-axis, so any overlapping pair lives in adjacent cells. The
// accept/reject predicate is identical to the brute-force pairwise test.
class PlacementGrid {
 public:
  PlacementGrid(int patch_h, int patch_w, double max_radius)
      : cell_(std::max(1.0, 2.0 * max_radius)),
        nx_(std::max(1, static_cast<int>(std::ceil(patch_w / cell_)))),
        ny_(std::max(1, static_cast<int>(std::ceil(patch_h / cell_)))),
        cells_(static_cast<std::size_t>(nx_) * ny_) {}

  bool collides(const std::vector<ShapeInstance>& placed, double cx, double cy,
                double radius) const {
    const int gx = cell_index_x(cx);
    const int gy = cell_index_y(cy);
    for (int y = std::max(0, gy - 1); y <= std::min(ny_ - 1, gy + 1); ++y) {
      for (int x = std::max(0, gx - 1); x <= std::min(nx_ - 1, gx + 1); ++x) {
        for (int idx : cells_[static_cast<std::size_t>(y) * nx_ + x]) {
          const ShapeInstance& other = placed[idx];
          const double dx = other.cx - cx;
          const double dy = other.cy - cy;
          const double min_dist = other.max_semi_axis() + radius;
          if (dx * dx + dy * dy <= min_dist * min_dist) return true;
        }
      }
    }
    return false;
  }

  void insert(int placed_index, double cx, double cy) {
    cells_[static_cast<std::size_t>(cell_index_y(cy)) * nx_ + cell_index_x(cx)].push_back(
        placed_index);
  }

 private:
  int cell_index_x(double x) const {
    return std::clamp(static_cast<int>(x / cell_), 0, nx_ - 1);
  }
  int cell_index_y(double y) const {
    return std::clamp(static_cast<int>(y / cell_), 0, ny_ - 1);
  }

  double cell_;
  int nx_, ny_;
  std::vector<std::vector<int>> cells_;
};

}  // namespace

PlacementResult place_non_overlapping(const std::vector<ShapeInstance>& geometries, int patch_h,
                                      int patch_w, int max_attempts, Rng& rng) {
  if (max_attempts < 1) throw std::invalid_argument("place_non_overlapping: max_attempts >= 1");
  PlacementResult result;
  result.placed.reserve(geometries.size());
  double max_radius = 1.0;
  for (const ShapeInstance& g : geometries) max_radius = std::max(max_radius, g.max_semi_axis());
  PlacementGrid grid(patch_h, patch_w, max_radius);

  for (const ShapeInstance& geom : geometries) {
    const double radius = geom.max_semi_axis();
    bool placed = false;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
      const double cx = rng.uniform(0.0, static_cast<double>(patch_w));
      const double cy = rng.uniform(0.0, static_cast<double>(patch_h));
      if (grid.collides(result.placed, cx, cy, radius)) continue;
      ShapeInstance s = geom;
      s.cx = cx;
      s.cy = cy;
      grid.insert(static_cast<int>(result.placed.size()), cx, cy);
      result.placed.push_back(s);
      placed = true;
      break;
    }
    if (!placed) result.dropped += 1;
  }
  return result;
}

std::vector<std::uint8_t> rasterize(const std::vector<ShapeInstance>& shapes, int height,
                                    int width) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(height) * width, 0);
  for (const ShapeInstance& s : shapes) {
    const double r = s.max_semi_axis();
    const int y0 = std::max(0, static_cast<int>(std::floor(s.cy - r - 1.0)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(s.cy + r + 1.0)));
    const int x0 = std::max(0, static_cast<int>(std::floor(s.cx - r - 1.0)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(s.cx + r + 1.0)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (s.contains(x + 0.5, y + 0.5)) {
          mask[static_cast<std::size_t>(y) * width + x] = 1;
        }
      }
    }
  }
  return mask;
}

std::vector<std::uint8_t> sample_nuclei_mask(const AnnotParams& params, Rng& rng, int* dropped) {
  const int count = sample_count(params.mu_n, params.sigma_n, rng);
  const double radius = params.d_n / 2.0;
  std::vector<ShapeInstance> geoms(static_cast<std::size_t>(count));
  for (ShapeInstance& g : geoms) g.geometry = Circle{radius};
  PlacementResult placed =
      place_non_overlapping(geoms, params.patch_h, params.patch_w, params.max_placement_attempts,
                            rng);
  if (dropped) *dropped = placed.dropped;
  return rasterize(placed.placed, params.patch_h, params.patch_w);
}

void gaussian_blur(std::vector<float>& plane, int height, int width, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  if (radius < 1) return;
  std::vector<double> kernel(static_cast<std::size_t>(radius) + 1);
  double mass = 0.0;
  for (int i = 0; i <= radius; ++i) {
    kernel[i] = std::exp(-0.5 * (double(i) * i) / (sigma * sigma));
    mass += i == 0 ? kernel[i] : 2.0 * kernel[i];
  }
  for (double& k : kernel) k /= mass;

  std::vector<float> tmp(plane.size());
  // horizontal
  for (int y = 0; y < height; ++y) {
    const float* src = plane.data() + static_cast<std::size_t>(y) * width;
    float* dst = tmp.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      double acc = kernel[0] * src[x];
      for (int i = 1; i <= radius; ++i) {
        const double left = x - i >= 0 ? src[x - i] : 0.0;
        const double right = x + i < width ? src[x + i] : 0.0;
        acc += kernel[i] * (left + right);
      }
      dst[x] = static_cast<float>(acc);
    }
  }
  // vertical
  for (int y = 0; y < height; ++y) {
    float* dst = plane.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      double acc = kernel[0] * tmp[static_cast<std::size_t>(y) * width + x];
      for (int i = 1; i <= radius; ++i) {
        const double up = y - i >= 0 ? tmp[static_cast<std::size_t>(y - i) * width + x] : 0.0;
        const double down =
            y + i < height ? tmp[static_cast<std::size_t>(y + i) * width + x] : 0.0;
        acc += kernel[i] * (up + down);
      }
      dst[x] = static_cast<float>(acc);
    }
  }
}

namespace {

void finalize_channel(std::vector<float>& channel, const AnnotParams& params, Rng& rng) {
  for (float& v : channel) {
    v = static_cast<float>(v * 255.0 + rng.normal(0.0, params.sigma_fn));
  }
  gaussian_blur(channel, params.patch_h, params.patch_w, params.sigma_fs);
  for (float& v : channel) {
    v = std::clamp(v, 0.0f, 255.0f) / 255.0f;
  }
}

}  // namespace

void finalize(LabelPatch& label, const AnnotParams& params, Rng& rng) {
  finalize_channel(label.glom, params, rng);
  if (label.has_nuclei()) finalize_channel(label.nuclei, params, rng);
}

LabelPatch generate_label_patch(const AnnotParams& params, std::uint64_t patch_seed) {
  params.validate();
  LabelPatch patch;
  patch.height = params.patch_h;
  patch.width = params.patch_w;

  Rng count_rng(derive_seed(patch_seed, "glom-count"));
  const int n_shapes = sample_count(params.mu_g, params.sigma_g, count_rng);

  // One derived stream per shape so the circular and elliptic settings consume
  // identical placement draws (the sigma_e = 0 equivalence).
  std::vector<ShapeInstance> geoms;
  geoms.reserve(static_cast<std::size_t>(n_shapes));
  for (int i = 0; i < n_shapes; ++i) {
    Rng shape_rng(derive_seed(patch_seed, "glom-shape", static_cast<std::uint64_t>(i)));
    geoms.push_back(sample_shape(params, shape_rng));
  }
  Rng place_rng(derive_seed(patch_seed, "glom-place"));
  PlacementResult placed = place_non_overlapping(geoms, params.patch_h, params.patch_w,
                                                 params.max_placement_attempts, place_rng);
  patch.shapes = placed.placed;
  patch.dropped_glomeruli = placed.dropped;

  const std::vector<std::uint8_t> glom_mask = rasterize(patch.shapes, patch.height, patch.width);
  patch.glom.assign(glom_mask.begin(), glom_mask.end());

  if (is_multiclass(params.setting)) {
    Rng nuclei_rng(derive_seed(patch_seed, "nuclei"));
    const std::vector<std::uint8_t> nuclei_mask =
        sample_nuclei_mask(params, nuclei_rng, &patch.dropped_nuclei);
    patch.nuclei.assign(nuclei_mask.begin(), nuclei_mask.end());
  }

  Rng noise_rng(derive_seed(patch_seed, "noise"));
  finalize(patch, params, noise_rng);
  return patch;
}

std::vector<LabelPatch> generate_label_set(const AnnotParams& params, int count,
                                           std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("generate_label_set: count must be >= 1");
  std::vector<LabelPatch> patches;
  patches.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    patches.push_back(
        generate_label_patch(params, derive_seed(seed, "label-patch", static_cast<std::uint64_t>(i))));
  }
  return patches;
}

}  // namespace glomseg
