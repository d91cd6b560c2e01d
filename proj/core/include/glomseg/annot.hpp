#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "glomseg/rng.hpp"

namespace glomseg {

// Annotation-simulation settings: single/multi class x circular/elliptic.
enum class Setting { SC, SE, MC, ME };

bool is_multiclass(Setting s);
bool is_elliptic(Setting s);
Setting setting_from_string(const std::string& name);
std::string to_string(Setting s);

struct AnnotParams {
  double mu_g = 7.0;      // expected objects per patch
  double sigma_g = 2.0;
  double mu_r = 18.0;     // radius distribution, pixels
  double sigma_r = 2.0;
  double sigma_e = 2.0;   // eccentricity spread, pixels
  double mu_n = 5000.0;   // nuclei count distribution
  double sigma_n = 50.0;
  double d_n = 4.0;       // nucleus diameter, pixels
  double sigma_fn = 5.0;  // additive noise std, 8-bit intensity units
  double sigma_fs = 2.0;  // smoothing std, pixels
  int patch_h = 500;
  int patch_w = 500;
  Setting setting = Setting::MC;
  int max_placement_attempts = 100;

  void validate() const;  // throws std::invalid_argument
};

struct Circle {
  double r;
};
struct Ellipse {
  double r1, r2, alpha;  // alpha in [0, 2*pi)
};

struct ShapeInstance {
  double cx = 0.0, cy = 0.0;  // continuous pixel coordinates
  std::variant<Circle, Ellipse> geometry{Circle{1.0}};

  double max_semi_axis() const;
  // Membership test for the pixel-center point (px, py); ellipse via the
  // alpha-rotated canonical form.
  bool contains(double px, double py) const;
};

struct LabelPatch {
  int height = 0, width = 0;
  std::vector<float> glom;    // H*W in [0,1]
  std::vector<float> nuclei;  // empty iff single-class setting
  std::vector<ShapeInstance> shapes;  // generating ground truth (glomeruli)
  int dropped_glomeruli = 0;
  int dropped_nuclei = 0;

  bool has_nuclei() const { return !nuclei.empty(); }
};

// max(0, round(N(mu, sigma^2) draw)) -- quantized Gaussian count.
int sample_count(double mu, double sigma, Rng& rng);

// Geometry only; center left at (0,0). Circular settings draw r, elliptic
// settings draw r1, r_delta and alpha. Radii clamp at 2 px.
ShapeInstance sample_shape(const AnnotParams& params, Rng& rng);

struct PlacementResult {
  std::vector<ShapeInstance> placed;
  int dropped = 0;
};

// Uniform centers over the patch rectangle; a candidate overlapping any
// accepted shape (conservative bounding-circle test: center distance must
// exceed the sum of max semi-axes) is redrawn, up to max_attempts per shape,
// then dropped. Border clipping is allowed.
PlacementResult place_non_overlapping(const std::vector<ShapeInstance>& geometries, int patch_h,
                                      int patch_w, int max_attempts, Rng& rng);

// Pixel (row, col) is set iff its center (col+0.5, row+0.5) lies inside any
// shape.
std::vector<std::uint8_t> rasterize(const std::vector<ShapeInstance>& shapes, int height,
                                    int width);

// Quantized-Gaussian count of d_n-diameter discs, uniformly placed with
// nucleus-nucleus non-overlap (same rejection and drop rule as glomeruli;
// independent of the glomerulus mask).
std::vector<std::uint8_t> sample_nuclei_mask(const AnnotParams& params, Rng& rng,
                                             int* dropped = nullptr);

// Scale channels to [0,255], add N(0, sigma_fn^2) noise per pixel, blur with a
// renormalized Gaussian kernel of radius ceil(3*sigma_fs), clip to [0,255],
// rescale to [0,1]. Noise draw order: glomeruli channel first, then nuclei.
void finalize(LabelPatch& label, const AnnotParams& params, Rng& rng);

// Full pipeline, deterministic per (params, seed); patch i uses streams
// derived from (seed, i).
std::vector<LabelPatch> generate_label_set(const AnnotParams& params, int count,
                                           std::uint64_t seed);
LabelPatch generate_label_patch(const AnnotParams& params, std::uint64_t patch_seed);

// Separable Gaussian blur, truncated kernel radius ceil(3*sigma) renormalized
// to unit mass, zero padding at borders. Shared by finalize and the phantom
// renderer.
void gaussian_blur(std::vector<float>& plane, int height, int width, double sigma);

// PNG + sidecar-JSON output: single-channel gray for SC/SE, RGB with
// R=glomeruli, G=nuclei, B=0 for MC/ME. The sidecar lists the generating
// ShapeInstances.
void save_label_patch(const std::string& png_path, const std::string& sidecar_path,
                      const LabelPatch& patch, Setting setting);
std::vector<ShapeInstance> load_shape_sidecar(const std::string& sidecar_path);
AnnotParams annot_params_from_json_file(const std::string& path);

}  // namespace glomseg
