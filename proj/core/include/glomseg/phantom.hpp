#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "glomseg/annot.hpp"
#include "glomseg/image.hpp"

namespace glomseg {

// Synthetic image-domain patches with exact ground truth. Deliberately simple
// rendering (textured background, ringed discs, nuclei dots) -- the point is a
// learnable, verifiable stand-in for stained tissue patches.
struct PhantomParams {
  double ring_darkness = 0.35;     // boundary ring darkening factor
  double ring_width = 0.18;        // ring thickness, fraction of the canonical radius
  double speckle_density = 0.06;   // interior speckle probability per pixel
  double speckle_darkness = 0.18;
  double texture_scale = 24.0;     // low-frequency noise cell size, pixels
  int texture_octaves = 2;
  double nuclei_density = 0.004;   // dots per pixel outside glomeruli
  double nuclei_inside_factor = 2.0;
  double nucleus_diameter = 3.5;
  // 8-bit RGB appearance
  std::array<double, 3> background_mean{231, 206, 213};
  std::array<double, 3> background_std{5, 7, 6};
  std::array<double, 3> object_mean{186, 152, 182};
  std::array<double, 3> object_std{8, 9, 8};
  std::array<double, 3> nuclei_mean{84, 58, 110};

  void validate() const;

  static PhantomParams stain_a() { return PhantomParams{}; }
  // Differs only in color means -- the stain-adaptation knob.
  static PhantomParams stain_b();
};

struct PhantomPatch {
  ImageBuffer image;                  // H x W x 3 in [0,1]
  std::vector<std::uint8_t> gt_mask;  // rasterize(shapes), bit-exact
  std::vector<ShapeInstance> shapes;
};

PhantomPatch generate_phantom_patch(const AnnotParams& annot, const PhantomParams& phantom,
                                    std::uint64_t patch_seed);
std::vector<PhantomPatch> generate_phantom_set(const AnnotParams& annot,
                                               const PhantomParams& phantom, int count,
                                               std::uint64_t seed);

PhantomParams phantom_params_from_json_file(const std::string& path);

}  // namespace glomseg
