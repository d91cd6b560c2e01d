#pragma once

#include "glomseg/rng.hpp"

#include <vector>

namespace glomseg {

// One training sample: CHW float array in [-1, 1].
struct Sample {
  int channels = 0, height = 0, width = 0;
  std::vector<float> chw;

  float at(int c, int y, int x) const {
    return chw[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

struct AugmentOptions {
  bool flip = true;
  bool rotate = true;       // k * 90 degrees, k uniform in 0..3
  bool random_crop = true;  // uniform top-left; centered crop when off
  int crop = 0;             // 0 = keep full size
};

// Horizontal/vertical flips with p = 0.5 each, rotation by k*90 degrees, then
// crop. All channels of one sample transform identically; domains are
// augmented independently of each other (unpaired training).
Sample augment(const Sample& in, const AugmentOptions& opts, Rng& rng);

}  // namespace glomseg
