#include "glomseg/augment.hpp"

#include <stdexcept>

namespace glomseg {

namespace {

Sample rotate90(const Sample& in, int quarter_turns) {
  const int k = ((quarter_turns % 4) + 4) % 4;
  if (k == 0) return in;
  Sample out;
  out.channels = in.channels;
  if (k == 2) {
    out.height = in.height;
    out.width = in.width;
  } else {
    out.height = in.width;
    out.width = in.height;
  }
  out.chw.resize(in.chw.size());
  for (int c = 0; c < in.channels; ++c) {
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        int sy = 0, sx = 0;
        switch (k) {
          case 1:  // 90 degrees counterclockwise
            sy = x;
            sx = in.width - 1 - y;
            break;
          case 2:
            sy = in.height - 1 - y;
            sx = in.width - 1 - x;
            break;
          case 3:
            sy = in.height - 1 - x;
            sx = y;
            break;
        }
        out.chw[(static_cast<std::size_t>(c) * out.height + y) * out.width + x] = in.at(c, sy, sx);
      }
    }
  }
  return out;
}

Sample flip_h(const Sample& in) {
  Sample out = in;
  for (int c = 0; c < in.channels; ++c) {
    for (int y = 0; y < in.height; ++y) {
      for (int x = 0; x < in.width; ++x) {
        out.chw[(static_cast<std::size_t>(c) * in.height + y) * in.width + x] =
            in.at(c, y, in.width - 1 - x);
      }
    }
  }
  return out;
}

Sample flip_v(const Sample& in) {
  Sample out = in;
  for (int c = 0; c < in.channels; ++c) {
    for (int y = 0; y < in.height; ++y) {
      for (int x = 0; x < in.width; ++x) {
        out.chw[(static_cast<std::size_t>(c) * in.height + y) * in.width + x] =
            in.at(c, in.height - 1 - y, x);
      }
    }
  }
  return out;
}

Sample crop(const Sample& in, int top, int left, int size) {
  Sample out;
  out.channels = in.channels;
  out.height = size;
  out.width = size;
  out.chw.resize(static_cast<std::size_t>(in.channels) * size * size);
  for (int c = 0; c < in.channels; ++c) {
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        out.chw[(static_cast<std::size_t>(c) * size + y) * size + x] =
            in.at(c, top + y, left + x);
      }
    }
  }
  return out;
}

}  // namespace

Sample augment(const Sample& in, const AugmentOptions& opts, Rng& rng) {
  Sample s = in;
  if (opts.flip) {
    if (rng.uniform() < 0.5) s = flip_h(s);
    if (rng.uniform() < 0.5) s = flip_v(s);
  }
  if (opts.rotate) {
    s = rotate90(s, static_cast<int>(rng.uniform_index(4)));
  }
  if (opts.crop > 0 && (opts.crop != s.width || opts.crop != s.height)) {
    if (opts.crop > s.height || opts.crop > s.width) {
      throw std::invalid_argument("augment: crop " + std::to_string(opts.crop) +
                                  " exceeds sample size " + std::to_string(s.height) + "x" +
                                  std::to_string(s.width));
    }
    int top, left;
    if (opts.random_crop) {
      top = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(s.height - opts.crop + 1)));
      left = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(s.width - opts.crop + 1)));
    } else {
      top = (s.height - opts.crop) / 2;
      left = (s.width - opts.crop) / 2;
    }
    s = crop(s, top, left, opts.crop);
  }
  return s;
}

}  // namespace glomseg
