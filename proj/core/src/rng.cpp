#include "glomseg/rng.hpp"

#include <cmath>

namespace glomseg {

double Rng::normal() {
  // Marsaglia polar method; rejection loop consumes a deterministic number of
  // draws for a given state.
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  // FNV-1a over the tag folded into the seed, then one splitmix finalizer.
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char byte : tag) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  std::uint64_t h = derive_seed(seed, tag);
  for (int i = 0; i < 8; ++i) {
    h ^= (index >> (8 * i)) & 0xffULL;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

}  // namespace glomseg
