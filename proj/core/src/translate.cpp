#include "glomseg/translate.hpp"

#include <algorithm>
#include <stdexcept>

#include "glomseg/checkpoint.hpp"
#include "glomseg/metrics.hpp"
#include "glomseg/train.hpp"

namespace glomseg {

Mask translate_image(const ResnetGenerator& f, const ImageBuffer& image, float threshold) {
  const Sample s = sample_from_image(image, f.in_channels());
  const Tensor out = f.forward(tensor_from_sample(s));  // no active tape: plain forward
  Mask mask(image.height, image.width);
  const auto v = out.values();
  // channel 0 of the label domain is the glomeruli channel
  for (std::size_t p = 0; p < mask.data.size(); ++p) {
    const float v01 = (v[p] + 1.0f) * 0.5f;
    mask.data[p] = v01 > threshold ? 1 : 0;
  }
  return mask;
}

std::vector<Mask> translate_to_labels(const ResnetGenerator& f,
                                      const std::vector<ImageBuffer>& images, float threshold) {
  std::vector<Mask> masks;
  masks.reserve(images.size());
  for (const ImageBuffer& img : images) masks.push_back(translate_image(f, img, threshold));
  return masks;
}

std::string select_epoch(const std::vector<std::string>& checkpoint_manifests,
                         const std::vector<ImageBuffer>& val_images,
                         const std::vector<Mask>& val_gt_masks, const NetSpec& spec,
                         float threshold) {
  if (checkpoint_manifests.empty()) {
    throw std::invalid_argument("select_epoch: need at least one checkpoint");
  }
  if (val_images.empty() || val_images.size() != val_gt_masks.size()) {
    throw std::invalid_argument("select_epoch: validation images and masks must pair up");
  }
  std::vector<std::string> ordered = checkpoint_manifests;
  std::sort(ordered.begin(), ordered.end(),
            [](const std::string& a, const std::string& b) {
              return epoch_from_checkpoint_name(a) < epoch_from_checkpoint_name(b);
            });

  std::string best;
  double best_f1 = -1.0;
  for (const std::string& manifest : ordered) {
    const GanState state = gan_from_checkpoint(manifest, spec);
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < val_images.size(); ++i) {
      const Mask pred = translate_image(state.f, val_images[i], threshold);
      const PixelScores s = pixel_scores(pred, val_gt_masks[i]);
      tp += s.tp;
      fp += s.fp;
      fn += s.fn;
    }
    const double p = tp + fp > 0 ? double(tp) / double(tp + fp) : (tp + fn == 0 ? 1.0 : 0.0);
    const double r = tp + fn > 0 ? double(tp) / double(tp + fn) : (tp + fp == 0 ? 1.0 : 0.0);
    const double f1 = p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
    if (f1 > best_f1) {  // strict: ties keep the earlier epoch
      best_f1 = f1;
      best = manifest;
    }
  }
  return best;
}

}  // namespace glomseg
