#pragma once

#include <string>
#include <vector>

#include "glomseg/image.hpp"
#include "glomseg/nets.hpp"

namespace glomseg {

// Apply F to an image patch and keep only the glomeruli channel (channel 0);
// any nuclei channel exists for training and is ignored here. Output of F in
// [-1,1] maps to [0,1]; pixels strictly above threshold are foreground.
Mask translate_image(const ResnetGenerator& f, const ImageBuffer& image, float threshold = 0.5f);

std::vector<Mask> translate_to_labels(const ResnetGenerator& f,
                                      const std::vector<ImageBuffer>& images,
                                      float threshold = 0.5f);

// Evaluate pixel F1 of every checkpoint on the validation patches and return
// the manifest path of the argmax; ties resolve to the earliest epoch.
// Checkpoint manifests are ordered by their epoch number.
std::string select_epoch(const std::vector<std::string>& checkpoint_manifests,
                         const std::vector<ImageBuffer>& val_images,
                         const std::vector<Mask>& val_gt_masks, const NetSpec& spec,
                         float threshold = 0.5f);

}  // namespace glomseg
