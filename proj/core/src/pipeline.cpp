#include "glomseg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "glomseg/checkpoint.hpp"
#include "glomseg/translate.hpp"

namespace glomseg {

namespace fs = std::filesystem;
using nlohmann::json;

void PatchExtractSpec::validate() const {
  if (sources.empty()) throw std::invalid_argument("patch extraction: no source images");
  if (downscale_factor < 1) throw std::invalid_argument("patch extraction: factor must be >= 1");
  if (patch_size < 1 || patches_per_image < 1) {
    throw std::invalid_argument("patch extraction: patch_size and patches_per_image must be >= 1");
  }
  if (out_dir.empty()) throw std::invalid_argument("patch extraction: out_dir must be set");
}

ImageBuffer box_downscale(const ImageBuffer& image, int factor) {
  if (factor < 1) throw std::invalid_argument("box_downscale: factor must be >= 1");
  if (factor == 1) return image;
  const int oh = image.height / factor;
  const int ow = image.width / factor;
  if (oh < 1 || ow < 1) throw std::invalid_argument("box_downscale: image smaller than factor");
  ImageBuffer out(oh, ow, image.channels);
  const double inv = 1.0 / (double(factor) * factor);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        double acc = 0.0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) {
            acc += image.at(y * factor + dy, x * factor + dx, c);
          }
        }
        out.at(y, x, c) = static_cast<float>(acc * inv);
      }
    }
  }
  return out;
}

std::vector<std::string> extract_patches(const PatchExtractSpec& spec) {
  spec.validate();
  fs::create_directories(spec.out_dir);
  std::vector<std::string> written;
  for (std::size_t si = 0; si < spec.sources.size(); ++si) {
    const ImageBuffer image = box_downscale(read_png(spec.sources[si]), spec.downscale_factor);
    if (image.height < spec.patch_size || image.width < spec.patch_size) {
      throw std::invalid_argument("patch " + std::to_string(spec.patch_size) +
                                  " does not fit downscaled image " + spec.sources[si]);
    }
    Rng rng(derive_seed(spec.seed, "extract", si));
    const std::string stem = fs::path(spec.sources[si]).stem().string();
    for (int pi = 0; pi < spec.patches_per_image; ++pi) {
      const int top =
          static_cast<int>(rng.uniform_index(image.height - spec.patch_size + 1));
      const int left =
          static_cast<int>(rng.uniform_index(image.width - spec.patch_size + 1));
      ImageBuffer patch(spec.patch_size, spec.patch_size, image.channels);
      for (int y = 0; y < spec.patch_size; ++y) {
        for (int x = 0; x < spec.patch_size; ++x) {
          for (int c = 0; c < image.channels; ++c) {
            patch.at(y, x, c) = image.at(top + y, left + x, c);
          }
        }
      }
      char name[256];
      std::snprintf(name, sizeof(name), "%s_p%03d.png", stem.c_str(), pi);
      const fs::path out_path = fs::path(spec.out_dir) / name;
      write_png(out_path.string(), patch);
      written.push_back(out_path.string());
    }
  }
  return written;
}

namespace {

std::string two_digits(int v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d", v);
  return buf;
}

// Timestamped, collision-probed run directory; a completed run is never
// mutated by a rerun.
fs::path fresh_run_dir(const std::string& root, const std::string& setting) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char stamp[64];
  std::snprintf(stamp, sizeof(stamp), "run_%04d%s%s-%s%s%s_%s", tm.tm_year + 1900,
                two_digits(tm.tm_mon + 1).c_str(), two_digits(tm.tm_mday).c_str(),
                two_digits(tm.tm_hour).c_str(), two_digits(tm.tm_min).c_str(),
                two_digits(tm.tm_sec).c_str(), setting.c_str());
  fs::path base = fs::path(root) / stamp;
  fs::path candidate = base;
  for (int i = 1; fs::exists(candidate); ++i) {
    candidate = base;
    candidate += "-" + std::to_string(i);
  }
  return candidate;
}

[[noreturn]] void stage_error(const char* stage, const std::exception& e) {
  throw std::runtime_error(std::string("stage '") + stage + "' failed: " + e.what());
}

json epoch_scores_to_json(const EpochScores& s) {
  json j;
  j["epoch"] = s.epoch;
  j["pixel"] = {{"tp", s.pixel.tp}, {"fp", s.pixel.fp}, {"fn", s.pixel.fn},
                {"F", s.pixel.f1},  {"P", s.pixel.precision}, {"R", s.pixel.recall}};
  j["object"] = {{"tp", s.object.tp}, {"fp", s.object.fp}, {"fn", s.object.fn},
                 {"F", s.object.f1},  {"P", s.object.precision}, {"R", s.object.recall}};
  return j;
}

EpochScores epoch_scores_from_json(const json& j) {
  EpochScores s;
  s.epoch = j.at("epoch").get<int>();
  const json& p = j.at("pixel");
  s.pixel.tp = p.at("tp").get<std::int64_t>();
  s.pixel.fp = p.at("fp").get<std::int64_t>();
  s.pixel.fn = p.at("fn").get<std::int64_t>();
  s.pixel.f1 = p.at("F").get<double>();
  s.pixel.precision = p.at("P").get<double>();
  s.pixel.recall = p.at("R").get<double>();
  const json& o = j.at("object");
  s.object.tp = o.at("tp").get<int>();
  s.object.fp = o.at("fp").get<int>();
  s.object.fn = o.at("fn").get<int>();
  s.object.f1 = o.at("F").get<double>();
  s.object.precision = o.at("P").get<double>();
  s.object.recall = o.at("R").get<double>();
  return s;
}

}  // namespace

std::string run_experiment(const ExperimentConfig& config) {
  config.validate();
  const fs::path run_dir = fresh_run_dir(config.out_root, to_string(config.setting));
  fs::create_directories(run_dir);
  {
    std::ofstream out(run_dir / "config.json");
    out << experiment_config_to_json(config);
  }

  const fs::path labels_dir = run_dir / "labels";
  const fs::path images_dir = run_dir / "images";
  const fs::path test_dir = run_dir / "test";
  const fs::path test_gt_dir = run_dir / "test_gt";
  const fs::path val_dir = run_dir / "val";
  const fs::path val_gt_dir = run_dir / "val_gt";
  const fs::path train_dir = run_dir / "train";

  // stage: simulate annotation patches
  try {
    fs::create_directories(labels_dir);
    const std::vector<LabelPatch> labels = generate_label_set(
        config.annot, config.data.n_label_patches, derive_seed(config.seed, "labels"));
    for (std::size_t i = 0; i < labels.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "label_%04zu", i);
      save_label_patch((labels_dir / (std::string(name) + ".png")).string(),
                       (labels_dir / (std::string(name) + ".json")).string(), labels[i],
                       config.setting);
    }
  } catch (const std::exception& e) {
    stage_error("simulate-labels", e);
  }

  // stage: image domain (phantoms or ingest)
  try {
    fs::create_directories(images_dir);
    fs::create_directories(test_dir);
    fs::create_directories(test_gt_dir);
    fs::create_directories(val_dir);
    fs::create_directories(val_gt_dir);
    if (!config.data.real_image_dir.empty()) {
      // training images come from disk; phantoms still provide the evaluation set
      for (const std::string& f : list_png_files(config.data.real_image_dir)) {
        fs::copy_file(f, images_dir / fs::path(f).filename());
      }
    } else {
      const std::vector<PhantomPatch> train_phantoms =
          generate_phantom_set(config.annot, config.phantom, config.data.n_phantom_train,
                               derive_seed(config.seed, "phantom-train"));
      for (std::size_t i = 0; i < train_phantoms.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "img_%04zu.png", i);
        write_png((images_dir / name).string(), train_phantoms[i].image);
      }
    }
    const std::vector<PhantomPatch> test_phantoms =
        generate_phantom_set(config.annot, config.phantom, config.data.n_phantom_test,
                             derive_seed(config.seed, "phantom-test"));
    for (std::size_t i = 0; i < test_phantoms.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "test_%04zu", i);
      // first test patch becomes the single epoch-optimization patch
      const fs::path img_dir = i == 0 ? val_dir : test_dir;
      const fs::path gt_dir = i == 0 ? val_gt_dir : test_gt_dir;
      write_png((img_dir / (std::string(name) + ".png")).string(), test_phantoms[i].image);
      Mask gt(config.annot.patch_h, config.annot.patch_w);
      gt.data = test_phantoms[i].gt_mask;
      write_mask_png((gt_dir / (std::string(name) + ".png")).string(), gt);
    }
  } catch (const std::exception& e) {
    stage_error("image-domain", e);
  }

  // stage: train
  TrainResult train_result;
  try {
    TrainConfig tc = config.train;
    tc.out_dir = train_dir.string();
    train_result = train(images_dir.string(), labels_dir.string(), config.net, tc,
                         derive_seed(config.seed, "train"));
  } catch (const std::exception& e) {
    stage_error("train", e);
  }

  // stage: per-epoch translate + evaluate on the test split
  ExperimentSummary summary;
  summary.setting = to_string(config.setting);
  summary.seed = config.seed;
  summary.epochs = config.train.epochs;
  try {
    const std::vector<std::string> test_files = list_png_files(test_dir.string());
    std::vector<ImageBuffer> test_images;
    std::vector<Mask> test_gts;
    std::vector<std::vector<std::pair<double, double>>> test_centers;
    std::vector<std::string> test_ids;
    for (const std::string& f : test_files) {
      test_images.push_back(read_png(f));
      const fs::path gt_path = test_gt_dir / fs::path(f).filename();
      test_gts.push_back(read_mask_png(gt_path.string()));
      std::vector<std::pair<double, double>> ctrs;
      for (const Component& c : connected_components(test_gts.back())) {
        ctrs.emplace_back(c.cx, c.cy);
      }
      test_centers.push_back(std::move(ctrs));
      test_ids.push_back(fs::path(f).stem().string());
    }

    for (const std::string& manifest : train_result.checkpoints) {
      const int epoch = epoch_from_checkpoint_name(manifest);
      const GanState state = gan_from_checkpoint(manifest, config.net);
      char dname[64];
      std::snprintf(dname, sizeof(dname), "epoch_%03d", epoch);
      const fs::path mask_dir = run_dir / "translate" / dname;
      fs::create_directories(mask_dir);
      std::vector<Mask> preds;
      for (std::size_t i = 0; i < test_images.size(); ++i) {
        Mask m = translate_image(state.f, test_images[i], config.eval.threshold);
        write_mask_png((mask_dir / (test_ids[i] + ".png")).string(), m);
        preds.push_back(std::move(m));
      }
      const EvalReport report =
          evaluate_masks(test_ids, preds, test_gts, test_centers, config.eval);
      const fs::path eval_dir = run_dir / "eval";
      fs::create_directories(eval_dir);
      write_report_json(report, (eval_dir / (std::string(dname) + ".json")).string());
      EpochScores es;
      es.epoch = epoch;
      es.pixel = report.pixel;
      es.object = report.object;
      summary.per_epoch.push_back(es);
    }
  } catch (const std::exception& e) {
    stage_error("translate-evaluate", e);
  }

  // stage: epoch optimization on the held-out patch
  try {
    std::vector<ImageBuffer> val_images;
    std::vector<Mask> val_gts;
    for (const std::string& f : list_png_files(val_dir.string())) {
      val_images.push_back(read_png(f));
      val_gts.push_back(read_mask_png((val_gt_dir / fs::path(f).filename()).string()));
    }
    const std::string best_manifest = select_epoch(train_result.checkpoints, val_images, val_gts,
                                                   config.net, config.eval.threshold);
    summary.best_epoch = epoch_from_checkpoint_name(best_manifest);
  } catch (const std::exception& e) {
    stage_error("select-epoch", e);
  }

  for (const EpochScores& es : summary.per_epoch) {
    if (es.epoch == summary.best_epoch) summary.incl_optimization = es;
    if (es.epoch == summary.epochs) summary.excl_optimization = es;
  }

  // stage: summary
  try {
    json j;
    j["setting"] = summary.setting;
    j["seed"] = summary.seed;
    j["epochs"] = summary.epochs;
    j["per_epoch"] = json::array();
    for (const EpochScores& es : summary.per_epoch) j["per_epoch"].push_back(epoch_scores_to_json(es));
    j["best_epoch"] = summary.best_epoch;
    j["final_incl_optimization"] = epoch_scores_to_json(summary.incl_optimization);
    j["final_excl_optimization"] = epoch_scores_to_json(summary.excl_optimization);
    std::ofstream out(run_dir / "summary.json");
    if (!out) throw std::runtime_error("cannot write summary.json");
    out << j.dump(2) << "\n";
  } catch (const std::exception& e) {
    stage_error("summary", e);
  }

  return run_dir.string();
}

ExperimentSummary load_summary(const std::string& summary_path) {
  std::ifstream in(summary_path);
  if (!in) throw std::runtime_error("cannot read " + summary_path);
  const json j = json::parse(in);
  ExperimentSummary s;
  s.setting = j.at("setting").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.epochs = j.at("epochs").get<int>();
  for (const json& e : j.at("per_epoch")) s.per_epoch.push_back(epoch_scores_from_json(e));
  s.best_epoch = j.at("best_epoch").get<int>();
  s.incl_optimization = epoch_scores_from_json(j.at("final_incl_optimization"));
  s.excl_optimization = epoch_scores_from_json(j.at("final_excl_optimization"));
  return s;
}

}  // namespace glomseg
