#ifndef SIGNBENCH_DATASET_HPP
#define SIGNBENCH_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "signbench/image_io.hpp"
#include "signbench/parallel.hpp"
#include "signbench/rng.hpp"

namespace signbench {

constexpr std::size_t kImageSide = 128;

/// Images resized to 128×128×3 in [0,1]; labels index class_names, which
/// are the class directory names in lexicographic order.
struct LabeledDataset {
  std::vector<Tensor<float>> images;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  std::size_t size() const { return images.size(); }
  std::size_t class_count() const { return class_names.size(); }
};

namespace detail {

inline bool has_image_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".ppm" || ext == ".png";
}

}  // namespace detail

/// Loads a directory-per-class tree of .ppm (P6) / .png files. Files decode
/// in lexicographic order within each class; every image is bilinearly
/// resized to 128×128.
inline LabeledDataset load_dataset(const std::string& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw DataError("dataset root is not a directory: " + root);

  std::vector<std::string> class_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) class_dirs.push_back(entry.path().filename().string());
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) throw DataError("no class subdirectories under " + root);

  LabeledDataset ds;
  ds.class_names = class_dirs;
  std::vector<std::string> files;
  std::vector<int> file_labels;
  for (std::size_t c = 0; c < class_dirs.size(); ++c) {
    std::vector<std::string> class_files;
    for (const auto& entry : fs::directory_iterator(fs::path(root) / class_dirs[c]))
      if (entry.is_regular_file() && detail::has_image_extension(entry.path()))
        class_files.push_back(entry.path().string());
    std::sort(class_files.begin(), class_files.end());
    if (class_files.empty())
      throw DataError("class directory has no images: " + class_dirs[c]);
    for (auto& f : class_files) {
      files.push_back(std::move(f));
      file_labels.push_back(static_cast<int>(c));
    }
  }

  ds.images.resize(files.size());
  ds.labels = std::move(file_labels);
  parallel_for(0, files.size(), 4, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      ds.images[i] = resize_bilinear(decode_image<float>(files[i]), kImageSide, kImageSide);
  });
  return ds;
}

/// Stratified split: per class, shuffle with a class-derived stream and
/// take round(fraction * class_size) for training. Classes with fewer than
/// two samples cannot stratify.
inline std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds,
                                                       double train_fraction, SeededRng rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error("split fraction must be in (0,1)");
  LabeledDataset train, val;
  train.class_names = ds.class_names;
  val.class_names = ds.class_names;

  for (std::size_t c = 0; c < ds.class_count(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.labels[i] == static_cast<int>(c)) members.push_back(i);
    if (members.size() < 2)
      throw DataError("class '" + ds.class_names[c] + "' has fewer than 2 samples");
    SeededRng class_rng = rng.substream(c);
    class_rng.shuffle(members);
    std::size_t n_train =
        static_cast<std::size_t>(std::llround(train_fraction * double(members.size())));
    for (std::size_t i = 0; i < members.size(); ++i) {
      auto& part = i < n_train ? train : val;
      part.images.push_back(ds.images[members[i]]);
      part.labels.push_back(ds.labels[members[i]]);
    }
  }
  if (train.images.empty() || val.images.empty())
    throw DataError("split produced an empty part; adjust the fraction");
  return {std::move(train), std::move(val)};
}

}  // namespace signbench

#endif  // SIGNBENCH_DATASET_HPP
