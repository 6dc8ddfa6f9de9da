#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "signbench/dataset.hpp"
#include "signbench/descriptor_io.hpp"
#include "signbench/synthetic.hpp"
#include "test_util.hpp"

using namespace signbench;
namespace fs = std::filesystem;

namespace {

// 3x2 RGB png: red green blue / yellow black white.
const unsigned char kTinyPng[] = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48,
    0x44, 0x52, 0x00, 0x00, 0x00, 0x03, 0x00, 0x00, 0x00, 0x02, 0x08, 0x02, 0x00, 0x00,
    0x00, 0x12, 0x16, 0xf1, 0x4d, 0x00, 0x00, 0x00, 0x18, 0x49, 0x44, 0x41, 0x54, 0x78,
    0x9c, 0x05, 0xc1, 0x01, 0x01, 0x00, 0x00, 0x08, 0xc3, 0x20, 0x6e, 0xff, 0xce, 0x13,
    0x84, 0xd0, 0x89, 0x29, 0x0f, 0x39, 0xf3, 0x05, 0xfe, 0x8f, 0x6a, 0x5a, 0x80, 0x00,
    0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / name;
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Tensor<float> solid_image(std::size_t h, std::size_t w, float r, float g, float b) {
  Tensor<float> img({h, w, 3});
  for (std::size_t i = 0; i < h * w; ++i) {
    img[i * 3] = r;
    img[i * 3 + 1] = g;
    img[i * 3 + 2] = b;
  }
  return img;
}

}  // namespace

TEST(ImageIo, PpmRoundTrip) {
  TempDir dir("sb_ppm_test");
  SeededRng rng(1, 1);
  auto img = testutil::random_tensor<float>({10, 14, 3}, rng, 0, 1);
  auto path = (dir.path / "img.ppm").string();
  write_ppm(img, path);
  auto back = read_ppm<float>(path);
  ASSERT_EQ(back.shape(), img.shape());
  for (std::size_t i = 0; i < img.size(); ++i)
    ASSERT_NEAR(back[i], img[i], 0.5f / 255.0f + 1e-6f);
}

TEST(ImageIo, PngDecode) {
  TempDir dir("sb_png_test");
  auto path = (dir.path / "img.png").string();
  std::ofstream os(path, std::ios::binary);
  os.write(reinterpret_cast<const char*>(kTinyPng), sizeof(kTinyPng));
  os.close();

  auto img = decode_image<float>(path);
  ASSERT_EQ(img.shape(), (Shape{2, 3, 3}));
  EXPECT_NEAR(img(0u, 0u, 0u), 1.0f, 1e-6);  // red
  EXPECT_NEAR(img(0u, 0u, 1u), 0.0f, 1e-6);
  EXPECT_NEAR(img(0u, 1u, 1u), 1.0f, 1e-6);  // green
  EXPECT_NEAR(img(0u, 2u, 2u), 1.0f, 1e-6);  // blue
  EXPECT_NEAR(img(1u, 2u, 0u), 1.0f, 1e-6);  // white
}

TEST(ImageIo, CorruptFilesNameThePath) {
  TempDir dir("sb_corrupt_test");
  auto bad_ppm = (dir.path / "bad.ppm").string();
  {
    std::ofstream os(bad_ppm, std::ios::binary);
    os << "P6\n4 4\n255\nxx";  // truncated pixel data
  }
  try {
    read_ppm<float>(bad_ppm);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.ppm"), std::string::npos);
  }

  auto garbage = (dir.path / "noise.png").string();
  {
    std::ofstream os(garbage, std::ios::binary);
    os << "definitely not a png";
  }
  EXPECT_THROW(decode_image<float>(garbage), DataError);
}

TEST(ImageIo, ResizeBilinear) {
  auto solid = solid_image(10, 10, 0.3f, 0.6f, 0.9f);
  auto grown = resize_bilinear(solid, 128, 128);
  EXPECT_EQ(grown.shape(), (Shape{128, 128, 3}));
  for (std::size_t i = 0; i < grown.size(); i += 3) ASSERT_NEAR(grown[i], 0.3f, 1e-6);

  auto same = resize_bilinear(solid, 10, 10);
  for (std::size_t i = 0; i < solid.size(); ++i) ASSERT_EQ(same[i], solid[i]);
}

TEST(LoadDataset, ClassLayoutAndOrdering) {
  TempDir dir("sb_load_test");
  fs::create_directories(dir.path / "b");
  fs::create_directories(dir.path / "a");
  for (int i = 0; i < 3; ++i)
    write_ppm(solid_image(10, 10, 0.1f * float(i + 1), 0, 0),
              (dir.path / "a" / ("img" + std::to_string(i) + ".ppm")).string());
  for (int i = 0; i < 2; ++i)
    write_ppm(solid_image(6, 9, 0, 0.2f * float(i + 1), 0),
              (dir.path / "b" / ("img" + std::to_string(i) + ".ppm")).string());
  // Non-image files are ignored (annotation csv etc).
  std::ofstream(dir.path / "a" / "GT-a.csv") << "ignored";

  auto ds = load_dataset(dir.path.string());
  EXPECT_EQ(ds.size(), 5u);
  EXPECT_EQ(ds.class_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(ds.labels, (std::vector<int>{0, 0, 0, 1, 1}));
  for (const auto& img : ds.images) EXPECT_EQ(img.shape(), (Shape{128, 128, 3}));
}

TEST(LoadDataset, Errors) {
  TempDir dir("sb_load_err");
  EXPECT_THROW(load_dataset((dir.path / "missing").string()), DataError);

  fs::create_directories(dir.path / "tree");
  EXPECT_THROW(load_dataset((dir.path / "tree").string()), DataError);  // no classes

  fs::create_directories(dir.path / "tree" / "empty_class");
  EXPECT_THROW(load_dataset((dir.path / "tree").string()), DataError);  // class w/o images

  auto bad = dir.path / "tree" / "empty_class" / "broken.ppm";
  std::ofstream(bad, std::ios::binary) << "P6\n2 2\n255\nx";
  try {
    load_dataset((dir.path / "tree").string());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("broken.ppm"), std::string::npos);
  }
}

TEST(Split, StratifiedCountsAndDeterminism) {
  LabeledDataset ds;
  ds.class_names = {"x", "y"};
  for (int i = 0; i < 10; ++i) {
    ds.images.push_back(solid_image(4, 4, 0.5f, 0, 0));
    ds.labels.push_back(0);
  }
  for (int i = 0; i < 5; ++i) {
    ds.images.push_back(solid_image(4, 4, 0, 0.5f, 0));
    ds.labels.push_back(1);
  }

  auto [train, val] = split(ds, 0.8, SeededRng(3, 3));
  std::size_t train_x = 0, train_y = 0;
  for (int l : train.labels) (l == 0 ? train_x : train_y)++;
  EXPECT_EQ(train_x, 8u);  // round(0.8 * 10)
  EXPECT_EQ(train_y, 4u);  // round(0.8 * 5)
  EXPECT_EQ(val.size(), 3u);

  auto [train2, val2] = split(ds, 0.8, SeededRng(3, 3));
  EXPECT_EQ(train.labels, train2.labels);
  for (std::size_t i = 0; i < train.size(); ++i)
    ASSERT_EQ(train.images[i].values(), train2.images[i].values());

  // Per-class proportions within one sample of the target fraction.
  SeededRng rng(9, 0);
  for (int trial = 0; trial < 5; ++trial) {
    LabeledDataset mixed;
    mixed.class_names = {"a", "b", "c"};
    std::vector<std::size_t> sizes = {5 + rng.uniform_index(20), 5 + rng.uniform_index(20),
                                      5 + rng.uniform_index(20)};
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < sizes[c]; ++i) {
        mixed.images.push_back(solid_image(4, 4, 0.1f, 0.1f, 0.1f));
        mixed.labels.push_back(int(c));
      }
    auto [tr, va] = split(mixed, 0.8, SeededRng(trial, 1));
    for (std::size_t c = 0; c < 3; ++c) {
      std::size_t got = 0;
      for (int l : tr.labels)
        if (l == int(c)) ++got;
      ASSERT_LE(std::fabs(double(got) - 0.8 * double(sizes[c])), 1.0);
    }
    (void)va;
  }
}

TEST(Split, ErrorsOnTinyClassesAndBadFraction) {
  LabeledDataset ds;
  ds.class_names = {"solo"};
  ds.images.push_back(solid_image(4, 4, 1, 1, 1));
  ds.labels.push_back(0);
  EXPECT_THROW(split(ds, 0.8, SeededRng(1, 1)), DataError);

  ds.images.push_back(solid_image(4, 4, 1, 1, 1));
  ds.labels.push_back(0);
  EXPECT_THROW(split(ds, 0.0, SeededRng(1, 1)), Error);
  EXPECT_THROW(split(ds, 1.0, SeededRng(1, 1)), Error);
}

TEST(Synthetic, DatasetShapeAndDiskRoundTrip) {
  auto ds = make_synthetic_dataset(4, 77);
  EXPECT_EQ(ds.size(), 20u);
  EXPECT_EQ(ds.class_count(), 5u);
  EXPECT_TRUE(std::is_sorted(ds.class_names.begin(), ds.class_names.end()));
  for (const auto& img : ds.images) {
    EXPECT_EQ(img.shape(), (Shape{128, 128, 3}));
    for (std::size_t i = 0; i < img.size(); ++i) {
      ASSERT_GE(img[i], 0.0f);
      ASSERT_LE(img[i], 1.0f);
    }
  }

  // Same seed regenerates identical pixels.
  auto again = make_synthetic_dataset(4, 77);
  for (std::size_t i = 0; i < ds.size(); ++i)
    ASSERT_EQ(ds.images[i].values(), again.images[i].values());

  TempDir dir("sb_synth_test");
  write_synthetic_dataset(dir.path.string(), 4, 77);
  auto loaded = load_dataset(dir.path.string());
  EXPECT_EQ(loaded.size(), ds.size());
  EXPECT_EQ(loaded.class_names, ds.class_names);
  EXPECT_EQ(loaded.labels, ds.labels);
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t j = 0; j < ds.images[i].size(); j += 101)
      ASSERT_NEAR(loaded.images[i][j], ds.images[i][j], 0.5f / 255.0f + 1e-6f);
}

TEST(DescriptorCache, RoundTrip) {
  TempDir dir("sb_desc_test");
  SeededRng rng(5, 0);
  std::vector<DescriptorSet<float>> sets(3);
  std::vector<int> labels = {0, 2, 1};
  for (std::size_t i = 0; i < 3; ++i) {
    sets[i].source_image_id = i;
    sets[i].data.resize((i + 1) * kDescriptorDim);
    for (auto& v : sets[i].data) v = float(rng.uniform(0, 1));
  }
  auto path = (dir.path / "cache.sdsc").string();
  save_descriptor_sets(sets, labels, path);
  auto [back, back_labels] = load_descriptor_sets(path);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back_labels, labels);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].source_image_id, i);
    EXPECT_EQ(back[i].data, sets[i].data);
  }
}
