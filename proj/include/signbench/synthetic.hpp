#ifndef SIGNBENCH_SYNTHETIC_HPP
#define SIGNBENCH_SYNTHETIC_HPP

#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "signbench/dataset.hpp"

namespace signbench {

// Synthetic desk-scale benchmark data: five classes of coloured geometric
// "signs" (one shape per class) over noisy backgrounds, with seeded
// per-image variation in position, size, rotation and lighting.

namespace detail {

struct Poly {
  std::vector<double> xs, ys;
};

inline Poly make_polygon(int shape, double cx, double cy, double radius, double angle) {
  Poly p;
  auto add = [&](double r, double phi) {
    p.xs.push_back(cx + r * std::cos(phi));
    p.ys.push_back(cy + r * std::sin(phi));
  };
  const double pi = 3.14159265358979323846;
  switch (shape) {
    case 0:  // square
      for (int i = 0; i < 4; ++i) add(radius, angle + pi / 4 + i * pi / 2);
      break;
    case 1:  // diamond (square rotated 45 degrees)
      for (int i = 0; i < 4; ++i) add(radius, angle + i * pi / 2);
      break;
    case 2:  // triangle
      for (int i = 0; i < 3; ++i) add(radius, angle - pi / 2 + i * 2 * pi / 3);
      break;
    case 3:  // five-point star
      for (int i = 0; i < 10; ++i)
        add(i % 2 == 0 ? radius : 0.45 * radius, angle - pi / 2 + i * pi / 5);
      break;
    default:
      break;
  }
  return p;
}

inline bool point_in_polygon(const Poly& p, double x, double y) {
  bool inside = false;
  std::size_t n = p.xs.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((p.ys[i] > y) != (p.ys[j] > y) &&
        x < (p.xs[j] - p.xs[i]) * (y - p.ys[i]) / (p.ys[j] - p.ys[i]) + p.xs[i])
      inside = !inside;
  }
  return inside;
}

}  // namespace detail

/// One 128×128 sign image. `shape` 0..4 (circle, diamond, square, star,
/// triangle by class-name order); variation comes from `rng`.
inline Tensor<float> render_sign(int shape, SeededRng& rng) {
  const std::size_t side = kImageSide;
  // Class base colours (RGB).
  static const std::array<std::array<double, 3>, 5> colors = {{
      {0.85, 0.15, 0.15},  // circle: red
      {0.15, 0.75, 0.20},  // diamond: green
      {0.15, 0.25, 0.85},  // square: blue
      {0.90, 0.80, 0.15},  // star: yellow
      {0.85, 0.20, 0.80},  // triangle: magenta
  }};

  double bg = rng.uniform(0.10, 0.35);
  double cx = side / 2.0 + rng.uniform(-10.0, 10.0);
  double cy = side / 2.0 + rng.uniform(-10.0, 10.0);
  double radius = rng.uniform(30.0, 44.0);
  double angle = rng.uniform(-0.26, 0.26);  // about +-15 degrees
  double light = rng.uniform(0.85, 1.1);

  std::array<double, 3> color = colors[std::size_t(shape)];
  for (auto& c : color) c = std::min(1.0, c * light);

  // Map class order (circle, diamond, square, star, triangle) onto the
  // polygon table (square=0, diamond=1, triangle=2, star=3).
  detail::Poly poly;
  bool is_circle = shape == 0;
  if (!is_circle) {
    int poly_kind = shape == 1 ? 1 : shape == 2 ? 0 : shape == 3 ? 3 : 2;
    poly = detail::make_polygon(poly_kind, cx, cy, radius, angle);
  }

  Tensor<float> img({side, side, 3});
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      // 2x2 supersampled coverage for soft edges.
      int hits = 0;
      for (int sy = 0; sy < 2; ++sy)
        for (int sx = 0; sx < 2; ++sx) {
          double px = double(x) + 0.25 + 0.5 * sx;
          double py = double(y) + 0.25 + 0.5 * sy;
          bool inside = is_circle
                            ? (px - cx) * (px - cx) + (py - cy) * (py - cy) <= radius * radius
                            : detail::point_in_polygon(poly, px, py);
          if (inside) ++hits;
        }
      double cover = hits / 4.0;
      for (std::size_t ch = 0; ch < 3; ++ch) {
        double noise = rng.uniform(-0.04, 0.04);
        double v = bg * (1.0 - cover) + color[ch] * cover + noise;
        img(y, x, ch) = static_cast<float>(std::min(std::max(v, 0.0), 1.0));
      }
    }
  }
  return img;
}

/// In-memory synthetic dataset; class names sort lexicographically exactly
/// as load_dataset would order the written directories.
inline LabeledDataset make_synthetic_dataset(std::size_t per_class, std::uint64_t seed) {
  LabeledDataset ds;
  ds.class_names = {"circle", "diamond", "square", "star", "triangle"};
  for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      SeededRng rng = SeededRng(seed, c * 1000003 + i);
      ds.images.push_back(render_sign(static_cast<int>(c), rng));
      ds.labels.push_back(static_cast<int>(c));
    }
  }
  return ds;
}

/// Writes the same dataset as a directory-per-class PPM tree.
inline void write_synthetic_dataset(const std::string& root, std::size_t per_class,
                                    std::uint64_t seed) {
  namespace fs = std::filesystem;
  LabeledDataset ds = make_synthetic_dataset(per_class, seed);
  fs::create_directories(root);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    fs::path dir = fs::path(root) / ds.class_names[std::size_t(ds.labels[i])];
    fs::create_directories(dir);
    char name[32];
    std::snprintf(name, sizeof(name), "%05zu.ppm", i);
    write_ppm(ds.images[i], (dir / name).string());
  }
}

}  // namespace signbench

#endif  // SIGNBENCH_SYNTHETIC_HPP
