#ifndef SIGNBENCH_FEATURES_HPP
#define SIGNBENCH_FEATURES_HPP

#include <array>
#include <cmath>
#include <vector>

#include "signbench/tensor.hpp"

namespace signbench {

// Dense-grid SIFT-style descriptors: a fixed keypoint lattice instead of
// scale-space detection, then the classic 4x4-cell x 8-orientation-bin
// gradient histogram with 0.2 clipping (Lowe's normalisation).

constexpr std::size_t kDescriptorDim = 128;
constexpr std::size_t kPatchSupport = 16;  // pixels per patch side
constexpr std::size_t kGridStride = 8;
constexpr std::size_t kDescriptorCells = 4;
constexpr std::size_t kOrientationBins = 8;
constexpr double kDescriptorClip = 0.2;

struct Keypoint {
  double x;      // column of the patch centre
  double y;      // row of the patch centre
  double scale;  // patch radius in pixels
};

/// Per-image list of 128-d local descriptors, stored row-major.
template <typename T>
struct DescriptorSet {
  std::size_t source_image_id = 0;
  std::vector<T> data;

  std::size_t count() const { return data.size() / kDescriptorDim; }
  const T* descriptor(std::size_t i) const { return data.data() + i * kDescriptorDim; }
  T* descriptor(std::size_t i) { return data.data() + i * kDescriptorDim; }
};

/// Rec.601 luminance. Input must be H×W×3 with values in [0,1].
template <typename T>
Tensor<T> to_grayscale(const Tensor<T>& image) {
  if (image.rank() != 3 || image.dim(2) != 3)
    throw Error("to_grayscale expects H×W×3, got " + shape_str(image.shape()));
  std::size_t h = image.dim(0), w = image.dim(1);
  Tensor<T> gray({h, w});
  const T* src = image.data();
  T* dst = gray.data();
  for (std::size_t i = 0; i < h * w; ++i) {
    const T* px = src + i * 3;
    dst[i] = static_cast<T>(0.299) * px[0] + static_cast<T>(0.587) * px[1] +
             static_cast<T>(0.114) * px[2];
  }
  return gray;
}

/// Dense keypoint grid: top-left patch corners at multiples of the stride,
/// keeping only patches that lie fully inside the image. Row-major order.
/// Too-small images yield an empty list.
template <typename T>
std::vector<Keypoint> detect_keypoints(const Tensor<T>& gray) {
  if (gray.rank() != 2)
    throw Error("detect_keypoints expects H×W, got " + shape_str(gray.shape()));
  std::size_t h = gray.dim(0), w = gray.dim(1);
  std::vector<Keypoint> kps;
  if (h < kPatchSupport || w < kPatchSupport) return kps;
  const double half = kPatchSupport / 2.0;
  for (std::size_t r0 = 0; r0 + kPatchSupport <= h; r0 += kGridStride)
    for (std::size_t c0 = 0; c0 + kPatchSupport <= w; c0 += kGridStride)
      kps.push_back(Keypoint{static_cast<double>(c0) + half,
                             static_cast<double>(r0) + half, half});
  return kps;
}

namespace detail {

// Central differences with replicate border padding, via index clamping.
template <typename T>
inline void gradient_at(const Tensor<T>& gray, std::size_t r, std::size_t c, T& gx, T& gy) {
  std::size_t h = gray.dim(0), w = gray.dim(1);
  std::size_t cl = c == 0 ? 0 : c - 1;
  std::size_t cr = c + 1 >= w ? w - 1 : c + 1;
  std::size_t ru = r == 0 ? 0 : r - 1;
  std::size_t rd = r + 1 >= h ? h - 1 : r + 1;
  gx = (gray(r, cr) - gray(r, cl)) / T(2);
  gy = (gray(rd, c) - gray(ru, c)) / T(2);
}

}  // namespace detail

/// 4×4 spatial cells × 8 orientation bins of gradient magnitude, weighted
/// by a Gaussian of sigma = half the patch width centred on the keypoint;
/// then L2-normalise, clip at 0.2, L2-normalise again. A gradient-free
/// patch yields the zero vector unchanged.
template <typename T>
std::array<T, kDescriptorDim> compute_descriptor(const Tensor<T>& gray, const Keypoint& kp) {
  if (gray.rank() != 2)
    throw Error("compute_descriptor expects H×W, got " + shape_str(gray.shape()));
  const std::size_t support = kPatchSupport;
  const long r0 = std::lround(kp.y - kp.scale);
  const long c0 = std::lround(kp.x - kp.scale);
  if (r0 < 0 || c0 < 0 || r0 + static_cast<long>(support) > static_cast<long>(gray.dim(0)) ||
      c0 + static_cast<long>(support) > static_cast<long>(gray.dim(1)))
    throw Error("descriptor patch out of bounds at (" + std::to_string(kp.x) + "," +
                std::to_string(kp.y) + ")");

  const double sigma = support / 2.0;
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  const std::size_t cell = support / kDescriptorCells;
  const double two_pi = 2.0 * 3.14159265358979323846;
  const double bin_width = two_pi / kOrientationBins;

  std::array<T, kDescriptorDim> desc{};
  for (std::size_t pr = 0; pr < support; ++pr) {
    for (std::size_t pc = 0; pc < support; ++pc) {
      T gx, gy;
      detail::gradient_at(gray, static_cast<std::size_t>(r0) + pr,
                          static_cast<std::size_t>(c0) + pc, gx, gy);
      double mag = std::sqrt(static_cast<double>(gx) * gx + static_cast<double>(gy) * gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(static_cast<double>(gy), static_cast<double>(gx));
      if (angle < 0.0) angle += two_pi;
      std::size_t bin = static_cast<std::size_t>(angle / bin_width);
      if (bin >= kOrientationBins) bin = kOrientationBins - 1;
      double dx = (c0 + static_cast<double>(pc) + 0.5) - kp.x;
      double dy = (r0 + static_cast<double>(pr) + 0.5) - kp.y;
      double weight = std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
      std::size_t cell_index = (pr / cell) * kDescriptorCells + (pc / cell);
      desc[cell_index * kOrientationBins + bin] += static_cast<T>(weight * mag);
    }
  }

  auto l2 = [&desc] {
    double s = 0.0;
    for (T v : desc) s += static_cast<double>(v) * v;
    return std::sqrt(s);
  };
  double norm = l2();
  if (norm == 0.0) return desc;
  for (T& v : desc) v = static_cast<T>(v / norm);
  for (T& v : desc)
    if (v > static_cast<T>(kDescriptorClip)) v = static_cast<T>(kDescriptorClip);
  double norm2 = l2();
  if (norm2 > 0.0)
    for (T& v : desc) v = static_cast<T>(v / norm2);
  return desc;
}

/// Grayscale, detect, describe. Descriptor order matches keypoint order.
template <typename T>
DescriptorSet<T> extract_image_descriptors(const Tensor<T>& image, std::size_t image_id = 0) {
  Tensor<T> gray = to_grayscale(image);
  std::vector<Keypoint> kps = detect_keypoints(gray);
  DescriptorSet<T> out;
  out.source_image_id = image_id;
  out.data.resize(kps.size() * kDescriptorDim);
  for (std::size_t i = 0; i < kps.size(); ++i) {
    auto d = compute_descriptor(gray, kps[i]);
    std::copy(d.begin(), d.end(), out.data.begin() + i * kDescriptorDim);
  }
  return out;
}

}  // namespace signbench

#endif  // SIGNBENCH_FEATURES_HPP
