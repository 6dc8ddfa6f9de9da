#ifndef SIGNBENCH_NN_AUGMENT_HPP
#define SIGNBENCH_NN_AUGMENT_HPP

#include <cmath>

#include "signbench/rng.hpp"
#include "signbench/tensor.hpp"

namespace signbench {

/// On-the-fly training augmentation: each transform fires independently
/// with its own probability.
struct AugmentParams {
  double rotate_prob = 0.5;
  double max_rotate_deg = 10.0;
  double translate_prob = 0.5;
  double max_translate_frac = 0.1;  // of width/height
  double scale_prob = 0.5;
  double scale_lo = 0.9;
  double scale_hi = 1.1;
  double brightness_prob = 0.5;
  double brightness_lo = 0.8;
  double brightness_hi = 1.2;
};

/// Applies rotation / translation / scale (one bilinear resample with
/// replicate border fill) and a brightness factor clamped to [0,1]. Output
/// shape equals input shape. Draws come from `rng` in a fixed order, so a
/// given (seed, stream) always produces the same image.
template <typename T>
Tensor<T> augment(const Tensor<T>& image, SeededRng& rng, const AugmentParams& p = {}) {
  if (image.rank() != 3) throw Error("augment expects H×W×C, got " + shape_str(image.shape()));
  const std::size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);

  bool do_rotate = rng.bernoulli(p.rotate_prob);
  double angle = do_rotate ? rng.uniform(-p.max_rotate_deg, p.max_rotate_deg) : 0.0;
  bool do_translate = rng.bernoulli(p.translate_prob);
  double tx = 0.0, ty = 0.0;
  if (do_translate) {
    tx = rng.uniform(-p.max_translate_frac, p.max_translate_frac) * double(w);
    ty = rng.uniform(-p.max_translate_frac, p.max_translate_frac) * double(h);
  }
  bool do_scale = rng.bernoulli(p.scale_prob);
  double scale = do_scale ? rng.uniform(p.scale_lo, p.scale_hi) : 1.0;
  bool do_brightness = rng.bernoulli(p.brightness_prob);
  double bright = do_brightness ? rng.uniform(p.brightness_lo, p.brightness_hi) : 1.0;

  bool geometric = do_rotate || do_translate || do_scale;
  if (!geometric && !do_brightness) return image;

  Tensor<T> out(image.shape());
  if (!geometric) {
    out = image;
  } else {
    // Inverse map each output pixel through translate -> rotate -> scale
    // about the image centre; bilinear sample with clamped coordinates.
    const double cx = (double(w) - 1.0) / 2.0;
    const double cy = (double(h) - 1.0) / 2.0;
    const double rad = angle * 3.14159265358979323846 / 180.0;
    const double cos_a = std::cos(-rad), sin_a = std::sin(-rad);
    const double inv_s = 1.0 / scale;
    for (std::size_t oy = 0; oy < h; ++oy) {
      for (std::size_t ox = 0; ox < w; ++ox) {
        double dx = double(ox) - cx - tx;
        double dy = double(oy) - cy - ty;
        double rx = (cos_a * dx - sin_a * dy) * inv_s + cx;
        double ry = (sin_a * dx + cos_a * dy) * inv_s + cy;
        rx = std::min(std::max(rx, 0.0), double(w) - 1.0);
        ry = std::min(std::max(ry, 0.0), double(h) - 1.0);
        std::size_t x0 = static_cast<std::size_t>(rx);
        std::size_t y0 = static_cast<std::size_t>(ry);
        std::size_t x1 = std::min(x0 + 1, w - 1);
        std::size_t y1 = std::min(y0 + 1, h - 1);
        double fx = rx - double(x0), fy = ry - double(y0);
        for (std::size_t ch = 0; ch < c; ++ch) {
          double v00 = image(y0, x0, ch), v01 = image(y0, x1, ch);
          double v10 = image(y1, x0, ch), v11 = image(y1, x1, ch);
          double top = v00 + (v01 - v00) * fx;
          double bot = v10 + (v11 - v10) * fx;
          out(oy, ox, ch) = static_cast<T>(top + (bot - top) * fy);
        }
      }
    }
  }

  if (do_brightness) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      double v = double(out[i]) * bright;
      out[i] = static_cast<T>(std::min(std::max(v, 0.0), 1.0));
    }
  }
  return out;
}

}  // namespace signbench

#endif  // SIGNBENCH_NN_AUGMENT_HPP
