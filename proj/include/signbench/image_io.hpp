#ifndef SIGNBENCH_IMAGE_IO_HPP
#define SIGNBENCH_IMAGE_IO_HPP

#include <png.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "signbench/tensor.hpp"

namespace signbench {

// Decoders return H×W×3 tensors in [0,1]. PPM covers the P6 binary flavour
// (8- and 16-bit); PNG goes through libpng with every colour type expanded
// to 8-bit RGB.

namespace detail {

inline int ppm_next_token(std::istream& is, std::string& token) {
  token.clear();
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {  // comment to end of line
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (!std::isspace(ch)) break;
  }
  if (ch == EOF) return -1;
  do {
    token.push_back(static_cast<char>(ch));
  } while ((ch = is.get()) != EOF && !std::isspace(ch));
  return 0;
}

}  // namespace detail

template <typename T = float>
Tensor<T> read_ppm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open image: " + path);
  std::string token;
  if (detail::ppm_next_token(is, token) < 0 || token != "P6")
    throw DataError("not a P6 ppm file: " + path);
  std::size_t dims[3];
  for (std::size_t i = 0; i < 3; ++i) {
    if (detail::ppm_next_token(is, token) < 0)
      throw DataError("truncated ppm header: " + path);
    try {
      dims[i] = std::stoul(token);
    } catch (const std::exception&) {
      throw DataError("bad ppm header field '" + token + "' in " + path);
    }
  }
  std::size_t w = dims[0], h = dims[1], maxval = dims[2];
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535)
    throw DataError("bad ppm dimensions in " + path);

  std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(w * h * 3 * bytes_per_sample);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(is.gcount()) != raw.size())
    throw DataError("truncated ppm pixel data: " + path);

  Tensor<T> img({h, w, 3});
  const T scale = T(1) / static_cast<T>(maxval);
  for (std::size_t i = 0; i < w * h * 3; ++i) {
    std::size_t v = bytes_per_sample == 1
                        ? raw[i]
                        : (std::size_t(raw[2 * i]) << 8) | raw[2 * i + 1];
    img[i] = static_cast<T>(v) * scale;
  }
  return img;
}

template <typename T = float>
void write_ppm(const Tensor<T>& img, const std::string& path) {
  if (img.rank() != 3 || img.dim(2) != 3)
    throw Error("write_ppm expects H×W×3, got " + shape_str(img.shape()));
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path);
  os << "P6\n" << img.dim(1) << ' ' << img.dim(0) << "\n255\n";
  std::vector<unsigned char> raw(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    double v = std::min(std::max(double(img[i]), 0.0), 1.0);
    raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) throw DataError("failed writing image: " + path);
}

namespace detail {

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

}  // namespace detail

template <typename T = float>
Tensor<T> read_png(const std::string& path) {
  detail::PngReader r;
  r.fp = std::fopen(path.c_str(), "rb");
  if (!r.fp) throw DataError("cannot open image: " + path);
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, r.fp) != 8 || png_sig_cmp(sig, 0, 8))
    throw DataError("not a png file: " + path);
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw DataError("libpng init failed for " + path);
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw DataError("libpng init failed for " + path);
  if (setjmp(png_jmpbuf(r.png))) throw DataError("corrupt png file: " + path);

  png_init_io(r.png, r.fp);
  png_set_sig_bytes(r.png, 8);
  png_read_info(r.png, r.info);

  png_set_expand(r.png);          // palette/low-bit -> 8-bit
  png_set_strip_16(r.png);        // 16-bit -> 8-bit
  png_set_strip_alpha(r.png);
  png_set_gray_to_rgb(r.png);
  png_read_update_info(r.png, r.info);

  std::size_t w = png_get_image_width(r.png, r.info);
  std::size_t h = png_get_image_height(r.png, r.info);
  if (png_get_channels(r.png, r.info) != 3)
    throw DataError("unexpected png channel count in " + path);

  std::vector<unsigned char> raw(w * h * 3);
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = raw.data() + y * w * 3;
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);

  Tensor<T> img({h, w, 3});
  const T scale = T(1) / T(255);
  for (std::size_t i = 0; i < raw.size(); ++i) img[i] = static_cast<T>(raw[i]) * scale;
  return img;
}

/// Decodes by content signature (PNG magic or "P6").
template <typename T = float>
Tensor<T> decode_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open image: " + path);
  unsigned char head[8] = {0};
  probe.read(reinterpret_cast<char*>(head), 8);
  probe.close();
  if (head[0] == 0x89 && head[1] == 'P' && head[2] == 'N' && head[3] == 'G')
    return read_png<T>(path);
  if (head[0] == 'P' && head[1] == '6') return read_ppm<T>(path);
  throw DataError("unsupported image format: " + path);
}

/// Bilinear resize with half-pixel sample centres and clamped borders.
template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& img, std::size_t out_h, std::size_t out_w) {
  if (img.rank() != 3) throw Error("resize expects H×W×C, got " + shape_str(img.shape()));
  const std::size_t h = img.dim(0), w = img.dim(1), c = img.dim(2);
  if (h == out_h && w == out_w) return img;
  Tensor<T> out({out_h, out_w, c});
  const double sy = double(h) / double(out_h);
  const double sx = double(w) / double(out_w);
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    double fy = (double(oy) + 0.5) * sy - 0.5;
    fy = std::min(std::max(fy, 0.0), double(h) - 1.0);
    std::size_t y0 = static_cast<std::size_t>(fy);
    std::size_t y1 = std::min(y0 + 1, h - 1);
    double wy = fy - double(y0);
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      double fx = (double(ox) + 0.5) * sx - 0.5;
      fx = std::min(std::max(fx, 0.0), double(w) - 1.0);
      std::size_t x0 = static_cast<std::size_t>(fx);
      std::size_t x1 = std::min(x0 + 1, w - 1);
      double wx = fx - double(x0);
      for (std::size_t ch = 0; ch < c; ++ch) {
        double top = double(img(y0, x0, ch)) * (1 - wx) + double(img(y0, x1, ch)) * wx;
        double bot = double(img(y1, x0, ch)) * (1 - wx) + double(img(y1, x1, ch)) * wx;
        out(oy, ox, ch) = static_cast<T>(top * (1 - wy) + bot * wy);
      }
    }
  }
  return out;
}

}  // namespace signbench

#endif  // SIGNBENCH_IMAGE_IO_HPP
