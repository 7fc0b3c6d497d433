// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include "rilab/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "rilab/error.hpp"
#include "rilab/fileio.hpp"
#include "rilab/ops.hpp"

namespace rilab {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (1 << 24)) throw ParseError(std::string("pnm: ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) {
      throw ParseError(std::string("pnm: expected ") + what + " at byte " + std::to_string(start),
                       static_cast<long long>(start));
    }
    return static_cast<int>(v);
  }

  void expect_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw ParseError("pnm: expected whitespace after maxval at byte " + std::to_string(pos_),
                       static_cast<long long>(pos_));
    }
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Tensor decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw ParseError("pnm: missing P5/P6 magic at byte 0", 0);
  }
  const bool rgb = bytes[1] == '6';
  HeaderReader body(bytes.subspan(2));
  const int width = body.read_uint("width");
  const int height = body.read_uint("height");
  const int maxval = body.read_uint("maxval");
  if (width <= 0 || height <= 0) {
    throw ParseError("pnm: non-positive dimensions", static_cast<long long>(2 + body.pos()));
  }
  if (maxval != 255) {
    throw ParseError("pnm: only maxval 255 is supported, got " + std::to_string(maxval),
                     static_cast<long long>(2 + body.pos()));
  }
  body.expect_single_space();
  const std::size_t offset = 2 + body.pos();
  const std::size_t per_pixel = rgb ? 3 : 1;
  const std::size_t need = static_cast<std::size_t>(width) * height * per_pixel;
  if (bytes.size() - offset < need) {
    throw ParseError("pnm: truncated payload, expected " + std::to_string(need) +
                         " bytes from byte " + std::to_string(offset) + ", file ends at byte " +
                         std::to_string(bytes.size()),
                     static_cast<long long>(bytes.size()));
  }
  Tensor t(height, width, 3);
  auto out = t.values();
  for (std::size_t p = 0; p < static_cast<std::size_t>(width) * height; ++p) {
    for (int c = 0; c < 3; ++c) {
      out[3 * p + c] = bytes[offset + p * per_pixel + (rgb ? c : 0)];
    }
  }
  return t;
}

std::vector<std::uint8_t> encode_pnm(const Tensor& t) {
  if (t.channels() != 3 && t.channels() != 1) {
    throw StructuralError("pnm: can only encode 1- or 3-channel tensors");
  }
  const std::string header = std::string(t.channels() == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(t.width()) + " " + std::to_string(t.height()) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + t.size());
  for (float v : t.values()) {
    const float r = std::round(std::clamp(v, 0.0f, 255.0f));
    out.push_back(static_cast<std::uint8_t>(r));
  }
  return out;
}

Tensor load_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_pnm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

void save_image(const Tensor& t, const std::filesystem::path& path) {
  write_file_atomic(path, encode_pnm(t));
}

Tensor luma_plane(const Tensor& rgb) {
  if (rgb.channels() == 1) return rgb;
  if (rgb.channels() != 3) throw StructuralError("luma_plane expects 1 or 3 channels");
  Tensor y(rgb.height(), rgb.width(), 1);
  auto out = y.values();
  auto in = rgb.values();
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = static_cast<float>(luma(in[3 * p], in[3 * p + 1], in[3 * p + 2]));
  }
  return y;
}

Tensor round_clamp_u8(const Tensor& t) {
  Tensor out = t;
  for (float& v : out.values()) v = std::round(std::clamp(v, 0.0f, 255.0f));
  return out;
}

Tensor crop(const Tensor& t, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || h <= 0 || w <= 0 || y0 + h > t.height() || x0 + w > t.width()) {
    throw StructuralError("crop window outside tensor");
  }
  Tensor out(h, w, t.channels());
  for (int y = 0; y < h; ++y) {
    const float* src = t.pixel(y0 + y, x0);
    std::copy(src, src + static_cast<std::size_t>(w) * t.channels(), out.pixel(y, 0));
  }
  return out;
}

Tensor modcrop(const Tensor& t, int multiple) {
  const int h = t.height() - t.height() % multiple;
  const int w = t.width() - t.width() % multiple;
  if (h <= 0 || w <= 0) throw StructuralError("modcrop: image smaller than the multiple");
  if (h == t.height() && w == t.width()) return t;
  return crop(t, 0, 0, h, w);
}

Tensor flip_horizontal(const Tensor& t) {
  Tensor out(t.height(), t.width(), t.channels());
  for (int y = 0; y < t.height(); ++y) {
    for (int x = 0; x < t.width(); ++x) {
      const float* src = t.pixel(y, t.width() - 1 - x);
      std::copy(src, src + t.channels(), out.pixel(y, x));
    }
  }
  return out;
}

double cubic_kernel(double x) {
  constexpr double a = -0.5;
  const double ax = std::abs(x);
  if (ax <= 1.0) return ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0;
  if (ax < 2.0) return ((a * ax - 5.0 * a) * ax + 8.0 * a) * ax - 4.0 * a;
  return 0.0;
}

namespace {

struct Taps {
  std::vector<int> first;        // per output: offset into index/weight lists
  std::vector<int> count;
  std::vector<int> index;
  std::vector<double> weight;
};

Taps make_taps(int in, int out) {
  Taps taps;
  const double s = static_cast<double>(out) / in;
  const double support = s < 1.0 ? 2.0 / s : 2.0;
  for (int o = 0; o < out; ++o) {
    const double u = (o + 0.5) / s - 0.5;
    const int lo = static_cast<int>(std::floor(u - support)) + 1;
    const int hi = static_cast<int>(std::ceil(u + support)) - 1;
    taps.first.push_back(static_cast<int>(taps.index.size()));
    double sum = 0.0;
    const std::size_t begin = taps.weight.size();
    for (int j = lo; j <= hi; ++j) {
      const double wgt = s < 1.0 ? cubic_kernel((u - j) * s) : cubic_kernel(u - j);
      if (wgt == 0.0) continue;
      taps.index.push_back(reflect_index(j, in));
      taps.weight.push_back(wgt);
      sum += wgt;
    }
    for (std::size_t k = begin; k < taps.weight.size(); ++k) taps.weight[k] /= sum;
    taps.count.push_back(static_cast<int>(taps.weight.size() - begin));
  }
  return taps;
}

}  // namespace

Tensor bicubic_resize(const Tensor& t, Rational factor) {
  if (factor.num <= 0 || factor.den <= 0) throw StructuralError("resize factor must be positive");
  const auto scaled = [&](int n) {
    return static_cast<int>((static_cast<long long>(n) * factor.num + factor.den - 1) / factor.den);
  };
  const int oh = scaled(t.height());
  const int ow = scaled(t.width());
  if (oh < 1 || ow < 1) throw StructuralError("resize result smaller than one pixel");
  const int c = t.channels();
  const Taps tx = make_taps(t.width(), ow);
  const Taps ty = make_taps(t.height(), oh);

  std::vector<double> horiz(static_cast<std::size_t>(t.height()) * ow * c, 0.0);
  for (int y = 0; y < t.height(); ++y) {
    for (int x = 0; x < ow; ++x) {
      double* dst = horiz.data() + (static_cast<std::size_t>(y) * ow + x) * c;
      for (int k = 0; k < tx.count[x]; ++k) {
        const int f = tx.first[x] + k;
        const float* src = t.pixel(y, tx.index[f]);
        for (int ch = 0; ch < c; ++ch) dst[ch] += tx.weight[f] * src[ch];
      }
    }
  }
  Tensor out(oh, ow, c);
  std::vector<double> acc(c);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int k = 0; k < ty.count[y]; ++k) {
        const int f = ty.first[y] + k;
        const double* src = horiz.data() + (static_cast<std::size_t>(ty.index[f]) * ow + x) * c;
        for (int ch = 0; ch < c; ++ch) acc[ch] += ty.weight[f] * src[ch];
      }
      float* dst = out.pixel(y, x);
      for (int ch = 0; ch < c; ++ch) dst[ch] = static_cast<float>(acc[ch]);
    }
  }
  return out;
}

}  // namespace rilab
