// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include "rilab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rilab/error.hpp"
#include "rilab/fileio.hpp"
#include "rilab/image.hpp"
#include "rilab/rng.hpp"

namespace rilab {

void Corpus::validate() const {
  std::set<std::string> ids;
  for (const auto& img : images) {
    if (!ids.insert(img.id).second) throw StructuralError("corpus: duplicate id '" + img.id + "'");
    if (img.image.channels() != 3) {
      throw StructuralError("corpus: image '" + img.id + "' is not 3-channel");
    }
    for (float v : img.image.values()) {
      if (!(v >= 0.0f && v <= 255.0f)) {
        throw StructuralError("corpus: image '" + img.id + "' has values outside [0, 255]");
      }
    }
  }
}

std::vector<Tensor> Corpus::tensors() const {
  std::vector<Tensor> out;
  out.reserve(images.size());
  for (const auto& i : images) out.push_back(i.image);
  return out;
}

namespace {

using Field = std::vector<double>;  // size x size, row-major

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Field smooth_field(Rng& rng, int n) {
  Field f(static_cast<std::size_t>(n) * n, 0.0);
  const double gx = rng.uniform(-1.0, 1.0);
  const double gy = rng.uniform(-1.0, 1.0);
  const int waves = 2 + rng.below_int(2);
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> ws;
  for (int k = 0; k < waves; ++k) {
    ws.push_back({rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(0.0, kTwoPi),
                  rng.uniform(0.3, 1.0)});
  }
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double u = static_cast<double>(x) / n;
      const double v = static_cast<double>(y) / n;
      double s = gx * u + gy * v;
      for (const auto& w : ws) s += w.amp * std::sin(kTwoPi * (w.fx * u + w.fy * v) + w.phase);
      f[static_cast<std::size_t>(y) * n + x] = s;
    }
  }
  return f;
}

Field checker_field(Rng& rng, int n) {
  Field f(static_cast<std::size_t>(n) * n, 0.0);
  const int cell = std::max(6, n / 10) + rng.below_int(std::max(2, n / 8));
  const int ox = rng.below_int(cell);
  const int oy = rng.below_int(cell);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      f[static_cast<std::size_t>(y) * n + x] = (((x + ox) / cell + (y + oy) / cell) % 2) ? 1.0 : 0.0;
    }
  }
  return f;
}

Field stroke_field(Rng& rng, int n) {
  Field f(static_cast<std::size_t>(n) * n, 0.0);
  const int strokes = 6 + rng.below_int(10);
  for (int s = 0; s < strokes; ++s) {
    const double value = rng.uniform01() < 0.5 ? 0.0 : 1.0;
    const bool horizontal = rng.uniform01() < 0.5;
    const int thick = 3 + rng.below_int(4);
    const int pos = rng.below_int(n);
    const int a = rng.below_int(n);
    const int len = n / 4 + rng.below_int(n / 2 + 1);
    for (int t = 0; t < len; ++t) {
      for (int k = 0; k < thick; ++k) {
        int y = horizontal ? pos + k : a + t;
        int x = horizontal ? a + t : pos + k;
        if (y >= 0 && y < n && x >= 0 && x < n) f[static_cast<std::size_t>(y) * n + x] = value;
      }
    }
  }
  // rectangles ("glyph blocks")
  const int rects = 2 + rng.below_int(4);
  for (int r = 0; r < rects; ++r) {
    const double value = rng.uniform01() < 0.5 ? 0.0 : 1.0;
    const int h = 6 + rng.below_int(n / 6 + 1);
    const int w = 6 + rng.below_int(n / 6 + 1);
    const int y0 = rng.below_int(n);
    const int x0 = rng.below_int(n);
    for (int y = y0; y < std::min(n, y0 + h); ++y) {
      for (int x = x0; x < std::min(n, x0 + w); ++x) f[static_cast<std::size_t>(y) * n + x] = value;
    }
  }
  return f;
}

Field noise_field(Rng& rng, int n) {
  const int grid = std::max(2, n / (3 + rng.below_int(6)));
  Tensor coarse(grid, grid, 1);
  for (float& v : coarse.values()) v = static_cast<float>(rng.uniform01());
  Tensor up = bicubic_resize(coarse, Rational{n, grid});
  Field f(static_cast<std::size_t>(n) * n, 0.0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) f[static_cast<std::size_t>(y) * n + x] = up.at(y, x, 0);
  }
  return f;
}

Field family(int kind, Rng& rng, int n) {
  switch (kind) {
    case 0: return smooth_field(rng, n);
    case 1: return checker_field(rng, n);
    case 2: return stroke_field(rng, n);
    default: return noise_field(rng, n);
  }
}

// Separable [1 2 1] / 4 pass with clamped borders; takes the aliasing off hard edges.
void soften(Field& f, int n) {
  Field t(f.size());
  auto at = [n](const Field& g, int y, int x) {
    return g[static_cast<std::size_t>(std::clamp(y, 0, n - 1)) * n + std::clamp(x, 0, n - 1)];
  };
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      t[static_cast<std::size_t>(y) * n + x] = 0.25 * at(f, y, x - 1) + 0.5 * at(f, y, x) + 0.25 * at(f, y, x + 1);
    }
  }
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      f[static_cast<std::size_t>(y) * n + x] = 0.25 * at(t, y - 1, x) + 0.5 * at(t, y, x) + 0.25 * at(t, y + 1, x);
    }
  }
}

void normalize(Field& f) {
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  const double a = *lo;
  const double span = *hi - *lo;
  for (double& v : f) v = span > 0.0 ? (v - a) / span : 0.5;
}

Tensor synth_image(Rng& rng, int index, int n) {
  const int primary = index % 4;
  const int secondary = (primary + 1 + rng.below_int(3)) % 4;
  Field a = family(primary, rng, n);
  Field b = family(secondary, rng, n);
  normalize(a);
  normalize(b);
  const double mix = rng.uniform(0.1, 0.35);
  Field l(a.size());
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = (1.0 - mix) * a[i] + mix * b[i];
  soften(l, n);
  normalize(l);

  // Tint: chroma offsets vanish at black and white so the luma extremes stay 0 and 255.
  Field cr = smooth_field(rng, n);
  Field cb = smooth_field(rng, n);
  normalize(cr);
  normalize(cb);
  const double tint = rng.uniform(0.0, 0.8);
  Tensor img(n, n, 3);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * n + x;
      const double base = l[i];
      const double w = tint * base * (1.0 - base);
      const double dr = w * (cr[i] - 0.5);
      const double db = w * (cb[i] - 0.5);
      const double rgb[3] = {base + dr, base - 0.5 * (dr + db), base + db};
      for (int c = 0; c < 3; ++c) {
        img.at(y, x, c) = static_cast<float>(std::round(255.0 * std::clamp(rgb[c], 0.0, 1.0)));
      }
    }
  }
  return img;
}

std::string synth_id(std::uint64_t seed, int i) {
  std::ostringstream os;
  os << "s" << seed << "_" << (i < 10 ? "00" : i < 100 ? "0" : "") << i;
  return os.str();
}

}  // namespace

Corpus synth_corpus(std::uint64_t seed, int n, int size) {
  if (n < 1) throw StructuralError("synth_corpus: n must be >= 1");
  if (size < 8) throw StructuralError("synth_corpus: size must be >= 8");
  Corpus c;
  c.name = "synth:" + std::to_string(seed) + ":" + std::to_string(n) + ":" + std::to_string(size);
  c.provenance = Corpus::Provenance::Synthetic;
  c.seed = seed;
  for (int i = 0; i < n; ++i) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(i)));
    c.images.push_back({synth_id(seed, i), synth_image(rng, i, size)});
  }
  return c;
}

namespace {

Corpus parse_synth(const std::string& source) {
  std::vector<std::string> parts;
  std::stringstream ss(source);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 4) throw ParseError("corpus source must be synth:<seed>:<n>:<size>");
  try {
    return synth_corpus(std::stoull(parts[1]), std::stoi(parts[2]), std::stoi(parts[3]));
  } catch (const std::logic_error&) {
    throw ParseError("corpus source must be synth:<seed>:<n>:<size>, got '" + source + "'");
  }
}

}  // namespace

Corpus load_corpus(const std::string& source) {
  if (source.rfind("synth:", 0) == 0) return parse_synth(source);
  const std::filesystem::path path(source);
  if (!std::filesystem::exists(path)) throw ParseError("corpus '" + source + "' does not exist");
  Corpus c;
  c.provenance = Corpus::Provenance::Files;
  if (std::filesystem::is_directory(path)) {
    c.name = path.filename().string();
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(path)) {
      const auto ext = e.path().extension().string();
      if (e.is_regular_file() && (ext == ".ppm" || ext == ".pgm")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) c.images.push_back({f.stem().string(), load_image(f)});
  } else {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file_text(path));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("malformed corpus manifest '" + source + "': " + e.what(),
                       static_cast<long long>(e.byte));
    }
    try {
      c.name = j.at("name").get<std::string>();
      if (j.value("provenance", "files") == "synthetic" && !j.contains("images")) {
        return synth_corpus(j.at("seed").get<std::uint64_t>(), j.at("n").get<int>(),
                            j.at("size").get<int>());
      }
      for (const auto& e : j.at("images")) {
        c.images.push_back({e.at("id").get<std::string>(),
                            load_image(path.parent_path() / e.at("path").get<std::string>())});
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("corpus manifest '" + source + "': " + e.what());
    }
  }
  c.validate();
  return c;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  corpus.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  j["schema_version"] = 1;
  j["name"] = corpus.name;
  j["provenance"] = corpus.provenance == Corpus::Provenance::Synthetic ? "synthetic" : "files";
  if (corpus.provenance == Corpus::Provenance::Synthetic) j["seed"] = corpus.seed;
  auto images = nlohmann::json::array();
  for (const auto& img : corpus.images) {
    const std::string file = img.id + ".ppm";
    save_image(img.image, dir / file);
    images.push_back({{"id", img.id}, {"path", file}});
  }
  j["images"] = std::move(images);
  write_file_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace rilab
