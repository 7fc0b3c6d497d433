// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rilab/tensor.hpp"

namespace rilab {

struct CorpusImage {
  std::string id;
  Tensor image;
};

struct Corpus {
  enum class Provenance { Files, Synthetic };

  std::string name;
  std::vector<CorpusImage> images;
  Provenance provenance = Provenance::Files;
  std::uint64_t seed = 0;  // Synthetic only

  // Ids unique, every image 3-channel with values in [0, 255].
  void validate() const;
  std::vector<Tensor> tensors() const;
};

// Deterministic synthetic corpus of `size` x `size` RGB images. Image i is
// driven by Rng(Rng::derive(seed, i)) and cycles through four content families
// (smooth fields, checkerboards, stroke/line art, band-limited noise), each
// mixed with a secondary component, luma-stretched to the full [0, 255] range
// and lightly tinted. Values are integers.
Corpus synth_corpus(std::uint64_t seed, int n, int size);

// Accepted forms:
//   synth:<seed>:<n>:<size>   generated on the fly
//   <dir>                     every *.ppm / *.pgm inside, sorted by file name
//   <file>.json               corpus manifest written by save_corpus
Corpus load_corpus(const std::string& source);

// Writes <dir>/<id>.ppm for each image and <dir>/manifest.json.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace rilab
