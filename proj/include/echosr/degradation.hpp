#pragma once

#include <filesystem>
#include <vector>

#include "echosr/dataset.hpp"
#include "echosr/image.hpp"

namespace echosr {

/// Supervised LR/HR training pair. hr dims are exactly scale * lr dims.
struct SRPair {
  ImagePtr lr;
  ImagePtr hr;
  int scale = 4;
};

/// Center-crops to the largest dims divisible by r, then resamples with
/// the anti-aliased Catmull-Rom kernel. Output is clamped to [0, 1].
Image bicubic_downsample(const Image& img, int r);

/// Catmull-Rom interpolation to r-times dims, clamped to [0, 1].
Image bicubic_upsample(const Image& img, int r);

/// General Catmull-Rom resize (anti-aliased on shrinking axes); used at
/// the classifier boundary. Clamped to [0, 1].
Image resize_bicubic(const Image& img, int out_h, int out_w);

/// One pair per frame: hr is the center-cropped original, lr its bicubic
/// r-fold downsample.
std::vector<SRPair> make_sr_pairs(const EchoDataset& subset, int r);

/// Golden-file dump: pairs as 16-bit PGMs plus a pairs.csv index.
void dump_pairs(const std::vector<SRPair>& pairs, const std::filesystem::path& dir);
std::vector<SRPair> load_pairs(const std::filesystem::path& dir);

}  // namespace echosr
