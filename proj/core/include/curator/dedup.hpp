#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "curator/types.hpp"

namespace curator {

// 64-bit difference hash.
using DHash64 = std::uint64_t;

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<int> pixels;  // row-major, values in [0, 255]

  bool operator==(const GrayImage&) const = default;
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<int> pixels;  // row-major interleaved R,G,B in [0, 255]
};

// BT.601 luminance: round(0.299 R + 0.587 G + 0.114 B), clamped to [0, 255].
GrayImage to_gray(const RgbImage& rgb);

// Exact area-weighted box resampling onto the canonical 9x8 grid. Each
// output cell averages source pixels by their geometric overlap with the
// cell rectangle; the result is rounded half-up.
GrayImage resize_to_9x8(const GrayImage& img);

// Bit (63 - (8r + c)) is set iff pixel(r,c) > pixel(r,c+1) on the 9x8 grid
// (MSB-first row-major; r in [0,8), c in [0,8)). Resizes internally.
DHash64 dhash(const GrayImage& img);

struct FilterResult {
  std::vector<SampleId> kept;  // stable input order
  std::size_t discarded = 0;
};

// Keeps exactly the crawled entries whose hash does not appear in the
// downstream set. Matching is exact hash equality.
FilterResult overlap_filter(
    const std::vector<std::pair<SampleId, DHash64>>& crawled,
    const std::unordered_set<DHash64>& downstream);

// Hash list file: one "<sample_id> <16-hex-digit hash>" per line.
std::vector<std::pair<SampleId, DHash64>> load_hash_list(std::istream& in);

std::string to_hex(DHash64 h);

// Raw PNM ingestion: binary P5 (grayscale) and P6 (RGB), maxval <= 255.
GrayImage load_pnm_gray(std::istream& in);

}  // namespace curator
