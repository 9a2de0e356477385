#include "curator/dedup.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <sstream>

#include "curator/errors.hpp"

namespace curator {

GrayImage to_gray(const RgbImage& rgb) {
  if (rgb.width <= 0 || rgb.height <= 0 ||
      rgb.pixels.size() != static_cast<std::size_t>(3 * rgb.width * rgb.height))
    throw DimensionError("rgb buffer size does not match dimensions");
  GrayImage out;
  out.width = rgb.width;
  out.height = rgb.height;
  out.pixels.resize(static_cast<std::size_t>(rgb.width) * rgb.height);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    const double y = 0.299 * rgb.pixels[3 * i] + 0.587 * rgb.pixels[3 * i + 1] +
                     0.114 * rgb.pixels[3 * i + 2];
    out.pixels[i] = std::clamp(static_cast<int>(std::floor(y + 0.5)), 0, 255);
  }
  return out;
}

GrayImage resize_to_9x8(const GrayImage& img) {
  if (img.width <= 0 || img.height <= 0 ||
      img.pixels.size() != static_cast<std::size_t>(img.width) * img.height)
    throw DimensionError("gray buffer size does not match dimensions");
  constexpr int kW = 9, kH = 8;
  GrayImage out;
  out.width = kW;
  out.height = kH;
  out.pixels.resize(kW * kH);
  const double sx = static_cast<double>(img.width) / kW;
  const double sy = static_cast<double>(img.height) / kH;
  for (int r = 0; r < kH; ++r) {
    const double y0 = r * sy, y1 = (r + 1) * sy;
    for (int c = 0; c < kW; ++c) {
      const double x0 = c * sx, x1 = (c + 1) * sx;
      double acc = 0.0;
      for (int j = static_cast<int>(std::floor(y0));
           j < static_cast<int>(std::ceil(y1)); ++j) {
        const double hy =
            std::min<double>(j + 1, y1) - std::max<double>(j, y0);
        if (hy <= 0) continue;
        for (int i = static_cast<int>(std::floor(x0));
             i < static_cast<int>(std::ceil(x1)); ++i) {
          const double wx =
              std::min<double>(i + 1, x1) - std::max<double>(i, x0);
          if (wx <= 0) continue;
          acc += hy * wx * img.pixels[static_cast<std::size_t>(j) * img.width + i];
        }
      }
      const double mean = acc / (sx * sy);
      out.pixels[static_cast<std::size_t>(r) * kW + c] =
          static_cast<int>(std::floor(mean + 0.5));
    }
  }
  return out;
}

DHash64 dhash(const GrayImage& img) {
  const GrayImage g =
      (img.width == 9 && img.height == 8) ? img : resize_to_9x8(img);
  DHash64 h = 0;
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      if (g.pixels[r * 9 + c] > g.pixels[r * 9 + c + 1])
        h |= DHash64{1} << (63 - (8 * r + c));
    }
  }
  return h;
}

FilterResult overlap_filter(
    const std::vector<std::pair<SampleId, DHash64>>& crawled,
    const std::unordered_set<DHash64>& downstream) {
  FilterResult res;
  res.kept.reserve(crawled.size());
  for (const auto& [id, hash] : crawled) {
    if (downstream.count(hash))
      ++res.discarded;
    else
      res.kept.push_back(id);
  }
  return res;
}

std::vector<std::pair<SampleId, DHash64>> load_hash_list(std::istream& in) {
  std::vector<std::pair<SampleId, DHash64>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream iss(line);
    SampleId id;
    std::string hex;
    if (!(iss >> id >> hex)) throw ParseError(lineno, "expected: <id> <hash>");
    if (hex.size() != 16 ||
        !std::all_of(hex.begin(), hex.end(),
                     [](unsigned char c) { return std::isxdigit(c); }))
      throw ParseError(lineno, "hash is not 16 hex digits: " + hex);
    out.emplace_back(id, std::stoull(hex, nullptr, 16));
  }
  return out;
}

std::string to_hex(DHash64 h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xF];
    h >>= 4;
  }
  return s;
}

namespace {

// Reads the next PNM header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (std::isspace(ch)) continue;
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    break;
  }
  if (ch == EOF) throw ParseError(0, "truncated pnm header");
  tok.push_back(static_cast<char>(ch));
  while ((ch = in.get()) != EOF && !std::isspace(ch))
    tok.push_back(static_cast<char>(ch));
  return tok;
}

}  // namespace

GrayImage load_pnm_gray(std::istream& in) {
  const std::string magic = pnm_token(in);
  if (magic != "P5" && magic != "P6")
    throw ParseError(1, "unsupported pnm magic: " + magic);
  const int w = std::stoi(pnm_token(in));
  const int h = std::stoi(pnm_token(in));
  const int maxval = std::stoi(pnm_token(in));
  if (w <= 0 || h <= 0) throw ParseError(1, "bad pnm dimensions");
  if (maxval <= 0 || maxval > 255) throw ParseError(1, "pnm maxval must be <= 255");
  const int channels = magic == "P6" ? 3 : 1;
  std::vector<char> buf(static_cast<std::size_t>(w) * h * channels);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw ParseError(0, "truncated pnm pixel data");
  if (channels == 1) {
    GrayImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i)
      img.pixels[i] = static_cast<unsigned char>(buf[i]);
    return img;
  }
  RgbImage rgb;
  rgb.width = w;
  rgb.height = h;
  rgb.pixels.resize(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i)
    rgb.pixels[i] = static_cast<unsigned char>(buf[i]);
  return to_gray(rgb);
}

}  // namespace curator
