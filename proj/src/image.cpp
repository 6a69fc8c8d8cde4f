#include "ledits/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "ledits/error.hpp"

namespace ledits {

std::uint8_t quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw ParameterError("write_pgm: inconsistent image dimensions");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  std::vector<char> bytes(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), bytes.begin(),
                 [](double v) { return static_cast<char>(quantize(v)); });
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (pgm_token(in) != "P5") throw IoError(path.string() + ": not a binary PGM (P5)");
  GrayImage img;
  try {
    img.width = std::stoi(pgm_token(in));
    img.height = std::stoi(pgm_token(in));
    const int maxval = std::stoi(pgm_token(in));
    if (maxval != 255) throw IoError(path.string() + ": only maxval 255 is supported");
  } catch (const std::logic_error&) {
    throw IoError(path.string() + ": malformed PGM header");
  }
  if (img.width <= 0 || img.height <= 0) throw IoError(path.string() + ": bad dimensions");
  std::vector<unsigned char> bytes(static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw IoError(path.string() + ": truncated pixel data");
  }
  img.pixels.resize(bytes.size());
  std::transform(bytes.begin(), bytes.end(), img.pixels.begin(),
                 [](unsigned char b) { return b / 255.0; });
  return img;
}

Vec to_model_space(std::span<const double> pixels) {
  Vec v(pixels.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 2.0 * pixels[i] - 1.0;
  return v;
}

Vec to_pixel_space(std::span<const double> values) {
  Vec v(values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * (values[i] + 1.0);
  return v;
}

std::vector<Vec> split_tiles(const GrayImage& strip, int side) {
  if (strip.height != side || strip.width % side != 0) {
    throw ParameterError("image must be " + std::to_string(side) + " pixels high with a width that is a multiple of " +
                         std::to_string(side));
  }
  const int n = strip.width / side;
  std::vector<Vec> tiles(n, Vec(static_cast<std::size_t>(side) * side));
  for (int k = 0; k < n; ++k) {
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) tiles[k][y * side + x] = strip.pixels[y * strip.width + k * side + x];
    }
  }
  return tiles;
}

GrayImage join_tiles(const std::vector<Vec>& tiles, int side) {
  GrayImage img;
  img.width = side * static_cast<int>(tiles.size());
  img.height = side;
  img.pixels.resize(static_cast<std::size_t>(img.width) * side);
  for (std::size_t k = 0; k < tiles.size(); ++k) {
    require_same_size(tiles[k].size(), static_cast<std::size_t>(side) * side, "join_tiles");
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        img.pixels[y * img.width + static_cast<int>(k) * side + x] = tiles[k][y * side + x];
      }
    }
  }
  return img;
}

}  // namespace ledits
