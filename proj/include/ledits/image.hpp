#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ledits/vec.hpp"

namespace ledits {

// Grayscale image with pixel values in [0, 1] (not clamped in memory).
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // row-major
};

// Binary PGM (P5, maxval 255). Values are clamped to [0, 1] and rounded on write.
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_pgm(const std::filesystem::path& path);

std::uint8_t quantize(double v);

// [0, 1] pixels <-> [-1, 1] model space.
Vec to_model_space(std::span<const double> pixels);
Vec to_pixel_space(std::span<const double> values);

// A strip of `side` x `side` tiles laid out left to right.
std::vector<Vec> split_tiles(const GrayImage& strip, int side);
GrayImage join_tiles(const std::vector<Vec>& tiles, int side);

}  // namespace ledits
