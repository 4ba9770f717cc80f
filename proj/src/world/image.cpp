// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "world/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "common/error.hpp"

namespace armview::world {

nn::Tensor Image::to_tensor() const {
  return nn::Tensor({channels, height, width}, pixels);
}

Image Image::from_tensor(std::span<const float> values, int channels, int height, int width) {
  Image img(height, width, channels);
  if (values.size() != img.size()) {
    throw shape_error("image: tensor of " + std::to_string(values.size()) +
                      " values cannot fill " + std::to_string(channels) + "x" +
                      std::to_string(height) + "x" + std::to_string(width));
  }
  std::copy(values.begin(), values.end(), img.pixels.begin());
  return img;
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](auto b) { return b != 0; }));
}

namespace {

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

// Reads the next header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& is) {
  std::string tok;
  char ch = 0;
  while (is.get(ch)) {
    if (ch == '#') {
      std::string line;
      std::getline(is, line);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

struct PnmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
};

PnmHeader read_header(std::istream& is, const std::filesystem::path& path) {
  PnmHeader h;
  h.magic = header_token(is);
  try {
    h.width = std::stoi(header_token(is));
    h.height = std::stoi(header_token(is));
    if (std::stoi(header_token(is)) != 255) throw io_error("unsupported maxval in " + path.string());
  } catch (const std::logic_error&) {
    throw io_error("malformed PNM header in " + path.string());
  }
  if (h.width <= 0 || h.height <= 0) throw io_error("bad PNM size in " + path.string());
  return h;
}

}  // namespace

void quantize(Image& image) {
  for (float& v : image.pixels) v = static_cast<float>(to_byte(v)) / 255.0f;
}

void write_pnm(const Image& image, const std::filesystem::path& path) {
  if (image.channels != 3 && image.channels != 1) {
    throw invalid_argument("write_pnm: only 1- or 3-channel images");
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw io_error("cannot write " + path.string());
  os << (image.channels == 3 ? "P6" : "P5") << "\n"
     << image.width << " " << image.height << "\n255\n";
  std::vector<char> buf(image.size());
  std::size_t k = 0;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c) buf[k++] = static_cast<char>(to_byte(image.at(c, y, x)));
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw io_error("failed writing " + path.string());
}

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw not_found("image not found: " + path.string());
  const PnmHeader h = read_header(is, path);
  int channels = 0;
  if (h.magic == "P6") channels = 3;
  else if (h.magic == "P5") channels = 1;
  else throw io_error("not a binary PPM/PGM: " + path.string());
  Image img(h.height, h.width, channels);
  std::vector<unsigned char> buf(img.size());
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw io_error("truncated image data in " + path.string());
  }
  std::size_t k = 0;
  for (int y = 0; y < h.height; ++y)
    for (int x = 0; x < h.width; ++x)
      for (int c = 0; c < channels; ++c) img.at(c, y, x) = static_cast<float>(buf[k++]) / 255.0f;
  return img;
}

void write_mask(const Mask& mask, const std::filesystem::path& path) {
  Image img(mask.height, mask.width, 1);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) img.pixels[i] = mask.bits[i] ? 1.0f : 0.0f;
  write_pnm(img, path);
}

Mask read_mask(const std::filesystem::path& path) {
  const Image img = read_pnm(path);
  if (img.channels != 1) throw io_error("mask file is not a PGM: " + path.string());
  Mask m(img.height, img.width);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) m.bits[i] = img.pixels[i] > 0.5f ? 1 : 0;
  return m;
}

}  // namespace armview::world
