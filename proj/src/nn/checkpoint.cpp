// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "common/error.hpp"

namespace armview::nn {
namespace {

constexpr std::array<char, 5> kMagic = {'F', 'T', 'N', 'N', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

bool get_u32(std::istream& is, std::uint32_t& v) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
  v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
      (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& records) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw io_error("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic.data(), kMagic.size());
  for (const NamedTensor& r : records) {
    put_u32(os, static_cast<std::uint32_t>(r.name.size()));
    os.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
    put_u32(os, static_cast<std::uint32_t>(r.value.rank()));
    for (int d : r.value.shape()) put_u32(os, static_cast<std::uint32_t>(d));
    for (float f : r.value.values()) put_u32(os, std::bit_cast<std::uint32_t>(f));
  }
  if (!os) throw io_error("failed writing checkpoint: " + path.string());
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw not_found("checkpoint not found: " + path.string());
  std::array<char, 5> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw io_error("not an FTNN1 checkpoint: " + path.string());
  }
  std::vector<NamedTensor> out;
  std::uint32_t name_len = 0;
  while (get_u32(is, name_len)) {
    if (name_len > 4096) throw io_error("corrupt checkpoint record name in " + path.string());
    NamedTensor r;
    r.name.resize(name_len);
    std::uint32_t rank = 0;
    if (!is.read(r.name.data(), name_len) || !get_u32(is, rank) || rank > 8) {
      throw io_error("truncated checkpoint record in " + path.string());
    }
    Shape shape(rank);
    for (auto& d : shape) {
      std::uint32_t v = 0;
      if (!get_u32(is, v)) throw io_error("truncated checkpoint dims in " + path.string());
      d = static_cast<int>(v);
    }
    std::vector<float> values(shape_size(shape));
    for (float& f : values) {
      std::uint32_t bits = 0;
      if (!get_u32(is, bits)) throw io_error("truncated checkpoint data in " + path.string());
      f = std::bit_cast<float>(bits);
    }
    r.value = Tensor(std::move(shape), std::move(values));
    out.push_back(std::move(r));
  }
  return out;
}

void save_network(const Network& net, const std::filesystem::path& path) {
  std::vector<NamedTensor> records;
  const auto params = net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    records.push_back({net.parameter_names()[i], *params[i]});
  }
  write_checkpoint(path, records);
}

void load_network(Network& net, const std::filesystem::path& path) {
  std::map<std::string, Tensor> by_name;
  for (auto& r : read_checkpoint(path)) by_name[r.name] = std::move(r.value);
  auto params = net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string& name = net.parameter_names()[i];
    auto it = by_name.find(name);
    if (it == by_name.end()) throw io_error("checkpoint " + path.string() + " lacks " + name);
    if (it->second.shape() != params[i]->shape()) {
      throw shape_error("checkpoint " + path.string() + ": " + name + " has shape " +
                        shape_string(it->second.shape()) + ", expected " +
                        shape_string(params[i]->shape()));
    }
    *params[i] = std::move(it->second);
  }
}

}  // namespace armview::nn
