// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "harness/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "common/error.hpp"

namespace armview::harness {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw io_error("metrics: bad number '" + s + "'");
}

}  // namespace

ImageMetrics compute_metrics(std::span<const world::Image> predictions, std::span<const world::Image> truth) {
  if (predictions.size() != truth.size()) throw shape_error("compute_metrics: list lengths differ");
  double abs_sum = 0.0, sq_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& p = predictions[i].pixels;
    const auto& t = truth[i].pixels;
    if (p.size() != t.size()) throw shape_error("compute_metrics: image " + std::to_string(i) + " shapes differ");
    for (std::size_t j = 0; j < t.size(); ++j) {
      const double d = static_cast<double>(p[j]) - t[j];
      abs_sum += std::abs(d);
      sq_sum += d * d;
    }
    count += t.size();
  }
  if (count == 0) return {};
  return {abs_sum / count, std::sqrt(sq_sum / count)};
}

void append_metrics(const std::filesystem::path& path, const MetricsRow& row) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw io_error("cannot open " + path.string());
  if (fresh) out << kMetricsHeader << "\n";
  std::string rmse;
  for (std::size_t j = 0; j < row.rmse.size(); ++j) rmse += (j ? ";" : "") + fmt(row.rmse[j]);
  out << row.kind << ',' << row.model << ',' << row.split << ',' << row.setting << ',' << fmt(row.mean_l1) << ','
      << fmt(row.rms) << ',' << rmse << ',' << fmt(row.precision) << ',' << fmt(row.recall) << "\n";
  if (!out) throw io_error("failed writing " + path.string());
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw not_found("no metrics file at " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw io_error("metrics: unexpected header in " + path.string());
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw io_error("metrics: expected 9 fields in '" + line + "'");
    MetricsRow r{f[0], f[1], f[2], f[3], parse_opt(f[4]), parse_opt(f[5]), {}, parse_opt(f[7]), parse_opt(f[8])};
    if (!f[6].empty()) {
      for (const auto& v : split(f[6], ';')) r.rmse.push_back(*parse_opt(v));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace armview::harness
