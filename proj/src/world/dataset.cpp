// Copyright 2026 The armview Authors
// SPDX-License-Identifier: Apache-2.0

#include "world/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "common/error.hpp"

namespace armview::world {
namespace fs = std::filesystem;

namespace {

Record make_record(const ArmModel& arm, std::int64_t id, std::optional<std::int64_t> traj,
                   JointConfig q, const std::optional<Occluder>& occluder) {
  Record r;
  r.sample_id = id;
  r.trajectory_id = traj;
  r.image = render(arm, q, occluder);
  quantize(r.image);
  r.q = std::move(q);
  return r;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw io_error("cannot parse " + what + ": '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw io_error("cannot parse " + what + ": '" + s + "'");
  return v;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_double(part, what));
  return out;
}

std::string color_string(const Rgb& c) {
  return format_double(c.r) + "," + format_double(c.g) + "," + format_double(c.b);
}

Rgb parse_color(const std::string& s) {
  const auto v = parse_list(s, "colour");
  if (v.size() != 3) throw io_error("colour needs three components: '" + s + "'");
  return {static_cast<float>(v[0]), static_cast<float>(v[1]), static_cast<float>(v[2])};
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

UniformSource::UniformSource(std::uint64_t seed) : engine_(seed) {}

double UniformSource::next(double lo, double hi) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

JointConfig UniformSource::config(const ArmModel& arm) {
  JointConfig q(arm.dof());
  for (int i = 0; i < arm.dof(); ++i) q[i] = next(arm.lower[i], arm.upper[i]);
  return q;
}

std::vector<std::vector<std::size_t>> Dataset::trajectories() const {
  std::vector<std::vector<std::size_t>> groups;
  std::map<std::int64_t, std::size_t> slot;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].trajectory_id) continue;
    const auto [it, fresh] = slot.emplace(*records[i].trajectory_id, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

Dataset generate_trajectory_dataset(const ArmModel& arm, int n_traj, int steps, std::uint64_t seed,
                                    const std::optional<Occluder>& occluder) {
  if (n_traj < 1 || steps < 1) throw invalid_argument("trajectory dataset needs n_traj, steps >= 1");
  arm.validate();
  if (occluder) occluder->validate(arm.image_size);
  Dataset ds{arm, seed, "trajectory", occluder, {}};
  ds.records.reserve(static_cast<std::size_t>(n_traj) * steps);
  UniformSource src(seed);
  std::int64_t id = 0;
  for (int t = 0; t < n_traj; ++t) {
    const JointConfig a = src.config(arm);
    const JointConfig b = src.config(arm);
    for (int s = 0; s < steps; ++s) {
      const double alpha = steps == 1 ? 0.0 : static_cast<double>(s) / (steps - 1);
      JointConfig q(arm.dof());
      for (int j = 0; j < arm.dof(); ++j) q[j] = (1.0 - alpha) * a[j] + alpha * b[j];
      ds.records.push_back(make_record(arm, id++, t, std::move(q), occluder));
    }
  }
  return ds;
}

Dataset generate_uniform_dataset(const ArmModel& arm, int n, std::uint64_t seed,
                                 const std::optional<Occluder>& occluder) {
  if (n < 0) throw invalid_argument("uniform dataset size must be non-negative");
  arm.validate();
  if (occluder) occluder->validate(arm.image_size);
  Dataset ds{arm, seed, "uniform", occluder, {}};
  ds.records.reserve(n);
  UniformSource src(seed);
  for (int i = 0; i < n; ++i) ds.records.push_back(make_record(arm, i, std::nullopt, src.config(arm), occluder));
  return ds;
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir / "images");
  {
    std::ofstream meta(dir / "dataset.meta");
    if (!meta) throw io_error("cannot write " + (dir / "dataset.meta").string());
    const ArmModel& a = ds.arm;
    meta << "kind=" << ds.kind << "\n"
         << "seed=" << ds.seed << "\n"
         << "records=" << ds.records.size() << "\n"
         << "image_size=" << a.image_size << "\n"
         << "dof=" << a.dof() << "\n"
         << "link_lengths=" << join(a.link_lengths) << "\n"
         << "link_widths=" << join(a.link_widths) << "\n"
         << "base=" << format_double(a.base.x) << "," << format_double(a.base.y) << "\n"
         << "lower=" << join(a.lower) << "\n"
         << "upper=" << join(a.upper) << "\n"
         << "background=" << color_string(a.background) << "\n";
    for (int i = 0; i < a.dof(); ++i) meta << "color" << i << "=" << color_string(a.link_colors[i]) << "\n";
    if (ds.occluder) {
      const Occluder& o = *ds.occluder;
      meta << "occluder=" << (o.kind == Occluder::Kind::kRect ? "rect" : "disc") << ","
           << format_double(o.x0) << "," << format_double(o.y0) << "," << format_double(o.x1) << ","
           << format_double(o.y1) << "," << format_double(o.radius) << "\n"
           << "occluder_color=" << color_string(o.color) << "\n";
    }
  }
  std::ofstream manifest(dir / "manifest.csv");
  if (!manifest) throw io_error("cannot write " + (dir / "manifest.csv").string());
  manifest << "sample_id,trajectory_id";
  for (int i = 0; i < ds.arm.dof(); ++i) manifest << ",q" << i;
  manifest << ",image\n";
  for (const Record& r : ds.records) {
    char name[32];
    std::snprintf(name, sizeof name, "%06lld.ppm", static_cast<long long>(r.sample_id));
    const std::string rel = std::string("images/") + name;
    write_pnm(r.image, dir / rel);
    manifest << r.sample_id << "," << (r.trajectory_id ? std::to_string(*r.trajectory_id) : "NONE");
    for (double v : r.q) manifest << "," << format_double(v);
    manifest << "," << rel << "\n";
  }
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.csv") || !fs::exists(dir / "dataset.meta")) {
    throw not_found("no dataset at " + dir.string());
  }
  std::map<std::string, std::string> meta;
  {
    std::ifstream in(dir / "dataset.meta");
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  auto need = [&](const std::string& key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end()) throw io_error("dataset.meta lacks '" + key + "'");
    return it->second;
  };
  Dataset ds;
  ds.kind = need("kind");
  ds.seed = static_cast<std::uint64_t>(parse_int(need("seed"), "seed"));
  ArmModel& a = ds.arm;
  a.image_size = static_cast<int>(parse_int(need("image_size"), "image_size"));
  a.link_lengths = parse_list(need("link_lengths"), "link_lengths");
  a.link_widths = parse_list(need("link_widths"), "link_widths");
  const auto base = parse_list(need("base"), "base");
  if (base.size() != 2) throw io_error("base needs two coordinates");
  a.base = {base[0], base[1]};
  a.lower = parse_list(need("lower"), "lower");
  a.upper = parse_list(need("upper"), "upper");
  a.background = parse_color(need("background"));
  const int dof = static_cast<int>(parse_int(need("dof"), "dof"));
  for (int i = 0; i < dof; ++i) a.link_colors.push_back(parse_color(need("color" + std::to_string(i))));
  a.validate();
  if (meta.count("occluder")) {
    const auto parts = split(meta["occluder"], ',');
    if (parts.size() != 6) throw io_error("malformed occluder entry");
    Occluder o;
    o.kind = parts[0] == "disc" ? Occluder::Kind::kDisc : Occluder::Kind::kRect;
    o.x0 = parse_double(parts[1], "occluder");
    o.y0 = parse_double(parts[2], "occluder");
    o.x1 = parse_double(parts[3], "occluder");
    o.y1 = parse_double(parts[4], "occluder");
    o.radius = parse_double(parts[5], "occluder");
    o.color = parse_color(need("occluder_color"));
    ds.occluder = o;
  }

  std::ifstream in(dir / "manifest.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (static_cast<int>(cells.size()) != dof + 3) throw io_error("malformed manifest row: " + line);
    Record r;
    r.sample_id = parse_int(cells[0], "sample_id");
    if (cells[1] != "NONE") r.trajectory_id = parse_int(cells[1], "trajectory_id");
    for (int i = 0; i < dof; ++i) r.q.push_back(parse_double(cells[2 + i], "joint angle"));
    r.image = read_pnm(dir / cells.back());
    ds.records.push_back(std::move(r));
  }
  if (meta.count("records") && parse_int(meta["records"], "records") != static_cast<std::int64_t>(ds.records.size())) {
    throw io_error("manifest row count does not match dataset.meta");
  }
  return ds;
}

}  // namespace armview::world
