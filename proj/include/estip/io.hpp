#pragma once

// CSV, JSON and PGM writers. Numbers go through std::to_chars, so output does
// not depend on the locale.

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "estip/datum.hpp"
#include "estip/error.hpp"
#include "estip/format.hpp"
#include "estip/halftone.hpp"
#include "estip/meanfield.hpp"
#include "estip/particles.hpp"

namespace estip {

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& header) : text_(header + "\n") {}

  CsvWriter& field(double v) {
    sep();
    append_double(text_, v);
    return *this;
  }
  CsvWriter& field(long long v) {
    sep();
    text_ += std::to_string(v);
    return *this;
  }
  CsvWriter& empty() {
    sep();
    return *this;
  }
  void end_row() {
    text_ += '\n';
    fresh_ = true;
  }
  const std::string& str() const noexcept { return text_; }

 private:
  void sep() {
    if (!fresh_) text_ += ',';
    fresh_ = false;
  }
  std::string text_;
  bool fresh_ = true;
};

template <int Dim>
std::string positions_csv(const std::vector<std::pair<long, ParticleState<Dim>>>& frames) {
  CsvWriter csv(Dim == 1 ? "step,id,x" : "step,id,x,y");
  for (const auto& [step, s] : frames)
    for (std::size_t i = 0; i < s.size(); ++i) {
      csv.field(static_cast<long long>(step)).field(static_cast<long long>(i));
      for (int a = 0; a < Dim; ++a) csv.field(s.positions[i][a]);
      csv.end_row();
    }
  return csv.str();
}

inline std::string energy_csv(const EnergyTrace& trace, std::optional<double> lower_bound = std::nullopt) {
  CsvWriter csv("t,attraction,repulsion,total,lower_bound");
  for (const auto& r : trace) {
    csv.field(r.t).field(r.attraction).field(r.repulsion).field(r.total);
    if (lower_bound) csv.field(*lower_bound); else csv.empty();
    csv.end_row();
  }
  return csv.str();
}

inline std::string monitor_csv(const EnergyTrace& trace) {
  CsvWriter csv("t,total,residual,mass,dt");
  for (const auto& r : trace) {
    csv.field(r.t).field(r.total).field(r.residual).field(r.mass).field(r.dt);
    csv.end_row();
  }
  return csv.str();
}

inline std::string snapshots_csv(const std::vector<Snapshot>& snaps, const Grid1d& w) {
  CsvWriter csv("t,x,f,w");
  for (const auto& s : snaps)
    for (std::size_t i = 0; i < s.f.size(); ++i) {
      csv.field(s.t).field(w.center(i)[0]).field(s.f[i]).field(w[i]);
      csv.end_row();
    }
  return csv.str();
}

template <int Dim>
std::string density_csv(const DensityGrid<Dim>& g) {
  CsvWriter csv(Dim == 1 ? "x,value" : "x,y,value");
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto c = g.center(i);
    for (int a = 0; a < Dim; ++a) csv.field(c[a]);
    csv.field(g[i]);
    csv.end_row();
  }
  return csv.str();
}

template <int Dim>
nlohmann::json grid_sidecar(const DensityGrid<Dim>& g) {
  const auto& geo = g.geometry();
  nlohmann::json j;
  j["dim"] = Dim;
  j["origin"] = std::vector<double>(geo.origin.begin(), geo.origin.end());
  j["spacing"] = geo.spacing;
  j["shape"] = std::vector<std::size_t>(geo.shape.begin(), geo.shape.end());
  j["periodic"] = geo.periodic;
  j["mass"] = g.mass();
  return j;
}

/// Grayscale preview, darkest where the density is largest.
inline std::vector<std::uint8_t> density_preview_pgm(const Grid2d& g) {
  const auto& geo = g.geometry();
  const double vmax = g.max_value();
  std::string header = "P5\n" + std::to_string(geo.shape[0]) + " " + std::to_string(geo.shape[1]) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double u = vmax > 0.0 ? g[i] / vmax : 0.0;
    out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - u))));
  }
  return out;
}

inline std::string block_report_csv(const BlockReport& rep) {
  CsvWriter csv("block_x,block_y,count,mass,discrepancy");
  const std::size_t k = rep.blocks_per_axis;
  for (std::size_t b = 0; b < k * k; ++b) {
    csv.field(static_cast<long long>(b % k)).field(static_cast<long long>(b / k));
    csv.field(static_cast<long long>(rep.counts[b])).field(rep.mass[b]).field(rep.discrepancy[b]);
    csv.end_row();
  }
  return csv.str();
}

inline std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n" +
                       std::to_string(img.maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (auto v : img.pixels) {
    if (img.maxval > 255) out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
  }
  return out;
}

}  // namespace estip
