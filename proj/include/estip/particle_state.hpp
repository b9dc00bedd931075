#pragma once

#include <cstddef>
#include <vector>

#include "estip/vec.hpp"

namespace estip {

template <int Dim>
struct ParticleState {
  std::vector<Vec<Dim>> positions;
  double t = 0.0;

  std::size_t size() const noexcept { return positions.size(); }
};

/// Positions of a 1D state as plain numbers.
inline std::vector<double> coordinates(const ParticleState<1>& s) {
  std::vector<double> x(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) x[i] = s.positions[i][0];
  return x;
}

inline ParticleState<1> state_from(const std::vector<double>& x, double t = 0.0) {
  ParticleState<1> s;
  s.t = t;
  s.positions.reserve(x.size());
  for (double v : x) s.positions.push_back(Vec<1>{v});
  return s;
}

}  // namespace estip
