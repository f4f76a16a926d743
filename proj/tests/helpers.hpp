#pragma once

#include "qstrat/catalog.hpp"
#include "qstrat/sampled_map.hpp"

#include <random>

namespace qstrat::testing {

inline GridDomain domain(int m, double R, double h) {
  GridDomain d;
  d.m = m;
  d.R = R;
  d.h = h;
  return d;
}

inline SampledMap catalog(const std::string& name, int m, double R = 3.0, double h = 3.0 / 64.0) {
  return sample_map(catalog_entry(name, m), domain(m, R, h));
}

inline Vec vec(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

inline Vec unit(int m, int i, double s = 1.0) {
  Vec x = Vec::Zero(m);
  x[i] = s;
  return x;
}

inline Vec random_in_ball(std::mt19937_64& g, int m, double rad) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec x(m);
  do {
    for (int i = 0; i < m; ++i) x[i] = U(g);
  } while (x.norm() > 1.0);
  return rad * x;
}

}  // namespace qstrat::testing
