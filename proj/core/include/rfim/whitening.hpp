#pragma once

#include <cstddef>
#include <vector>

#include "rfim/linalg.hpp"

namespace rfim {

// Affine feature transform x -> transform (x - shift) that leaves the fit data
// zero-mean with identity covariance on the retained dimensions. Directions
// whose covariance eigenvalue falls at or below threshold times the largest
// one are dropped, so the output dim can be smaller than the input dim.
struct Whitener {
  Vector shift;
  Matrix transform;  // retained x input_dim
  std::size_t input_dim = 0;
  std::size_t retained = 0;
  double threshold = 1e-8;
};

Whitener whiten_fit(const std::vector<Vector>& xs, double rel_threshold = 1e-8);
Vector whiten_apply(const Whitener& w, const Vector& x);
std::vector<Vector> whiten_apply_all(const Whitener& w, const std::vector<Vector>& xs);

}  // namespace rfim
