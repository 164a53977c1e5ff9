#include "rfim/whitening.hpp"

#include <cmath>
#include <stdexcept>

namespace rfim {

Whitener whiten_fit(const std::vector<Vector>& xs, double rel_threshold) {
  if (xs.size() < 2) throw std::invalid_argument("whiten_fit: at least two samples required");
  const std::size_t d = xs.front().size();
  if (d == 0) throw std::invalid_argument("whiten_fit: empty feature vectors");
  const double n = static_cast<double>(xs.size());

  Vector mean(d, 0.0);
  for (const Vector& x : xs) {
    if (x.size() != d) throw std::invalid_argument("whiten_fit: inconsistent dims");
    for (std::size_t j = 0; j < d; ++j) mean[j] += x[j];
  }
  for (double& m : mean) m /= n;

  Matrix cov(d, d);
  Vector centered(d);
  for (const Vector& x : xs) {
    for (std::size_t j = 0; j < d; ++j) centered[j] = x[j] - mean[j];
    add_scaled_outer_upper(cov, 1.0, centered);
  }
  for (std::size_t i = 0; i < d; ++i) {
    double* r = cov.row(i);
    for (std::size_t j = i; j < d; ++j) r[j] /= n;
  }
  mirror_upper_to_lower(cov);

  const EigenDecomposition eig = jacobi_eigen(cov);
  const double top = eig.values.empty() ? 0.0 : std::max(0.0, eig.values.front());
  const double cutoff = rel_threshold * top;

  std::size_t retained = 0;
  for (double w : eig.values) {
    if (w > cutoff) ++retained;
  }
  if (retained == 0) throw std::invalid_argument("whiten_fit: all dimensions are singular");

  Whitener w;
  w.shift = mean;
  w.input_dim = d;
  w.retained = retained;
  w.threshold = rel_threshold;
  w.transform = Matrix(retained, d);
  for (std::size_t r = 0; r < retained; ++r) {
    const double inv_sqrt = 1.0 / std::sqrt(eig.values[r]);
    for (std::size_t c = 0; c < d; ++c) w.transform(r, c) = inv_sqrt * eig.vectors(c, r);
  }
  return w;
}

Vector whiten_apply(const Whitener& w, const Vector& x) {
  if (x.size() != w.input_dim) throw std::invalid_argument("whiten_apply: dim mismatch");
  Vector centered(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) centered[j] = x[j] - w.shift[j];
  return matvec(w.transform, centered);
}

std::vector<Vector> whiten_apply_all(const Whitener& w, const std::vector<Vector>& xs) {
  std::vector<Vector> out;
  out.reserve(xs.size());
  for (const Vector& x : xs) out.push_back(whiten_apply(w, x));
  return out;
}

}  // namespace rfim
