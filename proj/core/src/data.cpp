#include "rfim/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "rfim/rng.hpp"

namespace rfim {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw IdxError(IdxError::Kind::Truncated, "truncated IDX header: " + path);
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream images(images_path, std::ios::binary);
  if (!images) throw IdxError(IdxError::Kind::Io, "cannot open " + images_path);
  std::ifstream labels(labels_path, std::ios::binary);
  if (!labels) throw IdxError(IdxError::Kind::Io, "cannot open " + labels_path);

  const std::uint32_t im_magic = read_be32(images, images_path);
  if (im_magic != kImagesMagic) {
    throw IdxError(IdxError::Kind::BadMagic, "bad image magic in " + images_path);
  }
  const std::uint32_t im_count = read_be32(images, images_path);
  const std::uint32_t rows = read_be32(images, images_path);
  const std::uint32_t cols = read_be32(images, images_path);

  const std::uint32_t lb_magic = read_be32(labels, labels_path);
  if (lb_magic != kLabelsMagic) {
    throw IdxError(IdxError::Kind::BadMagic, "bad label magic in " + labels_path);
  }
  const std::uint32_t lb_count = read_be32(labels, labels_path);
  if (im_count != lb_count) {
    throw IdxError(IdxError::Kind::CountMismatch,
                   "image/label count mismatch: " + std::to_string(im_count) + " vs " +
                       std::to_string(lb_count));
  }

  const std::size_t dim = std::size_t(rows) * cols;
  Dataset ds;
  ds.features.reserve(im_count);
  ds.labels.reserve(lb_count);
  std::vector<unsigned char> pixel_buf(dim);
  int max_label = 0;
  for (std::uint32_t i = 0; i < im_count; ++i) {
    images.read(reinterpret_cast<char*>(pixel_buf.data()), static_cast<std::streamsize>(dim));
    if (!images) throw IdxError(IdxError::Kind::Truncated, "truncated image data: " + images_path);
    Vector x(dim);
    for (std::size_t j = 0; j < dim; ++j) x[j] = pixel_buf[j] / 255.0;
    ds.features.push_back(std::move(x));

    char lb;
    labels.read(&lb, 1);
    if (!labels) throw IdxError(IdxError::Kind::Truncated, "truncated label data: " + labels_path);
    const int label = static_cast<unsigned char>(lb);
    max_label = std::max(max_label, label);
    ds.labels.push_back(label);
  }
  ds.class_names.reserve(max_label + 1);
  for (int c = 0; c <= max_label; ++c) ds.class_names.push_back(std::to_string(c));
  return ds;
}

void save_idx(const Dataset& ds, const std::string& images_path, const std::string& labels_path) {
  std::ofstream images(images_path, std::ios::binary);
  if (!images) throw IdxError(IdxError::Kind::Io, "cannot open " + images_path);
  std::ofstream labels(labels_path, std::ios::binary);
  if (!labels) throw IdxError(IdxError::Kind::Io, "cannot open " + labels_path);

  const std::uint32_t n = static_cast<std::uint32_t>(ds.size());
  const std::uint32_t dim = static_cast<std::uint32_t>(ds.dim());
  write_be32(images, kImagesMagic);
  write_be32(images, n);
  write_be32(images, dim);
  write_be32(images, 1);
  std::vector<unsigned char> row(dim);
  for (const Vector& x : ds.features) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double scaled = std::clamp(x[j], 0.0, 1.0) * 255.0;
      row[j] = static_cast<unsigned char>(std::lround(scaled));
    }
    images.write(reinterpret_cast<const char*>(row.data()), dim);
  }

  write_be32(labels, kLabelsMagic);
  write_be32(labels, n);
  for (int label : ds.labels) {
    const char b = static_cast<char>(static_cast<unsigned char>(label));
    labels.write(&b, 1);
  }
  if (!images || !labels) throw IdxError(IdxError::Kind::Io, "short write saving IDX pair");
}

Dataset binary_subset(const Dataset& ds, int class_a, int class_b) {
  if (class_a == class_b) throw std::invalid_argument("binary_subset: identical classes");
  Dataset out;
  bool seen_a = false;
  bool seen_b = false;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] == class_a) {
      out.features.push_back(ds.features[i]);
      out.labels.push_back(0);
      seen_a = true;
    } else if (ds.labels[i] == class_b) {
      out.features.push_back(ds.features[i]);
      out.labels.push_back(1);
      seen_b = true;
    }
  }
  if (!seen_a || !seen_b) throw std::invalid_argument("binary_subset: class missing from dataset");
  out.class_names = {std::to_string(class_a), std::to_string(class_b)};
  return out;
}

Dataset synth_blobs(std::size_t n, std::size_t dim, double separation, std::uint64_t seed) {
  if (n == 0 || n % 2 != 0) throw std::invalid_argument("synth_blobs: n must be even and positive");
  if (dim == 0) throw std::invalid_argument("synth_blobs: dim must be >= 1");
  if (separation < 0.0) throw std::invalid_argument("synth_blobs: separation must be >= 0");

  // latent range ±(separation/2 + 4σ) mapped onto [0,1]
  const double half_range = 0.5 * separation + 4.0;
  const double scale = 0.5 / half_range;

  Rng rng(Rng::mix(seed, 0xb10b5));
  Dataset ds;
  ds.features.reserve(n);
  ds.labels.reserve(n);
  ds.class_names = {"blob0", "blob1"};
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const double center = (label == 0 ? -0.5 : 0.5) * separation;
    Vector x(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const double latent = (j == 0 ? center : 0.0) + rng.normal();
      x[j] = std::clamp(0.5 + scale * latent, 0.0, 1.0);
    }
    ds.features.push_back(std::move(x));
    ds.labels.push_back(label);
  }
  return ds;
}

Dataset synth_classes(std::size_t n, std::size_t dim, std::size_t classes, double separation,
                      std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("synth_classes: n must be positive");
  if (dim == 0 || classes < 2) throw std::invalid_argument("synth_classes: need dim >= 1, classes >= 2");

  // center coordinates scaled so the expected distance between two centers is
  // `separation` latent noise units, spread across every dimension
  const double center_std = separation / std::sqrt(2.0 * static_cast<double>(dim));
  const double half_range = 4.0 + 3.0 * center_std;
  const double scale = 0.5 / half_range;

  Rng center_rng(Rng::mix(seed, 0xc1a55));
  std::vector<Vector> centers(classes, Vector(dim, 0.0));
  for (Vector& c : centers) {
    for (double& v : c) v = center_std * center_rng.normal();
  }

  // Mixed noise structure: every sixteenth dimension keeps independent
  // noise (high per-dimension signal), the rest share a circular moving
  // average so that most of the class signal hides in correlated
  // directions. Unit marginal variance either way.
  const std::size_t window = std::max<std::size_t>(1, dim / 16);
  const double inv_sqrt_w = 1.0 / std::sqrt(static_cast<double>(window));
  const double background = 0.3;

  Rng rng(Rng::mix(seed, 0xda7a));
  Dataset ds;
  ds.features.reserve(n);
  ds.labels.reserve(n);
  for (std::size_t c = 0; c < classes; ++c) ds.class_names.push_back("class" + std::to_string(c));
  Vector raw(dim);
  Vector prefix(dim + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % classes;
    for (double& v : raw) v = rng.normal();
    prefix[0] = 0.0;
    for (std::size_t j = 0; j < dim; ++j) prefix[j + 1] = prefix[j] + raw[j];
    Vector x(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      double noise;
      const double center = centers[label][j];
      if (j % 16 == 0) {
        noise = raw[j];
      } else {
        const std::size_t end = j + window;
        double sum;
        if (end <= dim) {
          sum = prefix[end] - prefix[j];
        } else {
          sum = prefix[dim] - prefix[j] + prefix[end - dim];
        }
        noise = sum * inv_sqrt_w;
      }
      x[j] = std::clamp(background + scale * (center + noise), 0.0, 1.0);
    }
    ds.features.push_back(std::move(x));
    ds.labels.push_back(static_cast<int>(label));
  }
  return ds;
}

Split train_test_split(std::size_t n, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("train_test_split: train_fraction in (0,1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::mix(spec.seed, 0x5b117));
  rng.shuffle(order);
  const std::size_t train_n = static_cast<std::size_t>(std::llround(spec.train_fraction * n));
  Split split;
  split.train.assign(order.begin(), order.begin() + train_n);
  split.test.assign(order.begin() + train_n, order.end());
  return split;
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.class_names = ds.class_names;
  out.features.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    out.features.push_back(ds.features.at(i));
    out.labels.push_back(ds.labels.at(i));
  }
  return out;
}

std::vector<std::vector<std::size_t>> minibatches(std::size_t n, std::size_t batch_size,
                                                  std::uint64_t seed, std::size_t epoch) {
  if (batch_size == 0) throw std::invalid_argument("minibatches: batch_size must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::mix(seed, Rng::mix(0xba7c4, epoch)));
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

}  // namespace rfim
