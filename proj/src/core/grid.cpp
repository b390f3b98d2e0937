#include "core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace segopt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive_dims(int width, int height) {
  require(width >= 1 && height >= 1, ErrorCode::InvalidArgument,
          "grid dimensions must be at least 1x1");
}

void require_all_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    require(std::isfinite(v), ErrorCode::InvalidArgument,
            std::string(what) + " contains a non-finite value");
  }
}
}  // namespace

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  require_positive_dims(width, height);
  require(channels == 1 || channels == 3, ErrorCode::InvalidArgument,
          "image must have 1 or 3 channels");
  require(std::isfinite(fill), ErrorCode::InvalidArgument,
          "image fill value must be finite");
  data_.assign(pixel_count() * channels_, fill);
}

Image Image::from_data(int width, int height, int channels,
                       std::vector<double> data) {
  Image img(width, height, channels);
  require(data.size() == img.data_.size(), ErrorCode::DimensionMismatch,
          "image data size does not match dimensions");
  require_all_finite(data, "image data");
  img.data_ = std::move(data);
  return img;
}

Labeling::Labeling(int width, int height, bool fill)
    : width_(width), height_(height) {
  require_positive_dims(width, height);
  mask_.assign(pixel_count(), fill ? 1 : 0);
  area_ = fill ? static_cast<std::int64_t>(pixel_count()) : 0;
}

ScalarField::ScalarField(int width, int height, double fill)
    : width_(width), height_(height) {
  require_positive_dims(width, height);
  values_.assign(pixel_count(), fill);
}

ScalarField ScalarField::from_data(int width, int height,
                                   std::vector<double> data) {
  ScalarField f(width, height);
  require(data.size() == f.values_.size(), ErrorCode::DimensionMismatch,
          "field data size does not match dimensions");
  require_all_finite(data, "field data");
  f.values_ = std::move(data);
  return f;
}

Histogram::Histogram(int channels, int bins)
    : channels_(channels), bins_(bins) {
  require(channels == 1 || channels == 3, ErrorCode::InvalidArgument,
          "histogram must have 1 or 3 channels");
  require(bins >= 1, ErrorCode::InvalidArgument,
          "histogram needs at least one bin");
  counts_.assign(static_cast<std::size_t>(channels) * bins, 0.0);
}

double Histogram::total(int channel) const {
  auto begin = counts_.begin() + static_cast<std::size_t>(channel) * bins_;
  return std::accumulate(begin, begin + bins_, 0.0);
}

void Histogram::normalize() {
  for (int c = 0; c < channels_; ++c) {
    const double mass = total(c);
    for (int b = 0; b < bins_; ++b) {
      at(c, b) = mass > 0.0 ? at(c, b) / mass : 1.0 / bins_;
    }
  }
  normalized_ = true;
}

void Histogram::validate_distribution() const {
  for (int c = 0; c < channels_; ++c) {
    double mass = 0.0;
    for (int b = 0; b < bins_; ++b) {
      const double v = at(c, b);
      require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidArgument,
              "histogram counts must be finite and nonnegative");
      mass += v;
    }
    require(std::abs(mass - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
            "target distribution must sum to 1 per channel");
  }
}

void require_same_dims(int wa, int ha, int wb, int hb, const char* what) {
  require(wa == wb && ha == hb, ErrorCode::DimensionMismatch,
          std::string("dimension mismatch in ") + what);
}

double linear_sum(const ScalarField& f, const Labeling& s) {
  require_same_dims(f.width(), f.height(), s.width(), s.height(),
                    "linear_sum");
  const auto values = f.data();
  const auto mask = s.raw();
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mask[i]) sum += values[i];
  }
  return sum;
}

int intensity_bin(double v, int bins) {
  int b = static_cast<int>(std::floor(v * bins / 256.0));
  return std::clamp(b, 0, bins - 1);
}

Histogram bin_counts(const Image& img, const Labeling& s, int bins) {
  require_same_dims(img.width(), img.height(), s.width(), s.height(),
                    "bin_counts");
  require(bins >= 1, ErrorCode::InvalidArgument, "bins must be >= 1");
  Histogram h(img.channels(), bins);
  const auto mask = s.raw();
  const auto data = img.data();
  const int channels = img.channels();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    for (int c = 0; c < channels; ++c) {
      h.at(c, intensity_bin(data[i * channels + c], bins)) += 1.0;
    }
  }
  return h;
}

namespace {

// 1-D squared-distance transform, lower envelope of parabolas
// (Felzenszwalb & Huttenlocher). Entries of f may be +inf.
void dt_1d(const double* f, int n, double* d, int* v, double* z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    double s = 0.0;
    while (k >= 0) {
      const int p = v[k];
      s = ((f[q] + static_cast<double>(q) * q) -
           (f[p] + static_cast<double>(p) * p)) /
          (2.0 * q - 2.0 * p);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = (k == 0) ? -kInf : s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d, d + n, kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const int p = v[j];
    d[q] = static_cast<double>(q - p) * (q - p) + f[p];
  }
}

}  // namespace

SignedDistance signed_distance(const Labeling& s) {
  const int w = s.width();
  const int h = s.height();

  if (s.empty() || s.full()) {
    // No internal boundary: report distance to the grid border instead.
    ScalarField field(w, h);
    const double sign = s.full() ? -1.0 : 1.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const int border = std::min(std::min(x, y), std::min(w - 1 - x, h - 1 - y));
        field.at(x, y) = sign * (border + 0.5);
      }
    }
    return {std::move(field), true};
  }

  // Boundary midpoints between differing 4-neighbors fall on half-integer
  // coordinates; double the grid so they become lattice points and run an
  // exact squared EDT there.
  const int dw = 2 * w - 1;
  const int dh = 2 * h - 1;
  std::vector<double> grid(static_cast<std::size_t>(dw) * dh, kInf);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool here = s.get(x, y);
      if (x + 1 < w && here != s.get(x + 1, y)) {
        grid[static_cast<std::size_t>(2 * y) * dw + (2 * x + 1)] = 0.0;
      }
      if (y + 1 < h && here != s.get(x, y + 1)) {
        grid[static_cast<std::size_t>(2 * y + 1) * dw + (2 * x)] = 0.0;
      }
    }
  }

  const int scratch_n = std::max(dw, dh);
  std::vector<double> row(scratch_n), out(scratch_n), z(scratch_n + 1);
  std::vector<int> v(scratch_n);

  // Rows, then columns.
  for (int y = 0; y < dh; ++y) {
    double* base = grid.data() + static_cast<std::size_t>(y) * dw;
    dt_1d(base, dw, out.data(), v.data(), z.data());
    std::copy(out.begin(), out.begin() + dw, base);
  }
  for (int x = 0; x < dw; ++x) {
    for (int y = 0; y < dh; ++y) row[y] = grid[static_cast<std::size_t>(y) * dw + x];
    dt_1d(row.data(), dh, out.data(), v.data(), z.data());
    for (int y = 0; y < dh; ++y) grid[static_cast<std::size_t>(y) * dw + x] = out[y];
  }

  ScalarField field(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d2 = grid[static_cast<std::size_t>(2 * y) * dw + (2 * x)];
      const double dist = 0.5 * std::sqrt(d2);
      field.at(x, y) = s.get(x, y) ? -dist : dist;
    }
  }
  return {std::move(field), false};
}

}  // namespace segopt
