#ifndef SEGOPT_CORE_GRID_HPP
#define SEGOPT_CORE_GRID_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "core/errors.hpp"

namespace segopt {

/// Dense 2-D intensity grid, 1 (gray) or 3 (color) channels, row-major with
/// interleaved channels. Intensities are real-valued, nominally in [0,255].
class Image {
 public:
  Image(int width, int height, int channels, double fill = 0.0);
  static Image from_data(int width, int height, int channels,
                         std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  double at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  double& at(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<const double> data() const noexcept { return data_; }

 private:
  int width_;
  int height_;
  int channels_;
  std::vector<double> data_;
};

/// Binary segment mask over a grid; bit set = pixel belongs to S.
class Labeling {
 public:
  Labeling(int width, int height, bool fill = false);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  bool get(int x, int y) const {
    return mask_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool value) {
    std::uint8_t& cell = mask_[static_cast<std::size_t>(y) * width_ + x];
    area_ += static_cast<std::int64_t>(value) - static_cast<std::int64_t>(cell);
    cell = value ? 1 : 0;
  }
  void flip(int x, int y) { set(x, y, !get(x, y)); }

  /// Number of set pixels, area(S).
  std::size_t area() const noexcept { return static_cast<std::size_t>(area_); }
  bool empty() const noexcept { return area_ == 0; }
  bool full() const noexcept {
    return static_cast<std::size_t>(area_) == pixel_count();
  }

  std::span<const std::uint8_t> raw() const noexcept { return mask_; }

  bool operator==(const Labeling& other) const = default;

 private:
  int width_;
  int height_;
  std::int64_t area_ = 0;
  std::vector<std::uint8_t> mask_;
};

/// One finite real value per pixel; used for feature maps f_i, unary
/// potentials and gradient fields.
class ScalarField {
 public:
  ScalarField(int width, int height, double fill = 0.0);
  static ScalarField from_data(int width, int height, std::vector<double> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  double at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  double& at(int x, int y) {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<const double> data() const noexcept { return values_; }
  std::span<double> data() noexcept { return values_; }

 private:
  int width_;
  int height_;
  std::vector<double> values_;
};

/// Per-channel bin counts; counts are nonnegative reals so that normalized
/// histograms (probabilities) reuse the same container.
class Histogram {
 public:
  Histogram(int channels, int bins);

  int channels() const noexcept { return channels_; }
  int bins() const noexcept { return bins_; }
  bool normalized() const noexcept { return normalized_; }

  double at(int channel, int bin) const {
    return counts_[static_cast<std::size_t>(channel) * bins_ + bin];
  }
  double& at(int channel, int bin) {
    return counts_[static_cast<std::size_t>(channel) * bins_ + bin];
  }

  double total(int channel) const;

  /// Scales each channel to unit mass. Channels with zero mass become the
  /// uniform distribution.
  void normalize();

  void validate_distribution() const;

  std::span<const double> data() const noexcept { return counts_; }

 private:
  int channels_;
  int bins_;
  bool normalized_ = false;
  std::vector<double> counts_;
};

void require_same_dims(int wa, int ha, int wb, int hb, const char* what);

/// Discrete linear functional <f,S>: sum of f over the set pixels.
double linear_sum(const ScalarField& f, const Labeling& s);

/// Bin index of intensity v among k uniform bins over byte range [0,256).
int intensity_bin(double v, int bins);

/// Per-channel histogram of intensities restricted to the segment.
Histogram bin_counts(const Image& img, const Labeling& s, int bins);

struct SignedDistance {
  ScalarField field;
  /// Set when the mask has no boundary (all ones or all zeros); the field
  /// then holds the constant-sign distance to the grid border.
  bool degenerate = false;
};

/// Exact Euclidean distance to the set of half-pixel boundary midpoints
/// between differing 4-neighbors; negative inside S, positive outside.
SignedDistance signed_distance(const Labeling& s);

}  // namespace segopt

#endif
