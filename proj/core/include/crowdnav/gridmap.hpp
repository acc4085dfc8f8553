#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace crowdnav {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// A single weighted bivariate normal.
struct GaussianComponent {
  Vec2 mean = Vec2::Zero();
  Mat2 covariance = Mat2::Identity();
  double weight = 1.0;
};

/// Weighted set of 2-D Gaussians describing a crowd density layer.
///
/// A non-empty model always carries weights that sum to one; construction
/// validates this and rejects negative weights or non-SPD covariances.
class MixtureModel {
 public:
  MixtureModel() = default;
  explicit MixtureModel(std::vector<GaussianComponent> components);

  /// One component per mean, equal weights 1/k, shared covariance.
  static MixtureModel equal_weight(std::span<const Vec2> means, const Mat2& covariance);

  [[nodiscard]] const std::vector<GaussianComponent>& components() const { return components_; }
  [[nodiscard]] bool empty() const { return components_.empty(); }
  [[nodiscard]] std::size_t size() const { return components_.size(); }

 private:
  std::vector<GaussianComponent> components_;
};

/// Square workspace of side `side_length` split into `resolution` cells per
/// side. `origin` is the lower-left corner. Rows index y, columns index x.
struct GridSpec {
  double side_length = 20.0;
  int resolution = 80;
  Vec2 origin = Vec2::Zero();

  GridSpec() = default;
  GridSpec(double side, int n, Vec2 lower_left = Vec2::Zero());

  [[nodiscard]] double cell_size() const { return side_length / resolution; }
  [[nodiscard]] double cell_area() const { return cell_size() * cell_size(); }
  [[nodiscard]] std::size_t cell_count() const {
    return static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
  }
  [[nodiscard]] Vec2 cell_center(int row, int col) const;
  [[nodiscard]] bool contains(const Vec2& point) const;
  /// (row, col) of the cell holding `point`; nullopt outside the extent.
  [[nodiscard]] std::optional<std::pair<int, int>> cell_of(const Vec2& point) const;
  [[nodiscard]] std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(resolution) +
           static_cast<std::size_t>(col);
  }

  friend bool operator==(const GridSpec& a, const GridSpec& b);
};

/// Non-negative per-cell values over a GridSpec, row-major. Grids produced by
/// `rasterize_normalize` or `normalized` sum to one.
class ProbabilityGrid {
 public:
  ProbabilityGrid() = default;
  /// Wraps values as-is; throws if any value is negative or non-finite.
  ProbabilityGrid(GridSpec spec, std::vector<double> values);

  static ProbabilityGrid uniform(const GridSpec& spec);
  /// Divides by the total; throws "empty raster" if the total is not positive.
  static ProbabilityGrid normalized(const GridSpec& spec, std::vector<double> raw);

  [[nodiscard]] const GridSpec& spec() const { return spec_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] double at(int row, int col) const { return values_[spec_.index(row, col)]; }
  [[nodiscard]] double sum() const;
  [[nodiscard]] double max() const;

 private:
  GridSpec spec_;
  std::vector<double> values_;
};

class DegenerateComponent : public std::domain_error {
 public:
  DegenerateComponent() : std::domain_error("degenerate component") {}
};

class EmptyRaster : public std::runtime_error {
 public:
  EmptyRaster() : std::runtime_error("empty raster") {}
};

class OutOfBounds : public std::out_of_range {
 public:
  OutOfBounds() : std::out_of_range("out of bounds") {}
};

class SpecMismatch : public std::invalid_argument {
 public:
  SpecMismatch() : std::invalid_argument("grid spec mismatch") {}
};

/// Raw densities below this are treated as zero before normalization.
inline constexpr double kDensityFloor = 1e-300;

double evaluate_density(const MixtureModel& model, const Vec2& point);

/// Samples the mixture at every cell center and normalizes to sum one.
ProbabilityGrid rasterize_normalize(const MixtureModel& model, const GridSpec& spec);

/// Unnormalized cell-center densities (floored), the input to normalization.
std::vector<double> rasterize_raw(const MixtureModel& model, const GridSpec& spec);

/// Nearest-cell lookup. Throws OutOfBounds outside the grid extent.
double probability_at(const ProbabilityGrid& grid, const Vec2& point);

/// Bilinear interpolation between cell centers, clamped at the border.
/// Zero outside the extent. Used only as a smooth view for local search.
double interpolate(const ProbabilityGrid& grid, const Vec2& point);

double grid_rmse(const ProbabilityGrid& a, const ProbabilityGrid& b);

}  // namespace crowdnav
