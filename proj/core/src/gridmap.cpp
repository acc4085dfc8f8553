#include "crowdnav/gridmap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace crowdnav {

namespace {

// Precomputed evaluation data for one component.
struct PreparedComponent {
  Vec2 mean;
  double ixx, ixy, iyy;  // inverse covariance
  double scale;          // weight / (2 pi sqrt|P|)
  double reach;          // half-width of the box outside which the kernel is negligible
};

// Beyond this Mahalanobis radius a bivariate normal is below exp(-32) of its peak.
constexpr double kTruncationSigmas = 8.0;

PreparedComponent prepare(const GaussianComponent& c) {
  const Mat2& P = c.covariance;
  const double det = P(0, 0) * P(1, 1) - P(0, 1) * P(1, 0);
  if (!(det > 0.0) || !(P(0, 0) > 0.0) || !std::isfinite(det)) {
    throw DegenerateComponent();
  }
  PreparedComponent out;
  out.mean = c.mean;
  out.ixx = P(1, 1) / det;
  out.iyy = P(0, 0) / det;
  out.ixy = -P(0, 1) / det;
  out.scale = c.weight / (2.0 * std::numbers::pi * std::sqrt(det));
  const double half_trace = 0.5 * (P(0, 0) + P(1, 1));
  const double spread = std::sqrt(std::max(0.0, half_trace * half_trace - det));
  out.reach = kTruncationSigmas * std::sqrt(half_trace + spread);
  return out;
}

double kernel(const PreparedComponent& c, double x, double y) {
  const double dx = x - c.mean.x();
  const double dy = y - c.mean.y();
  const double q = c.ixx * dx * dx + 2.0 * c.ixy * dx * dy + c.iyy * dy * dy;
  return c.scale * std::exp(-0.5 * q);
}

}  // namespace

MixtureModel::MixtureModel(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) return;
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) {
      throw std::invalid_argument("mixture weight must be finite and non-negative");
    }
    if (!c.mean.allFinite() || !c.covariance.allFinite()) {
      throw std::invalid_argument("mixture component must be finite");
    }
    const double asym = std::abs(c.covariance(0, 1) - c.covariance(1, 0));
    if (asym > 1e-12 * std::max(1.0, c.covariance.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument("mixture covariance must be symmetric");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("mixture weights must sum to 1");
  }
}

MixtureModel MixtureModel::equal_weight(std::span<const Vec2> means, const Mat2& covariance) {
  std::vector<GaussianComponent> comps;
  comps.reserve(means.size());
  const double w = means.empty() ? 0.0 : 1.0 / static_cast<double>(means.size());
  for (const auto& m : means) comps.push_back({m, covariance, w});
  return MixtureModel(std::move(comps));
}

GridSpec::GridSpec(double side, int n, Vec2 lower_left)
    : side_length(side), resolution(n), origin(std::move(lower_left)) {
  if (!(side > 0.0) || !std::isfinite(side)) throw std::invalid_argument("grid side length must be > 0");
  if (n < 2) throw std::invalid_argument("grid resolution must be >= 2");
  if (!origin.allFinite()) throw std::invalid_argument("grid origin must be finite");
}

Vec2 GridSpec::cell_center(int row, int col) const {
  const double h = cell_size();
  return origin + Vec2((col + 0.5) * h, (row + 0.5) * h);
}

bool GridSpec::contains(const Vec2& p) const {
  const Vec2 d = p - origin;
  return d.x() >= 0.0 && d.y() >= 0.0 && d.x() <= side_length && d.y() <= side_length;
}

std::optional<std::pair<int, int>> GridSpec::cell_of(const Vec2& p) const {
  if (!p.allFinite() || !contains(p)) return std::nullopt;
  const Vec2 d = (p - origin) / cell_size();
  const int col = std::min(resolution - 1, static_cast<int>(std::floor(d.x())));
  const int row = std::min(resolution - 1, static_cast<int>(std::floor(d.y())));
  return std::pair{row, col};
}

bool operator==(const GridSpec& a, const GridSpec& b) {
  return a.side_length == b.side_length && a.resolution == b.resolution && a.origin == b.origin;
}

ProbabilityGrid::ProbabilityGrid(GridSpec spec, std::vector<double> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
  if (values_.size() != spec_.cell_count()) {
    throw std::invalid_argument("grid value count does not match spec");
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("grid values must be finite and non-negative");
    }
  }
}

ProbabilityGrid ProbabilityGrid::uniform(const GridSpec& spec) {
  return ProbabilityGrid(spec, std::vector<double>(spec.cell_count(),
                                                   1.0 / static_cast<double>(spec.cell_count())));
}

ProbabilityGrid ProbabilityGrid::normalized(const GridSpec& spec, std::vector<double> raw) {
  double total = 0.0;
  for (double& v : raw) {
    if (!(v >= kDensityFloor) || !std::isfinite(v)) v = 0.0;
    total += v;
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw EmptyRaster();
  for (double& v : raw) v /= total;
  return ProbabilityGrid(spec, std::move(raw));
}

double ProbabilityGrid::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double ProbabilityGrid::max() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double evaluate_density(const MixtureModel& model, const Vec2& point) {
  if (model.empty()) throw std::invalid_argument("evaluate_density on empty mixture");
  if (!point.allFinite()) throw std::invalid_argument("evaluate_density at non-finite point");
  double total = 0.0;
  for (const auto& c : model.components()) {
    total += kernel(prepare(c), point.x(), point.y());
  }
  return total;
}

std::vector<double> rasterize_raw(const MixtureModel& model, const GridSpec& spec) {
  if (model.empty()) throw std::invalid_argument("rasterize of empty mixture");
  const int n = spec.resolution;
  const double h = spec.cell_size();
  std::vector<double> raw(spec.cell_count(), 0.0);
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) xs[static_cast<std::size_t>(k)] = spec.origin.x() + (k + 0.5) * h;

  for (const auto& comp : model.components()) {
    const PreparedComponent c = prepare(comp);
    if (c.scale == 0.0) continue;
    auto to_index = [&](double coord, double lo) {
      return static_cast<int>(std::floor((coord - lo) / h - 0.5));
    };
    const int c0 = std::max(0, to_index(c.mean.x() - c.reach, spec.origin.x()));
    const int c1 = std::min(n - 1, to_index(c.mean.x() + c.reach, spec.origin.x()) + 1);
    const int r0 = std::max(0, to_index(c.mean.y() - c.reach, spec.origin.y()));
    const int r1 = std::min(n - 1, to_index(c.mean.y() + c.reach, spec.origin.y()) + 1);
    for (int row = r0; row <= r1; ++row) {
      const double y = spec.origin.y() + (row + 0.5) * h;
      double* out = raw.data() + spec.index(row, 0);
      for (int col = c0; col <= c1; ++col) {
        out[col] += kernel(c, xs[static_cast<std::size_t>(col)], y);
      }
    }
  }
  for (double& v : raw) {
    if (v < kDensityFloor) v = 0.0;
  }
  return raw;
}

ProbabilityGrid rasterize_normalize(const MixtureModel& model, const GridSpec& spec) {
  return ProbabilityGrid::normalized(spec, rasterize_raw(model, spec));
}

double probability_at(const ProbabilityGrid& grid, const Vec2& point) {
  const auto cell = grid.spec().cell_of(point);
  if (!cell) throw OutOfBounds();
  return grid.at(cell->first, cell->second);
}

double interpolate(const ProbabilityGrid& grid, const Vec2& point) {
  const GridSpec& spec = grid.spec();
  if (!point.allFinite() || !spec.contains(point)) return 0.0;
  const int n = spec.resolution;
  const Vec2 u = (point - spec.origin) / spec.cell_size() - Vec2(0.5, 0.5);
  const double fx = std::clamp(u.x(), 0.0, static_cast<double>(n - 1));
  const double fy = std::clamp(u.y(), 0.0, static_cast<double>(n - 1));
  const int c0 = std::min(n - 2, static_cast<int>(fx));
  const int r0 = std::min(n - 2, static_cast<int>(fy));
  const double tx = fx - c0;
  const double ty = fy - r0;
  const double v00 = grid.at(r0, c0), v01 = grid.at(r0, c0 + 1);
  const double v10 = grid.at(r0 + 1, c0), v11 = grid.at(r0 + 1, c0 + 1);
  return (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11);
}

double grid_rmse(const ProbabilityGrid& a, const ProbabilityGrid& b) {
  if (!(a.spec() == b.spec())) throw SpecMismatch();
  const auto va = a.values();
  const auto vb = b.values();
  double acc = 0.0;
  for (std::size_t k = 0; k < va.size(); ++k) {
    const double d = va[k] - vb[k];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(va.size()));
}

}  // namespace crowdnav
