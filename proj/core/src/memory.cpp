#include "crowdnav/memory.hpp"

#include <algorithm>
#include <cmath>

namespace crowdnav {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::WM: return "WM";
    case LayerKind::OLM: return "OLM";
    case LayerKind::FM: return "FM";
  }
  return "?";
}

MemoryLayer MemoryLayer::full(ProbabilityGrid grid, LayerKind kind) {
  MemoryLayer layer;
  layer.kind = kind;
  layer.spec = grid.spec();
  layer.footprint = footprint_all(layer.spec);
  layer.grid = std::move(grid);
  return layer;
}

MemoryLayer MemoryLayer::empty_working(const GridSpec& spec) {
  MemoryLayer layer;
  layer.kind = LayerKind::WM;
  layer.spec = spec;
  layer.footprint.assign(spec.cell_count(), 0);
  return layer;
}

MemoryLayer MemoryLayer::working(ProbabilityGrid grid, std::vector<std::uint8_t> footprint) {
  if (footprint.size() != grid.spec().cell_count()) {
    throw std::invalid_argument("footprint size does not match grid");
  }
  MemoryLayer layer;
  layer.kind = LayerKind::WM;
  layer.spec = grid.spec();
  layer.footprint = std::move(footprint);
  layer.grid = std::move(grid);
  return layer;
}

const ProbabilityGrid& MemoryLayer::values() const {
  if (!grid) throw std::logic_error("memory layer is empty");
  return *grid;
}

std::vector<std::uint8_t> footprint_all(const GridSpec& spec) {
  return std::vector<std::uint8_t>(spec.cell_count(), 1);
}

std::vector<std::uint8_t> footprint_disc(const GridSpec& spec, const Vec2& center, double radius) {
  std::vector<std::uint8_t> fp(spec.cell_count(), 0);
  const double r2 = radius * radius;
  for (int row = 0; row < spec.resolution; ++row) {
    for (int col = 0; col < spec.resolution; ++col) {
      if ((spec.cell_center(row, col) - center).squaredNorm() <= r2) fp[spec.index(row, col)] = 1;
    }
  }
  return fp;
}

void FusionConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("fusion gamma must be > 0");
}

std::vector<MassAssignment> bpa_from_layer(const MemoryLayer& layer) {
  std::vector<MassAssignment> out;
  if (layer.empty()) return out;
  const auto values = layer.values().values();
  out.reserve(values.size());
  for (double p : values) out.push_back(MassAssignment::from_crowded(std::clamp(p, 0.0, 1.0)));
  return out;
}

std::pair<double, double> sensor_weight(double sigma_bar, const FusionConfig& config) {
  config.validate();
  if (!(sigma_bar >= 0.0)) throw std::invalid_argument("sigma_bar must be >= 0");
  // The exponential term drops below half an ulp of 0.5 once gamma * sigma_bar
  // passes ~37; keep the weight on the open side of 0.5 anyway.
  static const double floor = std::nextafter(0.5, 1.0);
  const double w_s = std::max(floor, 0.5 * (std::exp(-config.gamma * sigma_bar) + 1.0));
  return {w_s, 1.0 - w_s};
}

std::pair<MassAssignment, MassAssignment> balance_masses(const MassAssignment& sensor,
                                                         const MassAssignment& prior, double w_s) {
  if (!(w_s > 0.5 && w_s <= 1.0)) throw std::invalid_argument("w_s must lie in (0.5, 1]");
  const double w_f = 1.0 - w_s;
  const double mean_c = w_s * sensor.crowded + w_f * prior.crowded;
  const double mean_nc = w_s * sensor.not_crowded + w_f * prior.not_crowded;
  double c = std::clamp(2.0 * mean_c - prior.crowded, 0.0, 1.0);
  double nc = std::clamp(2.0 * mean_nc - prior.not_crowded, 0.0, 1.0);
  const double total = c + nc;
  c /= total;
  nc /= total;
  return {sensor, MassAssignment{c, nc}};
}

MassAssignment ds_combine(const MassAssignment& sensor, const MassAssignment& prior) {
  const double conflict = sensor.crowded * prior.not_crowded + sensor.not_crowded * prior.crowded;
  const double denom = 1.0 - conflict;
  if (!(denom > 0.0)) throw VacuousFusion();
  const double c = sensor.crowded * prior.crowded / denom;
  return MassAssignment::from_crowded(c);
}

std::vector<double> fuse_cells(const MemoryLayer& wm, const MemoryLayer& olm, double sigma_bar,
                               const FusionConfig& config) {
  if (!(wm.spec == olm.spec)) throw SpecMismatch();
  const auto prior_values = olm.values().values();
  std::vector<double> out(prior_values.begin(), prior_values.end());
  if (wm.empty()) return out;

  const auto w_s = sensor_weight(sigma_bar, config).first;
  const auto sensor_values = wm.values().values();
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!wm.footprint[k]) continue;
    const auto m_s = MassAssignment::from_crowded(std::clamp(sensor_values[k], 0.0, 1.0));
    const auto m_f = MassAssignment::from_crowded(std::clamp(prior_values[k], 0.0, 1.0));
    const auto [bs, bf] = balance_masses(m_s, m_f, w_s);
    try {
      out[k] = ds_combine(bs, bf).crowded;
    } catch (const VacuousFusion&) {
      out[k] = m_s.crowded;  // total conflict: trust the sensor
    }
  }
  return out;
}

MemoryLayer fuse_layers(const MemoryLayer& wm, const MemoryLayer& olm, std::optional<double> sigma_bar,
                        const FusionConfig& config) {
  if (!(wm.spec == olm.spec)) throw SpecMismatch();
  if (!wm.empty() && !sigma_bar) throw std::invalid_argument("non-empty WM requires sigma_bar");
  if (wm.empty()) return MemoryLayer::full(olm.values(), LayerKind::FM);

  auto raw = fuse_cells(wm, olm, *sigma_bar, config);
  try {
    return MemoryLayer::full(ProbabilityGrid::normalized(olm.spec, std::move(raw)), LayerKind::FM);
  } catch (const EmptyRaster&) {
    // Every cell fused to zero belief; nothing to renormalize, keep the prior.
    return MemoryLayer::full(olm.values(), LayerKind::FM);
  }
}

}  // namespace crowdnav
