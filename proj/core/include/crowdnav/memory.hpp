#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "crowdnav/gridmap.hpp"

namespace crowdnav {

/// Mass pair over the frame {Crowded, Not crowded}; m(empty set) = 0.
struct MassAssignment {
  double crowded = 0.0;
  double not_crowded = 1.0;

  static MassAssignment from_crowded(double p) { return {p, 1.0 - p}; }
};

enum class LayerKind { WM, OLM, FM };

const char* to_string(LayerKind kind);

/// A density layer with the set of cells it has evidence for.
///
/// A WM layer with no grid is "empty": no pedestrian is being tracked and
/// fusion leaves the OLM untouched.
struct MemoryLayer {
  LayerKind kind = LayerKind::OLM;
  GridSpec spec;
  std::optional<ProbabilityGrid> grid;
  std::vector<std::uint8_t> footprint;  // 1 = observed, row-major

  static MemoryLayer full(ProbabilityGrid grid, LayerKind kind);
  static MemoryLayer empty_working(const GridSpec& spec);
  static MemoryLayer working(ProbabilityGrid grid, std::vector<std::uint8_t> footprint);

  [[nodiscard]] bool empty() const { return !grid.has_value(); }
  [[nodiscard]] const ProbabilityGrid& values() const;
};

std::vector<std::uint8_t> footprint_all(const GridSpec& spec);
/// Cells whose center lies within `radius` of `center`.
std::vector<std::uint8_t> footprint_disc(const GridSpec& spec, const Vec2& center, double radius);

struct FusionConfig {
  double gamma = 1.0;  // 1/m^2, > 0
  void validate() const;
};

class VacuousFusion : public std::runtime_error {
 public:
  VacuousFusion() : std::runtime_error("vacuous fusion") {}
};

std::vector<MassAssignment> bpa_from_layer(const MemoryLayer& layer);

/// Sensor and prior weights from the average track covariance:
/// w_s = (exp(-gamma * sigma_bar) + 1) / 2, w_f = 1 - w_s.
std::pair<double, double> sensor_weight(double sigma_bar, const FusionConfig& config);

/// Weighted-balance step. The sensor mass passes through; the prior is
/// reflected about the weighted mean and clamped back into [0, 1].
std::pair<MassAssignment, MassAssignment> balance_masses(const MassAssignment& sensor,
                                                         const MassAssignment& prior, double w_s);

/// Dempster's rule on {C, NC}. Throws VacuousFusion when the conflict is total.
MassAssignment ds_combine(const MassAssignment& sensor, const MassAssignment& prior);

/// Per-cell fused belief m'(C) before the final renormalization. Cells outside
/// the WM footprint carry the OLM value unchanged.
std::vector<double> fuse_cells(const MemoryLayer& wm, const MemoryLayer& olm, double sigma_bar,
                               const FusionConfig& config);

/// Fused Memory: `fuse_cells` renormalized into a probability grid.
MemoryLayer fuse_layers(const MemoryLayer& wm, const MemoryLayer& olm, std::optional<double> sigma_bar,
                        const FusionConfig& config);

}  // namespace crowdnav
