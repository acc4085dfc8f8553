#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdnav/gridmap.hpp"
#include "crowdnav/memory.hpp"

namespace crowdnav {

/// Time-binned periodic crowd prior: the mixture for a time t is the one in
/// the bin containing t mod cycle_length. Bins are sorted by start time and
/// the first bin starts at 0.
struct PeriodicOlmModel {
  struct Bin {
    double start = 0.0;
    MixtureModel mixture;
  };
  double cycle_length = 1.0;
  std::vector<Bin> bins;

  void validate() const;
  [[nodiscard]] std::size_t bin_index(double t) const;
};

class NoPrior : public std::runtime_error {
 public:
  explicit NoPrior(double t) : std::runtime_error("no prior for time t=" + std::to_string(t)) {}
};

MemoryLayer olm_predict(const PeriodicOlmModel& model, double t, const GridSpec& spec);

/// Positions recorded at one instant.
struct PositionSnapshot {
  double time = 0.0;
  std::vector<Vec2> positions;
};

/// Per-bin average of isotropic kernel densities over recorded snapshots.
/// Each snapshot gets equal total weight inside its bin; empty snapshots are
/// skipped, so a bin can end up empty.
PeriodicOlmModel fit_periodic_olm(std::span<const PositionSnapshot> snapshots, double cycle_length,
                                  double bin_width, double bandwidth);

std::string olm_to_json(const PeriodicOlmModel& model);
PeriodicOlmModel olm_from_json(const std::string& text);

}  // namespace crowdnav
