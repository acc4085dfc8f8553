#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "crowdnav/gridmap.hpp"
#include "crowdnav/memory.hpp"
#include "crowdnav/olm.hpp"
#include "crowdnav/pum.hpp"
#include "crowdnav/scenario.hpp"
#include "crowdnav/simulator.hpp"
#include "crowdnav/tracking.hpp"

namespace crowdnav::app {

/// Fitted periodic prior plus one rasterized grid per bin.
struct OlmBank {
  PeriodicOlmModel model;
  std::vector<ProbabilityGrid> grids;
  std::vector<std::uint8_t> empty_bins;  // bins that fell back to a uniform grid

  [[nodiscard]] const ProbabilityGrid& at(double t) const { return grids[model.bin_index(t)]; }
};

/// Simulates the scenario with every attractor removed and fits the periodic
/// prior from position snapshots. Driven by the experiment keys
/// olm_seed, olm_fit_duration, olm_fit_step and olm_warmup.
OlmBank fit_olm_bank(const ScenarioConfig& cfg);

/// Rasterizes an existing model; empty bins fall back to uniform.
OlmBank bank_from_model(PeriodicOlmModel model, const GridSpec& spec);

/// Memory estimates at one instant.
struct MemorySnapshot {
  double time = 0.0;
  std::size_t tracks = 0;
  std::optional<double> sigma_bar;
  std::optional<ProbabilityGrid> wm;
  ProbabilityGrid olm;
  ProbabilityGrid pum;
  ProbabilityGrid ppum;
};

/// Tracker, working memory, fusion and the decaying baseline for one run.
class MemoryPipeline {
 public:
  MemoryPipeline(const ScenarioConfig& cfg, const OlmBank& olm, std::uint64_t sensor_seed);

  /// Feeds one sensor scan of `world` into the tracker.
  void observe(const sim::WorldState& world);
  /// Builds WM, FM (PPUM) and PUM for the current tracks at time t.
  MemorySnapshot snapshot(double t);

 private:
  const ScenarioConfig& cfg_;
  const OlmBank& olm_;
  Tracker tracker_;
  std::mt19937_64 rng_;
  eval::PumModel pum_;
  std::vector<std::uint8_t> footprint_;
};

/// Steps between sensor scans so that scans land every sensor.dt seconds.
int scan_interval(const ScenarioConfig& cfg);

}  // namespace crowdnav::app
