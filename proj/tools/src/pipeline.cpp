#include "crowdnav_cli/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace crowdnav::app {

OlmBank bank_from_model(PeriodicOlmModel model, const GridSpec& spec) {
  model.validate();
  OlmBank bank;
  for (const auto& bin : model.bins) {
    if (bin.mixture.empty()) {
      bank.grids.push_back(ProbabilityGrid::uniform(spec));
      bank.empty_bins.push_back(1);
    } else {
      bank.grids.push_back(rasterize_normalize(bin.mixture, spec));
      bank.empty_bins.push_back(0);
    }
  }
  bank.model = std::move(model);
  return bank;
}

OlmBank fit_olm_bank(const ScenarioConfig& cfg) {
  ScenarioConfig calm = cfg;
  calm.attractors.clear();
  const auto seed = static_cast<std::uint64_t>(cfg.experiment_value("olm_seed", 7919));
  const double duration = cfg.experiment_value("olm_fit_duration", 600.0);
  const double every = cfg.experiment_value("olm_fit_step", 0.5);
  // Skip the empty start so the prior reflects the periodic regime.
  const double warmup = cfg.experiment_value("olm_warmup", 3.0 * cfg.olm_cycle);

  const auto steps = static_cast<long>(std::llround((warmup + duration) / cfg.dt));
  const long sample_every = std::max(1L, static_cast<long>(std::llround(every / cfg.dt)));
  const long first = static_cast<long>(std::llround(warmup / cfg.dt));

  std::vector<PositionSnapshot> snaps;
  auto world = sim::initial_state(calm, seed);
  for (long k = 1; k <= steps; ++k) {
    world = sim::step(std::move(world), calm, cfg.dt);
    if (k >= first && k % sample_every == 0) {
      snaps.push_back({static_cast<double>(k) * cfg.dt, world.positions()});
    }
  }
  return bank_from_model(fit_periodic_olm(snaps, cfg.olm_cycle, cfg.olm_bin_width, cfg.ground_truth_bandwidth),
                         cfg.grid);
}

int scan_interval(const ScenarioConfig& cfg) {
  return std::max(1, static_cast<int>(std::lround(cfg.sensor.dt / cfg.dt)));
}

MemoryPipeline::MemoryPipeline(const ScenarioConfig& cfg, const OlmBank& olm, std::uint64_t sensor_seed)
    : cfg_(cfg),
      olm_(olm),
      tracker_(cfg.tracker_sensor()),
      rng_(sensor_seed),
      pum_(cfg.pum_horizon),
      footprint_(footprint_disc(cfg.grid, cfg.sensor_pose, cfg.sensor.fov_radius)) {}

void MemoryPipeline::observe(const sim::WorldState& world) {
  const auto detections = sim::observe(world, cfg_.sensor_pose, cfg_.sensor, rng_);
  tracker_.update(detections);
}

MemorySnapshot MemoryPipeline::snapshot(double t) {
  MemorySnapshot out{t, 0, std::nullopt, std::nullopt, olm_.at(t), olm_.at(t), olm_.at(t)};
  const auto tracks = tracker_.tracks();
  out.tracks = tracks.size();
  const auto wm = build_working_memory(tracks, cfg_.grid);
  const auto olm_layer = MemoryLayer::full(out.olm, LayerKind::OLM);
  if (wm.empty()) {
    out.pum = pum_.estimate(t, out.olm);
    out.ppum = fuse_layers(MemoryLayer::empty_working(cfg_.grid), olm_layer, std::nullopt, cfg_.fusion).values();
    return out;
  }
  out.sigma_bar = wm.sigma_bar;
  out.wm = rasterize_normalize(wm.model, cfg_.grid);
  const auto wm_layer = MemoryLayer::working(*out.wm, footprint_);
  out.ppum = fuse_layers(wm_layer, olm_layer, wm.sigma_bar, cfg_.fusion).values();
  pum_.observe(t, *out.wm, out.olm);
  out.pum = pum_.estimate(t, out.olm);
  return out;
}

}  // namespace crowdnav::app
