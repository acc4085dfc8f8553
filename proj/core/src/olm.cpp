#include "crowdnav/olm.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace crowdnav {

void PeriodicOlmModel::validate() const {
  if (!(cycle_length > 0.0)) throw std::invalid_argument("OLM cycle length must be > 0");
  if (bins.empty()) throw std::invalid_argument("OLM schedule has no bins");
  if (bins.front().start != 0.0) throw std::invalid_argument("first OLM bin must start at 0");
  for (std::size_t k = 1; k < bins.size(); ++k) {
    if (!(bins[k].start > bins[k - 1].start) || !(bins[k].start < cycle_length)) {
      throw std::invalid_argument("OLM bin starts must increase within the cycle");
    }
  }
}

std::size_t PeriodicOlmModel::bin_index(double t) const {
  double phase = std::fmod(t, cycle_length);
  if (phase < 0.0) phase += cycle_length;
  const auto it = std::upper_bound(bins.begin(), bins.end(), phase,
                                   [](double v, const Bin& b) { return v < b.start; });
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - bins.begin()) - 1));
}

MemoryLayer olm_predict(const PeriodicOlmModel& model, double t, const GridSpec& spec) {
  model.validate();
  const auto& bin = model.bins[model.bin_index(t)];
  if (bin.mixture.empty()) throw NoPrior(t);
  return MemoryLayer::full(rasterize_normalize(bin.mixture, spec), LayerKind::OLM);
}

PeriodicOlmModel fit_periodic_olm(std::span<const PositionSnapshot> snapshots, double cycle_length,
                                  double bin_width, double bandwidth) {
  if (!(cycle_length > 0.0) || !(bin_width > 0.0) || !(bandwidth > 0.0)) {
    throw std::invalid_argument("fit_periodic_olm: cycle, bin width and bandwidth must be > 0");
  }
  const auto bin_count = static_cast<std::size_t>(std::ceil(cycle_length / bin_width - 1e-9));
  std::vector<std::vector<const PositionSnapshot*>> grouped(bin_count);
  for (const auto& s : snapshots) {
    if (s.positions.empty()) continue;
    double phase = std::fmod(s.time, cycle_length);
    if (phase < 0.0) phase += cycle_length;
    const auto k = std::min(bin_count - 1, static_cast<std::size_t>(phase / bin_width));
    grouped[k].push_back(&s);
  }

  PeriodicOlmModel model;
  model.cycle_length = cycle_length;
  const Mat2 cov = Mat2::Identity() * bandwidth * bandwidth;
  for (std::size_t k = 0; k < bin_count; ++k) {
    PeriodicOlmModel::Bin bin;
    bin.start = static_cast<double>(k) * bin_width;
    std::vector<GaussianComponent> comps;
    const double per_snapshot = grouped[k].empty() ? 0.0 : 1.0 / static_cast<double>(grouped[k].size());
    for (const PositionSnapshot* s : grouped[k]) {
      const double w = per_snapshot / static_cast<double>(s->positions.size());
      for (const auto& p : s->positions) comps.push_back({p, cov, w});
    }
    if (!comps.empty()) {
      // Re-close the weights exactly; the per-snapshot split can drift by an ulp.
      double total = 0.0;
      for (const auto& c : comps) total += c.weight;
      for (auto& c : comps) c.weight /= total;
    }
    bin.mixture = MixtureModel(std::move(comps));
    model.bins.push_back(std::move(bin));
  }
  return model;
}

std::string olm_to_json(const PeriodicOlmModel& model) {
  nlohmann::json j;
  j["cycle_length"] = model.cycle_length;
  j["bins"] = nlohmann::json::array();
  for (const auto& bin : model.bins) {
    nlohmann::json jb;
    jb["start"] = bin.start;
    jb["components"] = nlohmann::json::array();
    for (const auto& c : bin.mixture.components()) {
      jb["components"].push_back({
          {"mean", {c.mean.x(), c.mean.y()}},
          {"covariance", {{c.covariance(0, 0), c.covariance(0, 1)}, {c.covariance(1, 0), c.covariance(1, 1)}}},
          {"weight", c.weight},
      });
    }
    j["bins"].push_back(std::move(jb));
  }
  return j.dump(1);
}

PeriodicOlmModel olm_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  PeriodicOlmModel model;
  model.cycle_length = j.at("cycle_length").get<double>();
  for (const auto& jb : j.at("bins")) {
    PeriodicOlmModel::Bin bin;
    bin.start = jb.at("start").get<double>();
    std::vector<GaussianComponent> comps;
    for (const auto& jc : jb.at("components")) {
      const auto mean = jc.at("mean").get<std::vector<double>>();
      const auto cov = jc.at("covariance").get<std::vector<std::vector<double>>>();
      if (mean.size() != 2 || cov.size() != 2 || cov[0].size() != 2 || cov[1].size() != 2) {
        throw std::invalid_argument("OLM component must have a 2-vector mean and 2x2 covariance");
      }
      GaussianComponent c;
      c.mean = Vec2(mean[0], mean[1]);
      c.covariance << cov[0][0], cov[0][1], cov[1][0], cov[1][1];
      c.weight = jc.at("weight").get<double>();
      comps.push_back(c);
    }
    bin.mixture = MixtureModel(std::move(comps));
    model.bins.push_back(std::move(bin));
  }
  model.validate();
  return model;
}

}  // namespace crowdnav
