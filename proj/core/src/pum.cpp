#include "crowdnav/pum.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace crowdnav::eval {

PumModel::PumModel(double horizon) : horizon_(horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("PUM horizon must be > 0");
}

void PumModel::observe(double t, const ProbabilityGrid& observed, const ProbabilityGrid& prior) {
  if (!(observed.spec() == prior.spec())) throw SpecMismatch();
  std::vector<double> excess(observed.values().size());
  for (std::size_t k = 0; k < excess.size(); ++k) {
    excess[k] = std::max(0.0, observed.values()[k] - prior.values()[k]);
  }
  excess_ = ProbabilityGrid(observed.spec(), std::move(excess));
  last_time_ = t;
}

double PumModel::decay(double t) const {
  if (!last_time_) return 0.0;
  return std::clamp(1.0 - (t - *last_time_) / horizon_, 0.0, 1.0);
}

ProbabilityGrid PumModel::estimate(double t, const ProbabilityGrid& prior) const {
  const double phi = decay(t);
  if (phi == 0.0 || !excess_) return prior;
  if (!(excess_->spec() == prior.spec())) throw SpecMismatch();
  std::vector<double> raw(prior.values().begin(), prior.values().end());
  for (std::size_t k = 0; k < raw.size(); ++k) raw[k] += phi * excess_->values()[k];
  return ProbabilityGrid::normalized(prior.spec(), std::move(raw));
}

}  // namespace crowdnav::eval
