#pragma once

#include <optional>

#include "crowdnav/gridmap.hpp"

namespace crowdnav::eval {

/// Time-decaying memory baseline. Each observation stores the part of the
/// observed density that exceeds the prior; the stored excess is added back
/// onto the prior with a weight that falls linearly from 1 to 0 over
/// `horizon` seconds, so the estimate drifts back to the prior.
class PumModel {
 public:
  explicit PumModel(double horizon);

  void observe(double t, const ProbabilityGrid& observed, const ProbabilityGrid& prior);
  [[nodiscard]] ProbabilityGrid estimate(double t, const ProbabilityGrid& prior) const;
  [[nodiscard]] double decay(double t) const;

 private:
  double horizon_;
  std::optional<double> last_time_;
  std::optional<ProbabilityGrid> excess_;
};

}  // namespace crowdnav::eval
