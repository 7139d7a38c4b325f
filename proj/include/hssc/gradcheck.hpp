#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hssc/tensor.hpp"

namespace hssc {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  int worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  int nonfinite_entries = 0;  // entries whose perturbed evaluation was not finite
};

/// Central-difference verification of reverse-mode gradients. `f` must build
/// a scalar loss from the given parameters inside the graph it is handed; it
/// is invoked once recording (for analytic gradients) and then twice per
/// parameter entry without recording. Runs in Float64; finite differences are
/// unreliable at Float32.
GradCheckReport check_gradients(
    const std::function<Tensor(Graph&)>& f,
    const std::vector<std::pair<std::string, Tensor>>& params, double eps);

}  // namespace hssc
