#include "hssc/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace hssc {

GradCheckReport check_gradients(const std::function<Tensor(Graph&)>& f,
                                const std::vector<std::pair<std::string, Tensor>>& params,
                                double eps) {
  if (eps <= 0.0) throw std::invalid_argument("check_gradients: eps must be positive");

  // Analytic pass.
  std::vector<std::vector<double>> analytic;
  {
    Graph g(Precision::Float64, true);
    Tensor loss = f(g);
    g.backward(loss);
    analytic.reserve(params.size());
    for (const auto& [name, p] : params) {
      auto gr = p.grad();
      analytic.emplace_back(gr.begin(), gr.end());
    }
  }

  auto eval = [&f]() {
    Graph g(Precision::Float64, false);
    return f(g).scalar_value();
  };

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor p = params[pi].second;
    auto vals = p.mutable_values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double saved = vals[i];
      vals[i] = saved + eps;
      const double fp = eval();
      vals[i] = saved - eps;
      const double fm = eval();
      vals[i] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        ++report.nonfinite_entries;
        continue;
      }
      const double numeric = (fp - fm) / (2.0 * eps);
      const double a = analytic[pi][i];
      const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-3});
      const double rel = std::fabs(a - numeric) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = params[pi].first;
        report.worst_index = static_cast<int>(i);
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace hssc
