#include "bangdrift/nelder_mead.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace bangdrift {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const NelderMeadOptions& options) {
  const auto n = start.size();
  auto clamp = [&](Eigen::VectorXd x) {
    return Eigen::VectorXd(x.cwiseMax(lower).cwiseMin(upper));
  };

  NelderMeadResult result;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++result.evaluations;
    return f(x);
  };

  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> values;
  simplex.push_back(clamp(start));
  values.push_back(eval(simplex.back()));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd x = simplex.front();
    const double span = upper(i) - lower(i);
    double step = options.initial_step * (span > 0.0 ? std::min(span, 1.0) : 1.0);
    if (x(i) + step > upper(i)) step = -step;
    x(i) += step;
    simplex.push_back(clamp(x));
    values.push_back(eval(simplex.back()));
  }

  std::vector<std::size_t> order(static_cast<std::size_t>(n + 1));
  while (result.evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    double diameter = 0.0;
    for (const auto& x : simplex) diameter = std::max(diameter, (x - simplex[best]).cwiseAbs().maxCoeff());
    if (values[worst] - values[best] <= options.f_tolerance && diameter <= options.x_tolerance) break;
    if (diameter == 0.0) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < simplex.size(); ++k) {
      if (k != worst) centroid += simplex[k];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = clamp(centroid + (centroid - simplex[worst]));
    const double fr = eval(reflected);
    if (fr < values[best]) {
      const Eigen::VectorXd expanded = clamp(centroid + 2.0 * (centroid - simplex[worst]));
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Eigen::VectorXd contracted =
        outside ? clamp(centroid + 0.5 * (reflected - centroid)) : clamp(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = eval(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t k = 0; k < simplex.size(); ++k) {
      if (k == best) continue;
      simplex[k] = clamp(simplex[best] + 0.5 * (simplex[k] - simplex[best]));
      values[k] = eval(simplex[k]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  result.x = simplex[best];
  result.value = values[best];
  return result;
}

}  // namespace bangdrift
