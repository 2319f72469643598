#include "mpctune/nelder_mead.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace mpctune::opt {

namespace {
constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;
}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const math::Box& box,
                             const NelderMeadOptions& options) {
  const int n = box.dim();
  if (start.size() != n) throw std::invalid_argument("nelder_mead: start/box dim mismatch");

  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };

  std::vector<Eigen::VectorXd> vertex(static_cast<std::size_t>(n) + 1);
  std::vector<double> value(static_cast<std::size_t>(n) + 1);
  vertex[0] = box.clamp(start);
  value[0] = eval(vertex[0]);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = vertex[0];
    double h = options.init_step * (box.hi(i) - box.lo(i));
    // step away from a bound if the start sits on it
    if (v[i] + h > box.hi(i)) h = -h;
    v[i] = std::min(std::max(v[i] + h, box.lo(i)), box.hi(i));
    vertex[static_cast<std::size_t>(i) + 1] = v;
    value[static_cast<std::size_t>(i) + 1] = eval(v);
  }

  std::vector<std::size_t> order(vertex.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
  };

  while (evals < options.max_evals) {
    sort_simplex();
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    double diameter = 0.0;
    for (std::size_t i = 1; i < vertex.size(); ++i) {
      diameter = std::max(diameter, (vertex[order[i]] - vertex[best]).norm());
    }
    if (diameter < options.x_tol && std::abs(value[worst] - value[best]) < options.f_tol) {
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += vertex[order[i]];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected =
        box.clamp(centroid + kReflect * (centroid - vertex[worst]));
    const double f_reflected = eval(reflected);

    if (f_reflected < value[best]) {
      const Eigen::VectorXd expanded =
          box.clamp(centroid + kExpand * (centroid - vertex[worst]));
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        vertex[worst] = expanded;
        value[worst] = f_expanded;
      } else {
        vertex[worst] = reflected;
        value[worst] = f_reflected;
      }
    } else if (f_reflected < value[second_worst]) {
      vertex[worst] = reflected;
      value[worst] = f_reflected;
    } else {
      const bool outside = f_reflected < value[worst];
      const Eigen::VectorXd base = outside ? reflected : vertex[worst];
      const Eigen::VectorXd contracted = box.clamp(centroid + kContract * (base - centroid));
      const double f_contracted = eval(contracted);
      if (f_contracted < std::min(f_reflected, value[worst])) {
        vertex[worst] = contracted;
        value[worst] = f_contracted;
      } else {
        for (std::size_t i = 1; i < order.size(); ++i) {
          const std::size_t idx = order[i];
          vertex[idx] = box.clamp(vertex[best] + kShrink * (vertex[idx] - vertex[best]));
          value[idx] = eval(vertex[idx]);
          if (evals >= options.max_evals) break;
        }
      }
    }
  }

  sort_simplex();
  NelderMeadResult result;
  result.x = vertex[order.front()];
  result.value = value[order.front()];
  result.evals = evals;
  return result;
}

}  // namespace mpctune::opt
