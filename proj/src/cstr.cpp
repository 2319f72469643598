#include "mpctune/cstr.hpp"

#include "mpctune/gp.hpp"  // NumericalError

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mpctune::plant {

void PlantParams::validate() const {
  if (std::isnan(cA0)) {
    throw std::invalid_argument(
        "PlantParams: feed concentration cA0 is unset; it must be supplied "
        "explicitly (no default)");
  }
  if (!(rho > 0.0 && cp > 0.0 && cpK > 0.0 && VR > 0.0 && mK > 0.0)) {
    throw std::invalid_argument("PlantParams: rho, cp, cpK, VR, mK must be positive");
  }
}

NoiseSpec::NoiseSpec(double sigma_B_, double sigma_R_)
    : sigma_B(sigma_B_), sigma_R(sigma_R_) {
  if (sigma_B < 0.0 || sigma_R < 0.0) {
    throw std::invalid_argument("NoiseSpec: standard deviations must be >= 0");
  }
}

PlantState derivatives(const PlantState& s, double F, const PlantParams& p) {
  const double TK_abs = s.TR + 273.15;
  const double k1 = p.k01 * std::exp(-p.Ea1R / TK_abs);
  const double k2 = p.k02 * std::exp(-p.Ea2R / TK_abs);
  const double k3 = p.k03 * std::exp(-p.Ea3R / TK_abs);

  PlantState d;
  d.cA = F * (p.cA0 - s.cA) - k1 * s.cA - k3 * s.cA * s.cA;
  d.cB = -F * s.cB + k1 * s.cA - k2 * s.cB;
  d.TR = F * (p.Tin - s.TR) +
         p.kW * p.A / (p.rho * p.cp * p.VR) * (s.TK - s.TR) -
         (k1 * s.cA * p.dH_AB + k2 * s.cB * p.dH_BC + k3 * s.cA * s.cA * p.dH_AD) /
             (p.rho * p.cp);
  d.TK = (p.QK_dot + p.kW * p.A * (s.TR - s.TK)) / (p.mK * p.cpK);
  return d;
}

PlantState step(const PlantState& state, double F, double dt, int substeps,
                const PlantParams& params) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  if (substeps < 1) throw std::invalid_argument("step: substeps must be >= 1");

  const double h = dt / substeps;
  PlantState s = state;
  for (int i = 0; i < substeps; ++i) {
    const PlantState q1 = derivatives(s, F, params);
    PlantState mid{s.cA + 0.5 * h * q1.cA, s.cB + 0.5 * h * q1.cB,
                   s.TR + 0.5 * h * q1.TR, s.TK + 0.5 * h * q1.TK};
    const PlantState q2 = derivatives(mid, F, params);
    mid = PlantState{s.cA + 0.5 * h * q2.cA, s.cB + 0.5 * h * q2.cB,
                     s.TR + 0.5 * h * q2.TR, s.TK + 0.5 * h * q2.TK};
    const PlantState q3 = derivatives(mid, F, params);
    const PlantState end{s.cA + h * q3.cA, s.cB + h * q3.cB, s.TR + h * q3.TR,
                         s.TK + h * q3.TK};
    const PlantState q4 = derivatives(end, F, params);
    s.cA += h / 6.0 * (q1.cA + 2.0 * q2.cA + 2.0 * q3.cA + q4.cA);
    s.cB += h / 6.0 * (q1.cB + 2.0 * q2.cB + 2.0 * q3.cB + q4.cB);
    s.TR += h / 6.0 * (q1.TR + 2.0 * q2.TR + 2.0 * q3.TR + q4.TR);
    s.TK += h / 6.0 * (q1.TK + 2.0 * q2.TK + 2.0 * q3.TK + q4.TK);
  }
  if (!std::isfinite(s.cA) || !std::isfinite(s.cB) || !std::isfinite(s.TR) ||
      !std::isfinite(s.TK)) {
    throw NumericalError("step: integration produced a non-finite state");
  }
  return s;
}

std::pair<double, double> measure(const PlantState& state, const NoiseSpec& noise,
                                  rng::Stream& stream) {
  if (noise.sigma_B == 0.0 && noise.sigma_R == 0.0) {
    return {state.cB, state.TR};
  }
  const double cB = state.cB + (noise.sigma_B > 0.0 ? stream.normal(0.0, noise.sigma_B) : 0.0);
  const double TR = state.TR + (noise.sigma_R > 0.0 ? stream.normal(0.0, noise.sigma_R) : 0.0);
  return {cB, TR};
}

}  // namespace mpctune::plant
