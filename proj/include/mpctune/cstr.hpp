#pragma once

#include "mpctune/rng.hpp"

#include <limits>
#include <utility>

namespace mpctune::plant {

/// Physical parameters of the four-state reactor. Defaults are the benchmark
/// values; the feed concentration cA0 has no meaningful default and must be
/// set explicitly (validate() rejects NaN).
struct PlantParams {
  double k01 = 1.287e12;   // 1/h
  double k02 = 1.287e12;   // 1/h
  double k03 = 9.043e9;    // L/(mol h)
  double Ea1R = 9758.3;    // K
  double Ea2R = 9758.3;    // K
  double Ea3R = 7704.0;    // K
  double dH_AB = 4.2;      // kJ/mol
  double dH_BC = -11.0;    // kJ/mol
  double dH_AD = -41.85;   // kJ/mol
  double rho = 0.9342;     // kg/L
  double cp = 3.01;        // kJ/(kg K)
  double cpK = 2.0;        // kJ/(kg K)
  double A = 0.215;        // m^2
  double VR = 10.01;       // L
  double mK = 5.0;         // kg
  double Tin = 130.0;      // degC
  double kW = 4032.0;      // kJ/(h m^2 K)
  double QK_dot = -4500.0; // kJ/h
  double cA0 = std::numeric_limits<double>::quiet_NaN();  // mol/L, required

  void validate() const;
};

struct PlantState {
  double cA = 1.0;   // mol/L
  double cB = 1.0;   // mol/L
  double TR = 100.0; // degC
  double TK = 100.0; // degC
};

/// Benchmark initial condition.
inline PlantState initial_state() { return PlantState{1.0, 1.0, 100.0, 100.0}; }

struct NoiseSpec {
  double sigma_B = 0.0;  // mol/L
  double sigma_R = 0.0;  // degC

  NoiseSpec() = default;
  NoiseSpec(double sigma_B_, double sigma_R_);
};

/// Time derivatives (per hour) of the reactor state at feed rate F (1/h).
PlantState derivatives(const PlantState& state, double F, const PlantParams& params);

/// Advances the state over dt hours with classical RK4 on `substeps` equal
/// sub-intervals. Throws NumericalError if the state leaves the finite range.
PlantState step(const PlantState& state, double F, double dt, int substeps,
                const PlantParams& params);

/// Noisy measurement of (cB, TR). A zero NoiseSpec returns the state values
/// exactly and consumes no random draws.
std::pair<double, double> measure(const PlantState& state, const NoiseSpec& noise,
                                  rng::Stream& stream);

}  // namespace mpctune::plant
