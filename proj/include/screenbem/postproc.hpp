#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "screenbem/solver.hpp"

namespace screenbem {

/// Extrapolated squared energy E(h) -> E* under the model E(h) = E* - C h^alpha.
struct EnergyEstimate {
    double value = 0; // E*
    double C = 0;
    double alpha = 0;
    int levels_used = 0;
};

/// One row of a convergence study.
struct ConvergenceRecord {
    int level = 0;
    double h = 0;
    int ndofs = 0;
    double nu = 0;
    double residual = 0;
    double jumps = 0;
    double total = 0;
    std::optional<double> rate;
};

/// Re( u^H (curl-curl + normal) u ), evaluated with the energy block of the
/// assembled system.
double discrete_energy(const AssembledSystem& system, const Eigen::VectorXcd& u);

/// Aitken-type fit through the last three (h, E) points: alpha from the
/// difference ratio, then C and E*. Throws NumericsError for fewer than three
/// levels or a non-monotone tail.
EnergyEstimate extrapolate_energy(const std::vector<std::pair<double, double>>& ladder);

struct Surrogate {
    double residual = 0;
    double jumps = 0;
    double total = 0;
};

/// residual = |E* - discrete energy|^{1/2}, jumps = ||[u_h]||_{L2(gamma)}.
Surrogate error_surrogate(const AssembledSystem& system, const Eigen::VectorXcd& u,
                          double energy_limit, const Screen& screen, const DofSystem& dofs);

/// Fills the rate column: rate_l = log2(total_{l-1} / total_l).
void empirical_rates(std::vector<ConvergenceRecord>& records);

/// CSV with the exact header level,h,ndofs,nu,residual,jumps,total,rate.
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records);

} // namespace screenbem
