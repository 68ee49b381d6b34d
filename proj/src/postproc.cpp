#include "screenbem/postproc.hpp"

#include <cmath>
#include <cstdio>

#include "screenbem/spaces.hpp"

namespace screenbem {

double discrete_energy(const AssembledSystem& system, const Eigen::VectorXcd& u) {
    const Eigen::MatrixXcd& e = system.energy();
    return (u.adjoint() * (e * u))(0, 0).real();
}

EnergyEstimate extrapolate_energy(const std::vector<std::pair<double, double>>& ladder) {
    if (ladder.size() < 3)
        throw NumericsError("energy extrapolation needs at least three levels");
    const auto [h2, e2] = ladder[ladder.size() - 3];
    const auto [h1, e1] = ladder[ladder.size() - 2];
    const auto [h0, e0] = ladder[ladder.size() - 1];
    const double d1 = e1 - e2;
    const double d0 = e0 - e1;
    if (d1 == 0.0 || d0 == 0.0 || (d1 > 0) != (d0 > 0))
        throw NumericsError("energy ladder tail is not monotone; cannot extrapolate");
    const double ratio_h = h1 / h0; // 2 for a dyadic ladder
    const double alpha = std::log(d1 / d0) / std::log(ratio_h);
    if (!(alpha > 0.0 && alpha < 2.0))
        throw NumericsError("extrapolation exponent " + std::to_string(alpha) +
                            " outside (0, 2)");
    const double C = d0 / (std::pow(h1, alpha) - std::pow(h0, alpha));
    EnergyEstimate est;
    est.value = e0 + C * std::pow(h0, alpha);
    est.C = C;
    est.alpha = alpha;
    est.levels_used = 3;
    return est;
}

Surrogate error_surrogate(const AssembledSystem& system, const Eigen::VectorXcd& u,
                          double energy_limit, const Screen& screen, const DofSystem& dofs) {
    Surrogate s;
    s.residual = std::sqrt(std::abs(energy_limit - discrete_energy(system, u)));
    s.jumps = jump_trace(screen, dofs, u).l2_norm();
    s.total = s.residual + s.jumps;
    return s;
}

void empirical_rates(std::vector<ConvergenceRecord>& records) {
    for (size_t i = 0; i < records.size(); ++i) {
        if (i == 0) {
            records[i].rate.reset();
            continue;
        }
        records[i].rate = std::log2(records[i - 1].total / records[i].total);
    }
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records) {
    out << "level,h,ndofs,nu,residual,jumps,total,rate\n";
    char buf[256];
    for (const auto& r : records) {
        int n = std::snprintf(buf, sizeof buf, "%d,%.12g,%d,%.12g,%.12g,%.12g,%.12g,", r.level,
                              r.h, r.ndofs, r.nu, r.residual, r.jumps, r.total);
        out.write(buf, n);
        if (r.rate) {
            n = std::snprintf(buf, sizeof buf, "%.12g", *r.rate);
            out.write(buf, n);
        }
        out << "\n";
    }
}

} // namespace screenbem
