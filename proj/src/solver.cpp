#include "screenbem/solver.hpp"

#include <cstdio>

#include "screenbem/quadrature.hpp"

namespace screenbem {

SolutionVector solve_dense(const AssembledSystem& system, SolveInfo* info) {
    if (system.A.rows() != system.A.cols() || system.A.rows() != system.b.size())
        throw NumericsError("system dimensions do not match");
    if (!system.A.allFinite() || !system.b.allFinite())
        throw NumericsError("system contains non-finite entries");
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(system.A);
    const double rcond = lu.rcond();
    if (!(rcond > 0) || !std::isfinite(rcond))
        throw NumericsError("matrix is singular to working precision");
    SolutionVector sol;
    sol.kind = system.kind;
    sol.h = system.h;
    sol.coeffs = lu.solve(system.b);
    const double bnorm = system.b.lpNorm<Eigen::Infinity>();
    const double res = bnorm > 0
                           ? (system.A * sol.coeffs - system.b).lpNorm<Eigen::Infinity>() / bnorm
                           : (system.A * sol.coeffs).lpNorm<Eigen::Infinity>();
    if (info) {
        info->residual = res;
        info->rcond = rcond;
    }
    if (!(res <= 1e-8))
        throw NumericsError("linear solve residual " + std::to_string(res) + " exceeds 1e-8");
    if (!sol.coeffs.allFinite())
        throw NumericsError("solution contains non-finite entries");
    return sol;
}

Complex evaluate_potential(WaveNumber k, const SolutionVector& solution, const Screen& screen,
                           const DofSystem& dofs, const Vec3& x) {
    const double h = mesh_stats(screen.meshes).first;
    Complex acc = 0;
    bool off_surface_checked = false;
    for (size_t j = 0; j < screen.meshes.size(); ++j) {
        const auto& mesh = screen.meshes[j];
        const Vec3 n = screen.geometry.subdomains[j].normal;
        for (const auto& el : mesh.elements) {
            const ElementGeom geom({mesh.nodes[(size_t)el[0]], mesh.nodes[(size_t)el[1]],
                                    mesh.nodes[(size_t)el[2]], mesh.nodes[(size_t)el[3]]});
            const double dist = distance_point_to_element(x, geom);
            if (dist <= 0.0)
                throw std::domain_error("potential evaluation point lies on the screen");
            off_surface_checked = true;
            const GaussRule1D& g = gauss_rule(dist < 2.0 * h ? 12 : 6);
            for (size_t iu = 0; iu < g.points.size(); ++iu)
                for (size_t iv = 0; iv < g.points.size(); ++iv) {
                    const double u = g.points[iu], v = g.points[iv];
                    const Vec3 y = geom.chart(u, v);
                    const Complex ker = double_layer_kernel(k, x, y, n) *
                                        (g.weights[iu] * g.weights[iv] * geom.jacobian(u, v));
                    const auto shapes = ElementGeom::shapes(u, v);
                    for (int m = 0; m < 4; ++m) {
                        const int dof = dofs.dof((int)j, el[(size_t)m]);
                        if (dof >= 0)
                            acc += ker * shapes[(size_t)m] * solution.coeffs[dof];
                    }
                }
        }
    }
    (void)off_surface_checked;
    return acc;
}

void write_solution_csv(std::ostream& out, const SolutionVector& solution) {
    out << "global_dof,re,im\n";
    char buf[96];
    for (Eigen::Index i = 0; i < solution.coeffs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%lld,%.12g,%.12g\n", static_cast<long long>(i),
                      solution.coeffs[i].real(), solution.coeffs[i].imag());
        out << buf;
    }
}

} // namespace screenbem
