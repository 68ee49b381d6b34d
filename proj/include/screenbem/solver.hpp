#pragma once

#include <Eigen/Dense>

#include "screenbem/assembly.hpp"

namespace screenbem {

struct SolutionVector {
    Eigen::VectorXcd coeffs;
    SpaceKind kind = SpaceKind::Nonconforming;
    int level = -1;
    double h = 0;
};

struct SolveInfo {
    double residual = 0; // ||Ax-b||_inf / ||b||_inf
    double rcond = 0;    // reciprocal condition estimate of the LU factors
};

/// Direct dense solve by LU with partial (first-maximal) pivoting. Throws
/// NumericsError when the factorization is singular to working precision or
/// the residual exceeds 1e-8.
SolutionVector solve_dense(const AssembledSystem& system, SolveInfo* info = nullptr);

/// Representation potential U_h(x) = sum_j c_j int_Gamma K(x,y) phi_j(y) dS_y
/// with K the double-layer kernel. Tensor Gauss of order 12 for panels closer
/// than 2h to x, order 6 otherwise. Throws std::domain_error for x on Gamma.
Complex evaluate_potential(WaveNumber k, const SolutionVector& solution, const Screen& screen,
                           const DofSystem& dofs, const Vec3& x);

/// Solution dump: CSV with header global_dof,re,im.
void write_solution_csv(std::ostream& out, const SolutionVector& solution);

} // namespace screenbem
