#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "screenbem/geometry.hpp"

namespace screenbem {

enum class SpaceKind { Nonconforming, ConformingZeroTrace };

/// Maps subdomain-wise nodal bases to global indices.
/// Nonconforming: every subdomain node gets its own index, coincident nodes
/// across interfaces stay distinct. Conforming: interface nodes are shared
/// (requires matching meshes) and nodes on the screen boundary are excluded.
struct DofSystem {
    SpaceKind kind = SpaceKind::Nonconforming;
    int total = 0;
    std::vector<std::vector<int>> node_to_dof; // per subdomain; -1 = constrained

    int dof(int subdomain, int node) const {
        return node_to_dof[static_cast<size_t>(subdomain)][static_cast<size_t>(node)];
    }
};

DofSystem build_dofs(const Screen& screen, SpaceKind kind);

/// Restriction of a discrete function to one merged skeleton piece, linear in
/// the arclength parameter.
struct JumpPiece {
    int segment = -1;
    double s0 = 0, s1 = 0;
    std::complex<double> v0, v1;
};

/// Piecewise-linear jump of a discrete function across the skeleton; on the
/// screen boundary it is the one-sided trace.
struct JumpFunction {
    std::vector<JumpPiece> pieces;

    /// Exact L2(gamma) norm (two-point Gauss per piece).
    double l2_norm() const;
};

JumpFunction jump_trace(const Screen& screen, const DofSystem& dofs,
                        const Eigen::VectorXcd& coeffs);

/// Value of a discrete function on one side of a segment at arclength s.
std::complex<double> side_value(const SkeletonSide& side, const DofSystem& dofs,
                                const Eigen::VectorXcd& coeffs, double s);

/// Surface curl of one bilinear shape function (spec-level wrapper around the
/// element chart; exact coefficients for parallelogram elements).
BasisCurl shape_curl(const Screen& screen, int subdomain, int element, int local_shape);

/// Interpolates a conforming coefficient vector into the nonconforming space
/// (constrained boundary dofs inject as zero).
Eigen::VectorXcd inject_conforming(const Screen& screen, const DofSystem& conforming,
                                   const DofSystem& nonconforming,
                                   const Eigen::VectorXcd& coeffs);

/// L2(Gamma) distance between two discrete functions that may live in
/// different spaces on the same screen.
double l2_distance(const Screen& screen, const DofSystem& da, const Eigen::VectorXcd& ua,
                   const DofSystem& db, const Eigen::VectorXcd& ub);

} // namespace screenbem
