#pragma once

#include <array>
#include <vector>

#include "screenbem/geometry.hpp"
#include "screenbem/kernels.hpp"

namespace screenbem {

/// Gauss-Legendre rule on [0,1]; integrates polynomials of degree <= 2q-1.
struct GaussRule1D {
    int order = 0;
    std::vector<double> points;
    std::vector<double> weights;
};

/// Cached rule with q points. Thread-safe.
const GaussRule1D& gauss_rule(int q);

enum class Adjacency { Coincident, Edge, Vertex, Disjoint };

/// Per-class Gauss orders (points per dimension).
struct QuadOrders {
    int disjoint = 8;
    int vertex = 10;
    int edge = 10;
    int coincident = 12;

    int for_class(Adjacency a) const;
};

/// Singularity-removing 4D rule on the pair of reference squares. The rule
/// assumes the panels are parametrized in the aligned convention: shared edge
/// at s2 = t2 = 0 with a common edge parameter, shared vertex at the origin.
struct PanelPairRule {
    Adjacency cls = Adjacency::Disjoint;
    int order = 0;
    struct Point {
        double s1, s2, t1, t2, w;
    };
    std::vector<Point> points;
};

/// Cached rule table for one adjacency class and order. Thread-safe.
const PanelPairRule& panel_pair_rule(Adjacency cls, int q);

/// Geometric adjacency of two mesh quadrilaterals: coincident if they are the
/// same panel, edge if their closed hulls share a segment of positive length,
/// vertex if they share exactly one point, disjoint otherwise. Sharing is
/// geometric (snapping tolerance 1e-10), not index based.
Adjacency classify_adjacency(const ElementGeom& a, const ElementGeom& b);

/// 4x4 Galerkin products of the single-layer kernel for one panel pair:
///   curl[a][b]   = int_A int_B G_k(x,y) curl N_a(x) . curl N_b(y)
///   scalar[a][b] = int_A int_B G_k(x,y) N_a(x) N_b(y)
/// The static kernel part goes through the singular transforms, the smooth
/// remainder through plain tensor Gauss.
struct PairBlocks {
    std::array<std::array<Complex, 4>, 4> curl{};
    std::array<std::array<Complex, 4>, 4> scalar{};
};

PairBlocks integrate_panel_pair_blocks(WaveNumber k, const ElementGeom& a,
                                       const ElementGeom& b, const QuadOrders& orders);

/// Single-layer pair integral of two bilinear scalar densities given by their
/// corner values: int_A int_B density_x(x) G_k(x,y) density_y(y).
Complex panel_pair_integrate(WaveNumber k, const ElementGeom& a, const ElementGeom& b,
                             const std::array<double, 4>& density_x,
                             const std::array<double, 4>& density_y, int q);

/// Line-times-panel integrals realizing the skeleton operator: for the
/// canonical linear densities lambda_0 = 1-s, lambda_1 = s on the piece [a,b]
/// and each shape curl of the panel,
///   val[l][m] = int_piece lambda_l(x) [ t . int_panel G_k(x,y) curl N_m(y) dS_y ] ds_x
/// with t the unit tangent of the piece. The inner integral is desingularized
/// by a Duffy split around the nearest point when the piece touches or lies
/// close to the panel.
struct SegmentPanelBlock {
    std::array<std::array<Complex, 4>, 2> val{};
};

SegmentPanelBlock integrate_segment_panel_block(WaveNumber k, const Vec3& a, const Vec3& b,
                                                const ElementGeom& panel,
                                                const QuadOrders& orders);

/// Spec-level convenience: one linear segment density (values at the piece
/// endpoints) against one bilinear panel density interpreted as curl weights.
Complex segment_panel_integrate(WaveNumber k, const Vec3& a, const Vec3& b,
                                const std::array<double, 2>& segment_density,
                                const ElementGeom& panel,
                                const std::array<double, 4>& panel_density,
                                const QuadOrders& orders);

} // namespace screenbem
