#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "screenbem/errors.hpp"

namespace screenbem {

struct Vec2 {
    double x = 0, y = 0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double cross2(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

struct Vec3 {
    double x = 0, y = 0, z = 0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double distance(Vec3 a, Vec3 b) { return (a - b).norm(); }
inline Vec3 normalized(Vec3 a) {
    double n = a.norm();
    return {a.x / n, a.y / n, a.z / n};
}

/// The screen Gamma decomposed into plane polygonal subdomains.
/// All subdomain normals must agree (single-sided screen) and polygons are
/// oriented counterclockwise with respect to their normal.
struct ScreenGeometry {
    struct Subdomain {
        std::vector<int> polygon; // indices into vertices, CCW w.r.t. normal
        Vec3 normal;
    };

    std::vector<Vec3> vertices;
    std::vector<Subdomain> subdomains;
};

/// Quadrilateral mesh of one subdomain. Element corners are CCW w.r.t. the
/// subdomain normal; nodes are ordered lexicographically by (x, y, z).
struct SubdomainMesh {
    int subdomain = 0;
    std::vector<Vec3> nodes;
    std::vector<std::array<int, 4>> elements;
    double h = 0;     // max element diameter
    double h_min = 0; // min element diameter
};

/// One side of a skeleton segment: the adjacent subdomain together with the
/// mesh edges of that subdomain lying on the segment. breaks[i] is the
/// arclength parameter of nodes[i] measured from the segment start.
struct SkeletonSide {
    int subdomain = -1;
    std::vector<double> breaks;
    std::vector<int> nodes;
};

/// Straight piece of the skeleton with constant left/right adjacency.
/// The tangent is fixed at construction; the left subdomain is the one that
/// n x t points into. Boundary segments have no right side and the jump
/// there is the trace of the left side.
struct SkeletonSegment {
    Vec3 a, b;
    Vec3 tangent;
    double length = 0;
    int chain = -1; // id of the maximal collinear run this segment belongs to
    SkeletonSide left;
    std::optional<SkeletonSide> right;

    bool on_boundary() const { return !right.has_value(); }
};

struct Skeleton {
    std::vector<SkeletonSegment> segments;
    int chain_count = 0;

    double interior_length() const;
    double boundary_length() const;
};

/// Geometry/mesh/skeleton bundle for one discretization level.
struct Screen {
    ScreenGeometry geometry;
    std::vector<SubdomainMesh> meshes;
    Skeleton skeleton;

    int total_elements() const;
};

/// Rotated surface gradient of one bilinear shape function on a parallelogram
/// element: curl(u,v) = c0 + u*cu + v*cv in world coordinates.
struct BasisCurl {
    int element = -1;
    int shape = -1;
    Vec3 c0, cu, cv;

    Vec3 at(double u, double v) const { return c0 + u * cu + v * cv; }
};

/// Bilinear chart of a planar quadrilateral element, with shape function and
/// surface-curl evaluation. Immutable after construction.
class ElementGeom {
public:
    ElementGeom() = default;
    explicit ElementGeom(const std::array<Vec3, 4>& corners);

    const std::array<Vec3, 4>& corners() const { return corners_; }
    Vec3 corner(int i) const { return corners_[static_cast<size_t>(i)]; }

    Vec3 chart(double u, double v) const;
    Vec3 chart_du(double u, double v) const;
    Vec3 chart_dv(double u, double v) const;
    double jacobian(double u, double v) const;

    Vec3 unit_normal() const { return normal_; }
    Vec3 center() const { return chart(0.5, 0.5); }
    double diameter() const { return diameter_; }
    bool parallelogram() const { return parallelogram_; }

    static std::array<double, 4> shapes(double u, double v);
    // (dN/du, dN/dv) of the four bilinear shapes
    static std::array<Vec2, 4> shape_grads_ref(double u, double v);

    /// Rotated surface gradient grad(N_a) x n at a reference point. Uses the
    /// cached linear coefficients on parallelogram elements.
    Vec3 shape_curl_at(int a, double u, double v) const;

    /// Exact linear coefficients of the shape curl; requires a parallelogram.
    BasisCurl curl_coefficients(int a) const;

private:
    Vec3 shape_curl_general(int a, double u, double v) const;

    std::array<Vec3, 4> corners_{};
    Vec3 e1_, e2_, twist_; // chart = P0 + u e1 + v e2 + uv twist
    Vec3 normal_;
    std::array<BasisCurl, 4> curls_{}; // cached coefficients (parallelogram)
    double diameter_ = 0;
    bool parallelogram_ = false;
};

/// Axis-aligned rectangle subdomain in the z=0 plane with an nx x ny mesh.
struct RectSpec {
    double x0, y0, x1, y1;
    int nx, ny;
};

/// Generic builder for flat screens made of axis-aligned rectangles.
Screen build_rect_screen(const std::vector<RectSpec>& rects);

/// Unit-square screen (-1/2,1/2)^2 split into a half and two quarter squares
/// with per-subdomain uniform meshes that do not match across interfaces.
/// `levels` halves the element edge lengths per increment.
Screen build_model_screen(int levels);

/// Single-subdomain unit-square screen with a uniform (2*2^levels)^2 mesh;
/// carries the conforming ladder.
Screen build_square_screen(int levels);

/// Same decomposition as the model screen but with equal element sizes in all
/// subdomains, so interface meshes match.
Screen build_matching_screen(int levels);

/// Interface/boundary segment chains with fixed tangents and per-side mesh
/// edge adjacency. Throws GeometryError for non-planar or overlapping input.
Skeleton extract_skeleton(const ScreenGeometry& geometry,
                          const std::vector<SubdomainMesh>& meshes);

/// Global (max, min) element diameter over all subdomain meshes.
std::pair<double, double> mesh_stats(const std::vector<SubdomainMesh>& meshes);

/// Union of left/right breakpoints of a segment; the jump of a discrete
/// function is linear between consecutive entries.
std::vector<double> merged_breakpoints(const SkeletonSegment& seg);

/// Plain-text mesh dump (header "screenbem-mesh v1", v/q/s lines).
void write_mesh_dump(std::ostream& out, const Screen& screen);

double distance_point_to_element(const Vec3& p, const ElementGeom& elem);

} // namespace screenbem
