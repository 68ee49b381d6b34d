#include "screenbem/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "screenbem/quadrature.hpp"

namespace screenbem {

namespace {

constexpr double kSnapTol = 1e-10;

struct CoordLess {
    bool operator()(const Vec3& a, const Vec3& b) const {
        if (std::abs(a.x - b.x) > kSnapTol)
            return a.x < b.x;
        if (std::abs(a.y - b.y) > kSnapTol)
            return a.y < b.y;
        if (std::abs(a.z - b.z) > kSnapTol)
            return a.z < b.z;
        return false;
    }
};

} // namespace

DofSystem build_dofs(const Screen& screen, SpaceKind kind) {
    DofSystem d;
    d.kind = kind;
    d.node_to_dof.resize(screen.meshes.size());
    if (kind == SpaceKind::Nonconforming) {
        int next = 0;
        for (size_t j = 0; j < screen.meshes.size(); ++j) {
            auto& map = d.node_to_dof[j];
            map.resize(screen.meshes[j].nodes.size());
            for (size_t n = 0; n < map.size(); ++n)
                map[n] = next++;
        }
        d.total = next;
        return d;
    }

    // conforming: interface meshes must match
    for (const auto& seg : screen.skeleton.segments) {
        if (!seg.right)
            continue;
        const auto& lb = seg.left.breaks;
        const auto& rb = seg.right->breaks;
        if (lb.size() != rb.size())
            throw ConfigError("conforming space needs matching interface meshes");
        for (size_t i = 0; i < lb.size(); ++i)
            if (std::abs(lb[i] - rb[i]) > kSnapTol)
                throw ConfigError("conforming space needs matching interface meshes");
    }

    // nodes on the screen boundary carry the zero trace
    auto on_boundary = [&](const Vec3& p) {
        for (const auto& seg : screen.skeleton.segments) {
            if (!seg.on_boundary())
                continue;
            const Vec3 r = p - seg.a;
            const double s = dot(r, seg.tangent);
            if (s < -kSnapTol || s > seg.length + kSnapTol)
                continue;
            if ((r - s * seg.tangent).norm() <= kSnapTol)
                return true;
        }
        return false;
    };

    std::map<Vec3, int, CoordLess> global;
    for (size_t j = 0; j < screen.meshes.size(); ++j)
        for (const auto& p : screen.meshes[j].nodes)
            if (!on_boundary(p))
                global.emplace(p, 0);
    int next = 0;
    for (auto& [p, id] : global)
        id = next++; // lexicographic by construction of the map
    d.total = next;
    for (size_t j = 0; j < screen.meshes.size(); ++j) {
        auto& map = d.node_to_dof[j];
        map.resize(screen.meshes[j].nodes.size(), -1);
        for (size_t n = 0; n < map.size(); ++n) {
            auto it = global.find(screen.meshes[j].nodes[n]);
            if (it != global.end())
                map[n] = it->second;
        }
    }
    return d;
}

std::complex<double> side_value(const SkeletonSide& side, const DofSystem& dofs,
                                const Eigen::VectorXcd& coeffs, double s) {
    const auto& b = side.breaks;
    size_t hi = static_cast<size_t>(
        std::upper_bound(b.begin() + 1, b.end() - 1, s) - b.begin());
    const size_t lo = hi - 1;
    const double theta = (s - b[lo]) / (b[hi] - b[lo]);
    auto value_at = [&](size_t i) -> std::complex<double> {
        const int dof = dofs.dof(side.subdomain, side.nodes[i]);
        return dof >= 0 ? coeffs[dof] : std::complex<double>(0);
    };
    return (1.0 - theta) * value_at(lo) + theta * value_at(hi);
}

JumpFunction jump_trace(const Screen& screen, const DofSystem& dofs,
                        const Eigen::VectorXcd& coeffs) {
    JumpFunction jf;
    for (size_t si = 0; si < screen.skeleton.segments.size(); ++si) {
        const auto& seg = screen.skeleton.segments[si];
        const std::vector<double> breaks = merged_breakpoints(seg);
        for (size_t p = 0; p + 1 < breaks.size(); ++p) {
            JumpPiece piece;
            piece.segment = static_cast<int>(si);
            piece.s0 = breaks[p];
            piece.s1 = breaks[p + 1];
            auto jump_at = [&](double s) {
                std::complex<double> v = side_value(seg.left, dofs, coeffs, s);
                if (seg.right)
                    v -= side_value(*seg.right, dofs, coeffs, s);
                return v;
            };
            piece.v0 = jump_at(piece.s0);
            piece.v1 = jump_at(piece.s1);
            jf.pieces.push_back(piece);
        }
    }
    return jf;
}

double JumpFunction::l2_norm() const {
    // |linear|^2 is a quadratic polynomial: two-point Gauss is exact
    const double g0 = 0.5 * (1.0 - 1.0 / std::sqrt(3.0));
    const double g1 = 0.5 * (1.0 + 1.0 / std::sqrt(3.0));
    double acc = 0;
    for (const auto& p : pieces) {
        const double len = p.s1 - p.s0;
        const std::complex<double> a = p.v0 + g0 * (p.v1 - p.v0);
        const std::complex<double> b = p.v0 + g1 * (p.v1 - p.v0);
        acc += 0.5 * len * (std::norm(a) + std::norm(b));
    }
    return std::sqrt(acc);
}

BasisCurl shape_curl(const Screen& screen, int subdomain, int element, int local_shape) {
    const auto& mesh = screen.meshes[static_cast<size_t>(subdomain)];
    const auto& el = mesh.elements[static_cast<size_t>(element)];
    ElementGeom geom({mesh.nodes[static_cast<size_t>(el[0])], mesh.nodes[static_cast<size_t>(el[1])],
                      mesh.nodes[static_cast<size_t>(el[2])], mesh.nodes[static_cast<size_t>(el[3])]});
    BasisCurl c = geom.curl_coefficients(local_shape);
    c.element = element;
    return c;
}

Eigen::VectorXcd inject_conforming(const Screen& screen, const DofSystem& conforming,
                                   const DofSystem& nonconforming,
                                   const Eigen::VectorXcd& coeffs) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(nonconforming.total);
    for (size_t j = 0; j < screen.meshes.size(); ++j)
        for (size_t n = 0; n < screen.meshes[j].nodes.size(); ++n) {
            const int nd = nonconforming.dof(static_cast<int>(j), static_cast<int>(n));
            const int cd = conforming.dof(static_cast<int>(j), static_cast<int>(n));
            out[nd] = cd >= 0 ? coeffs[cd] : std::complex<double>(0);
        }
    return out;
}

double l2_distance(const Screen& screen, const DofSystem& da, const Eigen::VectorXcd& ua,
                   const DofSystem& db, const Eigen::VectorXcd& ub) {
    const GaussRule1D& g = gauss_rule(4);
    double acc = 0;
    for (size_t j = 0; j < screen.meshes.size(); ++j) {
        const auto& mesh = screen.meshes[j];
        for (const auto& el : mesh.elements) {
            ElementGeom geom({mesh.nodes[(size_t)el[0]], mesh.nodes[(size_t)el[1]],
                              mesh.nodes[(size_t)el[2]], mesh.nodes[(size_t)el[3]]});
            for (size_t iu = 0; iu < g.points.size(); ++iu)
                for (size_t iv = 0; iv < g.points.size(); ++iv) {
                    const double u = g.points[iu], v = g.points[iv];
                    const auto n = ElementGeom::shapes(u, v);
                    std::complex<double> fa = 0, fb = 0;
                    for (int m = 0; m < 4; ++m) {
                        const int ndA = da.dof((int)j, el[(size_t)m]);
                        const int ndB = db.dof((int)j, el[(size_t)m]);
                        if (ndA >= 0)
                            fa += n[(size_t)m] * ua[ndA];
                        if (ndB >= 0)
                            fb += n[(size_t)m] * ub[ndB];
                    }
                    acc += g.weights[iu] * g.weights[iv] * geom.jacobian(u, v) * std::norm(fa - fb);
                }
        }
    }
    return std::sqrt(acc);
}

} // namespace screenbem
