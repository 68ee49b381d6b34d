#include "screenbem/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace screenbem {

namespace {

constexpr double kGeomTol = 1e-12; // planarity/overlap tolerance
constexpr double kSnapTol = 1e-10; // point/line coincidence snapping

} // namespace

// ---------------------------------------------------------------------------
// ElementGeom

ElementGeom::ElementGeom(const std::array<Vec3, 4>& corners) : corners_(corners) {
    e1_ = corners_[1] - corners_[0];
    e2_ = corners_[3] - corners_[0];
    twist_ = corners_[0] - corners_[1] + corners_[2] - corners_[3];
    Vec3 m = cross(e1_, e2_);
    if (m.norm() <= 0.0)
        throw GeometryError("degenerate quadrilateral element");
    normal_ = normalized(m);
    diameter_ = std::max(distance(corners_[0], corners_[2]),
                         distance(corners_[1], corners_[3]));
    parallelogram_ = twist_.norm() <= kGeomTol * diameter_;
    if (parallelogram_)
        for (int a = 0; a < 4; ++a)
            curls_[static_cast<size_t>(a)] = curl_coefficients(a);
}

Vec3 ElementGeom::chart(double u, double v) const {
    return corners_[0] + u * e1_ + v * e2_ + (u * v) * twist_;
}

Vec3 ElementGeom::chart_du(double u, double v) const {
    (void)u;
    return e1_ + v * twist_;
}

Vec3 ElementGeom::chart_dv(double u, double v) const {
    (void)v;
    return e2_ + u * twist_;
}

double ElementGeom::jacobian(double u, double v) const {
    return cross(chart_du(u, v), chart_dv(u, v)).norm();
}

std::array<double, 4> ElementGeom::shapes(double u, double v) {
    return {(1 - u) * (1 - v), u * (1 - v), u * v, (1 - u) * v};
}

std::array<Vec2, 4> ElementGeom::shape_grads_ref(double u, double v) {
    return {Vec2{-(1 - v), -(1 - u)}, Vec2{1 - v, -u}, Vec2{v, u}, Vec2{-v, 1 - u}};
}

Vec3 ElementGeom::shape_curl_at(int a, double u, double v) const {
    if (parallelogram_)
        return curls_[static_cast<size_t>(a)].at(u, v);
    return shape_curl_general(a, u, v);
}

Vec3 ElementGeom::shape_curl_general(int a, double u, double v) const {
    Vec3 au = chart_du(u, v);
    Vec3 av = chart_dv(u, v);
    double d = dot(cross(au, av), normal_);
    Vec3 cu = (1.0 / d) * cross(av, normal_); // contravariant basis
    Vec3 cv = (1.0 / d) * cross(normal_, au);
    Vec2 g = shape_grads_ref(u, v)[static_cast<size_t>(a)];
    Vec3 grad = g.x * cu + g.y * cv;
    return cross(grad, normal_);
}

BasisCurl ElementGeom::curl_coefficients(int a) const {
    if (!parallelogram_)
        throw GeometryError("curl coefficients need a parallelogram element");
    double d = dot(cross(e1_, e2_), normal_);
    Vec3 ru = cross(cross(e2_, normal_), normal_); // (a^u) x n, precombined
    Vec3 rv = cross(cross(normal_, e1_), normal_);
    ru = (1.0 / d) * ru;
    rv = (1.0 / d) * rv;
    // dN/du in {-(1-v), (1-v), v, -v}, dN/dv in {-(1-u), -u, u, (1-u)}
    BasisCurl c;
    c.shape = a;
    switch (a) {
    case 0: c.c0 = -ru - rv; c.cu = rv;  c.cv = ru;  break;
    case 1: c.c0 = ru;       c.cu = -rv; c.cv = -ru; break;
    case 2: c.c0 = {};       c.cu = rv;  c.cv = ru;  break;
    case 3: c.c0 = rv;       c.cu = -rv; c.cv = -ru; break;
    default: throw Error("shape index out of range");
    }
    return c;
}

// ---------------------------------------------------------------------------
// Builders

namespace {

SubdomainMesh mesh_rect(int subdomain, const RectSpec& r) {
    if (r.nx < 1 || r.ny < 1)
        throw GeometryError("rectangle mesh needs at least one cell per direction");
    SubdomainMesh m;
    m.subdomain = subdomain;
    const double dx = (r.x1 - r.x0) / r.nx;
    const double dy = (r.y1 - r.y0) / r.ny;
    // ix-major node order = lexicographic by (x, y, z)
    for (int ix = 0; ix <= r.nx; ++ix)
        for (int iy = 0; iy <= r.ny; ++iy)
            m.nodes.push_back({r.x0 + ix * dx, r.y0 + iy * dy, 0.0});
    auto id = [&](int ix, int iy) { return ix * (r.ny + 1) + iy; };
    for (int ix = 0; ix < r.nx; ++ix)
        for (int iy = 0; iy < r.ny; ++iy)
            m.elements.push_back({id(ix, iy), id(ix + 1, iy), id(ix + 1, iy + 1), id(ix, iy + 1)});
    m.h = m.h_min = std::sqrt(dx * dx + dy * dy);
    return m;
}

} // namespace

int Screen::total_elements() const {
    int n = 0;
    for (const auto& m : meshes)
        n += static_cast<int>(m.elements.size());
    return n;
}

Screen build_rect_screen(const std::vector<RectSpec>& rects) {
    Screen s;
    for (size_t j = 0; j < rects.size(); ++j) {
        const RectSpec& r = rects[j];
        int base = static_cast<int>(s.geometry.vertices.size());
        s.geometry.vertices.push_back({r.x0, r.y0, 0.0});
        s.geometry.vertices.push_back({r.x1, r.y0, 0.0});
        s.geometry.vertices.push_back({r.x1, r.y1, 0.0});
        s.geometry.vertices.push_back({r.x0, r.y1, 0.0});
        ScreenGeometry::Subdomain sub;
        sub.polygon = {base, base + 1, base + 2, base + 3};
        sub.normal = {0.0, 0.0, 1.0};
        s.geometry.subdomains.push_back(sub);
        s.meshes.push_back(mesh_rect(static_cast<int>(j), r));
    }
    s.skeleton = extract_skeleton(s.geometry, s.meshes);
    return s;
}

Screen build_model_screen(int levels) {
    const int f = 1 << levels;
    return build_rect_screen({
        {-0.5, -0.5, 0.0, 0.5, 1 * f, 2 * f}, // left half, cells of 1/2
        {0.0, 0.0, 0.5, 0.5, 2 * f, 2 * f},   // upper-right quarter, cells of 1/4
        {0.0, -0.5, 0.5, 0.0, 1 * f, 1 * f},  // lower-right quarter, cells of 1/2
    });
}

Screen build_square_screen(int levels) {
    const int m = 2 * (1 << levels);
    return build_rect_screen({{-0.5, -0.5, 0.5, 0.5, m, m}});
}

Screen build_matching_screen(int levels) {
    const int f = 1 << levels;
    return build_rect_screen({
        {-0.5, -0.5, 0.0, 0.5, 1 * f, 2 * f},
        {0.0, 0.0, 0.5, 0.5, 1 * f, 1 * f},
        {0.0, -0.5, 0.5, 0.0, 1 * f, 1 * f},
    });
}

std::pair<double, double> mesh_stats(const std::vector<SubdomainMesh>& meshes) {
    if (meshes.empty())
        throw GeometryError("mesh_stats needs at least one mesh");
    double h = 0, h_min = std::numeric_limits<double>::infinity();
    for (const auto& m : meshes) {
        h = std::max(h, m.h);
        h_min = std::min(h_min, m.h_min);
    }
    return {h, h_min};
}

// ---------------------------------------------------------------------------
// Skeleton extraction

namespace {

struct PolyEdge {
    Vec3 p, q;
    int subdomain;
};

struct LineFrame {
    Vec3 dir;    // canonical unit direction
    Vec3 origin; // point on the line closest to the coordinate origin
};

bool same_line(const LineFrame& l, const Vec3& p, const Vec3& q, const Vec3& dir) {
    if (cross(l.dir, dir).norm() > kSnapTol)
        return false;
    auto off_line = [&](const Vec3& x) {
        Vec3 r = x - l.origin;
        return (r - dot(r, l.dir) * l.dir).norm();
    };
    return off_line(p) <= kSnapTol && off_line(q) <= kSnapTol;
}

LineFrame make_frame(const Vec3& p, const Vec3& q) {
    Vec3 d = normalized(q - p);
    // fix the sign by the first component larger than the snapping tolerance
    double lead = std::abs(d.x) > kSnapTol ? d.x : (std::abs(d.y) > kSnapTol ? d.y : d.z);
    if (lead < 0)
        d = -d;
    Vec3 o = p - dot(p, d) * d;
    return {d, o};
}

struct EdgeInterval {
    double t0, t1; // t0 < t1 along the frame direction
    int subdomain;
    double orient; // +1 if the CCW polygon edge runs along +dir, else -1
};

// Convex polygon overlap area used for the interior-disjointness check.
double convex_overlap_area(const std::vector<Vec3>& a, const std::vector<Vec3>& b, Vec3 n) {
    // clip polygon a против each edge half-plane of b (Sutherland-Hodgman)
    std::vector<Vec3> poly = a;
    for (size_t i = 0; i < b.size() && !poly.empty(); ++i) {
        Vec3 p = b[i], q = b[(i + 1) % b.size()];
        Vec3 inward = cross(n, q - p);
        auto side = [&](const Vec3& x) { return dot(x - p, inward); };
        std::vector<Vec3> next;
        for (size_t j = 0; j < poly.size(); ++j) {
            Vec3 cur = poly[j], nxt = poly[(j + 1) % poly.size()];
            double sc = side(cur), sn = side(nxt);
            if (sc >= -kSnapTol)
                next.push_back(cur);
            if ((sc > kSnapTol && sn < -kSnapTol) || (sc < -kSnapTol && sn > kSnapTol)) {
                double t = sc / (sc - sn);
                next.push_back(cur + t * (nxt - cur));
            }
        }
        poly = next;
    }
    if (poly.size() < 3)
        return 0.0;
    Vec3 acc{};
    for (size_t j = 1; j + 1 < poly.size(); ++j)
        acc = acc + cross(poly[j] - poly[0], poly[j + 1] - poly[0]);
    return 0.5 * std::abs(dot(acc, n));
}

void validate_geometry(const ScreenGeometry& g) {
    if (g.subdomains.empty())
        throw GeometryError("screen has no subdomains");
    const Vec3 n0 = g.subdomains.front().normal;
    for (const auto& sub : g.subdomains) {
        if (sub.polygon.size() < 3)
            throw GeometryError("subdomain polygon needs at least 3 vertices");
        if ((sub.normal - n0).norm() > kGeomTol)
            throw GeometryError("subdomain normals disagree on the connected screen");
        const Vec3 p0 = g.vertices[static_cast<size_t>(sub.polygon[0])];
        double twice_area = 0;
        for (size_t i = 0; i < sub.polygon.size(); ++i) {
            const Vec3 p = g.vertices[static_cast<size_t>(sub.polygon[i])];
            const Vec3 q = g.vertices[static_cast<size_t>(sub.polygon[(i + 1) % sub.polygon.size()])];
            if (std::abs(dot(p - p0, sub.normal)) > kGeomTol)
                throw GeometryError("subdomain polygon is not planar");
            twice_area += dot(cross(p - p0, q - p0), sub.normal);
        }
        if (twice_area <= 0)
            throw GeometryError("subdomain polygon is not CCW w.r.t. its normal");
    }
    for (size_t i = 0; i < g.subdomains.size(); ++i)
        for (size_t j = i + 1; j < g.subdomains.size(); ++j) {
            std::vector<Vec3> pi, pj;
            for (int v : g.subdomains[i].polygon)
                pi.push_back(g.vertices[static_cast<size_t>(v)]);
            for (int v : g.subdomains[j].polygon)
                pj.push_back(g.vertices[static_cast<size_t>(v)]);
            if (convex_overlap_area(pi, pj, n0) > kGeomTol)
                throw GeometryError("subdomains overlap");
        }
}

// Boundary edges (node pairs appearing in exactly one element) of a mesh.
std::vector<std::pair<int, int>> mesh_boundary_edges(const SubdomainMesh& m) {
    std::map<std::pair<int, int>, int> count;
    for (const auto& e : m.elements)
        for (int i = 0; i < 4; ++i) {
            int a = e[static_cast<size_t>(i)], b = e[static_cast<size_t>((i + 1) % 4)];
            count[{std::min(a, b), std::max(a, b)}]++;
        }
    std::vector<std::pair<int, int>> edges;
    for (const auto& [k, c] : count)
        if (c == 1)
            edges.push_back(k);
    return edges;
}

} // namespace

double Skeleton::interior_length() const {
    double l = 0;
    for (const auto& s : segments)
        if (!s.on_boundary())
            l += s.length;
    return l;
}

double Skeleton::boundary_length() const {
    double l = 0;
    for (const auto& s : segments)
        if (s.on_boundary())
            l += s.length;
    return l;
}

Skeleton extract_skeleton(const ScreenGeometry& geometry,
                          const std::vector<SubdomainMesh>& meshes) {
    validate_geometry(geometry);
    if (meshes.size() != geometry.subdomains.size())
        throw GeometryError("one mesh per subdomain required");

    // group polygon edges by supporting line
    std::vector<PolyEdge> edges;
    for (size_t j = 0; j < geometry.subdomains.size(); ++j) {
        const auto& poly = geometry.subdomains[j].polygon;
        for (size_t i = 0; i < poly.size(); ++i)
            edges.push_back({geometry.vertices[static_cast<size_t>(poly[i])],
                             geometry.vertices[static_cast<size_t>(poly[(i + 1) % poly.size()])],
                             static_cast<int>(j)});
    }
    std::vector<LineFrame> lines;
    std::vector<std::vector<EdgeInterval>> line_edges;
    for (const auto& e : edges) {
        Vec3 d = normalized(e.q - e.p);
        size_t li = lines.size();
        for (size_t l = 0; l < lines.size(); ++l)
            if (same_line(lines[l], e.p, e.q, d)) {
                li = l;
                break;
            }
        if (li == lines.size()) {
            lines.push_back(make_frame(e.p, e.q));
            line_edges.emplace_back();
        }
        const LineFrame& fr = lines[li];
        double t0 = dot(e.p - fr.origin, fr.dir);
        double t1 = dot(e.q - fr.origin, fr.dir);
        EdgeInterval iv;
        iv.orient = t1 > t0 ? 1.0 : -1.0;
        iv.t0 = std::min(t0, t1);
        iv.t1 = std::max(t0, t1);
        iv.subdomain = e.subdomain;
        line_edges[li].push_back(iv);
    }

    Skeleton skel;
    for (size_t l = 0; l < lines.size(); ++l) {
        const LineFrame& fr = lines[l];
        std::vector<double> cuts;
        for (const auto& iv : line_edges[l]) {
            cuts.push_back(iv.t0);
            cuts.push_back(iv.t1);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end(),
                               [](double a, double b) { return std::abs(a - b) <= kSnapTol; }),
                   cuts.end());
        int chain_id_on_line = -1;
        double prev_end = -std::numeric_limits<double>::infinity();
        for (size_t c = 0; c + 1 < cuts.size(); ++c) {
            double mid = 0.5 * (cuts[c] + cuts[c + 1]);
            std::vector<const EdgeInterval*> covering;
            for (const auto& iv : line_edges[l])
                if (iv.t0 - kSnapTol <= mid && mid <= iv.t1 + kSnapTol)
                    covering.push_back(&iv);
            if (covering.empty())
                continue;
            if (covering.size() > 2)
                throw GeometryError("more than two subdomains meet along a line");
            if (covering.size() == 2 && covering[0]->subdomain == covering[1]->subdomain)
                throw GeometryError("subdomain touches itself along an interface");

            // chains: consecutive covered intervals on one line form one chain
            if (cuts[c] - prev_end > kSnapTol)
                chain_id_on_line = skel.chain_count++;
            prev_end = cuts[c + 1];

            SkeletonSegment seg;
            seg.chain = chain_id_on_line;
            const EdgeInterval* owner = covering[0];
            if (covering.size() == 2 && covering[1]->subdomain < owner->subdomain)
                owner = covering[1];
            // tangent follows the owner's CCW polygon edge, so n x t points
            // into the owner, which becomes the left side
            seg.tangent = owner->orient > 0 ? fr.dir : -fr.dir;
            double ta = cuts[c], tb = cuts[c + 1];
            if (owner->orient < 0)
                std::swap(ta, tb);
            seg.a = fr.origin + ta * fr.dir;
            seg.b = fr.origin + tb * fr.dir;
            seg.length = std::abs(tb - ta);
            seg.left.subdomain = owner->subdomain;
            if (covering.size() == 2) {
                SkeletonSide right;
                right.subdomain =
                    covering[0] == owner ? covering[1]->subdomain : covering[0]->subdomain;
                seg.right = right;
            }
            skel.segments.push_back(seg);
        }
    }

    // attach mesh edges to segment sides
    std::vector<std::vector<std::pair<int, int>>> bedges(meshes.size());
    for (size_t j = 0; j < meshes.size(); ++j)
        bedges[j] = mesh_boundary_edges(meshes[j]);

    for (auto& seg : skel.segments) {
        auto fill_side = [&](SkeletonSide& side) {
            const SubdomainMesh& m = meshes[static_cast<size_t>(side.subdomain)];
            std::vector<std::pair<double, int>> on_seg; // (param, node)
            std::set<int> seen;
            for (const auto& [na, nb] : bedges[static_cast<size_t>(side.subdomain)]) {
                for (int node : {na, nb}) {
                    Vec3 r = m.nodes[static_cast<size_t>(node)] - seg.a;
                    double s = dot(r, seg.tangent);
                    if ((r - s * seg.tangent).norm() > kSnapTol)
                        goto next_edge;
                    if (s < -kSnapTol || s > seg.length + kSnapTol)
                        goto next_edge;
                }
                for (int node : {na, nb})
                    if (seen.insert(node).second) {
                        double s = dot(m.nodes[static_cast<size_t>(node)] - seg.a, seg.tangent);
                        on_seg.push_back({std::clamp(s, 0.0, seg.length), node});
                    }
            next_edge:;
            }
            std::sort(on_seg.begin(), on_seg.end());
            if (on_seg.size() < 2 || std::abs(on_seg.front().first) > kSnapTol ||
                std::abs(on_seg.back().first - seg.length) > kSnapTol)
                throw GeometryError("mesh does not cover a skeleton segment");
            for (const auto& [s, node] : on_seg) {
                side.breaks.push_back(s);
                side.nodes.push_back(node);
            }
        };
        fill_side(seg.left);
        if (seg.right)
            fill_side(*seg.right);
    }
    return skel;
}

std::vector<double> merged_breakpoints(const SkeletonSegment& seg) {
    std::vector<double> b = seg.left.breaks;
    if (seg.right)
        b.insert(b.end(), seg.right->breaks.begin(), seg.right->breaks.end());
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end(),
                        [](double x, double y) { return std::abs(x - y) <= kSnapTol; }),
            b.end());
    return b;
}

void write_mesh_dump(std::ostream& out, const Screen& screen) {
    out << "screenbem-mesh v1\n";
    char buf[256];
    std::vector<int> offset(screen.meshes.size() + 1, 0);
    for (size_t j = 0; j < screen.meshes.size(); ++j) {
        offset[j + 1] = offset[j] + static_cast<int>(screen.meshes[j].nodes.size());
        for (const auto& v : screen.meshes[j].nodes) {
            std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
            out << buf;
        }
    }
    for (size_t j = 0; j < screen.meshes.size(); ++j)
        for (const auto& e : screen.meshes[j].elements) {
            std::snprintf(buf, sizeof buf, "q %zu %d %d %d %d\n", j, offset[j] + e[0],
                          offset[j] + e[1], offset[j] + e[2], offset[j] + e[3]);
            out << buf;
        }
    for (const auto& s : screen.skeleton.segments) {
        std::snprintf(buf, sizeof buf, "s %.17g %.17g %.17g %.17g %.17g %.17g %d %d\n", s.a.x,
                      s.a.y, s.a.z, s.b.x, s.b.y, s.b.z, s.left.subdomain,
                      s.right ? s.right->subdomain : -1);
        out << buf;
    }
}

double distance_point_to_element(const Vec3& p, const ElementGeom& elem) {
    const Vec3 n = elem.unit_normal();
    const Vec3 p0 = elem.corner(0);
    double dn = dot(p - p0, n);
    Vec3 q = p - dn * n;
    bool inside = true;
    for (int i = 0; i < 4; ++i) {
        Vec3 a = elem.corner(i), b = elem.corner((i + 1) % 4);
        if (dot(cross(b - a, q - a), n) < -kSnapTol) {
            inside = false;
            break;
        }
    }
    if (inside)
        return std::abs(dn);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        Vec3 a = elem.corner(i), b = elem.corner((i + 1) % 4);
        Vec3 d = b - a;
        double t = std::clamp(dot(p - a, d) / dot(d, d), 0.0, 1.0);
        best = std::min(best, distance(p, a + t * d));
    }
    return best;
}

} // namespace screenbem
