#include "screenbem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace screenbem {

namespace {

constexpr double kSnapTol = 1e-10;
constexpr double kInv4Pi = 1.0 / (4.0 * std::numbers::pi);

// ---------------------------------------------------------------------------
// Gauss-Legendre

GaussRule1D make_gauss(int q) {
    if (q < 1)
        throw Error("Gauss order must be positive");
    GaussRule1D r;
    r.order = q;
    r.points.resize(static_cast<size_t>(q));
    r.weights.resize(static_cast<size_t>(q));
    for (int i = 0; i < q; ++i) {
        // Newton iteration on P_q over [-1,1]
        double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int n = 2; n <= q; ++n) {
                double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
                p0 = p1;
                p1 = p2;
            }
            dp = q * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15)
                break;
        }
        r.points[static_cast<size_t>(q - 1 - i)] = 0.5 * (1.0 + x);
        r.weights[static_cast<size_t>(q - 1 - i)] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

std::mutex g_rule_mutex;

} // namespace

const GaussRule1D& gauss_rule(int q) {
    static std::map<int, GaussRule1D> cache;
    std::lock_guard<std::mutex> lock(g_rule_mutex);
    auto it = cache.find(q);
    if (it == cache.end())
        it = cache.emplace(q, make_gauss(q)).first;
    return it->second;
}

int QuadOrders::for_class(Adjacency a) const {
    switch (a) {
    case Adjacency::Coincident: return coincident;
    case Adjacency::Edge: return edge;
    case Adjacency::Vertex: return vertex;
    case Adjacency::Disjoint: return disjoint;
    }
    throw Error("unknown adjacency class");
}

// ---------------------------------------------------------------------------
// 4D rule tables

namespace {

PanelPairRule make_coincident_rule(int q) {
    PanelPairRule rule{Adjacency::Coincident, q, {}};
    const GaussRule1D& g = gauss_rule(q);
    rule.points.reserve(static_cast<size_t>(8 * q * q * q * q));
    for (int sgn1 : {1, -1})
        for (int sgn2 : {1, -1})
            for (int tri = 0; tri < 2; ++tri)
                for (int iu = 0; iu < q; ++iu)
                    for (int iv = 0; iv < q; ++iv)
                        for (int iw1 = 0; iw1 < q; ++iw1)
                            for (int iw2 = 0; iw2 < q; ++iw2) {
                                const double u = g.points[(size_t)iu];
                                const double v = g.points[(size_t)iv];
                                const double z1m = tri == 0 ? u : u * v;
                                const double z2m = tri == 0 ? u * v : u;
                                const double a1 = sgn1 < 0 ? z1m : 0.0;
                                const double a2 = sgn2 < 0 ? z2m : 0.0;
                                PanelPairRule::Point p;
                                p.s1 = a1 + (1.0 - z1m) * g.points[(size_t)iw1];
                                p.s2 = a2 + (1.0 - z2m) * g.points[(size_t)iw2];
                                p.t1 = p.s1 + sgn1 * z1m;
                                p.t2 = p.s2 + sgn2 * z2m;
                                p.w = g.weights[(size_t)iu] * g.weights[(size_t)iv] *
                                      g.weights[(size_t)iw1] * g.weights[(size_t)iw2] * u *
                                      (1.0 - z1m) * (1.0 - z2m);
                                rule.points.push_back(p);
                            }
    return rule;
}

PanelPairRule make_edge_rule(int q) {
    PanelPairRule rule{Adjacency::Edge, q, {}};
    const GaussRule1D& g = gauss_rule(q);
    rule.points.reserve(static_cast<size_t>(6 * q * q * q * q));
    for (int sgn : {1, -1})
        for (int pyr = 0; pyr < 3; ++pyr)
            for (int iu = 0; iu < q; ++iu)
                for (int iv1 = 0; iv1 < q; ++iv1)
                    for (int iv2 = 0; iv2 < q; ++iv2)
                        for (int iw = 0; iw < q; ++iw) {
                            const double u = g.points[(size_t)iu];
                            const double v1 = g.points[(size_t)iv1];
                            const double v2 = g.points[(size_t)iv2];
                            double zeta, s2, t2;
                            if (pyr == 0) {
                                zeta = u; s2 = u * v1; t2 = u * v2;
                            } else if (pyr == 1) {
                                s2 = u; zeta = u * v1; t2 = u * v2;
                            } else {
                                t2 = u; zeta = u * v1; s2 = u * v2;
                            }
                            const double a1 = sgn < 0 ? zeta : 0.0;
                            PanelPairRule::Point p;
                            p.s1 = a1 + (1.0 - zeta) * g.points[(size_t)iw];
                            p.s2 = s2;
                            p.t1 = p.s1 + sgn * zeta;
                            p.t2 = t2;
                            p.w = g.weights[(size_t)iu] * g.weights[(size_t)iv1] *
                                  g.weights[(size_t)iv2] * g.weights[(size_t)iw] * u * u *
                                  (1.0 - zeta);
                            rule.points.push_back(p);
                        }
    return rule;
}

PanelPairRule make_vertex_rule(int q) {
    PanelPairRule rule{Adjacency::Vertex, q, {}};
    const GaussRule1D& g = gauss_rule(q);
    rule.points.reserve(static_cast<size_t>(4 * q * q * q * q));
    for (int pyr = 0; pyr < 4; ++pyr)
        for (int iu = 0; iu < q; ++iu)
            for (int iv1 = 0; iv1 < q; ++iv1)
                for (int iv2 = 0; iv2 < q; ++iv2)
                    for (int iv3 = 0; iv3 < q; ++iv3) {
                        const double u = g.points[(size_t)iu];
                        const double v[3] = {g.points[(size_t)iv1], g.points[(size_t)iv2],
                                             g.points[(size_t)iv3]};
                        double c[4];
                        int vi = 0;
                        for (int d = 0; d < 4; ++d)
                            c[d] = d == pyr ? u : u * v[vi++];
                        PanelPairRule::Point p;
                        p.s1 = c[0];
                        p.s2 = c[1];
                        p.t1 = c[2];
                        p.t2 = c[3];
                        p.w = g.weights[(size_t)iu] * g.weights[(size_t)iv1] *
                              g.weights[(size_t)iv2] * g.weights[(size_t)iv3] * u * u * u;
                        rule.points.push_back(p);
                    }
    return rule;
}

PanelPairRule make_disjoint_rule(int q) {
    PanelPairRule rule{Adjacency::Disjoint, q, {}};
    const GaussRule1D& g = gauss_rule(q);
    rule.points.reserve(static_cast<size_t>(q * q * q * q));
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j)
            for (int m = 0; m < q; ++m)
                for (int n = 0; n < q; ++n)
                    rule.points.push_back({g.points[(size_t)i], g.points[(size_t)j],
                                           g.points[(size_t)m], g.points[(size_t)n],
                                           g.weights[(size_t)i] * g.weights[(size_t)j] *
                                               g.weights[(size_t)m] * g.weights[(size_t)n]});
    return rule;
}

} // namespace

const PanelPairRule& panel_pair_rule(Adjacency cls, int q) {
    static std::map<std::pair<int, int>, PanelPairRule> cache;
    std::lock_guard<std::mutex> lock(g_rule_mutex);
    auto key = std::make_pair(static_cast<int>(cls), q);
    auto it = cache.find(key);
    if (it == cache.end()) {
        PanelPairRule r;
        switch (cls) {
        case Adjacency::Coincident: r = make_coincident_rule(q); break;
        case Adjacency::Edge: r = make_edge_rule(q); break;
        case Adjacency::Vertex: r = make_vertex_rule(q); break;
        case Adjacency::Disjoint: r = make_disjoint_rule(q); break;
        }
        it = cache.emplace(key, std::move(r)).first;
    }
    return it->second;
}

// ---------------------------------------------------------------------------
// Contact analysis and pair decomposition

namespace {

struct Contact {
    enum Kind { None, Point, Segment } kind = None;
    Vec3 p, q;
};

bool near_eq(const Vec3& a, const Vec3& b) { return distance(a, b) <= kSnapTol; }

// closest-point distance of two 3D segments
double segment_segment_distance(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2,
                                Vec3* witness) {
    const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
    const double a = dot(d1, d1), e = dot(d2, d2), f = dot(d2, r);
    double s = 0, t = 0;
    const double c = dot(d1, r), b = dot(d1, d2);
    const double denom = a * e - b * b;
    if (denom > 1e-30)
        s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
    t = e > 1e-30 ? (b * s + f) / e : 0.0;
    if (t < 0) {
        t = 0;
        s = std::clamp(-c / a, 0.0, 1.0);
    } else if (t > 1) {
        t = 1;
        s = std::clamp((b - c) / a, 0.0, 1.0);
    }
    const Vec3 c1 = p1 + s * d1, c2 = p2 + t * d2;
    if (witness)
        *witness = 0.5 * (c1 + c2);
    return distance(c1, c2);
}

Contact quad_contact(const std::array<Vec3, 4>& A, const std::array<Vec3, 4>& B) {
    struct Overlap {
        Vec3 u, v;
    };
    std::vector<Overlap> overlaps;
    std::vector<Vec3> points;
    for (int i = 0; i < 4; ++i) {
        const Vec3 p1 = A[(size_t)i], q1 = A[(size_t)((i + 1) % 4)];
        const Vec3 dir = normalized(q1 - p1);
        const double len = distance(p1, q1);
        for (int j = 0; j < 4; ++j) {
            const Vec3 p2 = B[(size_t)j], q2 = B[(size_t)((j + 1) % 4)];
            auto off = [&](const Vec3& x) {
                const Vec3 rr = x - p1;
                return (rr - dot(rr, dir) * dir).norm();
            };
            if (off(p2) <= kSnapTol && off(q2) <= kSnapTol) {
                double t2a = dot(p2 - p1, dir), t2b = dot(q2 - p1, dir);
                double lo = std::max(0.0, std::min(t2a, t2b));
                double hi = std::min(len, std::max(t2a, t2b));
                if (hi - lo > kSnapTol)
                    overlaps.push_back({p1 + lo * dir, p1 + hi * dir});
                else if (hi - lo > -kSnapTol)
                    points.push_back(p1 + (0.5 * (lo + hi)) * dir);
            } else {
                Vec3 w;
                if (segment_segment_distance(p1, q1, p2, q2, &w) <= kSnapTol)
                    points.push_back(w);
            }
        }
    }
    Contact c;
    if (!overlaps.empty()) {
        // disjoint-interior convex panels touch along a single segment
        Vec3 u = overlaps[0].u, v = overlaps[0].v;
        const Vec3 dir = normalized(v - u);
        double lo = 0, hi = distance(u, v);
        for (const auto& o : overlaps)
            for (const Vec3& x : {o.u, o.v}) {
                const double t = dot(x - u, dir);
                lo = std::min(lo, t);
                hi = std::max(hi, t);
            }
        c.kind = Contact::Segment;
        c.p = u + lo * dir;
        c.q = u + hi * dir;
        return c;
    }
    if (!points.empty()) {
        for (const Vec3& p : points)
            if (!near_eq(p, points[0]))
                throw GeometryError("panels touch at several isolated points");
        c.kind = Contact::Point;
        c.p = points[0];
        return c;
    }
    return c;
}

bool same_panel(const std::array<Vec3, 4>& A, const std::array<Vec3, 4>& B, int perm[4]) {
    for (int m = 0; m < 4; ++m) {
        perm[m] = -1;
        for (int j = 0; j < 4; ++j)
            if (near_eq(A[(size_t)m], B[(size_t)j])) {
                perm[m] = j;
                break;
            }
        if (perm[m] < 0)
            return false;
    }
    return true;
}

// Sub-panel of a parent element, tracked in parent reference coordinates.
struct RefQuad {
    std::array<Vec2, 4> rc;
    std::array<Vec3, 4> pc;
};

Vec2 bilin2(const std::array<Vec2, 4>& c, double u, double v) {
    return ((1 - u) * (1 - v)) * c[0] + (u * (1 - v)) * c[1] + (u * v) * c[2] +
           ((1 - u) * v) * c[3];
}

RefQuad full_ref(const ElementGeom& e) {
    RefQuad r;
    r.rc = {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};
    r.pc = e.corners();
    return r;
}

RefQuad make_sub(const ElementGeom& e, const RefQuad& parent, double u0, double u1, double v0,
                 double v1) {
    RefQuad r;
    const Vec2 locals[4] = {{u0, v0}, {u1, v0}, {u1, v1}, {u0, v1}};
    for (int m = 0; m < 4; ++m) {
        r.rc[(size_t)m] = bilin2(parent.rc, locals[m].x, locals[m].y);
        r.pc[(size_t)m] = e.chart(r.rc[(size_t)m].x, r.rc[(size_t)m].y);
    }
    return r;
}

RefQuad reorder(const RefQuad& q, int start, bool reversed) {
    RefQuad r;
    for (int m = 0; m < 4; ++m) {
        const int idx = reversed ? (start - m + 8) % 4 : (start + m) % 4;
        r.rc[(size_t)m] = q.rc[(size_t)idx];
        r.pc[(size_t)m] = q.pc[(size_t)idx];
    }
    return r;
}

// locate a point on the local edges of a RefQuad; returns (edge, param) or false
bool locate_on_edge(const RefQuad& q, const Vec3& p, int* edge, double* param) {
    for (int i = 0; i < 4; ++i) {
        const Vec3 a = q.pc[(size_t)i], b = q.pc[(size_t)((i + 1) % 4)];
        const Vec3 d = b - a;
        const double len2 = dot(d, d);
        if (len2 <= 0)
            continue;
        const double t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
        if (distance(p, a + t * d) <= kSnapTol) {
            *edge = i;
            *param = t;
            return true;
        }
    }
    return false;
}

// split a RefQuad along the local direction of edge `edge` at params c0 < c1
std::vector<RefQuad> split_strips(const ElementGeom& e, const RefQuad& q, int edge, double c0,
                                  double c1) {
    constexpr double kParamSnap = 1e-9;
    c0 = std::clamp(c0, 0.0, 1.0);
    c1 = std::clamp(c1, 0.0, 1.0);
    if (c0 < kParamSnap)
        c0 = 0;
    if (c1 > 1 - kParamSnap)
        c1 = 1;
    // convert the edge parameter to a local u- or v-interval
    double lo, hi;
    bool along_u;
    switch (edge) {
    case 0: along_u = true;  lo = c0;     hi = c1;     break;
    case 1: along_u = false; lo = c0;     hi = c1;     break;
    case 2: along_u = true;  lo = 1 - c1; hi = 1 - c0; break;
    default: along_u = false; lo = 1 - c1; hi = 1 - c0; break;
    }
    std::vector<RefQuad> out;
    const double cuts[4] = {0.0, lo, hi, 1.0};
    for (int s = 0; s < 3; ++s) {
        const double a = cuts[s], b = cuts[s + 1];
        if (b - a < kParamSnap)
            continue;
        out.push_back(along_u ? make_sub(e, q, a, b, 0, 1) : make_sub(e, q, 0, 1, a, b));
    }
    return out;
}

struct AlignedPair {
    RefQuad a, b;
    Adjacency cls;
};

void decompose_rec(const ElementGeom& A, const ElementGeom& B, const RefQuad& ra,
                   const RefQuad& rb, std::vector<AlignedPair>& out, int depth) {
    if (depth > 4)
        throw Error("panel pair decomposition did not terminate");
    const Contact c = quad_contact(ra.pc, rb.pc);
    if (c.kind == Contact::None) {
        out.push_back({ra, rb, Adjacency::Disjoint});
        return;
    }
    if (c.kind == Contact::Point) {
        auto corner_of = [&](const RefQuad& q, int* idx) {
            for (int m = 0; m < 4; ++m)
                if (near_eq(q.pc[(size_t)m], c.p)) {
                    *idx = m;
                    return true;
                }
            return false;
        };
        int ia = 0, ib = 0;
        const bool ca = corner_of(ra, &ia), cb = corner_of(rb, &ib);
        if (ca && cb) {
            out.push_back({reorder(ra, ia, false), reorder(rb, ib, false), Adjacency::Vertex});
            return;
        }
        int edge;
        double t;
        if (!ca) {
            if (!locate_on_edge(ra, c.p, &edge, &t))
                throw GeometryError("contact point not on panel boundary");
            for (const RefQuad& sa : split_strips(A, ra, edge, t, t))
                decompose_rec(A, B, sa, rb, out, depth + 1);
            return;
        }
        if (!locate_on_edge(rb, c.p, &edge, &t))
            throw GeometryError("contact point not on panel boundary");
        for (const RefQuad& sb : split_strips(B, rb, edge, t, t))
            decompose_rec(A, B, ra, sb, out, depth + 1);
        return;
    }
    // segment contact: find the single panel edge containing both endpoints
    auto locate_span = [&](const RefQuad& q, int* edge, double* t0, double* t1) {
        for (int i = 0; i < 4; ++i) {
            const Vec3 a0 = q.pc[(size_t)i], b0 = q.pc[(size_t)((i + 1) % 4)];
            const Vec3 d = b0 - a0;
            const double len2 = dot(d, d);
            if (len2 <= 0)
                continue;
            const double tp = std::clamp(dot(c.p - a0, d) / len2, 0.0, 1.0);
            const double tq = std::clamp(dot(c.q - a0, d) / len2, 0.0, 1.0);
            if (distance(c.p, a0 + tp * d) <= kSnapTol &&
                distance(c.q, a0 + tq * d) <= kSnapTol && std::abs(tp - tq) > 1e-12) {
                *edge = i;
                *t0 = tp;
                *t1 = tq;
                return;
            }
        }
        throw GeometryError("contact segment not on one panel edge");
    };
    constexpr double kParamSnap = 1e-9;
    int ea, eb;
    double a0, a1, b0, b1;
    locate_span(ra, &ea, &a0, &a1);
    locate_span(rb, &eb, &b0, &b1);
    const bool full_a = std::min(a0, a1) < kParamSnap && std::max(a0, a1) > 1 - kParamSnap;
    const bool full_b = std::min(b0, b1) < kParamSnap && std::max(b0, b1) > 1 - kParamSnap;
    if (full_a && full_b) {
        // align both so that reference side 0->1 runs from c.p to c.q
        auto align = [&](const RefQuad& q, int edge, double t0, double t1) {
            return t0 < t1 ? reorder(q, edge, false) : reorder(q, (edge + 1) % 4, true);
        };
        out.push_back(
            {align(ra, ea, a0, a1), align(rb, eb, b0, b1), Adjacency::Edge});
        return;
    }
    if (!full_a) {
        for (const RefQuad& sa : split_strips(A, ra, ea, std::min(a0, a1), std::max(a0, a1)))
            decompose_rec(A, B, sa, rb, out, depth + 1);
        return;
    }
    for (const RefQuad& sb : split_strips(B, rb, eb, std::min(b0, b1), std::max(b0, b1)))
        decompose_rec(A, B, ra, sb, out, depth + 1);
}

std::vector<AlignedPair> decompose_pair(const ElementGeom& a, const ElementGeom& b) {
    std::vector<AlignedPair> out;
    int perm[4];
    if (same_panel(a.corners(), b.corners(), perm)) {
        RefQuad rb;
        const RefQuad unit = full_ref(b);
        for (int m = 0; m < 4; ++m) {
            rb.rc[(size_t)m] = unit.rc[(size_t)perm[m]];
            rb.pc[(size_t)m] = unit.pc[(size_t)perm[m]];
        }
        out.push_back({full_ref(a), rb, Adjacency::Coincident});
        return out;
    }
    decompose_rec(a, b, full_ref(a), full_ref(b), out, 0);
    return out;
}

} // namespace

Adjacency classify_adjacency(const ElementGeom& a, const ElementGeom& b) {
    int perm[4];
    if (same_panel(a.corners(), b.corners(), perm))
        return Adjacency::Coincident;
    const Contact c = quad_contact(a.corners(), b.corners());
    switch (c.kind) {
    case Contact::Segment: return Adjacency::Edge;
    case Contact::Point: return Adjacency::Vertex;
    default: return Adjacency::Disjoint;
    }
}

// ---------------------------------------------------------------------------
// Panel pair integration

PairBlocks integrate_panel_pair_blocks(WaveNumber k, const ElementGeom& a, const ElementGeom& b,
                                       const QuadOrders& orders) {
    PairBlocks blocks;
    std::array<std::array<double, 4>, 4> curl_static{};
    std::array<std::array<double, 4>, 4> scalar_static{};

    // static part via the singularity-removing decomposition
    for (const AlignedPair& sub : decompose_pair(a, b)) {
        const PanelPairRule& rule = panel_pair_rule(sub.cls, orders.for_class(sub.cls));
        for (const auto& pt : rule.points) {
            const Vec2 ua = bilin2(sub.a.rc, pt.s1, pt.s2);
            const Vec2 ub = bilin2(sub.b.rc, pt.t1, pt.t2);
            // area scale of the affine sub-quad reparametrization
            const Vec2 da1 = bilin2(sub.a.rc, 1, pt.s2) - bilin2(sub.a.rc, 0, pt.s2);
            const Vec2 da2 = bilin2(sub.a.rc, pt.s1, 1) - bilin2(sub.a.rc, pt.s1, 0);
            const Vec2 db1 = bilin2(sub.b.rc, 1, pt.t2) - bilin2(sub.b.rc, 0, pt.t2);
            const Vec2 db2 = bilin2(sub.b.rc, pt.t1, 1) - bilin2(sub.b.rc, pt.t1, 0);
            const double ref_ja = std::abs(cross2(da1, da2));
            const double ref_jb = std::abs(cross2(db1, db2));
            const Vec3 x = a.chart(ua.x, ua.y);
            const Vec3 y = b.chart(ub.x, ub.y);
            const double r = distance(x, y);
            if (r <= 0)
                continue; // measure-zero corner of a transformed domain
            const double wt = pt.w * ref_ja * ref_jb * a.jacobian(ua.x, ua.y) *
                              b.jacobian(ub.x, ub.y) * (kInv4Pi / r);
            const auto na = ElementGeom::shapes(ua.x, ua.y);
            const auto nb = ElementGeom::shapes(ub.x, ub.y);
            Vec3 ca[4], cb[4];
            for (int m = 0; m < 4; ++m) {
                ca[m] = a.shape_curl_at(m, ua.x, ua.y);
                cb[m] = b.shape_curl_at(m, ub.x, ub.y);
            }
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    curl_static[(size_t)i][(size_t)j] += wt * dot(ca[i], cb[j]);
                    scalar_static[(size_t)i][(size_t)j] += wt * na[(size_t)i] * nb[(size_t)j];
                }
        }
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            blocks.curl[(size_t)i][(size_t)j] = curl_static[(size_t)i][(size_t)j];
            blocks.scalar[(size_t)i][(size_t)j] = scalar_static[(size_t)i][(size_t)j];
        }

    // smooth remainder over the original pair
    if (k.value != 0.0) {
        const GaussRule1D& g = gauss_rule(orders.disjoint);
        const int q = g.order;
        for (int i = 0; i < q; ++i)
            for (int j = 0; j < q; ++j) {
                const double s1 = g.points[(size_t)i], s2 = g.points[(size_t)j];
                const Vec3 x = a.chart(s1, s2);
                const double ja = a.jacobian(s1, s2) * g.weights[(size_t)i] * g.weights[(size_t)j];
                const auto na = ElementGeom::shapes(s1, s2);
                Vec3 ca[4];
                for (int m = 0; m < 4; ++m)
                    ca[m] = a.shape_curl_at(m, s1, s2);
                for (int m = 0; m < q; ++m)
                    for (int n = 0; n < q; ++n) {
                        const double t1 = g.points[(size_t)m], t2 = g.points[(size_t)n];
                        const Vec3 y = b.chart(t1, t2);
                        const Complex rem =
                            kernel_remainder(k, distance(x, y)) * (ja * b.jacobian(t1, t2) *
                                                                   g.weights[(size_t)m] *
                                                                   g.weights[(size_t)n]);
                        const auto nb = ElementGeom::shapes(t1, t2);
                        Vec3 cb[4];
                        for (int mm = 0; mm < 4; ++mm)
                            cb[mm] = b.shape_curl_at(mm, t1, t2);
                        for (int ii = 0; ii < 4; ++ii)
                            for (int jj = 0; jj < 4; ++jj) {
                                blocks.curl[(size_t)ii][(size_t)jj] += rem * dot(ca[ii], cb[jj]);
                                blocks.scalar[(size_t)ii][(size_t)jj] +=
                                    rem * na[(size_t)ii] * nb[(size_t)jj];
                            }
                    }
            }
    }
    return blocks;
}

Complex panel_pair_integrate(WaveNumber k, const ElementGeom& a, const ElementGeom& b,
                             const std::array<double, 4>& density_x,
                             const std::array<double, 4>& density_y, int q) {
    QuadOrders orders{q, q, q, q};
    const PairBlocks blocks = integrate_panel_pair_blocks(k, a, b, orders);
    Complex sum = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            sum += density_x[(size_t)i] * density_y[(size_t)j] * blocks.scalar[(size_t)i][(size_t)j];
    return sum;
}

// ---------------------------------------------------------------------------
// Segment-panel integration

namespace {

// graded toward both piece endpoints; used when the piece touches the panel
const double kGradedBreaks[] = {0.0,       1.0 / 512, 1.0 / 64, 1.0 / 8, 3.0 / 8,
                                5.0 / 8,   7.0 / 8,   63.0 / 64, 511.0 / 512, 1.0};

Vec2 nearest_ref_point(const ElementGeom& panel, const Vec3& x) {
    // in-plane contravariant projection, then clamp; exact for parallelograms
    const Vec3 n = panel.unit_normal();
    const Vec3 e1 = panel.corner(1) - panel.corner(0);
    const Vec3 e2 = panel.corner(3) - panel.corner(0);
    const double d = dot(cross(e1, e2), n);
    const Vec3 r = x - panel.corner(0);
    double u = dot(r, cross(e2, n)) / d;
    double v = dot(r, cross(n, e1)) / d;
    if (!panel.parallelogram()) {
        for (int it = 0; it < 8; ++it) {
            const Vec3 res = panel.chart(u, v) - x;
            const Vec3 au = panel.chart_du(u, v), av = panel.chart_dv(u, v);
            const double a11 = dot(au, au), a12 = dot(au, av), a22 = dot(av, av);
            const double r1 = dot(res, au), r2 = dot(res, av);
            const double det = a11 * a22 - a12 * a12;
            u -= (a22 * r1 - a12 * r2) / det;
            v -= (a11 * r2 - a12 * r1) / det;
        }
    }
    return {std::clamp(u, 0.0, 1.0), std::clamp(v, 0.0, 1.0)};
}

// int_panel G(x,y) (t . curl N_m(y)) dS_y for all four shapes
std::array<Complex, 4> panel_potential(WaveNumber k, const Vec3& x, const Vec3& t,
                                       const ElementGeom& panel, bool near,
                                       const QuadOrders& orders) {
    std::array<Complex, 4> out{};
    std::array<double, 4> static_part{};
    if (near) {
        const Vec2 p = nearest_ref_point(panel, x);
        const Vec2 corners[4] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        const GaussRule1D& g = gauss_rule(orders.edge);
        for (int tri = 0; tri < 4; ++tri) {
            const Vec2 ca = corners[tri] - p;
            const Vec2 cb = corners[(tri + 1) % 4] - p;
            const double twice_area = cross2(ca, cb);
            if (std::abs(twice_area) < 1e-14)
                continue;
            for (size_t ia = 0; ia < g.points.size(); ++ia)
                for (size_t ib = 0; ib < g.points.size(); ++ib) {
                    const double al = g.points[ia], be = g.points[ib];
                    const Vec2 u = p + al * ((1 - be) * ca + be * cb);
                    const Vec3 y = panel.chart(u.x, u.y);
                    const double r = distance(x, y);
                    if (r <= 0)
                        continue;
                    const double wt = g.weights[ia] * g.weights[ib] * al *
                                      std::abs(twice_area) * panel.jacobian(u.x, u.y) *
                                      (kInv4Pi / r);
                    for (int m = 0; m < 4; ++m)
                        static_part[(size_t)m] += wt * dot(t, panel.shape_curl_at(m, u.x, u.y));
                }
        }
        for (int m = 0; m < 4; ++m)
            out[(size_t)m] = static_part[(size_t)m];
        if (k.value != 0.0) {
            const GaussRule1D& gt = gauss_rule(orders.disjoint);
            for (size_t i = 0; i < gt.points.size(); ++i)
                for (size_t j = 0; j < gt.points.size(); ++j) {
                    const double u = gt.points[i], v = gt.points[j];
                    const Vec3 y = panel.chart(u, v);
                    const Complex rem = kernel_remainder(k, distance(x, y)) *
                                        (gt.weights[i] * gt.weights[j] * panel.jacobian(u, v));
                    for (int m = 0; m < 4; ++m)
                        out[(size_t)m] += rem * dot(t, panel.shape_curl_at(m, u, v));
                }
        }
        return out;
    }
    const GaussRule1D& g = gauss_rule(orders.disjoint);
    for (size_t i = 0; i < g.points.size(); ++i)
        for (size_t j = 0; j < g.points.size(); ++j) {
            const double u = g.points[i], v = g.points[j];
            const Vec3 y = panel.chart(u, v);
            const Complex ker = single_layer_kernel(k, x, y) *
                                (g.weights[i] * g.weights[j] * panel.jacobian(u, v));
            for (int m = 0; m < 4; ++m)
                out[(size_t)m] += ker * dot(t, panel.shape_curl_at(m, u, v));
        }
    return out;
}

} // namespace

SegmentPanelBlock integrate_segment_panel_block(WaveNumber k, const Vec3& a, const Vec3& b,
                                                const ElementGeom& panel,
                                                const QuadOrders& orders) {
    SegmentPanelBlock block;
    const double len = distance(a, b);
    if (len <= 0)
        throw Error("degenerate skeleton piece");
    const Vec3 t = (1.0 / len) * (b - a);
    const double d = std::min({distance_point_to_element(a, panel),
                               distance_point_to_element(0.5 * (a + b), panel),
                               distance_point_to_element(b, panel)});
    const bool near = d < 0.8 * panel.diameter();

    const GaussRule1D& g = gauss_rule(orders.disjoint);
    const size_t nseg = near ? std::size(kGradedBreaks) - 1 : 1;
    for (size_t s = 0; s < nseg; ++s) {
        const double lo = near ? kGradedBreaks[s] : 0.0;
        const double hi = near ? kGradedBreaks[s + 1] : 1.0;
        for (size_t i = 0; i < g.points.size(); ++i) {
            const double sigma = lo + (hi - lo) * g.points[i];
            const Vec3 x = a + (sigma * len) * t;
            const double w = g.weights[i] * (hi - lo) * len;
            const auto pot = panel_potential(k, x, t, panel, near, orders);
            for (int m = 0; m < 4; ++m) {
                block.val[0][(size_t)m] += (w * (1.0 - sigma)) * pot[(size_t)m];
                block.val[1][(size_t)m] += (w * sigma) * pot[(size_t)m];
            }
        }
    }
    return block;
}

Complex segment_panel_integrate(WaveNumber k, const Vec3& a, const Vec3& b,
                                const std::array<double, 2>& segment_density,
                                const ElementGeom& panel,
                                const std::array<double, 4>& panel_density,
                                const QuadOrders& orders) {
    const SegmentPanelBlock block = integrate_segment_panel_block(k, a, b, panel, orders);
    Complex sum = 0;
    for (int l = 0; l < 2; ++l)
        for (int m = 0; m < 4; ++m)
            sum += segment_density[(size_t)l] * panel_density[(size_t)m] *
                   block.val[(size_t)l][(size_t)m];
    return sum;
}

} // namespace screenbem
