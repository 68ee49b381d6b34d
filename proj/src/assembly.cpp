#include "screenbem/assembly.hpp"

#include <cstring>
#include <unordered_map>

#include "parallel.hpp"

namespace screenbem {

NitscheParams::NitscheParams(double nu0_, double epsilon_) : nu0(nu0_), epsilon(epsilon_) {
    if (!(nu0 > 0))
        throw ConfigError("penalty nu0 must be positive");
    if (epsilon < 0)
        throw ConfigError("penalty exponent epsilon must be nonnegative");
}

double NitscheParams::value(double h) const { return nu0 * std::pow(h, -epsilon); }

namespace {

// Bit-exact geometry key for memoizing pair integrals. Two pairs get the same
// cached value only if their corner offsets agree to the last bit.
template <size_t N> struct GeomKey {
    std::array<double, N> v;

    bool operator==(const GeomKey& o) const {
        return std::memcmp(v.data(), o.v.data(), sizeof v) == 0;
    }
};

template <size_t N> struct GeomKeyHash {
    size_t operator()(const GeomKey<N>& k) const {
        uint64_t h = 1469598103934665603ull;
        for (double d : k.v) {
            uint64_t bits;
            std::memcpy(&bits, &d, sizeof bits);
            h = (h ^ bits) * 1099511628211ull;
        }
        return static_cast<size_t>(h);
    }
};

inline double norm_zero(double x) { return x == 0.0 ? 0.0 : x; }

inline void push_vec(double* out, const Vec3& v) {
    out[0] = norm_zero(v.x);
    out[1] = norm_zero(v.y);
    out[2] = norm_zero(v.z);
}

using PairKey = GeomKey<21>;
using SegKey = GeomKey<15>;

PairKey make_pair_key(const ElementGeom& a, const ElementGeom& b) {
    PairKey k;
    const Vec3 o = a.corner(0);
    for (int m = 1; m < 4; ++m)
        push_vec(&k.v[static_cast<size_t>(3 * (m - 1))], a.corner(m) - o);
    for (int m = 0; m < 4; ++m)
        push_vec(&k.v[static_cast<size_t>(9 + 3 * m)], b.corner(m) - o);
    return k;
}

SegKey make_seg_key(const Vec3& a, const Vec3& b, const ElementGeom& panel) {
    SegKey k;
    push_vec(&k.v[0], b - a);
    for (int m = 0; m < 4; ++m)
        push_vec(&k.v[static_cast<size_t>(3 + 3 * m)], panel.corner(m) - a);
    return k;
}

struct ElementData {
    ElementGeom geom;
    std::array<int, 4> dofs;
    int subdomain;
};

struct PieceData {
    Vec3 a, b;
    // jump basis restricted to the piece: dof plus endpoint values (sign folded in)
    struct Entry {
        int dof;
        double v0, v1;
    };
    std::vector<Entry> entries;
    double length;
};

} // namespace

struct GalerkinAssembler::Impl {
    const Screen& screen;
    const DofSystem& dofs;
    WaveNumber k;
    QuadOrders orders;
    int threads;

    std::vector<ElementData> elements;
    std::vector<PieceData> pieces;

    // memoized pair integrals for this wave number
    std::vector<PairBlocks> pair_values;
    std::vector<int32_t> pair_index; // per (eA, eB), index into pair_values
    bool pairs_ready = false;

    Impl(const Screen& s, const DofSystem& d, WaveNumber k_, const QuadOrders& o, int t)
        : screen(s), dofs(d), k(k_), orders(o), threads(resolve_threads(t)) {
        for (size_t j = 0; j < s.meshes.size(); ++j) {
            const auto& mesh = s.meshes[j];
            for (const auto& el : mesh.elements) {
                ElementData e{ElementGeom({mesh.nodes[(size_t)el[0]], mesh.nodes[(size_t)el[1]],
                                           mesh.nodes[(size_t)el[2]], mesh.nodes[(size_t)el[3]]}),
                              {d.dof((int)j, el[0]), d.dof((int)j, el[1]), d.dof((int)j, el[2]),
                               d.dof((int)j, el[3])},
                              (int)j};
                elements.push_back(std::move(e));
            }
        }
        build_pieces();
    }

    void build_pieces() {
        for (const auto& seg : screen.skeleton.segments) {
            const std::vector<double> breaks = merged_breakpoints(seg);
            for (size_t p = 0; p + 1 < breaks.size(); ++p) {
                PieceData piece;
                const double s0 = breaks[p], s1 = breaks[p + 1];
                piece.a = seg.a + s0 * seg.tangent;
                piece.b = seg.a + s1 * seg.tangent;
                piece.length = s1 - s0;
                auto add_side = [&](const SkeletonSide& side, double sign) {
                    const auto& bk = side.breaks;
                    size_t hi = static_cast<size_t>(
                        std::upper_bound(bk.begin() + 1, bk.end() - 1, 0.5 * (s0 + s1)) -
                        bk.begin());
                    const size_t lo = hi - 1;
                    const double den = bk[hi] - bk[lo];
                    const int d0 = dofs.dof(side.subdomain, side.nodes[lo]);
                    const int d1 = dofs.dof(side.subdomain, side.nodes[hi]);
                    if (d0 >= 0)
                        piece.entries.push_back(
                            {d0, sign * (bk[hi] - s0) / den, sign * (bk[hi] - s1) / den});
                    if (d1 >= 0)
                        piece.entries.push_back(
                            {d1, sign * (s0 - bk[lo]) / den, sign * (s1 - bk[lo]) / den});
                };
                add_side(seg.left, 1.0);
                if (seg.right)
                    add_side(*seg.right, -1.0);
                pieces.push_back(std::move(piece));
            }
        }
    }

    void ensure_pair_blocks() {
        if (pairs_ready)
            return;
        const size_t ne = elements.size();
        pair_index.assign(ne * ne, -1);
        std::unordered_map<PairKey, int32_t, GeomKeyHash<21>> index;
        std::vector<std::pair<int32_t, int32_t>> representative;
        for (size_t ia = 0; ia < ne; ++ia)
            for (size_t ib = 0; ib < ne; ++ib) {
                const PairKey key = make_pair_key(elements[ia].geom, elements[ib].geom);
                auto [it, inserted] =
                    index.emplace(key, static_cast<int32_t>(representative.size()));
                if (inserted)
                    representative.push_back({(int32_t)ia, (int32_t)ib});
                pair_index[ia * ne + ib] = it->second;
            }
        pair_values.resize(representative.size());
        parallel_chunks(representative.size(), threads, [&](size_t begin, size_t end) {
            for (size_t i = begin; i < end; ++i) {
                const auto [ia, ib] = representative[i];
                pair_values[i] = integrate_panel_pair_blocks(
                    k, elements[(size_t)ia].geom, elements[(size_t)ib].geom, orders);
            }
        });
        pairs_ready = true;
    }

    // target(i, j) += c_curl * curl[a][b] + c_scalar * (n_i . n_j) scalar[a][b]
    void scatter_pairs(Eigen::MatrixXcd& target, double c_curl, double c_scalar) {
        ensure_pair_blocks();
        const size_t ne = elements.size();
        const Vec3 n0 = screen.geometry.subdomains.front().normal;
        (void)n0; // normals agree on a connected screen; the dot is per pair anyway
        for (size_t ia = 0; ia < ne; ++ia) {
            const auto& ea = elements[ia];
            for (size_t ib = 0; ib < ne; ++ib) {
                const auto& eb = elements[ib];
                const PairBlocks& blk = pair_values[(size_t)pair_index[ia * ne + ib]];
                const double nn =
                    c_scalar == 0.0
                        ? 0.0
                        : c_scalar * dot(screen.geometry.subdomains[(size_t)ea.subdomain].normal,
                                         screen.geometry.subdomains[(size_t)eb.subdomain].normal);
                for (int bq = 0; bq < 4; ++bq) {
                    const int col = eb.dofs[(size_t)bq];
                    if (col < 0)
                        continue;
                    for (int aq = 0; aq < 4; ++aq) {
                        const int row = ea.dofs[(size_t)aq];
                        if (row < 0)
                            continue;
                        Complex add = 0;
                        if (c_curl != 0.0)
                            add += c_curl * blk.curl[(size_t)aq][(size_t)bq];
                        if (c_scalar != 0.0)
                            add += nn * blk.scalar[(size_t)aq][(size_t)bq];
                        target(row, col) += add;
                    }
                }
            }
        }
    }

    // coupling blocks C1/C2 via memoized segment-panel integrals
    void scatter_coupling(Eigen::MatrixXcd& c1, Eigen::MatrixXcd* c2) {
        const size_t np = pieces.size(), ne = elements.size();
        std::vector<int32_t> seg_index(np * ne, -1);
        std::unordered_map<SegKey, int32_t, GeomKeyHash<15>> index;
        std::vector<std::pair<int32_t, int32_t>> representative;
        for (size_t ip = 0; ip < np; ++ip)
            for (size_t ie = 0; ie < ne; ++ie) {
                const SegKey key = make_seg_key(pieces[ip].a, pieces[ip].b, elements[ie].geom);
                auto [it, inserted] =
                    index.emplace(key, static_cast<int32_t>(representative.size()));
                if (inserted)
                    representative.push_back({(int32_t)ip, (int32_t)ie});
                seg_index[ip * ne + ie] = it->second;
            }
        std::vector<SegmentPanelBlock> values(representative.size());
        parallel_chunks(representative.size(), threads, [&](size_t begin, size_t end) {
            for (size_t i = begin; i < end; ++i) {
                const auto [ip, ie] = representative[i];
                values[i] = integrate_segment_panel_block(
                    k, pieces[(size_t)ip].a, pieces[(size_t)ip].b, elements[(size_t)ie].geom,
                    orders);
            }
        });
        for (size_t ip = 0; ip < np; ++ip) {
            const auto& piece = pieces[ip];
            for (size_t ie = 0; ie < ne; ++ie) {
                const auto& panel = elements[ie];
                const SegmentPanelBlock& blk = values[(size_t)seg_index[ip * ne + ie]];
                for (const auto& entry : piece.entries) {
                    for (int m = 0; m < 4; ++m) {
                        const int pd = panel.dofs[(size_t)m];
                        if (pd < 0)
                            continue;
                        const Complex val =
                            entry.v0 * blk.val[0][(size_t)m] + entry.v1 * blk.val[1][(size_t)m];
                        c1(entry.dof, pd) += val;
                        if (c2)
                            (*c2)(pd, entry.dof) += val;
                    }
                }
            }
        }
    }

    void scatter_gram(Eigen::MatrixXcd& g) const {
        for (const auto& piece : pieces)
            for (const auto& e1 : piece.entries)
                for (const auto& e2 : piece.entries)
                    // exact integral of the product of two linears
                    g(e1.dof, e2.dof) += piece.length *
                                         (e1.v0 * e2.v0 / 3.0 + (e1.v0 * e2.v1 + e1.v1 * e2.v0) / 6.0 +
                                          e1.v1 * e2.v1 / 3.0);
    }

    Eigen::VectorXcd assemble_rhs(const std::function<Complex(const Vec3&)>& f) const {
        Eigen::VectorXcd b = Eigen::VectorXcd::Zero(dofs.total);
        const GaussRule1D& g = gauss_rule(4);
        for (const auto& e : elements)
            for (size_t i = 0; i < g.points.size(); ++i)
                for (size_t j = 0; j < g.points.size(); ++j) {
                    const double u = g.points[i], v = g.points[j];
                    const Complex wf = f(e.geom.chart(u, v)) *
                                       (g.weights[i] * g.weights[j] * e.geom.jacobian(u, v));
                    const auto n = ElementGeom::shapes(u, v);
                    for (int m = 0; m < 4; ++m)
                        if (e.dofs[(size_t)m] >= 0)
                            b[e.dofs[(size_t)m]] += wf * n[(size_t)m];
                }
        return b;
    }
};

GalerkinAssembler::GalerkinAssembler(const Screen& screen, const DofSystem& dofs, WaveNumber k,
                                     const QuadOrders& orders, int threads)
    : impl_(std::make_unique<Impl>(screen, dofs, k, orders, threads)) {}

GalerkinAssembler::~GalerkinAssembler() = default;

Eigen::MatrixXcd GalerkinAssembler::curl_curl_block() {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(impl_->dofs.total, impl_->dofs.total);
    impl_->scatter_pairs(m, 1.0, 0.0);
    return m;
}

Eigen::MatrixXcd GalerkinAssembler::normal_block() {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(impl_->dofs.total, impl_->dofs.total);
    const double k2 = impl_->k.value * impl_->k.value;
    if (k2 != 0.0)
        impl_->scatter_pairs(m, 0.0, -k2);
    return m;
}

std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> GalerkinAssembler::coupling_blocks() {
    Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(impl_->dofs.total, impl_->dofs.total);
    Eigen::MatrixXcd c2 = Eigen::MatrixXcd::Zero(impl_->dofs.total, impl_->dofs.total);
    impl_->scatter_coupling(c1, &c2);
    return {std::move(c1), std::move(c2)};
}

Eigen::MatrixXcd GalerkinAssembler::jump_gram() {
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(impl_->dofs.total, impl_->dofs.total);
    impl_->scatter_gram(g);
    return g;
}

Eigen::VectorXcd GalerkinAssembler::rhs(const std::function<Complex(const Vec3&)>& f) const {
    return impl_->assemble_rhs(f);
}

AssembledSystem GalerkinAssembler::assemble_full(const std::optional<NitscheParams>& nitsche,
                                                 const std::function<Complex(const Vec3&)>& f) {
    AssembledSystem sys;
    sys.kind = impl_->dofs.kind;
    sys.h = mesh_stats(impl_->screen.meshes).first;
    const double k2 = impl_->k.value * impl_->k.value;
    sys.A = Eigen::MatrixXcd::Zero(impl_->dofs.total, impl_->dofs.total);
    impl_->scatter_pairs(sys.A, 1.0, k2 == 0.0 ? 0.0 : -k2);
    if (impl_->dofs.kind == SpaceKind::Nonconforming) {
        if (!nitsche)
            throw ConfigError("the nonconforming scheme needs penalty parameters");
        sys.nu = nitsche->value(sys.h);
        sys.energy_block = sys.A;
        Eigen::MatrixXcd c2 = Eigen::MatrixXcd::Zero(impl_->dofs.total, impl_->dofs.total);
        impl_->scatter_coupling(sys.A, &c2);
        sys.A += c2;
        Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(impl_->dofs.total, impl_->dofs.total);
        impl_->scatter_gram(gram);
        sys.A += sys.nu * gram;
    }
    sys.b = impl_->assemble_rhs(f);
    return sys;
}

AssembledSystem assemble_full(const Screen& screen, const DofSystem& dofs, WaveNumber k,
                              const std::optional<NitscheParams>& nitsche,
                              const QuadOrders& orders, int threads) {
    GalerkinAssembler assembler(screen, dofs, k, orders, threads);
    return assembler.assemble_full(nitsche, [](const Vec3&) { return Complex(1.0); });
}

void write_matrix_dump(std::ostream& out, const Eigen::MatrixXcd& m) {
    out.write("SBEMMAT1", 8);
    const uint64_t rows = static_cast<uint64_t>(m.rows());
    const uint64_t cols = static_cast<uint64_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    std::vector<float> row(2 * static_cast<size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row[2 * static_cast<size_t>(j)] = static_cast<float>(m(i, j).real());
            row[2 * static_cast<size_t>(j) + 1] = static_cast<float>(m(i, j).imag());
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
}

} // namespace screenbem
