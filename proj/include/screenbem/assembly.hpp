#pragma once

#include <functional>
#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "screenbem/quadrature.hpp"
#include "screenbem/spaces.hpp"

namespace screenbem {

/// Interface penalty. A constant nu is the policy with epsilon = 0; otherwise
/// nu = nu0 * h^{-epsilon} is recomputed from the mesh width of each level.
struct NitscheParams {
    double nu0 = 0;
    double epsilon = 0;

    NitscheParams(double nu0_, double epsilon_ = 0);
    double value(double h) const;
};

struct AssembledSystem {
    Eigen::MatrixXcd A;
    Eigen::VectorXcd b;
    /// curl-curl + normal terms only (drives the energy surrogate). Empty for
    /// the conforming composition, where A itself is that form.
    Eigen::MatrixXcd energy_block;
    double nu = 0;
    double h = 0;
    SpaceKind kind = SpaceKind::Nonconforming;

    const Eigen::MatrixXcd& energy() const { return energy_block.size() ? energy_block : A; }
};

/// Assembles the blocks of the sesquilinear form. Matrix entries follow the
/// convention M[i][j] = form(phi_j, phi_i); with real nodal bases the trial
/// function lives in the y-slot of the kernel integrals.
///
/// Identical element pairs in relative position produce identical integrals;
/// the assembler memoizes pair integrals under bit-exact geometric keys, so
/// uniform meshes assemble in near-linear time. Unique integrals are computed
/// in parallel, scattering is serial: entries do not depend on the schedule.
class GalerkinAssembler {
public:
    GalerkinAssembler(const Screen& screen, const DofSystem& dofs, WaveNumber k,
                      const QuadOrders& orders = {}, int threads = 0);
    ~GalerkinAssembler();

    /// <V_k curl phi_j, curl phi_i> over all element pairs of all subdomains.
    Eigen::MatrixXcd curl_curl_block();
    /// -k^2 <V_k n phi_j, n phi_i>.
    Eigen::MatrixXcd normal_block();
    /// C1[i][j] = <T_k phi_j, [phi_i]>_gamma and C2[i][j] = <[phi_j], T_{-k} phi_i>_gamma.
    std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> coupling_blocks();
    /// Gram matrix of jump traces in L2(gamma); the penalty block is nu times it.
    Eigen::MatrixXcd jump_gram();
    Eigen::VectorXcd rhs(const std::function<Complex(const Vec3&)>& f) const;

    /// curl-curl + normal (+ coupling + penalty for the nonconforming space),
    /// load vector from f.
    AssembledSystem assemble_full(const std::optional<NitscheParams>& nitsche,
                                  const std::function<Complex(const Vec3&)>& f);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-call assembly of the full system with f = 1.
AssembledSystem assemble_full(const Screen& screen, const DofSystem& dofs, WaveNumber k,
                              const std::optional<NitscheParams>& nitsche,
                              const QuadOrders& orders = {}, int threads = 0);

/// Binary dump of a complex matrix: 8-byte magic "SBEMMAT1", two little-endian
/// uint64 dimensions, then row-major float32 (re, im) pairs.
void write_matrix_dump(std::ostream& out, const Eigen::MatrixXcd& m);

} // namespace screenbem
