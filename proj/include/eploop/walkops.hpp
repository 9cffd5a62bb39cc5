// walkops.hpp
// Single-step quantum-walk operators for one photon (2x2 coin space) and the
// two-photon step operator built from them.
//
// One step for the walking photon is
//     M = psi(phi) R(theta1/2) G S R(theta2) G^-1 S R(theta1/2)
// and the two-photon step is U = C (I x M) C^-1, whose eigenstates are close
// to the four Bell states at the loop start point.

#pragma once

#include <numbers>

#include "eploop/smallmat.hpp"

namespace eploop {

// The five knobs of a single walk step. Angles in radians.
struct WalkParams {
    double theta1 = 0.0;
    double theta2 = std::numbers::pi / 16.0;
    double phi = 0.0;
    double gamma = 0.2;
    double k = 0.0;

    bool operator==(const WalkParams&) const = default;
};

// Start point of both standard loops, (phi, theta1) = (0, -0.6), with the
// default theta2, gamma and k.
WalkParams loop_start_params();

// Pauli-type decomposition of M:
//   without psi:  [[d0 + i dz, dx + dy], [dx - dy, d0 - i dz]]
//   with psi:     [[D0 + i DZ, DX + DY], [DX - DY, D0 - i DZ]]
struct DCoefficients {
    double d0 = 0.0, dx = 0.0, dy = 0.0, dz = 0.0;
    Complex D0, DX, DY, DZ;
};

CMat2 rotation(double theta);
CMat2 phase_shift(double k);
CMat2 gain_loss(double gamma);
CMat2 gain_loss_inverse(double gamma);
CMat2 symmetry_break(double phi);

DCoefficients d_coefficients(const WalkParams& p);

// M as the literal product of its seven factors.
CMat2 walk_operator_product(const WalkParams& p);
// M assembled from the D coefficients.
CMat2 walk_operator_closed(const WalkParams& p);

// I x M.
CMat4 walk_operator_pair(const WalkParams& p);

// Closed-form two-photon step operator:
//   [[ D0,        0,        DZ,        iDX + iDY ],
//    [ 0,         D0,       iDX - iDY, -DZ       ],
//    [ -DZ,       -iDX-iDY, D0,        0         ],
//    [ iDY - iDX, DZ,       0,         D0        ]]
// This is exactly C (I x M) C^-1 for every parameter point, including those
// with DZ != 0.
CMat4 u_step(const WalkParams& p);

// The eigenvalues of M (and of U): eta_pm = D0 +- sqrt(D0^2 - 1), principal root.
// sqrt(D0^2 - 1) with the principal branch. Signed zeros in the imaginary
// part are cleared first so that real D0 always lands on the upper side of
// the branch cut.
Complex coalescence_root(Complex D0);

struct EtaPair {
    Complex minus;
    Complex plus;
};
EtaPair eta_pair(const WalkParams& p);

struct ControlOperator {
    CMat4 c;
    CMat4 c_inv;
};

// C = A B^-1. A holds the right eigenstates of U ordered (eta-, eta-, eta+,
// eta+) as (upper-block, lower-block, upper-block, lower-block). B holds
// |0>x|m->, |1>x|m->, |0>x|m+>, |1>x|m+> where m(eta) = ((DX+DY)/(eta-D0-iDZ), 1)/sqrt2;
// the |1> columns carry a common positive scale chosen so |det C| = 1.
// Throws TooCloseToEP when |eta -+ D0| <= 1e-6.
ControlOperator control_operator(const WalkParams& p);

}  // namespace eploop
