#pragma once

#include "diraclab/types.hpp"

#include <array>

namespace diraclab::spinor {

//******************************************************************************
// The Dirac basis used throughout: beta = diag(1,1,-1,-1), alpha_j built from
// the Pauli matrices, the antilinear structure gamma defining the
// Lochak-Majorana subspace E = {z : gamma z = conj(z)}, alpha_5 for the
// chiral invariant, and the spin matrices S_j = -(i/2) alpha_k alpha_l.
struct DiracConstants {
  std::array<SpinorMatrix, 3> alpha;
  SpinorMatrix beta;
  SpinorMatrix gamma;
  SpinorMatrix alpha5;
  std::array<SpinorMatrix, 3> S;
  SpinorMatrix identity;
};

// Entries are exact integers or +-i; built once.
const DiracConstants &dirac_constants();

// <a,b> = sum a_i conj(b_i), linear in the first slot.
cplx inner(const Spinor &a, const Spinor &b);
// (a, conj(b)) = sum a_i b_i, the bilinear pairing of the conserved gamma-charge.
cplx bilinear(const Spinor &a, const Spinor &b);

// gamma * conj(z): the antilinear involution whose fixed points form E.
Spinor lm_conjugate(const Spinor &z);

bool in_E(const Spinor &z, double tol = 0.0);

// rho(z) = |<beta z, z>|^2 + |<alpha5 z, z>|^2; vanishes iff exp(i theta) z in E.
double chiral_invariant(const Spinor &z);

struct LMDecomposition {
  Spinor parallel; // in E
  Spinor defect;   // in the real-orthogonal complement of E
};

// Real-orthogonal projection Q(z) = (z + gamma conj(z)) / 2 onto E, together
// with the remainder z - Q(z).
LMDecomposition project_E(const Spinor &z);

// The componentwise map P(z) = (z1+z4, z2-z3, conj(z3)-conj(z2), conj(z1)+conj(z4)).
// Its range lies in E but it is not idempotent; kept only for comparison with
// project_E.
Spinor naive_P(const Spinor &z);

// Parametric element of the class V:
//   [ a      z      w     0 ]
//   [ zb     b      0     w ]
//   [ wb     0     -b     z ]
//   [ 0      wb     zb   -a ]
SpinorMatrix make_class_V(double a, double b, cplx z, cplx w);

// M = M^* and conj(M) gamma = -gamma M, both in max-entry norm within tol.
bool in_class_V(const SpinorMatrix &M, double tol);

bool is_hermitian(const SpinorMatrix &M, double tol);

// Largest |entry|.
double max_entry(const SpinorMatrix &M);

} // namespace diraclab::spinor
