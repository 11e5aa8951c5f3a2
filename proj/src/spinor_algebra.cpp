#include "diraclab/spinor_algebra.hpp"

#include <cmath>
#include <numeric>

namespace diraclab::spinor {

namespace {

DiracConstants build_constants() {
  DiracConstants d;
  const cplx o{1.0, 0.0};
  const cplx z{0.0, 0.0};

  d.identity = SpinorMatrix::Identity();

  d.beta << o, z, z, z, //
      z, o, z, z,       //
      z, z, -o, z,      //
      z, z, z, -o;

  d.alpha[0] << z, z, z, o, //
      z, z, o, z,           //
      z, o, z, z,           //
      o, z, z, z;

  d.alpha[1] << z, z, z, -I, //
      z, z, I, z,            //
      z, -I, z, z,           //
      I, z, z, z;

  d.alpha[2] << z, z, o, z, //
      z, z, z, -o,          //
      o, z, z, z,           //
      z, -o, z, z;

  d.gamma << z, z, z, o, //
      z, z, -o, z,       //
      z, -o, z, z,       //
      o, z, z, z;

  d.alpha5 << z, z, -I, z, //
      z, z, z, -I,         //
      I, z, z, z,          //
      z, I, z, z;

  // S_j = -(i/2) alpha_k alpha_l, (j,k,l) cyclic
  for (int j = 0; j < 3; ++j) {
    const int k = (j + 1) % 3;
    const int l = (j + 2) % 3;
    d.S[j] = -0.5 * I * (d.alpha[k] * d.alpha[l]);
  }
  return d;
}

} // namespace

const DiracConstants &dirac_constants() {
  static const DiracConstants constants = build_constants();
  return constants;
}

cplx inner(const Spinor &a, const Spinor &b) {
  // Eigen's dot() conjugates the first argument
  return b.dot(a);
}

cplx bilinear(const Spinor &a, const Spinor &b) {
  return (a.array() * b.array()).sum();
}

Spinor lm_conjugate(const Spinor &z) {
  // gamma is a signed anti-diagonal permutation
  return Spinor{std::conj(z(3)), -std::conj(z(2)), -std::conj(z(1)),
                std::conj(z(0))};
}

bool in_E(const Spinor &z, double tol) {
  return (lm_conjugate(z) - z).cwiseAbs().maxCoeff() <= tol;
}

double chiral_invariant(const Spinor &z) {
  const auto &d = dirac_constants();
  const cplx b = inner(d.beta * z, z);
  const cplx a5 = inner(d.alpha5 * z, z);
  return std::norm(b) + std::norm(a5);
}

LMDecomposition project_E(const Spinor &z) {
  LMDecomposition out;
  out.parallel = 0.5 * (z + lm_conjugate(z));
  out.defect = z - out.parallel;
  return out;
}

Spinor naive_P(const Spinor &z) {
  return Spinor{z(0) + z(3), z(1) - z(2), std::conj(z(2)) - std::conj(z(1)),
                std::conj(z(0)) + std::conj(z(3))};
}

SpinorMatrix make_class_V(double a, double b, cplx z, cplx w) {
  const cplx zero{0.0, 0.0};
  SpinorMatrix M;
  M << a, z, w, zero,                          //
      std::conj(z), b, zero, w,                //
      std::conj(w), zero, -b, z,               //
      zero, std::conj(w), std::conj(z), -a;
  return M;
}

double max_entry(const SpinorMatrix &M) { return M.cwiseAbs().maxCoeff(); }

bool is_hermitian(const SpinorMatrix &M, double tol) {
  return max_entry(M - M.adjoint()) <= tol;
}

bool in_class_V(const SpinorMatrix &M, double tol) {
  const auto &g = dirac_constants().gamma;
  return is_hermitian(M, tol) && max_entry(M.conjugate() * g + g * M) <= tol;
}

} // namespace diraclab::spinor
