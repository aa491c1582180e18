#include "support.hpp"
#include "tripartite/liouville.hpp"
#include "tripartite/model.hpp"

#include <doctest.h>

#include <random>

using namespace tripartite;
using namespace testing_support;

namespace {

SystemParams set1() {
  SystemParams p;
  p.F_L = 1e-2 * std::sqrt(0.5);
  return p;
}

// d rho / dt evaluated directly on matrices.
DenseMat lindblad_rhs(const DenseMat& h, const std::vector<std::pair<double, DenseMat>>& chans, const DenseMat& rho) {
  const cplx i(0.0, 1.0);
  DenseMat out = -i * (h * rho - rho * h);
  for (const auto& [rate, c] : chans) {
    const DenseMat cdc = c.adjoint() * c;
    out += rate * (c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc));
  }
  return out;
}

DenseMat apply_l(const Liouvillian& l, const DenseMat& rho) {
  return unvec(DenseVec(l.matrix * vec(rho)), l.hilbert_dim());
}

DenseMat projector(int d, int k) {
  DenseMat p = DenseMat::Zero(d, d);
  p(k, k) = 1.0;
  return p;
}

}  // namespace

TEST_CASE("vectorization convention") {
  std::mt19937_64 rng(3);
  const DenseMat a = random_hermitian(3, rng) + cplx(0, 1) * random_hermitian(3, rng);
  const DenseMat b = random_hermitian(3, rng);
  const DenseMat x = random_density(3, rng);
  CHECK(vec(x)(1 + 2 * 3) == x(1, 2));
  CHECK(max_abs(unvec(vec(x), 3) - x) == 0.0);
  const DenseVec lhs = vec(a * x * b);
  const DenseVec rhs = dense_kron(b.transpose(), a) * vec(x);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(unvec(DenseVec::Zero(8), 3), DimensionError);
}

TEST_CASE("dissipator matches direct evaluation") {
  std::mt19937_64 rng(5);
  const SubsystemDims d = SubsystemDims::reduced(3, 2);
  const Operator a = embed(annihilation(3), Slot::cavity, d);
  const CollapseChannel ch{0.7, a};
  const Liouvillian l{d, dissipator_superop(ch)};
  for (int k = 0; k < 5; ++k) {
    const DenseMat rho = random_density(6, rng);
    CHECK(max_abs(apply_l(l, rho) - lindblad_rhs(DenseMat::Zero(6, 6), {{0.7, a.dense()}}, rho)) < 1e-14);
  }
}

TEST_CASE("cavity decay on the first excited state") {
  const double kappa = 0.5;
  const SubsystemDims d = SubsystemDims::reduced(2, 2);
  const Liouvillian l{d, dissipator_superop({kappa, embed(annihilation(2), Slot::cavity, d)})};
  // |1,0><1,0| has reduced index 2; |0,0> has index 0
  const DenseMat out = apply_l(l, projector(4, 2));
  CHECK(out(2, 2).real() == doctest::Approx(-kappa));
  CHECK(out(0, 0).real() == doctest::Approx(kappa));
  DenseMat rest = out;
  rest(2, 2) = rest(0, 0) = 0.0;
  CHECK(max_abs(rest) == 0.0);
}

TEST_CASE("qubit decay alone relaxes to the ground state") {
  const SubsystemDims d = SubsystemDims::tripartite(2, 2);
  const Operator sm = embed(DenseMat(pauli(Pauli::minus)), Slot::qubit, d);
  const Liouvillian l{d, dissipator_superop({0.3, sm})};
  // every state with the qubit in the ground level is a fixed point
  for (int c = 0; c < 2; ++c)
    for (int m = 0; m < 2; ++m) CHECK(max_abs(apply_l(l, projector(8, 4 * c + 2 + m))) == 0.0);
  CHECK(max_abs(apply_l(l, projector(8, 0))) > 0.0);
}

TEST_CASE("zero rate and negative rate") {
  const SubsystemDims d = SubsystemDims::reduced(2, 3);
  const Operator b = embed(annihilation(3), Slot::mech, d);
  CHECK(dissipator_superop({0.0, b}).nonZeros() == 0);
  CHECK_THROWS_AS(dissipator_superop({-0.1, b}), std::invalid_argument);
  CHECK_THROWS_WITH(dissipator_superop({-0.1, b}), doctest::Contains("nonnegative"));
}

TEST_CASE("Hamiltonian superoperator") {
  const SubsystemDims d = SubsystemDims::tripartite(2, 2);
  CHECK(hamiltonian_superop(Operator::identity(d)).nonZeros() == 0);

  // sigma_z / 2 rotates the |e><g| coherence at the splitting frequency
  const Operator h = embed(DenseMat(0.5 * pauli(Pauli::z)), Slot::qubit, d);
  const Liouvillian l{d, hamiltonian_superop(h)};
  DenseMat coh = DenseMat::Zero(8, 8);
  coh(0, 2) = 1.0;  // |0 e 0><0 g 0|
  CHECK(max_abs(apply_l(l, coh) - cplx(0, -1) * coh) < 1e-15);

  std::mt19937_64 rng(8);
  const Operator hr(SubsystemDims::reduced(2, 3), random_hermitian(6, rng));
  const SparseMat s = hamiltonian_superop(hr);
  const DenseVec tr = DenseVec(vec(DenseMat::Identity(6, 6))).transpose() * s;
  CHECK(tr.cwiseAbs().maxCoeff() < 1e-14);

  DenseMat bad = random_hermitian(6, rng);
  bad(0, 1) += 1e-6;
  CHECK_THROWS_AS(hamiltonian_superop(Operator(SubsystemDims::reduced(2, 3), bad)), NonHermitianError);
}

TEST_CASE("assembled Liouvillians match the direct master equation") {
  std::mt19937_64 rng(11);
  SystemParams p = set1();
  p.omega_a = p.omega_L + 40.0;
  p.g_ac = 4.0;
  p.g_am = 0.4;
  p.n_th = 0.7;
  p.delta = 0.3;
  const SubsystemDims d = SubsystemDims::tripartite(3, 3);
  const Operator h = build_h_hyb(p, d);
  const auto chans = tripartite_channels(p, d);
  REQUIRE(chans.size() == 4);
  const Liouvillian l = build_liouvillian(h, chans);
  std::vector<std::pair<double, DenseMat>> direct;
  const DenseMat a = embed(annihilation(3), Slot::cavity, d).dense();
  const DenseMat sm = embed(DenseMat(pauli(Pauli::minus)), Slot::qubit, d).dense();
  const DenseMat b = embed(annihilation(3), Slot::mech, d).dense();
  direct.push_back({p.kappa, a});
  direct.push_back({p.gamma_a, sm});
  direct.push_back({p.gamma_m * (p.n_th + 1), b});
  direct.push_back({p.gamma_m * p.n_th, DenseMat(b.adjoint())});
  for (int k = 0; k < 3; ++k) {
    const DenseMat rho = random_density(18, rng);
    CHECK(max_abs(apply_l(l, rho) - lindblad_rhs(h.dense(), direct, rho)) < 1e-12);
  }

  const auto om = optomechanical_channels(p, SubsystemDims::reduced(3, 3));
  CHECK(om.size() == 3);
  for (const auto& ch : om) CHECK(ch.op.dims() == SubsystemDims::reduced(3, 3));
}

TEST_CASE("trace and Hermiticity preservation") {
  std::mt19937_64 rng(13);
  const SystemParams p = set1();
  const SubsystemDims full = SubsystemDims::tripartite(3, 6);
  const Liouvillian lf = build_liouvillian(build_h_hyb(p, full), tripartite_channels(p, full));
  CHECK(trace_row(lf).cwiseAbs().maxCoeff() <= 1e-10);

  SystemParams pt = p;
  pt.n_th = 1.0;
  const SubsystemDims red = SubsystemDims::reduced(3, 6);
  const Liouvillian le = build_liouvillian(build_h_eff(pt, red), optomechanical_channels(pt, red));
  CHECK(trace_row(le).cwiseAbs().maxCoeff() <= 1e-10);

  for (int k = 0; k < 5; ++k) {
    const DenseMat x = random_hermitian(18, rng);
    const DenseMat y = apply_l(le, x);
    CHECK(max_abs(y - y.adjoint()) <= 1e-10);
  }
}

TEST_CASE("spectrum lies in the closed left half plane") {
  SystemParams p = set1();
  p.omega_a = p.omega_L + 30.0;
  p.g_ac = 3.0;
  p.g_am = 0.3;
  p.n_th = 0.5;
  p.F_L = 0.2;
  const SubsystemDims d = SubsystemDims::tripartite(2, 2);
  const Liouvillian l = build_liouvillian(build_h_hyb(p, d), tripartite_channels(p, d));
  Eigen::ComplexEigenSolver<DenseMat> es(DenseMat(l.matrix));
  CHECK(es.eigenvalues().real().maxCoeff() <= 1e-9);

  // closed system: purely imaginary spectrum
  const Liouvillian closed = build_liouvillian(build_h_hyb(p, d), {});
  Eigen::ComplexEigenSolver<DenseMat> ec(DenseMat(closed.matrix));
  CHECK(ec.eigenvalues().real().cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("zero-rate channels are bit-identical to omission") {
  SystemParams p = set1();
  p.n_th = 0.0;
  const SubsystemDims d = SubsystemDims::tripartite(2, 3);
  const Operator h = build_h_hyb(p, d);
  auto chans = tripartite_channels(p, d);
  REQUIRE(chans[3].rate == 0.0);
  const Liouvillian with = build_liouvillian(h, chans);
  chans.pop_back();
  const Liouvillian without = build_liouvillian(h, chans);
  REQUIRE(with.matrix.nonZeros() == without.matrix.nonZeros());
  const DenseMat dw(with.matrix), dwo(without.matrix);
  CHECK((dw.array() == dwo.array()).all());
}

TEST_CASE("assembly errors") {
  const SubsystemDims d = SubsystemDims::tripartite(2, 2);
  const SubsystemDims other = SubsystemDims::tripartite(2, 3);
  const Operator h = Operator::identity(d);
  CHECK_THROWS_AS(build_liouvillian(h, {{1.0, embed(annihilation(2), Slot::cavity, other)}}), DimensionError);
  CHECK_THROWS_AS(build_liouvillian(h, {{-1.0, embed(annihilation(2), Slot::cavity, d)}}), std::invalid_argument);
}
