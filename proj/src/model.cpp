#include "tripartite/model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace tripartite {

namespace {

const cplx kI{0.0, 1.0};

double checked_delta_aL(const SystemParams& p, const char* who) {
  const double d = p.delta_aL();
  if (!std::isfinite(d) || std::abs(d) < kMinQubitDetuning) {
    std::ostringstream os;
    os << who << ": qubit detuning omega_a - omega_L = " << d
       << " is (near) zero; the dispersive assumption |delta_aL| >> g_ac, g_am does not hold";
    throw DispersiveError(os.str());
  }
  return d;
}

// Mode operators on whatever space `dims` describes.
struct Modes {
  Operator a, ad, n, b, bd, x_m;
};

Modes modes(const SubsystemDims& dims) {
  dims.validate();
  Operator a = embed(annihilation(dims.n_cavity), Slot::cavity, dims);
  Operator b = embed(annihilation(dims.n_mech), Slot::mech, dims);
  Operator ad = a.dagger();
  Operator bd = b.dagger();
  Operator n = ad * a;
  Operator x_m = b + bd;
  return {std::move(a), std::move(ad), std::move(n), std::move(b), std::move(bd), std::move(x_m)};
}

}  // namespace

void SystemParams::validate() const {
  const double all[] = {omega_a, omega_L, delta, g_ac, g_am, g_cm, F_L, kappa, gamma_a, gamma_m, n_th};
  for (double v : all)
    if (!std::isfinite(v)) throw std::invalid_argument("system parameters must be finite");
  auto nonneg = [](double v, const char* name) {
    if (v < 0.0) throw std::invalid_argument(std::string(name) + " must be nonnegative, got " + std::to_string(v));
  };
  nonneg(kappa, "kappa");
  nonneg(gamma_a, "gamma_a");
  nonneg(gamma_m, "gamma_m");
  nonneg(n_th, "n_th");
  nonneg(F_L, "F_L");
  nonneg(g_ac, "g_ac");
  nonneg(g_am, "g_am");
  nonneg(g_cm, "g_cm");
}

double effective_coupling(const SystemParams& p) {
  const double d = checked_delta_aL(p, "effective_coupling");
  return p.g_cm + 2.0 * p.g_ac * p.g_ac * p.g_am / (d * d);
}

double stark_shift(const SystemParams& p) {
  const double d = checked_delta_aL(p, "stark_shift");
  return p.g_ac * p.g_ac / d;
}

Operator build_h_hyb(const SystemParams& p, const SubsystemDims& dims_in) {
  SubsystemDims dims = dims_in;
  dims.has_qubit = true;
  const Modes m = modes(dims);
  const Operator sz = embed(DenseMat(pauli(Pauli::z)), Slot::qubit, dims);
  const Operator sp = embed(DenseMat(pauli(Pauli::plus)), Slot::qubit, dims);
  const Operator sm = embed(DenseMat(pauli(Pauli::minus)), Slot::qubit, dims);
  const Operator id = Operator::identity(dims);

  Operator h = -p.delta * m.n;
  h += (0.5 * p.delta_aL()) * sz;
  h += (kI * p.g_ac) * (sp * m.a - sm * m.ad);
  h -= p.g_am * ((sz + id) * m.x_m);
  h -= p.g_cm * (m.n * m.x_m);
  h += kOmegaM * (m.bd * m.b);
  h += (kI * p.F_L) * (m.ad - m.a);
  return h;
}

Operator build_h_eff(const SystemParams& p, const SubsystemDims& dims_in) {
  const SubsystemDims dims = dims_in.without_qubit();
  const double g_eff = effective_coupling(p);
  const double stark = stark_shift(p);
  const Modes m = modes(dims);

  Operator h = -(p.delta + stark) * m.n;
  h -= (0.5 * (g_eff - p.g_cm)) * m.x_m;
  h -= g_eff * (m.n * m.x_m);
  h += kOmegaM * (m.bd * m.b);
  h += (kI * p.F_L) * (m.ad - m.a);
  return h;
}

Operator build_h_uncoupled(const SystemParams& p, const SubsystemDims& dims_in) {
  const SubsystemDims dims = dims_in.without_qubit();
  const Modes m = modes(dims);
  Operator h = -p.delta * m.n;
  h += kOmegaM * (m.bd * m.b);
  h += (kI * p.F_L) * (m.ad - m.a);
  return h;
}

QubitField qubit_field_operators(const SystemParams& p, const SubsystemDims& dims_in) {
  const SubsystemDims dims = dims_in.without_qubit();
  const Modes m = modes(dims);
  const Operator x_c = m.a + m.ad;
  const Operator p_c = -kI * (m.a - m.ad);
  return {-p.g_ac * p_c, -p.g_ac * x_c, p.delta_aL() * Operator::identity(dims) - (2.0 * p.g_am) * m.x_m};
}

Operator qubit_sqrt_exact(const SystemParams& p, const SubsystemDims& dims_in) {
  const SubsystemDims dims = dims_in.without_qubit();
  const Modes m = modes(dims);
  const Operator id = Operator::identity(dims);
  const Operator z = p.delta_aL() * id - (2.0 * p.g_am) * m.x_m;
  const Operator radicand = (4.0 * p.g_ac * p.g_ac) * (m.n + 0.5 * id) + z * z;

  const DenseMat r = radicand.dense();
  Eigen::SelfAdjointEigenSolver<DenseMat> es(0.5 * (r + r.adjoint()));
  if (es.info() != Eigen::Success) throw std::runtime_error("qubit_sqrt_exact: eigendecomposition failed");
  Eigen::VectorXd w = es.eigenvalues();
  const double w_min = w.minCoeff();
  if (w_min < -1e-9) {
    std::ostringstream os;
    os << "qubit_sqrt_exact: operator under the square root has eigenvalue " << w_min << " < -1e-9";
    throw PositivityError(os.str(), w_min);
  }
  w = w.cwiseMax(0.0).cwiseSqrt();
  const DenseMat& v = es.eigenvectors();
  const DenseMat root = v * w.asDiagonal() * v.adjoint();
  return Operator(dims, DenseMat(-0.5 * root));
}

Operator qubit_sqrt_expansion(const SystemParams& p, const SubsystemDims& dims_in) {
  const double d = checked_delta_aL(p, "qubit_sqrt_expansion");
  const SubsystemDims dims = dims_in.without_qubit();
  const Modes m = modes(dims);
  const Operator id = Operator::identity(dims);
  const Operator n_half = m.n + 0.5 * id;

  Operator h = (-0.5 * d) * id;
  h += p.g_am * m.x_m;
  h -= (p.g_ac * p.g_ac / d) * n_half;
  h -= (2.0 * p.g_ac * p.g_ac * p.g_am / (d * d)) * (n_half * m.x_m);
  return h;
}

double sw_relative_error(const SystemParams& p, const SubsystemDims& dims) {
  const DenseMat exact = qubit_sqrt_exact(p, dims).dense();
  const DenseMat series = qubit_sqrt_expansion(p, dims).dense();
  // Both are Hermitian, so the spectral norm is the largest |eigenvalue|.
  auto spectral_norm = [](const DenseMat& h) {
    Eigen::SelfAdjointEigenSolver<DenseMat> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  };
  return spectral_norm(exact - series) / spectral_norm(exact);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::valid: return "valid";
    case Verdict::marginal: return "marginal";
    case Verdict::invalid: return "invalid";
  }
  return "?";
}

DispersiveReport dispersive_report(const SystemParams& p, const DispersiveThresholds& t) {
  const double d = checked_delta_aL(p, "dispersive_report");
  DispersiveReport r;
  r.ratio_ac = std::abs(p.g_ac / d);
  r.ratio_am = std::abs(p.g_am / d);
  r.strong_coupling_ratio = effective_coupling(p) / kOmegaM;
  if (r.ratio_ac <= t.ratio_ac && r.ratio_am <= t.ratio_am) {
    r.verdict = Verdict::valid;
  } else if (r.ratio_ac <= t.marginal_factor * t.ratio_ac && r.ratio_am <= t.marginal_factor * t.ratio_am) {
    r.verdict = Verdict::marginal;
  } else {
    r.verdict = Verdict::invalid;
  }
  return r;
}

}  // namespace tripartite
