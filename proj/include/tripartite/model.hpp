#pragma once

// Hamiltonians of the driven qubit-cavity-mechanics system in the frame rotating
// at the drive frequency, and of its dispersive (qubit-eliminated) optomechanical
// reduction.

#include "tripartite/hilbert.hpp"

#include <stdexcept>
#include <string>

namespace tripartite {

/// The mechanical frequency is the unit of every rate and frequency.
inline constexpr double kOmegaM = 1.0;

/// |omega_a - omega_L| below this is rejected: the reduction presumes a
/// far-detuned qubit.
inline constexpr double kMinQubitDetuning = 1e-6;

class DispersiveError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Thrown when the operator under the square root of the exact qubit-eliminated
/// Hamiltonian has a negative eigenvalue (a truncation pathology).
class PositivityError : public std::runtime_error {
public:
  PositivityError(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue(min_eigenvalue) {}
  double min_eigenvalue;
};

struct SystemParams {
  double omega_a = 1.5e4;   // qubit transition frequency
  double omega_L = 1.0e4;   // drive frequency
  double delta = 0.0;       // cavity detuning omega_L - omega_c
  double g_ac = 500.0;      // qubit-cavity
  double g_am = 50.0;       // qubit-mechanics
  double g_cm = 1e-3;       // direct radiation pressure
  double F_L = 0.0;         // drive rate
  double kappa = 0.5;       // cavity decay
  double gamma_a = 0.05;    // qubit decay
  double gamma_m = 0.05;    // mechanical damping
  double n_th = 0.0;        // mean thermal phonon number of the mechanical bath

  /// Qubit detuning from the drive, omega_a - omega_L. Derived, never stored.
  double delta_aL() const { return omega_a - omega_L; }

  /// Throws std::invalid_argument on negative rates or non-finite values.
  void validate() const;

  bool operator==(const SystemParams&) const = default;
};

/// g_cm + 2 g_ac^2 g_am / delta_aL^2.
double effective_coupling(const SystemParams& p);

/// Cavity frequency shift g_ac^2 / delta_aL induced by the off-resonant qubit.
double stark_shift(const SystemParams& p);

/// Full tripartite Hamiltonian on cavity (x) qubit (x) mechanics:
///   -D a'a + (D_aL/2) sz + i g_ac (s+ a - s- a') - g_am (sz + 1)(b + b')
///   - g_cm a'a (b + b') + w_m b'b + i F_L (a' - a)
Operator build_h_hyb(const SystemParams& p, const SubsystemDims& dims);

/// Effective optomechanical Hamiltonian on cavity (x) mechanics (the qubit slot
/// of `dims` is ignored):
///   -(D + g_ac^2/D_aL) a'a - ((g_eff - g_cm)/2)(b + b') - g_eff a'a (b + b')
///   + w_m b'b + i F_L (a' - a)
Operator build_h_eff(const SystemParams& p, const SubsystemDims& dims);

/// Driven empty cavity next to a free mechanical mode, all couplings zero:
///   -D a'a + w_m b'b + i F_L (a' - a)
/// Needs no qubit detuning.
Operator build_h_uncoupled(const SystemParams& p, const SubsystemDims& dims);

/// Effective magnetic field seen by the qubit, as operators on cavity (x) mechanics.
/// bx = -g_ac p_c, by = -g_ac x_c, bz = D_aL - 2 g_am x_m with
/// x_c = a + a', p_c = -i(a - a'), x_m = b + b'.
struct QubitField {
  Operator bx;
  Operator by;
  Operator bz;
};

QubitField qubit_field_operators(const SystemParams& p, const SubsystemDims& dims);

/// -1/2 sqrt(4 g_ac^2 (a'a + 1/2) + (D_aL - 2 g_am x_m)^2) by dense Hermitian
/// eigendecomposition on cavity (x) mechanics.
Operator qubit_sqrt_exact(const SystemParams& p, const SubsystemDims& dims);

/// Third-order series of qubit_sqrt_exact, constants included:
///   -D_aL/2 + g_am x_m - (g_ac^2/D_aL)(a'a + 1/2) - (2 g_ac^2 g_am/D_aL^2)(a'a + 1/2) x_m
Operator qubit_sqrt_expansion(const SystemParams& p, const SubsystemDims& dims);

/// ||exact - expansion||_2 / ||exact||_2.
double sw_relative_error(const SystemParams& p, const SubsystemDims& dims);

enum class Verdict { valid, marginal, invalid };

std::string to_string(Verdict v);

struct DispersiveThresholds {
  double ratio_ac = 0.1;
  double ratio_am = 0.01;
  /// A parameter set that misses `valid` but stays within this factor of both
  /// thresholds is `marginal`.
  double marginal_factor = 2.0;
};

struct DispersiveReport {
  double ratio_ac = 0.0;               // |g_ac / delta_aL|
  double ratio_am = 0.0;               // |g_am / delta_aL|
  double strong_coupling_ratio = 0.0;  // g_eff / omega_m
  Verdict verdict = Verdict::invalid;
};

DispersiveReport dispersive_report(const SystemParams& p, const DispersiveThresholds& thresholds = {});

}  // namespace tripartite
