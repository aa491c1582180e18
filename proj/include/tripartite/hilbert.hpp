#pragma once

// Truncated Fock-space and qubit operator algebra on the ordered product space
// cavity (x) qubit (x) mechanics.
//
// Conventions used everywhere in the library:
//   - slot order is cavity, qubit, mechanics; the leftmost factor varies slowest
//   - qubit basis has the excited state first, so sigma_z = diag(+1, -1)
//   - frequencies and rates are in units of the mechanical frequency

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace tripartite {

using cplx = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<cplx>;
using DenseMat = Eigen::MatrixXcd;
using DenseVec = Eigen::VectorXcd;

/// Entries below this magnitude are dropped when an operator is assembled.
inline constexpr double kStructuralZero = 1e-14;

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class Slot { cavity = 0, qubit = 1, mech = 2 };
enum class Pauli { x, y, z, plus, minus };

std::string to_string(Slot s);

/// Fock truncations of the two bosonic modes. The qubit slot is either a
/// two-level system or absent (dimension 1), the latter describing the reduced
/// cavity (x) mechanics space of the effective model.
struct SubsystemDims {
  int n_cavity = 4;
  int n_mech = 14;
  bool has_qubit = true;

  static SubsystemDims tripartite(int n_cavity, int n_mech) { return {n_cavity, n_mech, true}; }
  static SubsystemDims reduced(int n_cavity, int n_mech) { return {n_cavity, n_mech, false}; }

  int n_qubit() const { return has_qubit ? 2 : 1; }
  int total() const { return n_cavity * n_qubit() * n_mech; }
  int slot_dim(Slot s) const;
  std::array<int, 3> slot_dims() const { return {n_cavity, n_qubit(), n_mech}; }

  /// Same Fock truncations without the qubit.
  SubsystemDims without_qubit() const { return {n_cavity, n_mech, false}; }

  /// Throws DimensionError unless both truncations are at least 2.
  void validate() const;

  bool operator==(const SubsystemDims&) const = default;
};

std::string to_string(const SubsystemDims& d);

/// A sparse D x D operator tagged with the subsystem dimensions it acts on.
/// Immutable after construction; every arithmetic operation checks that both
/// operands carry identical dims.
class Operator {
public:
  Operator(SubsystemDims dims, SparseMat matrix);
  Operator(SubsystemDims dims, const DenseMat& matrix);

  static Operator identity(const SubsystemDims& dims);
  static Operator zero(const SubsystemDims& dims);

  const SubsystemDims& dims() const { return dims_; }
  const SparseMat& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  DenseMat dense() const { return DenseMat(matrix_); }

  Operator dagger() const;
  /// Largest entry magnitude.
  double max_abs() const;
  /// max |A - A^dagger| over entries.
  double hermiticity_error() const;
  bool is_hermitian(double tol) const { return hermiticity_error() <= tol; }
  cplx trace() const;

  Operator& operator+=(const Operator& rhs);
  Operator& operator-=(const Operator& rhs);
  Operator& operator*=(cplx s);

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(Operator a, cplx s) { return a *= s; }
  friend Operator operator*(cplx s, Operator a) { return a *= s; }
  friend Operator operator*(double s, Operator a) { return a *= cplx(s, 0.0); }
  friend Operator operator*(Operator a, double s) { return a *= cplx(s, 0.0); }
  friend Operator operator-(Operator a) { return a *= cplx(-1.0, 0.0); }
  friend Operator operator*(const Operator& a, const Operator& b);

private:
  void check_same_dims(const Operator& other, const char* what) const;

  SubsystemDims dims_;
  SparseMat matrix_;
};

Operator commutator(const Operator& a, const Operator& b);

/// Drops entries with magnitude below kStructuralZero and compresses.
SparseMat pruned(SparseMat m);

/// Kronecker product of two sparse matrices.
SparseMat kron(const SparseMat& a, const SparseMat& b);

SparseMat sparse_identity(int n);

/// Bosonic lowering operator truncated at n Fock levels.
SparseMat annihilation(int n);

/// Pauli matrices in the basis where sigma_z = diag(+1, -1).
Eigen::Matrix2cd pauli(Pauli which);

/// I (x) ... (x) local (x) ... (x) I in the fixed slot order.
Operator embed(const SparseMat& local, Slot slot, const SubsystemDims& dims);
Operator embed(const DenseMat& local, Slot slot, const SubsystemDims& dims);

/// Tr(op * rho).
cplx expectation(const Operator& op, const Operator& rho);

/// Reduced density matrix over the kept slots, in slot order.
DenseMat partial_trace(const Operator& rho, std::initializer_list<Slot> keep);
DenseMat partial_trace(const Operator& rho, const std::vector<Slot>& keep);

/// Half the trace norm of (a - b); both are assumed Hermitian.
double trace_distance(const DenseMat& a, const DenseMat& b);

}  // namespace tripartite
