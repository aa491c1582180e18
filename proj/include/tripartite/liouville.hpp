#pragma once

// Lindblad superoperators under column-stacking vectorization:
//   vec(X)[i + j*D] = X(i, j),   vec(A X B) = (B^T (x) A) vec(X).

#include "tripartite/hilbert.hpp"

#include <stdexcept>
#include <vector>

namespace tripartite {

struct SystemParams;

class NonHermitianError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Hermiticity tolerance (max-norm of H - H^dagger) accepted for Hamiltonians.
inline constexpr double kHermitianTolerance = 1e-10;

/// A jump operator c with rate; contributes rate * D[c].
struct CollapseChannel {
  double rate = 0.0;
  Operator op;
};

/// Generator of d vec(rho)/dt on column-stacked density matrices.
struct Liouvillian {
  SubsystemDims dims;
  SparseMat matrix;  // D^2 x D^2

  int hilbert_dim() const { return dims.total(); }
};

DenseVec vec(const DenseMat& x);
DenseMat unvec(const DenseVec& v, int dim);

/// rate * [conj(c) (x) c - 1/2 I (x) c'c - 1/2 (c'c)^T (x) I]
SparseMat dissipator_superop(const CollapseChannel& ch);

/// -i (I (x) H - H^T (x) I)
SparseMat hamiltonian_superop(const Operator& h);

Liouvillian build_liouvillian(const Operator& h, const std::vector<CollapseChannel>& channels);

/// Cavity decay, qubit decay, and thermal mechanical damping on the tripartite
/// space, in that order. Zero-rate channels are kept in the list.
std::vector<CollapseChannel> tripartite_channels(const SystemParams& p, const SubsystemDims& dims);

/// Cavity decay and thermal mechanical damping on cavity (x) mechanics.
std::vector<CollapseChannel> optomechanical_channels(const SystemParams& p, const SubsystemDims& dims);

/// vec(I)^T L as a dense row; zero for a trace-preserving generator.
DenseVec trace_row(const Liouvillian& l);

}  // namespace tripartite
