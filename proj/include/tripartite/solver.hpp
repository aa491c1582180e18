#pragma once

// Steady state of a Lindblad generator by a trace-constrained sparse solve, and
// a fixed-step RK4 integrator used as an independent time-domain check.

#include "tripartite/liouville.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace tripartite {

/// The generator has no unique normalized null vector.
class NonUniqueSteadyStateError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The linear solver could not run (e.g. out of memory); says nothing about uniqueness.
class FactorizationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, double residual) : std::runtime_error(what), residual(residual) {}
  double residual;
};

class StepSizeError : public std::runtime_error {
public:
  StepSizeError(const std::string& what, double trace_drift) : std::runtime_error(what), trace_drift(trace_drift) {}
  double trace_drift;
};

enum class SteadyStateBackend {
  sparse_lu,  // direct factorization plus iterative refinement
  bicgstab,   // ILUT-preconditioned BiCGSTAB
};

struct SteadyStateOptions {
  SteadyStateBackend backend = SteadyStateBackend::sparse_lu;
  /// Absolute residual bound is residual_tol * max(1, ||L||_inf).
  double residual_tol = 1e-9;
  int max_refinements = 4;
  /// Row replaced by the trace functional; must be a population row k*(D+1).
  /// Defaults to the first population row of largest diagonal magnitude.
  std::optional<Eigen::Index> trace_row;
  bool equilibrate = true;
};

/// Row infinity norm of L (largest absolute row sum).
double inf_norm(const SparseMat& m);

/// Population rows k*(D+1) ordered by decreasing |L_rr|, ties broken by lowest index.
std::vector<Eigen::Index> trace_row_candidates(const Liouvillian& l, int count);

/// Unique steady state: Hermitian, unit trace, residual within tolerance.
Operator steady_state(const Liouvillian& l, const SteadyStateOptions& opts = {});

/// max |L vec(rho)|.
double residual(const Liouvillian& l, const Operator& rho);
double residual(const Liouvillian& l, const DenseMat& rho);

/// Classical RK4 integration of d rho/dt = L rho from rho0 to t_final.
/// Throws StepSizeError when |Tr rho - Tr rho0| exceeds 1e-8 at any step.
Operator evolve(const Operator& rho0, const Liouvillian& l, double t_final, double dt);

}  // namespace tripartite
