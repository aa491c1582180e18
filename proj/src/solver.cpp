#include "tripartite/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/LU>
#include <Eigen/UmfPackSupport>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>

namespace tripartite {

namespace {

// A unit-trace density matrix has no entry above 1 in magnitude; a solve that
// returns something this large has hit a (numerically) singular system.
constexpr double kSingularSolutionBound = 1e6;

double max_abs(const DenseVec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Eigen::Index diag_index(int k, int d) { return k + static_cast<Eigen::Index>(k) * d; }

// L with row `r` replaced by `row_entries` (column index, value).
SparseMat with_row(const SparseMat& l, Eigen::Index r, const std::vector<std::pair<Eigen::Index, cplx>>& row_entries) {
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(static_cast<std::size_t>(l.nonZeros()) + row_entries.size());
  for (Eigen::Index k = 0; k < l.outerSize(); ++k)
    for (SparseMat::InnerIterator it(l, k); it; ++it)
      if (it.row() != r) trips.emplace_back(it.row(), it.col(), it.value());
  for (const auto& [c, v] : row_entries) trips.emplace_back(r, c, v);
  SparseMat a(l.rows(), l.cols());
  a.setFromTriplets(trips.begin(), trips.end());
  a.makeCompressed();
  return a;
}

struct Scaling {
  Eigen::VectorXd row;
  Eigen::VectorXd col;
};

// Row then column max-magnitude scaling, applied in place.
Scaling equilibrate(SparseMat& a) {
  const Eigen::Index n = a.rows();
  Eigen::VectorXd rmax = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (SparseMat::InnerIterator it(a, k); it; ++it) rmax(it.row()) = std::max(rmax(it.row()), std::abs(it.value()));
  Scaling s{Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n)};
  for (Eigen::Index i = 0; i < n; ++i)
    if (rmax(i) > 0.0) s.row(i) = 1.0 / rmax(i);
  for (Eigen::Index k = 0; k < a.outerSize(); ++k) {
    double cmax = 0.0;
    for (SparseMat::InnerIterator it(a, k); it; ++it) {
      it.valueRef() *= s.row(it.row());
      cmax = std::max(cmax, std::abs(it.value()));
    }
    if (cmax > 0.0) {
      s.col(k) = 1.0 / cmax;
      for (SparseMat::InnerIterator it(a, k); it; ++it) it.valueRef() *= s.col(k);
    }
  }
  return s;
}

// Solves M x = rhs for a sparse M through an equilibrated factorization.
class ScaledFactorization {
public:
  // UMFPACK keeps referring to the factored matrix, so it is owned here.
  ScaledFactorization(SparseMat m, const SteadyStateOptions& opts) : backend_(opts.backend), m_(std::move(m)) {
    const Eigen::Index n = m_.rows();
    scaling_ = {Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n)};
    if (opts.equilibrate) scaling_ = equilibrate(m_);
    if (backend_ == SteadyStateBackend::sparse_lu) {
      // Liouvillians are structurally symmetric; AMD/METIS on A + A^T keeps fill low.
      lu_.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
      lu_.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS;
      {
        // The METIS ordering keeps process-global random state; serializing
        // the symbolic phase makes orderings independent of thread timing.
        static std::mutex ordering_mutex;
        std::lock_guard<std::mutex> lock(ordering_mutex);
        lu_.analyzePattern(m_);
      }
      lu_.factorize(m_);
      ok_ = lu_.info() == Eigen::Success;
      // Negative codes are hard failures (memory, invalid input), not singularity.
      if (lu_.umfpackFactorizeReturncode() < 0) {
        std::ostringstream os;
        os << "steady_state: sparse LU factorization failed with UMFPACK status " << lu_.umfpackFactorizeReturncode()
           << (lu_.umfpackFactorizeReturncode() == UMFPACK_ERROR_out_of_memory ? " (out of memory)" : "")
           << " at dimension " << n;
        throw FactorizationError(os.str());
      }
    } else {
      krylov_.preconditioner().setDroptol(1e-12);
      krylov_.preconditioner().setFillfactor(40);
      krylov_.setTolerance(1e-14);
      krylov_.setMaxIterations(std::max<Eigen::Index>(1000, 4 * n));
      krylov_.compute(m_);
      ok_ = krylov_.info() == Eigen::Success;
    }
  }

  bool ok() const { return ok_; }

  DenseVec solve(const DenseVec& rhs) const {
    const DenseVec scaled = scaling_.row.cast<cplx>().cwiseProduct(rhs);
    DenseVec y = backend_ == SteadyStateBackend::sparse_lu ? DenseVec(lu_.solve(scaled)) : DenseVec(krylov_.solve(scaled));
    return scaling_.col.cast<cplx>().cwiseProduct(y);
  }

private:
  SteadyStateBackend backend_;
  SparseMat m_;
  Scaling scaling_;
  Eigen::UmfPackLU<SparseMat> lu_;
  Eigen::BiCGSTAB<SparseMat, Eigen::IncompleteLUT<cplx>> krylov_;
  bool ok_ = false;
};

// The trace-constrained system A = L with population row r replaced by vec(I)^T.
//
// A dense trace row wrecks the fill-in of sparse LU, so A is handled as a
// low-rank update of the sparse matrix P equal to L with row p replaced by
// e_p^T, where p is the population index of a well-occupied state. P keeps the
// structural symmetry of L and is nonsingular iff rho_pp != 0. With
//   A = P + U V^T,  U = [e_p, e_r],  V = [l_p - e_p, vec(I) - l_r]
// (one column when r == p), Woodbury gives
//   A^{-1} v = z - Y (I + V^T Y)^{-1} V^T z,  z = P^{-1} v,  Y = P^{-1} U.
// After a few pin candidates fail, A is factored directly.
class TraceConstrainedSystem {
public:
  TraceConstrainedSystem(const Liouvillian& l, Eigen::Index r, const SteadyStateOptions& opts)
      : l_(l), r_(r), d_(l.hilbert_dim()) {
    const Eigen::Index n = l.matrix.rows();
    for (Eigen::Index p : pin_candidates(l, 3)) {
      auto f = std::make_unique<ScaledFactorization>(with_row(l.matrix, p, {{p, cplx(1.0, 0.0)}}), opts);
      if (!f->ok()) continue;
      pin_ = p;
      const Eigen::Index k = p == r ? 1 : 2;
      DenseMat y(n, k);
      DenseVec e = DenseVec::Zero(n);
      e(p) = 1.0;
      y.col(0) = f->solve(e);
      if (k == 2) {
        e(p) = 0.0;
        e(r) = 1.0;
        y.col(1) = f->solve(e);
      }
      if (!y.allFinite()) continue;
      // y.col(0) = rho_ss / rho_pp; a nearly empty pinned state is ill-conditioned
      if (!(std::abs(trace_of(y.col(0))) < 1e8)) continue;
      Eigen::MatrixXcd cap = Eigen::MatrixXcd::Identity(k, k);
      for (Eigen::Index j = 0; j < k; ++j) cap.col(j) += low_rank_coeffs(y.col(j), k);
      Eigen::PartialPivLU<Eigen::MatrixXcd> cap_lu(cap);
      if (!(std::abs(cap_lu.determinant()) > 1e-12)) continue;
      pinned_ = std::move(f);
      y_ = std::move(y);
      cap_lu_ = std::move(cap_lu);
      return;
    }
    std::vector<std::pair<Eigen::Index, cplx>> trace;
    for (int k = 0; k < d_; ++k) trace.emplace_back(diag_index(k, d_), cplx(1.0, 0.0));
    direct_ = std::make_unique<ScaledFactorization>(with_row(l.matrix, r, trace), opts);
    if (!direct_->ok()) {
      throw NonUniqueSteadyStateError(
          "steady_state: trace-constrained system is singular; the Liouvillian has no unique steady state");
    }
  }

  DenseVec solve(const DenseVec& v) const {
    if (direct_) return direct_->solve(v);
    const DenseVec z = pinned_->solve(v);
    const Eigen::VectorXcd c = cap_lu_.solve(low_rank_coeffs(z, y_.cols()));
    return z - y_ * c;
  }

  /// A x
  DenseVec apply(const DenseVec& x) const {
    DenseVec out = l_.matrix * x;
    out(r_) = trace_of(x);
    return out;
  }

private:
  // V^T x
  Eigen::VectorXcd low_rank_coeffs(const DenseVec& x, Eigen::Index k) const {
    const DenseVec lx = l_.matrix * x;
    Eigen::VectorXcd out(k);
    if (k == 1) {
      out(0) = trace_of(x) - x(pin_);
    } else {
      out(0) = lx(pin_) - x(pin_);
      out(1) = trace_of(x) - lx(r_);
    }
    return out;
  }

  // Population rows by increasing |L_pp| (slowest outflow first).
  static std::vector<Eigen::Index> pin_candidates(const Liouvillian& l, int count) {
    const int d = l.hilbert_dim();
    std::vector<int> order(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) order[static_cast<std::size_t>(k)] = k;
    auto rate = [&](int k) { return std::abs(l.matrix.coeff(diag_index(k, d), diag_index(k, d))); };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rate(a) < rate(b); });
    std::vector<Eigen::Index> out;
    for (int i = 0; i < std::min(count, d); ++i) out.push_back(diag_index(order[static_cast<std::size_t>(i)], d));
    return out;
  }

  cplx trace_of(const DenseVec& v) const {
    cplx t{0.0, 0.0};
    for (int k = 0; k < d_; ++k) t += v(diag_index(k, d_));
    return t;
  }

  const Liouvillian& l_;
  Eigen::Index r_;
  int d_;
  Eigen::Index pin_ = 0;
  std::unique_ptr<ScaledFactorization> pinned_;
  std::unique_ptr<ScaledFactorization> direct_;
  DenseMat y_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> cap_lu_;
};

DenseMat repaired(const DenseVec& x, int d) {
  DenseMat rho = unvec(x, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const cplx tr = rho.trace();
  rho /= tr.real();
  return rho;
}

}  // namespace

double inf_norm(const SparseMat& m) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMat::InnerIterator it(m, k); it; ++it) rows(it.row()) += std::abs(it.value());
  return rows.size() == 0 ? 0.0 : rows.maxCoeff();
}

std::vector<Eigen::Index> trace_row_candidates(const Liouvillian& l, int count) {
  // Only population rows (index k*(D+1)) are linearly dependent through
  // vec(I)^T L = 0, so only they may be traded for the trace functional.
  const int d = l.hilbert_dim();
  std::vector<double> diag(static_cast<std::size_t>(d), 0.0);
  for (int k = 0; k < d; ++k) diag[static_cast<std::size_t>(k)] = std::abs(l.matrix.coeff(diag_index(k, d), diag_index(k, d)));
  std::vector<int> order(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) order[static_cast<std::size_t>(k)] = k;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return diag[static_cast<std::size_t>(a)] > diag[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(std::clamp(count, 0, d)));
  std::vector<Eigen::Index> rows;
  rows.reserve(order.size());
  for (int k : order) rows.push_back(diag_index(k, d));
  return rows;
}

double residual(const Liouvillian& l, const DenseMat& rho) {
  const int d = l.hilbert_dim();
  if (rho.rows() != d || rho.cols() != d) throw DimensionError("residual: density matrix does not match Liouvillian");
  return max_abs(l.matrix * vec(rho));
}

double residual(const Liouvillian& l, const Operator& rho) {
  if (!(rho.dims() == l.dims)) throw DimensionError("residual: dims mismatch");
  return residual(l, rho.dense());
}

Operator steady_state(const Liouvillian& l, const SteadyStateOptions& opts) {
  const int d = l.hilbert_dim();
  const Eigen::Index n = l.matrix.rows();
  const Eigen::Index r = opts.trace_row ? *opts.trace_row : trace_row_candidates(l, 1).front();
  if (r < 0 || r >= n || r % (d + 1) != 0) {
    throw std::invalid_argument("steady_state: trace row must be a population row k*(D+1)");
  }

  TraceConstrainedSystem sys(l, r, opts);
  DenseVec b = DenseVec::Zero(n);
  b(r) = 1.0;

  DenseVec x = sys.solve(b);
  if (!x.allFinite() || max_abs(x) > kSingularSolutionBound) {
    throw NonUniqueSteadyStateError(
        "steady_state: trace-constrained solve is singular; the Liouvillian has no unique steady state");
  }

  const double tol = opts.residual_tol * std::max(1.0, inf_norm(l.matrix));
  DenseMat rho = repaired(x, d);
  double res = residual(l, rho);
  for (int it = 0; it < opts.max_refinements && res > 0.1 * tol; ++it) {
    x += sys.solve(b - sys.apply(x));
    rho = repaired(x, d);
    res = residual(l, rho);
  }
  if (!(res <= tol)) {
    std::ostringstream os;
    os << "steady_state: residual " << res << " above tolerance " << tol << " after refinement";
    throw ConvergenceError(os.str(), res);
  }
  return Operator(l.dims, rho);
}

Operator evolve(const Operator& rho0, const Liouvillian& l, double t_final, double dt) {
  if (!(rho0.dims() == l.dims)) throw DimensionError("evolve: dims mismatch");
  if (!(dt > 0.0) || !(t_final >= 0.0)) throw std::invalid_argument("evolve: need dt > 0 and t_final >= 0");
  const int d = l.hilbert_dim();
  auto trace_of = [d](const DenseVec& y) {
    cplx t{0.0, 0.0};
    for (int k = 0; k < d; ++k) t += y(diag_index(k, d));
    return t;
  };

  DenseVec y = vec(rho0.dense());
  const cplx tr0 = trace_of(y);
  const auto& m = l.matrix;
  const long steps = static_cast<long>(std::ceil(t_final / dt - 1e-12));
  double t = 0.0;
  for (long k = 0; k < steps; ++k) {
    const double h = std::min(dt, t_final - t);
    const DenseVec k1 = m * y;
    const DenseVec k2 = m * (y + (0.5 * h) * k1);
    const DenseVec k3 = m * (y + (0.5 * h) * k2);
    const DenseVec k4 = m * (y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
    const double drift = std::abs(trace_of(y) - tr0);
    if (!(drift <= 1e-8)) {
      std::ostringstream os;
      os << "evolve: trace drift " << drift << " at t=" << t << " exceeds 1e-8; reduce dt (" << dt << ")";
      throw StepSizeError(os.str(), drift);
    }
  }
  return Operator(rho0.dims(), unvec(y, d));
}

}  // namespace tripartite
