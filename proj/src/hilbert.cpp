#include "tripartite/hilbert.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tripartite {

std::string to_string(Slot s) {
  switch (s) {
    case Slot::cavity: return "cavity";
    case Slot::qubit: return "qubit";
    case Slot::mech: return "mech";
  }
  return "?";
}

int SubsystemDims::slot_dim(Slot s) const {
  switch (s) {
    case Slot::cavity: return n_cavity;
    case Slot::qubit: return n_qubit();
    case Slot::mech: return n_mech;
  }
  return 0;
}

void SubsystemDims::validate() const {
  if (n_cavity < 2 || n_mech < 2) {
    throw DimensionError("Fock truncations must be at least 2, got " + to_string(*this));
  }
}

std::string to_string(const SubsystemDims& d) {
  std::ostringstream os;
  os << "(n_cavity=" << d.n_cavity << ", n_qubit=" << d.n_qubit() << ", n_mech=" << d.n_mech << ")";
  return os.str();
}

SparseMat pruned(SparseMat m) {
  m.prune([](Eigen::Index, Eigen::Index, const cplx& v) { return std::abs(v) >= kStructuralZero; });
  m.makeCompressed();
  return m;
}

SparseMat sparse_identity(int n) {
  SparseMat id(n, n);
  id.setIdentity();
  return id;
}

SparseMat kron(const SparseMat& a, const SparseMat& b) {
  const Eigen::Index br = b.rows(), bc = b.cols();
  std::vector<Eigen::Triplet<cplx>> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (Eigen::Index ja = 0; ja < a.outerSize(); ++ja) {
    for (SparseMat::InnerIterator ita(a, ja); ita; ++ita) {
      for (Eigen::Index jb = 0; jb < b.outerSize(); ++jb) {
        for (SparseMat::InnerIterator itb(b, jb); itb; ++itb) {
          trips.emplace_back(ita.row() * br + itb.row(), ita.col() * bc + itb.col(), ita.value() * itb.value());
        }
      }
    }
  }
  SparseMat out(a.rows() * br, a.cols() * bc);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

// ---------------------------------------------------------------------------

Operator::Operator(SubsystemDims dims, SparseMat matrix) : dims_(dims), matrix_(pruned(std::move(matrix))) {
  const int d = dims_.total();
  if (matrix_.rows() != d || matrix_.cols() != d) {
    std::ostringstream os;
    os << "operator shape " << matrix_.rows() << "x" << matrix_.cols() << " does not match dims " << to_string(dims_)
       << " (D=" << d << ")";
    throw DimensionError(os.str());
  }
}

Operator::Operator(SubsystemDims dims, const DenseMat& matrix) : Operator(dims, SparseMat(matrix.sparseView())) {}

Operator Operator::identity(const SubsystemDims& dims) { return Operator(dims, sparse_identity(dims.total())); }

Operator Operator::zero(const SubsystemDims& dims) { return Operator(dims, SparseMat(dims.total(), dims.total())); }

Operator Operator::dagger() const { return Operator(dims_, SparseMat(matrix_.adjoint())); }

double Operator::max_abs() const {
  double m = 0.0;
  for (Eigen::Index k = 0; k < matrix_.outerSize(); ++k)
    for (SparseMat::InnerIterator it(matrix_, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

double Operator::hermiticity_error() const {
  const SparseMat diff = matrix_ - SparseMat(matrix_.adjoint());
  double m = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
    for (SparseMat::InnerIterator it(diff, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

cplx Operator::trace() const {
  cplx t{0.0, 0.0};
  for (Eigen::Index k = 0; k < matrix_.outerSize(); ++k)
    for (SparseMat::InnerIterator it(matrix_, k); it; ++it)
      if (it.row() == it.col()) t += it.value();
  return t;
}

void Operator::check_same_dims(const Operator& other, const char* what) const {
  if (!(dims_ == other.dims_)) {
    throw DimensionError(std::string(what) + ": dims mismatch " + to_string(dims_) + " vs " + to_string(other.dims_));
  }
}

Operator& Operator::operator+=(const Operator& rhs) {
  check_same_dims(rhs, "add");
  matrix_ = pruned(matrix_ + rhs.matrix_);
  return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
  check_same_dims(rhs, "subtract");
  matrix_ = pruned(matrix_ - rhs.matrix_);
  return *this;
}

Operator& Operator::operator*=(cplx s) {
  matrix_ = pruned(matrix_ * s);
  return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
  a.check_same_dims(b, "multiply");
  return Operator(a.dims_, SparseMat(a.matrix_ * b.matrix_));
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

// ---------------------------------------------------------------------------

SparseMat annihilation(int n) {
  if (n < 2) throw DimensionError("annihilation operator needs at least 2 Fock levels, got " + std::to_string(n));
  std::vector<Eigen::Triplet<cplx>> trips;
  for (int k = 1; k < n; ++k) trips.emplace_back(k - 1, k, std::sqrt(static_cast<double>(k)));
  SparseMat a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

Eigen::Matrix2cd pauli(Pauli which) {
  const cplx i{0.0, 1.0};
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  switch (which) {
    case Pauli::x: m << 0.0, 1.0, 1.0, 0.0; break;
    case Pauli::y: m << 0.0, -i, i, 0.0; break;
    case Pauli::z: m << 1.0, 0.0, 0.0, -1.0; break;
    case Pauli::plus: m(0, 1) = 1.0; break;
    case Pauli::minus: m(1, 0) = 1.0; break;
  }
  return m;
}

Operator embed(const SparseMat& local, Slot slot, const SubsystemDims& dims) {
  const int n = dims.slot_dim(slot);
  if (local.rows() != n || local.cols() != n) {
    std::ostringstream os;
    os << "embed: local operator is " << local.rows() << "x" << local.cols() << " but slot " << to_string(slot)
       << " has dimension " << n;
    throw DimensionError(os.str());
  }
  const auto sd = dims.slot_dims();
  SparseMat out(1, 1);
  out.insert(0, 0) = 1.0;
  for (int s = 0; s < 3; ++s) {
    out = kron(out, s == static_cast<int>(slot) ? local : sparse_identity(sd[s]));
  }
  return Operator(dims, std::move(out));
}

Operator embed(const DenseMat& local, Slot slot, const SubsystemDims& dims) {
  return embed(SparseMat(local.sparseView()), slot, dims);
}

cplx expectation(const Operator& op, const Operator& rho) {
  if (!(op.dims() == rho.dims())) {
    throw DimensionError("expectation: dims mismatch " + to_string(op.dims()) + " vs " + to_string(rho.dims()));
  }
  // Tr(A B) = sum_ij A_ij B_ji
  const SparseMat bt = rho.matrix().transpose();
  return op.matrix().cwiseProduct(bt).sum();
}

DenseMat partial_trace(const Operator& rho, std::initializer_list<Slot> keep) {
  return partial_trace(rho, std::vector<Slot>(keep));
}

DenseMat partial_trace(const Operator& rho, const std::vector<Slot>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
  const auto sd = rho.dims().slot_dims();
  std::array<bool, 3> kept{false, false, false};
  for (Slot s : keep) kept[static_cast<int>(s)] = true;

  int n_keep = 1;
  for (int s = 0; s < 3; ++s)
    if (kept[s]) n_keep *= sd[s];

  // reduced index of a full multi-index, counting only kept slots in slot order
  auto reduced_index = [&](const std::array<int, 3>& idx) {
    int r = 0;
    for (int s = 0; s < 3; ++s)
      if (kept[s]) r = r * sd[s] + idx[s];
    return r;
  };
  auto split = [&](Eigen::Index flat) {
    std::array<int, 3> idx{};
    for (int s = 2; s >= 0; --s) {
      idx[s] = static_cast<int>(flat % sd[s]);
      flat /= sd[s];
    }
    return idx;
  };

  DenseMat out = DenseMat::Zero(n_keep, n_keep);
  const SparseMat& m = rho.matrix();
  for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(m, k); it; ++it) {
      const auto ri = split(it.row());
      const auto ci = split(it.col());
      bool diagonal_in_traced = true;
      for (int s = 0; s < 3; ++s)
        if (!kept[s] && ri[s] != ci[s]) diagonal_in_traced = false;
      if (diagonal_in_traced) out(reduced_index(ri), reduced_index(ci)) += it.value();
    }
  }
  return out;
}

double trace_distance(const DenseMat& a, const DenseMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("trace_distance: shape mismatch");
  const DenseMat diff = a - b;
  const DenseMat herm = 0.5 * (diff + diff.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMat> es(herm, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace tripartite
