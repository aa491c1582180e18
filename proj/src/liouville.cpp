#include "tripartite/liouville.hpp"

#include "tripartite/model.hpp"

#include <cmath>
#include <sstream>

namespace tripartite {

DenseVec vec(const DenseMat& x) { return Eigen::Map<const DenseVec>(x.data(), x.size()); }

DenseMat unvec(const DenseVec& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim) throw DimensionError("unvec: length is not dim^2");
  return Eigen::Map<const DenseMat>(v.data(), dim, dim);
}

SparseMat dissipator_superop(const CollapseChannel& ch) {
  if (!(ch.rate >= 0.0)) {
    std::ostringstream os;
    os << "collapse channel rate must be nonnegative, got " << ch.rate;
    throw std::invalid_argument(os.str());
  }
  const int d = ch.op.dim();
  if (ch.rate == 0.0) return SparseMat(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(d) * d);

  const SparseMat& c = ch.op.matrix();
  const SparseMat cdc = pruned(c.adjoint() * c);
  const SparseMat id = sparse_identity(d);
  SparseMat out = kron(SparseMat(c.conjugate()), c);
  out -= 0.5 * kron(id, cdc);
  out -= 0.5 * kron(SparseMat(cdc.transpose()), id);
  return pruned(ch.rate * out);
}

SparseMat hamiltonian_superop(const Operator& h) {
  const double herr = h.hermiticity_error();
  if (herr > kHermitianTolerance) {
    std::ostringstream os;
    os << "Hamiltonian is not Hermitian: max |H - H^dagger| = " << herr;
    throw NonHermitianError(os.str());
  }
  const int d = h.dim();
  const SparseMat id = sparse_identity(d);
  const SparseMat& m = h.matrix();
  SparseMat out = kron(id, m) - kron(SparseMat(m.transpose()), id);
  return pruned(cplx(0.0, -1.0) * out);
}

Liouvillian build_liouvillian(const Operator& h, const std::vector<CollapseChannel>& channels) {
  SparseMat l = hamiltonian_superop(h);
  for (const auto& ch : channels) {
    if (!(ch.op.dims() == h.dims())) {
      throw DimensionError("build_liouvillian: collapse operator dims " + to_string(ch.op.dims()) +
                           " differ from Hamiltonian dims " + to_string(h.dims()));
    }
    if (ch.rate == 0.0) continue;
    l += dissipator_superop(ch);
  }
  return {h.dims(), pruned(std::move(l))};
}

std::vector<CollapseChannel> tripartite_channels(const SystemParams& p, const SubsystemDims& dims_in) {
  SubsystemDims dims = dims_in;
  dims.has_qubit = true;
  const Operator a = embed(annihilation(dims.n_cavity), Slot::cavity, dims);
  const Operator sm = embed(DenseMat(pauli(Pauli::minus)), Slot::qubit, dims);
  const Operator b = embed(annihilation(dims.n_mech), Slot::mech, dims);
  return {
      {p.kappa, a},
      {p.gamma_a, sm},
      {p.gamma_m * (p.n_th + 1.0), b},
      {p.gamma_m * p.n_th, b.dagger()},
  };
}

std::vector<CollapseChannel> optomechanical_channels(const SystemParams& p, const SubsystemDims& dims_in) {
  const SubsystemDims dims = dims_in.without_qubit();
  const Operator a = embed(annihilation(dims.n_cavity), Slot::cavity, dims);
  const Operator b = embed(annihilation(dims.n_mech), Slot::mech, dims);
  return {
      {p.kappa, a},
      {p.gamma_m * (p.n_th + 1.0), b},
      {p.gamma_m * p.n_th, b.dagger()},
  };
}

DenseVec trace_row(const Liouvillian& l) {
  const int d = l.hilbert_dim();
  DenseVec id_vec = DenseVec::Zero(static_cast<Eigen::Index>(d) * d);
  for (int k = 0; k < d; ++k) id_vec(k + static_cast<Eigen::Index>(k) * d) = 1.0;
  return (id_vec.transpose() * l.matrix).transpose();
}

}  // namespace tripartite
