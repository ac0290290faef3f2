#pragma once

// Quantum state tomography helpers. Complex arithmetic is confined to this
// header; the completion problem itself is the real Pauli measurement tensor
//
//   Y(a_1, .., a_n) = Tr(rho (sigma_{a_1} (x) .. (x) sigma_{a_n}))
//
// with sigma_1 = I, sigma_2 = X, sigma_3 = Y, sigma_4 = Z. Dense density
// matrices use the qubit-1-fastest basis ordering, matching the tensor
// linearization.

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ttc/tensor.hpp"

namespace ttc {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// sigma_1..sigma_4 for a = 0..3.
const Eigen::Matrix2cd& pauli(int a);

/// Order-4 complex core X(a, i, j, b), i the row and j the column qubit index.
/// Storage offset a + left * (i + 2 * (j + 2 * b)).
class MpoCore {
 public:
  MpoCore() = default;
  MpoCore(Index left, Index right);

  Index left_rank() const { return left_; }
  Index right_rank() const { return right_; }
  Complex operator()(Index a, int i, int j, Index b) const { return data_[offset(a, i, j, b)]; }
  Complex& operator()(Index a, int i, int j, Index b) { return data_[offset(a, i, j, b)]; }
  /// X(:, i, j, :) as a left x right matrix.
  ComplexMatrix block(int i, int j) const;
  void set_block(int i, int j, const ComplexMatrix& m);
  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }

 private:
  std::size_t offset(Index a, int i, int j, Index b) const {
    return static_cast<std::size_t>(a + left_ * (i + 2 * (j + 2 * b)));
  }
  Index left_ = 0;
  Index right_ = 0;
  std::vector<Complex> data_;
};

/// Matrix product state cores U(a, s, b), stored as in Core.
struct Mps {
  std::vector<Index> bonds;  // s_1..s_{n-1}
  std::vector<std::vector<Complex>> cores;
  int qubits() const { return static_cast<int>(cores.size()); }
  Index bond(std::size_t k) const { return k == 0 || k > bonds.size() ? 1 : bonds[k - 1]; }
};

class Mpo {
 public:
  Mpo() = default;
  /// Validates boundary ranks and neighbouring agreement.
  explicit Mpo(std::vector<MpoCore> cores, std::vector<Index> mps_bonds = {});

  int qubits() const { return static_cast<int>(cores_.size()); }
  const std::vector<MpoCore>& cores() const { return cores_; }
  const MpoCore& core(int k) const { return cores_[static_cast<std::size_t>(k)]; }
  MpoCore& mutable_core(int k) { return cores_[static_cast<std::size_t>(k)]; }
  /// r_1..r_{n-1}.
  std::vector<Index> bond_dims() const;
  /// Non-empty when the operator is u u^dagger of an MPS with these bonds;
  /// bond index a + s a' then pairs U(a) with conj(U(a')).
  const std::vector<Index>& mps_bonds() const { return mps_bonds_; }

 private:
  std::vector<MpoCore> cores_;
  std::vector<Index> mps_bonds_;
};

/// Complex Gaussian MPS on n qubits with bonds min(bond, 2^k, 2^{n-k}),
/// normalized to unit norm.
Mps random_mps(int n, Index bond, std::uint64_t seed);
/// u u^dagger with bond dims s_k^2.
Mpo density_from_mps(const Mps& u);
/// density_from_mps(random_mps(n, bond, seed)); trace 1.
Mpo qst_random_mpo(int n, Index bond, std::uint64_t seed);
/// Product state |v_1> (x) .. (x) |v_n> as a bond-1 MPS (each v normalized).
Mps product_mps(const std::vector<Eigen::Vector2cd>& states);
/// Single-qubit-per-core operator rho_1 (x) .. (x) rho_n.
Mpo product_mpo(const std::vector<Eigen::Matrix2cd>& factors);

/// Pauli measurement tensor as a real TT with d_k = 4 and the MPO bond dims.
/// ConsistencyError when an imaginary part above 1e-12 (relative to the
/// core scale) survives.
TTTensor pauli_tt(const Mpo& rho);
/// X_k(:, i, j, :) = 1/2 sum_a Y_k(:, a, :) sigma_a(i, j).
Mpo reconstruct_density(const TTTensor& t);

/// Tr(rho).
Complex mpo_trace(const Mpo& rho);
/// Tr(a b) by transfer matrices.
Complex trace_product(const Mpo& a, const Mpo& b);
/// Tr(a^dagger b).
Complex hs_inner(const Mpo& a, const Mpo& b);
/// Re Tr(rho_true rho_rec); for a pure rho_true = u u^dagger this is
/// u^dagger rho_rec u.
double fidelity_diag(const Mpo& rho_true, const Mpo& rho_rec);
/// ||rho - rho^dagger||_F / ||rho||_F.
double hermiticity_deviation(const Mpo& rho);
/// (rho + rho^dagger) / 2 with doubled bonds.
Mpo hermitian_part(const Mpo& rho);
/// rho / Tr(rho); `trace_before` receives the real part of the old trace.
Mpo normalize_trace(const Mpo& rho, double* trace_before = nullptr);
/// Dense 2^n x 2^n matrix, n <= 12 (CapacityError above).
ComplexMatrix mpo_to_dense(const Mpo& rho);
/// Dense state vector of length 2^n.
Eigen::VectorXcd mps_to_dense(const Mps& u);

}  // namespace ttc
