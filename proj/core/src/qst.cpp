#include "ttc/qst.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>

namespace ttc {

namespace {

std::size_t as_size(Index i) { return static_cast<std::size_t>(i); }

const std::array<Eigen::Matrix2cd, 4>& pauli_table() {
  static const std::array<Eigen::Matrix2cd, 4> table = [] {
    const Complex i(0.0, 1.0);
    std::array<Eigen::Matrix2cd, 4> t;
    t[0] << 1.0, 0.0, 0.0, 1.0;
    t[1] << 0.0, 1.0, 1.0, 0.0;
    t[2] << 0.0, -i, i, 0.0;
    t[3] << 1.0, 0.0, 0.0, -1.0;
    return t;
  }();
  return table;
}

// Unitary change of basis on a paired bond a + s a' whose columns are fixed
// by v(a, a') -> conj(v(a', a)).
ComplexMatrix real_pair_basis(Index s) {
  const Index n = s * s;
  ComplexMatrix b = ComplexMatrix::Zero(n, n);
  const double h = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  Index col = 0;
  for (Index a = 0; a < s; ++a) b(a + s * a, col++) = 1.0;
  for (Index a = 0; a < s; ++a) {
    for (Index c = a + 1; c < s; ++c) {
      b(a + s * c, col) = h;
      b(c + s * a, col) = h;
      ++col;
      b(a + s * c, col) = i * h;
      b(c + s * a, col) = -i * h;
      ++col;
    }
  }
  return b;
}

MpoCore adjoint_core(const MpoCore& x) {
  MpoCore out(x.left_rank(), x.right_rank());
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out.set_block(i, j, x.block(j, i).conjugate());
  }
  return out;
}

Mpo adjoint(const Mpo& rho) {
  std::vector<MpoCore> cores;
  for (const auto& c : rho.cores()) cores.push_back(adjoint_core(c));
  return Mpo(std::move(cores));
}

}  // namespace

const Eigen::Matrix2cd& pauli(int a) { return pauli_table().at(static_cast<std::size_t>(a)); }

// ---------------------------------------------------------------------------
// Containers

MpoCore::MpoCore(Index left, Index right)
    : left_(left), right_(right), data_(as_size(left * 4 * right), Complex(0.0, 0.0)) {
  if (left < 1 || right < 1) throw ShapeError("MPO core ranks must be positive");
}

ComplexMatrix MpoCore::block(int i, int j) const {
  ComplexMatrix m(left_, right_);
  for (Index b = 0; b < right_; ++b) {
    for (Index a = 0; a < left_; ++a) m(a, b) = (*this)(a, i, j, b);
  }
  return m;
}

void MpoCore::set_block(int i, int j, const ComplexMatrix& m) {
  if (m.rows() != left_ || m.cols() != right_) throw ShapeError("MPO block has the wrong shape");
  for (Index b = 0; b < right_; ++b) {
    for (Index a = 0; a < left_; ++a) (*this)(a, i, j, b) = m(a, b);
  }
}

Mpo::Mpo(std::vector<MpoCore> cores, std::vector<Index> mps_bonds)
    : cores_(std::move(cores)), mps_bonds_(std::move(mps_bonds)) {
  if (cores_.empty()) throw ShapeError("MPO needs at least one core");
  if (cores_.front().left_rank() != 1 || cores_.back().right_rank() != 1) {
    throw ShapeError("MPO boundary ranks must be 1");
  }
  for (std::size_t k = 0; k + 1 < cores_.size(); ++k) {
    if (cores_[k].right_rank() != cores_[k + 1].left_rank()) throw ShapeError("MPO ranks do not chain");
  }
  if (!mps_bonds_.empty()) {
    if (mps_bonds_.size() + 1 != cores_.size()) throw ShapeError("MPS bond list has the wrong length");
    for (std::size_t k = 0; k < mps_bonds_.size(); ++k) {
      if (mps_bonds_[k] * mps_bonds_[k] != cores_[k].right_rank()) {
        throw ShapeError("MPO bond is not the square of the MPS bond");
      }
    }
  }
}

std::vector<Index> Mpo::bond_dims() const {
  std::vector<Index> out;
  for (std::size_t k = 0; k + 1 < cores_.size(); ++k) out.push_back(cores_[k].right_rank());
  return out;
}

// ---------------------------------------------------------------------------
// Generators

Mps random_mps(int n, Index bond, std::uint64_t seed) {
  if (n < 1 || n > kMaxOrder) throw DomainError("qubit count must be in 1.." + std::to_string(kMaxOrder));
  if (bond < 1) throw DomainError("bond dimension must be positive");
  Mps u;
  for (int k = 1; k < n; ++k) {
    const Index left_cap = Index{1} << k;
    const Index right_cap = Index{1} << (n - k);
    u.bonds.push_back(std::min({bond, left_cap, right_cap}));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double h = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < n; ++k) {
    std::vector<Complex> core(as_size(u.bond(as_size(k)) * 2 * u.bond(as_size(k) + 1)));
    for (Complex& z : core) {
      const double re = normal(rng);
      const double im = normal(rng);
      z = Complex(re * h, im * h);
    }
    u.cores.push_back(std::move(core));
  }
  const double norm = mps_to_dense(u).norm();
  for (Complex& z : u.cores.back()) z /= norm;
  return u;
}

Mps product_mps(const std::vector<Eigen::Vector2cd>& states) {
  if (states.empty()) throw ShapeError("product state needs at least one qubit");
  Mps u;
  u.bonds.assign(states.size() - 1, 1);
  for (const auto& v : states) {
    const double nv = v.norm();
    if (!(nv > 0.0)) throw DomainError("product state factor is zero");
    u.cores.push_back({v(0) / nv, v(1) / nv});
  }
  return u;
}

Mpo density_from_mps(const Mps& u) {
  std::vector<MpoCore> cores;
  const std::size_t n = u.cores.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Index l = u.bond(k);
    const Index r = u.bond(k + 1);
    const auto& c = u.cores[k];
    auto at = [&](Index a, int s, Index b) { return c[as_size(a + l * (s + 2 * b))]; };
    MpoCore x(l * l, r * r);
    for (Index b = 0; b < r; ++b) {
      for (Index bp = 0; bp < r; ++bp) {
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            for (Index a = 0; a < l; ++a) {
              for (Index ap = 0; ap < l; ++ap) {
                x(a + l * ap, i, j, b + r * bp) = at(a, i, b) * std::conj(at(ap, j, bp));
              }
            }
          }
        }
      }
    }
    cores.push_back(std::move(x));
  }
  return Mpo(std::move(cores), u.bonds);
}

Mpo qst_random_mpo(int n, Index bond, std::uint64_t seed) { return density_from_mps(random_mps(n, bond, seed)); }

Mpo product_mpo(const std::vector<Eigen::Matrix2cd>& factors) {
  if (factors.empty()) throw ShapeError("product operator needs at least one qubit");
  std::vector<MpoCore> cores;
  for (const auto& f : factors) {
    MpoCore x(1, 1);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) x(0, i, j, 0) = f(i, j);
    }
    cores.push_back(std::move(x));
  }
  return Mpo(std::move(cores));
}

// ---------------------------------------------------------------------------
// Measurement tensor

TTTensor pauli_tt(const Mpo& rho) {
  const int n = rho.qubits();
  const bool paired = !rho.mps_bonds().empty();
  std::vector<ComplexMatrix> basis;
  if (paired) {
    for (Index s : rho.mps_bonds()) basis.push_back(real_pair_basis(s));
  }
  std::vector<Core> cores;
  for (int k = 0; k < n; ++k) {
    const MpoCore& x = rho.core(k);
    Core y(x.left_rank(), 4, x.right_rank());
    double scale = 0.0;
    double worst_imag = 0.0;
    for (int a = 0; a < 4; ++a) {
      const auto& s = pauli(a);
      ComplexMatrix block = ComplexMatrix::Zero(x.left_rank(), x.right_rank());
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          if (s(j, i) != Complex(0.0, 0.0)) block += s(j, i) * x.block(i, j);
        }
      }
      if (paired) {
        if (k > 0) block = basis[as_size(k - 1)].adjoint() * block;
        if (k + 1 < n) block = block * basis[as_size(k)];
      }
      scale = std::max(scale, block.cwiseAbs().maxCoeff());
      worst_imag = std::max(worst_imag, block.imag().cwiseAbs().maxCoeff());
      y.slice(a) = block.real();
    }
    if (worst_imag > 1e-12 * std::max(1.0, scale)) {
      throw ConsistencyError("Pauli measurement core " + std::to_string(k + 1) +
                             " has an imaginary part of " + std::to_string(worst_imag));
    }
    cores.push_back(std::move(y));
  }
  return TTTensor(std::move(cores));
}

Mpo reconstruct_density(const TTTensor& t) {
  std::vector<MpoCore> cores;
  for (int k = 0; k < t.order(); ++k) {
    const Core& y = t.core(k);
    if (y.mode_size() != 4) throw ShapeError("Pauli measurement tensors have mode size 4");
    MpoCore x(y.left_rank(), y.right_rank());
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        ComplexMatrix block = ComplexMatrix::Zero(y.left_rank(), y.right_rank());
        for (int a = 0; a < 4; ++a) {
          const Complex s = pauli(a)(i, j);
          if (s != Complex(0.0, 0.0)) block += 0.5 * s * y.slice(a).cast<Complex>();
        }
        x.set_block(i, j, block);
      }
    }
    cores.push_back(std::move(x));
  }
  return Mpo(std::move(cores));
}

// ---------------------------------------------------------------------------
// Contractions

Complex mpo_trace(const Mpo& rho) {
  ComplexMatrix v = ComplexMatrix::Ones(1, 1);
  for (const auto& x : rho.cores()) v = v * (x.block(0, 0) + x.block(1, 1));
  return v(0, 0);
}

Complex trace_product(const Mpo& a, const Mpo& b) {
  if (a.qubits() != b.qubits()) throw ShapeError("MPOs act on different qubit counts");
  ComplexMatrix v = ComplexMatrix::Ones(1, 1);
  for (int k = 0; k < a.qubits(); ++k) {
    const auto& x = a.core(k);
    const auto& y = b.core(k);
    ComplexMatrix next = ComplexMatrix::Zero(x.right_rank(), y.right_rank());
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) next += x.block(i, j).transpose() * v * y.block(j, i);
    }
    v = std::move(next);
  }
  return v(0, 0);
}

Complex hs_inner(const Mpo& a, const Mpo& b) {
  if (a.qubits() != b.qubits()) throw ShapeError("MPOs act on different qubit counts");
  ComplexMatrix v = ComplexMatrix::Ones(1, 1);
  for (int k = 0; k < a.qubits(); ++k) {
    const auto& x = a.core(k);
    const auto& y = b.core(k);
    ComplexMatrix next = ComplexMatrix::Zero(x.right_rank(), y.right_rank());
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) next += x.block(i, j).adjoint() * v * y.block(i, j);
    }
    v = std::move(next);
  }
  return v(0, 0);
}

double fidelity_diag(const Mpo& rho_true, const Mpo& rho_rec) { return trace_product(rho_true, rho_rec).real(); }

double hermiticity_deviation(const Mpo& rho) {
  if (rho.qubits() <= 10) {
    const ComplexMatrix d = mpo_to_dense(rho);
    const double norm = d.norm();
    return norm > 0.0 ? (d - d.adjoint()).norm() / norm : 0.0;
  }
  const double sq = hs_inner(rho, rho).real();
  const double cross = trace_product(rho, rho).real();
  return sq > 0.0 ? std::sqrt(std::max(0.0, 2.0 * (sq - cross)) / sq) : 0.0;
}

Mpo hermitian_part(const Mpo& rho) {
  const Mpo adj = adjoint(rho);
  const int n = rho.qubits();
  std::vector<MpoCore> cores;
  for (int k = 0; k < n; ++k) {
    const auto& x = rho.core(k);
    const auto& y = adj.core(k);
    const double w = k == 0 ? 0.5 : 1.0;
    const Index l1 = x.left_rank();
    const Index r1 = x.right_rank();
    const Index l = k == 0 ? 1 : 2 * l1;
    const Index r = k + 1 == n ? 1 : 2 * r1;
    MpoCore z(l, r);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        ComplexMatrix blk = ComplexMatrix::Zero(l, r);
        const ComplexMatrix bx = w * x.block(i, j);
        const ComplexMatrix by = w * y.block(i, j);
        if (n == 1) {
          blk = bx + by;
        } else if (k == 0) {
          blk << bx, by;
        } else if (k + 1 == n) {
          blk.topRows(l1) = bx;
          blk.bottomRows(l1) = by;
        } else {
          blk.topLeftCorner(l1, r1) = bx;
          blk.bottomRightCorner(l1, r1) = by;
        }
        z.set_block(i, j, blk);
      }
    }
    cores.push_back(std::move(z));
  }
  return Mpo(std::move(cores));
}

Mpo normalize_trace(const Mpo& rho, double* trace_before) {
  const Complex tr = mpo_trace(rho);
  if (trace_before != nullptr) *trace_before = tr.real();
  if (std::abs(tr) == 0.0) throw DomainError("cannot normalize an operator with zero trace");
  Mpo out = rho;
  for (Complex& z : out.mutable_core(0).data()) z /= tr;
  return out;
}

ComplexMatrix mpo_to_dense(const Mpo& rho) {
  const int n = rho.qubits();
  if (n > 12) throw CapacityError("dense density matrices are limited to 12 qubits");
  // state(I + D J + D^2 a) over row I, column J of the first k qubits.
  std::vector<Complex> state(1, Complex(1.0, 0.0));
  Index dim = 1;
  Index rank = 1;
  for (int k = 0; k < n; ++k) {
    const auto& x = rho.core(k);
    const Index nd = 2 * dim;
    const Index nr = x.right_rank();
    std::vector<Complex> next(as_size(nd * nd * nr), Complex(0.0, 0.0));
    for (Index b = 0; b < nr; ++b) {
      for (Index a = 0; a < rank; ++a) {
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            const Complex c = x(a, i, j, b);
            if (c == Complex(0.0, 0.0)) continue;
            for (Index col = 0; col < dim; ++col) {
              const Complex* src = &state[as_size(dim * (col + dim * a))];
              Complex* dst = &next[as_size(dim * i + nd * (col + dim * j + nd * b))];
              for (Index row = 0; row < dim; ++row) dst[row] += c * src[row];
            }
          }
        }
      }
    }
    state = std::move(next);
    dim = nd;
    rank = nr;
  }
  return Eigen::Map<const ComplexMatrix>(state.data(), dim, dim);
}

Eigen::VectorXcd mps_to_dense(const Mps& u) {
  const std::size_t n = u.cores.size();
  if (n > 24) throw CapacityError("dense state vectors are limited to 24 qubits");
  ComplexMatrix state = ComplexMatrix::Ones(1, 1);  // 2^k x s_k
  for (std::size_t k = 0; k < n; ++k) {
    const Index l = u.bond(k);
    const Index r = u.bond(k + 1);
    const auto& c = u.cores[k];
    ComplexMatrix next(2 * state.rows(), r);
    for (int s = 0; s < 2; ++s) {
      ComplexMatrix slice(l, r);
      for (Index b = 0; b < r; ++b) {
        for (Index a = 0; a < l; ++a) slice(a, b) = c[as_size(a + l * (s + 2 * b))];
      }
      // The new qubit is the most significant index.
      next.middleRows(s * state.rows(), state.rows()) = state * slice;
    }
    state = std::move(next);
  }
  return state.col(0);
}

}  // namespace ttc
