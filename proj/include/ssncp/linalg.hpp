#pragma once

// Symmetric block-diagonal matrices, sparse constraint operators and the
// symmetric eigendecomposition used throughout the solver.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssncp {

/// Operands do not conform (block structure, lengths, index ranges).
struct StructuralError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Non-finite input or a numerical breakdown.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Index = Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Element of S^n = S^{n_1} x ... x S^{n_p}, stored as dense symmetric blocks.
template <typename Scalar>
class SymBlockMat {
 public:
  using Block = DenseMatrix<Scalar>;

  SymBlockMat() = default;

  explicit SymBlockMat(const std::vector<Index>& dims) {
    blocks_.reserve(dims.size());
    for (Index d : dims) {
      if (d <= 0) throw StructuralError("block dimension must be positive");
      blocks_.push_back(Block::Zero(d, d));
    }
  }

  /// Takes ownership of square blocks; each block is symmetrized on entry.
  explicit SymBlockMat(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
    for (auto& b : blocks_) {
      if (b.rows() != b.cols() || b.rows() == 0)
        throw StructuralError("SymBlockMat blocks must be square and non-empty");
    }
    symmetrize();
  }

  static SymBlockMat zeros(const std::vector<Index>& dims) { return SymBlockMat(dims); }

  static SymBlockMat identity(const std::vector<Index>& dims) {
    SymBlockMat out(dims);
    for (auto& b : out.blocks_) b.setIdentity();
    return out;
  }

  static SymBlockMat constant(const std::vector<Index>& dims, Scalar value) {
    SymBlockMat out(dims);
    for (auto& b : out.blocks_) b.setConstant(value);
    return out;
  }

  std::size_t num_blocks() const { return blocks_.size(); }
  const Block& block(std::size_t k) const { return blocks_[k]; }
  /// Mutable access; the caller keeps the block symmetric.
  Block& block(std::size_t k) { return blocks_[k]; }
  const std::vector<Block>& blocks() const { return blocks_; }

  std::vector<Index> dims() const {
    std::vector<Index> d;
    d.reserve(blocks_.size());
    for (const auto& b : blocks_) d.push_back(b.rows());
    return d;
  }

  /// Sum of block dimensions.
  Index dim() const {
    Index n = 0;
    for (const auto& b : blocks_) n += b.rows();
    return n;
  }

  /// Number of stored scalars (sum of n_k^2).
  Index storage_size() const {
    Index s = 0;
    for (const auto& b : blocks_) s += b.size();
    return s;
  }

  bool conforms(const SymBlockMat& other) const {
    if (blocks_.size() != other.blocks_.size()) return false;
    for (std::size_t k = 0; k < blocks_.size(); ++k)
      if (blocks_[k].rows() != other.blocks_[k].rows()) return false;
    return true;
  }

  void symmetrize() {
    for (auto& b : blocks_) {
      Block t = b.transpose();
      b = Scalar(0.5) * (b + t);
    }
  }

  void set_zero() {
    for (auto& b : blocks_) b.setZero();
  }

  bool all_finite() const {
    for (const auto& b : blocks_)
      if (!b.allFinite()) return false;
    return true;
  }

  Scalar squared_norm() const {
    Scalar s(0);
    for (const auto& b : blocks_) s += b.squaredNorm();
    return s;
  }
  Scalar norm() const { return std::sqrt(squared_norm()); }

  Scalar min_coeff() const {
    Scalar m = std::numeric_limits<Scalar>::infinity();
    for (const auto& b : blocks_) m = std::min(m, b.minCoeff());
    return m;
  }

  /// Elementwise map f(value) -> value; f must be symmetric-preserving (any scalar map is).
  template <typename F>
  SymBlockMat cwise(F&& f) const {
    SymBlockMat out(*this);
    for (auto& b : out.blocks_) b = b.unaryExpr(f);
    return out;
  }

  /// Elementwise binary map with a conformant operand.
  template <typename F>
  SymBlockMat cwise(const SymBlockMat& other, F&& f) const {
    require_conform(other);
    SymBlockMat out(*this);
    for (std::size_t k = 0; k < blocks_.size(); ++k)
      out.blocks_[k] = blocks_[k].binaryExpr(other.blocks_[k], f);
    return out;
  }

  /// Block-diagonal dense n x n materialization.
  Block to_dense() const {
    const Index n = dim();
    Block out = Block::Zero(n, n);
    Index off = 0;
    for (const auto& b : blocks_) {
      out.block(off, off, b.rows(), b.rows()) = b;
      off += b.rows();
    }
    return out;
  }

  SymBlockMat& operator+=(const SymBlockMat& o) {
    require_conform(o);
    for (std::size_t k = 0; k < blocks_.size(); ++k) blocks_[k] += o.blocks_[k];
    return *this;
  }
  SymBlockMat& operator-=(const SymBlockMat& o) {
    require_conform(o);
    for (std::size_t k = 0; k < blocks_.size(); ++k) blocks_[k] -= o.blocks_[k];
    return *this;
  }
  SymBlockMat& operator*=(Scalar s) {
    for (auto& b : blocks_) b *= s;
    return *this;
  }
  /// this += a * x
  SymBlockMat& axpy(Scalar a, const SymBlockMat& x) {
    require_conform(x);
    for (std::size_t k = 0; k < blocks_.size(); ++k) blocks_[k] += a * x.blocks_[k];
    return *this;
  }

  void require_conform(const SymBlockMat& o) const {
    if (!conforms(o)) throw StructuralError("SymBlockMat block structures differ");
  }

 private:
  std::vector<Block> blocks_;
};

template <typename Scalar>
SymBlockMat<Scalar> operator+(SymBlockMat<Scalar> a, const SymBlockMat<Scalar>& b) {
  return a += b;
}
template <typename Scalar>
SymBlockMat<Scalar> operator-(SymBlockMat<Scalar> a, const SymBlockMat<Scalar>& b) {
  return a -= b;
}
template <typename Scalar>
SymBlockMat<Scalar> operator-(SymBlockMat<Scalar> a) {
  return a *= Scalar(-1);
}
template <typename Scalar>
SymBlockMat<Scalar> operator*(Scalar s, SymBlockMat<Scalar> a) {
  return a *= s;
}
template <typename Scalar>
SymBlockMat<Scalar> operator*(SymBlockMat<Scalar> a, Scalar s) {
  return a *= s;
}

/// Frobenius inner product <A, B> = sum_k tr(A_k B_k).
template <typename Scalar>
Scalar inner(const SymBlockMat<Scalar>& a, const SymBlockMat<Scalar>& b) {
  a.require_conform(b);
  Scalar s(0);
  for (std::size_t k = 0; k < a.num_blocks(); ++k) s += a.block(k).cwiseProduct(b.block(k)).sum();
  return s;
}

template <typename Scalar>
SymBlockMat<Scalar> hadamard(const SymBlockMat<Scalar>& a, const SymBlockMat<Scalar>& b) {
  return a.cwise(b, [](Scalar x, Scalar y) { return x * y; });
}

/// The linear map A : S^n -> R^m, A(X)_i = <A_i, X>, with each A_i stored as
/// lower-triangle triplets of a symmetric matrix.
template <typename Scalar>
class ConstraintMap {
 public:
  struct Entry {
    Index block;
    Index row;  // row >= col
    Index col;
    Scalar value;
  };

  ConstraintMap() = default;
  ConstraintMap(std::vector<Index> block_dims, Index m)
      : block_dims_(std::move(block_dims)), coeffs_(static_cast<std::size_t>(m)) {
    if (m < 0) throw StructuralError("negative constraint count");
    for (Index d : block_dims_)
      if (d <= 0) throw StructuralError("block dimension must be positive");
  }

  Index m() const { return static_cast<Index>(coeffs_.size()); }
  const std::vector<Index>& block_dims() const { return block_dims_; }
  const std::vector<Entry>& entries(Index i) const { return coeffs_.at(static_cast<std::size_t>(i)); }

  /// Sets coefficient (row, col) == (col, row) of A_i. Upper-triangle input is
  /// mirrored to the lower triangle; repeated entries accumulate.
  void add_entry(Index i, Index block, Index row, Index col, Scalar value) {
    if (i < 0 || i >= m()) throw StructuralError("constraint index out of range");
    if (block < 0 || block >= static_cast<Index>(block_dims_.size()))
      throw StructuralError("block index out of range");
    const Index d = block_dims_[static_cast<std::size_t>(block)];
    if (row < 0 || col < 0 || row >= d || col >= d)
      throw StructuralError("coefficient index out of range");
    if (row < col) std::swap(row, col);
    coeffs_[static_cast<std::size_t>(i)].push_back({block, row, col, value});
  }

  std::size_t nnz() const {
    std::size_t s = 0;
    for (const auto& c : coeffs_) s += c.size();
    return s;
  }

  bool conforms(const SymBlockMat<Scalar>& x) const {
    if (x.num_blocks() != block_dims_.size()) return false;
    for (std::size_t k = 0; k < block_dims_.size(); ++k)
      if (x.block(k).rows() != block_dims_[k]) return false;
    return true;
  }

  /// A(X); off-diagonal triplets contribute twice (symmetric inner product).
  DenseVector<Scalar> apply(const SymBlockMat<Scalar>& x) const {
    if (!conforms(x)) throw StructuralError("apply_A: matrix does not match constraint block structure");
    DenseVector<Scalar> out(m());
    for (Index i = 0; i < m(); ++i) {
      Scalar s(0);
      for (const Entry& e : coeffs_[static_cast<std::size_t>(i)]) {
        const Scalar v = x.block(static_cast<std::size_t>(e.block))(e.row, e.col);
        s += (e.row == e.col ? e.value : Scalar(2) * e.value) * v;
      }
      out[i] = s;
    }
    return out;
  }

  /// A*(y) = sum_i y_i A_i.
  SymBlockMat<Scalar> adjoint(const DenseVector<Scalar>& y) const {
    if (y.size() != m()) throw StructuralError("apply_At: vector length differs from constraint count");
    SymBlockMat<Scalar> out(block_dims_);
    for (Index i = 0; i < m(); ++i) {
      const Scalar yi = y[i];
      if (yi == Scalar(0)) continue;
      for (const Entry& e : coeffs_[static_cast<std::size_t>(i)]) {
        auto& b = out.block(static_cast<std::size_t>(e.block));
        b(e.row, e.col) += yi * e.value;
        if (e.row != e.col) b(e.col, e.row) += yi * e.value;
      }
    }
    return out;
  }

  /// A_i as a SymBlockMat.
  SymBlockMat<Scalar> coefficient(Index i) const {
    DenseVector<Scalar> e = DenseVector<Scalar>::Zero(m());
    e[i] = Scalar(1);
    return adjoint(e);
  }

 private:
  std::vector<Index> block_dims_;
  std::vector<std::vector<Entry>> coeffs_;
};

template <typename Scalar>
DenseVector<Scalar> apply_A(const ConstraintMap<Scalar>& map, const SymBlockMat<Scalar>& x) {
  return map.apply(x);
}

template <typename Scalar>
SymBlockMat<Scalar> apply_At(const ConstraintMap<Scalar>& map, const DenseVector<Scalar>& y) {
  return map.adjoint(y);
}

/// Per-block spectral data M_k = Q_k diag(lambda_k) Q_k^T with lambda_k
/// nonincreasing. The positive index set alpha of block k is {0, ..., positive_count(k) - 1}.
template <typename Scalar>
struct EigDecomp {
  std::vector<DenseMatrix<Scalar>> Q;
  std::vector<DenseVector<Scalar>> lambda;

  std::size_t num_blocks() const { return Q.size(); }

  Index positive_count(std::size_t k) const {
    Index c = 0;
    while (c < lambda[k].size() && lambda[k][c] > Scalar(0)) ++c;
    return c;
  }

  /// Q f(Lambda) Q^T.
  template <typename F>
  SymBlockMat<Scalar> spectral_map(F&& f) const {
    std::vector<DenseMatrix<Scalar>> blocks;
    blocks.reserve(Q.size());
    for (std::size_t k = 0; k < Q.size(); ++k) {
      const DenseVector<Scalar> fl = lambda[k].unaryExpr(f);
      blocks.push_back(Q[k] * fl.asDiagonal() * Q[k].transpose());
    }
    return SymBlockMat<Scalar>(std::move(blocks));
  }

  SymBlockMat<Scalar> reconstruct() const {
    return spectral_map([](Scalar v) { return v; });
  }
};

template <typename Scalar>
EigDecomp<Scalar> sym_eig(const SymBlockMat<Scalar>& m) {
  if (!m.all_finite()) throw NumericError("sym_eig: non-finite matrix entry");
  EigDecomp<Scalar> out;
  out.Q.reserve(m.num_blocks());
  out.lambda.reserve(m.num_blocks());
  for (std::size_t k = 0; k < m.num_blocks(); ++k) {
    const auto& b = m.block(k);
    const Index n = b.rows();
    if (n == 1) {
      out.Q.push_back(DenseMatrix<Scalar>::Ones(1, 1));
      out.lambda.push_back(DenseVector<Scalar>::Constant(1, b(0, 0)));
      continue;
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(b);
    if (es.info() != Eigen::Success) throw NumericError("sym_eig: eigensolver did not converge");
    // Eigen returns ascending order; reverse to nonincreasing.
    out.Q.push_back(es.eigenvectors().rowwise().reverse());
    out.lambda.push_back(es.eigenvalues().reverse());
  }
  return out;
}

/// Projection onto the PSD cone together with the decomposition it used.
template <typename Scalar>
std::pair<SymBlockMat<Scalar>, EigDecomp<Scalar>> project_psd(const SymBlockMat<Scalar>& m) {
  EigDecomp<Scalar> eig = sym_eig(m);
  SymBlockMat<Scalar> p = eig.spectral_map([](Scalar v) { return v > Scalar(0) ? v : Scalar(0); });
  return {std::move(p), std::move(eig)};
}

using SymBlockMatd = SymBlockMat<double>;
using ConstraintMapd = ConstraintMap<double>;
using EigDecompd = EigDecomp<double>;
using Vec = DenseVector<double>;
using Mat = DenseMatrix<double>;

}  // namespace ssncp
