#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rwrkit/rwr.hpp"

namespace rwrkit {

// n x d node embeddings taken between message-passing layers.
using EmbeddingMatrix = Eigen::MatrixXd;

// Symmetric operator Delta = D - S_hat, where S_hat_ij = S_ij + S_ji off the
// diagonal, S_hat_ii = S_ii and D_ii = sum_j S_hat_ij. The S_ii terms cancel,
// so Delta_ii = sum_{j != i} S_hat_ij and every row of Delta sums to zero:
// Tr(H^T Delta H) = sum_ij S_ij ||H_i - H_j||^2 exactly.
//
// Stored densely when S holds at least n^2/4 entries, otherwise as CSR.
class DeltaOperator {
 public:
  static DeltaOperator from_rwr(const RwrMatrix& s);
  // Wraps an explicit symmetric matrix (tests, serialized operators).
  static DeltaOperator from_dense(Eigen::MatrixXd delta, std::string provenance = "explicit");

  int size() const { return n_; }
  bool is_dense() const { return dense_; }
  const std::string& provenance() const { return provenance_; }

  double at(int i, int j) const;
  std::size_t nonzeros(int row) const;
  std::size_t nonzeros() const;
  Eigen::MatrixXd to_dense() const;

  // Delta * H
  Eigen::MatrixXd apply(const EmbeddingMatrix& h) const;

  template <typename F>
  void for_each_in_row(int i, F&& f) const {
    if (dense_) {
      for (int j = 0; j < n_; ++j) {
        if (matrix_(i, j) != 0.0) f(j, matrix_(i, j));
      }
    } else {
      for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) f(cols_[p], vals_[p]);
    }
  }

 private:
  int n_ = 0;
  bool dense_ = true;
  Eigen::MatrixXd matrix_;
  std::vector<std::size_t> offsets_;
  std::vector<int> cols_;
  std::vector<double> vals_;
  std::string provenance_;
};

inline DeltaOperator build_delta(const RwrMatrix& s) { return DeltaOperator::from_rwr(s); }

// sum over all ordered (i, j) of S_ij ||H_i - H_j||^2.
double rwrreg_direct(const RwrMatrix& s, const EmbeddingMatrix& h);

// Tr(H^T Delta H), column by column.
double rwrreg_trace(const DeltaOperator& delta, const EmbeddingMatrix& h);

// d/dH Tr(H^T Delta H) = 2 Delta H.
Eigen::MatrixXd rwrreg_grad(const DeltaOperator& delta, const EmbeddingMatrix& h);

// Same triple layout as write_rwr_table with a "# delta" header.
void write_delta_table(std::ostream& out, const DeltaOperator& delta);

}  // namespace rwrkit
