#include "rwrkit/regularizer.hpp"

#include <algorithm>

#include "rwrkit/error.hpp"
#include "rwrkit/format.hpp"

namespace rwrkit {
namespace {

void check_rows(int n, const EmbeddingMatrix& h) {
  if (h.rows() != n) {
    throw ShapeError("embedding matrix has " + std::to_string(h.rows()) + " rows, operator is " +
                     std::to_string(n) + " x " + std::to_string(n));
  }
}

}  // namespace

DeltaOperator DeltaOperator::from_rwr(const RwrMatrix& s) {
  const int n = s.size();
  DeltaOperator op;
  op.n_ = n;
  op.provenance_ = "delta from " + kind_name(s.kind()) + " RWR matrix (n=" + std::to_string(n) +
                   ", c=" + format_double(s.restart()) + ")";
  const auto total = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  op.dense_ = s.stored_entries() * 4 >= total;

  if (op.dense_) {
    Eigen::MatrixXd shat = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      s.for_each_in_row(i, [&](int j, double v) {
        if (j == i) return;
        shat(i, j) += v;
        shat(j, i) += v;
      });
    }
    op.matrix_ = -shat;
    for (int i = 0; i < n; ++i) {
      double d = 0.0;
      for (int j = 0; j < n; ++j) d += shat(i, j);
      op.matrix_(i, i) = d;
    }
    return op;
  }

  std::vector<std::vector<std::pair<int, double>>> rows(n);
  for (int i = 0; i < n; ++i) {
    s.for_each_in_row(i, [&](int j, double v) {
      if (j == i) return;
      rows[i].emplace_back(j, v);
      rows[j].emplace_back(i, v);
    });
  }
  op.offsets_.assign(1, 0);
  for (int i = 0; i < n; ++i) {
    auto& row = rows[i];
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    // merge S_ij and S_ji contributions, then splice in the diagonal
    std::vector<std::pair<int, double>> merged;
    for (const auto& [j, v] : row) {
      if (!merged.empty() && merged.back().first == j) {
        merged.back().second += v;
      } else {
        merged.emplace_back(j, v);
      }
    }
    double d = 0.0;
    for (const auto& [j, v] : merged) d += v;
    bool placed = false;
    for (const auto& [j, v] : merged) {
      if (!placed && j > i) {
        op.cols_.push_back(i);
        op.vals_.push_back(d);
        placed = true;
      }
      op.cols_.push_back(j);
      op.vals_.push_back(-v);
    }
    if (!placed) {
      op.cols_.push_back(i);
      op.vals_.push_back(d);
    }
    op.offsets_.push_back(op.vals_.size());
    row.clear();
    row.shrink_to_fit();
  }
  return op;
}

DeltaOperator DeltaOperator::from_dense(Eigen::MatrixXd delta, std::string provenance) {
  if (delta.rows() != delta.cols()) throw ShapeError("delta operator must be square");
  if (delta != delta.transpose()) {
    throw ShapeError("delta operator must be symmetric");
  }
  DeltaOperator op;
  op.n_ = static_cast<int>(delta.rows());
  op.dense_ = true;
  op.matrix_ = std::move(delta);
  op.provenance_ = std::move(provenance);
  return op;
}

double DeltaOperator::at(int i, int j) const {
  if (dense_) return matrix_(i, j);
  auto first = cols_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
  auto last = cols_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
  auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? vals_[static_cast<std::size_t>(it - cols_.begin())] : 0.0;
}

std::size_t DeltaOperator::nonzeros(int row) const {
  if (!dense_) return offsets_[row + 1] - offsets_[row];
  return static_cast<std::size_t>((matrix_.row(row).array() != 0.0).count());
}

std::size_t DeltaOperator::nonzeros() const {
  if (!dense_) return vals_.size();
  return static_cast<std::size_t>((matrix_.array() != 0.0).count());
}

Eigen::MatrixXd DeltaOperator::to_dense() const {
  if (dense_) return matrix_;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) for_each_in_row(i, [&](int j, double v) { m(i, j) = v; });
  return m;
}

Eigen::MatrixXd DeltaOperator::apply(const EmbeddingMatrix& h) const {
  check_rows(n_, h);
  if (dense_) return matrix_ * h;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, h.cols());
  for (Eigen::Index k = 0; k < h.cols(); ++k) {
    for (int i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) acc += vals_[p] * h(cols_[p], k);
      out(i, k) = acc;
    }
  }
  return out;
}

double rwrreg_direct(const RwrMatrix& s, const EmbeddingMatrix& h) {
  check_rows(s.size(), h);
  double total = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    s.for_each_in_row(i, [&](int j, double v) {
      if (v != 0.0 && i != j) total += v * (h.row(i) - h.row(j)).squaredNorm();
    });
  }
  return total;
}

double rwrreg_trace(const DeltaOperator& delta, const EmbeddingMatrix& h) {
  Eigen::MatrixXd dh = delta.apply(h);
  double total = 0.0;
  for (Eigen::Index k = 0; k < h.cols(); ++k) total += h.col(k).dot(dh.col(k));
  return total;
}

Eigen::MatrixXd rwrreg_grad(const DeltaOperator& delta, const EmbeddingMatrix& h) {
  return 2.0 * delta.apply(h);
}

void write_delta_table(std::ostream& out, const DeltaOperator& delta) {
  out << "# delta n=" << delta.size() << " provenance=\"" << delta.provenance() << "\"\n";
  out << "source,index,score\n";
  for (int i = 0; i < delta.size(); ++i) {
    delta.for_each_in_row(i, [&](int j, double v) { out << i << ',' << j << ',' << format_double(v) << '\n'; });
  }
}

}  // namespace rwrkit
