#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rwrkit/graph.hpp"

namespace rwrkit {

inline constexpr double kDefaultRestart = 0.15;
inline constexpr double kDefaultTol = 1e-8;
inline constexpr int kDefaultMaxIter = 1000;

enum class IsolatePolicy { self_absorbing };

// Column-stochastic random-walk transition matrix: W[u][v] = 1/deg(v) for
// u in N(v). An isolated node v has the single entry W[v][v] = 1.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(const Graph& graph);

  int size() const { return n_; }
  IsolatePolicy isolate_policy() const { return IsolatePolicy::self_absorbing; }

  double entry(int u, int v) const;
  // out = W r
  void apply(std::span<const double> r, std::span<double> out) const;
  Eigen::MatrixXd to_dense() const;

 private:
  int n_;
  std::vector<int> offsets_;
  std::vector<int> indices_;
  std::vector<double> column_weight_;  // 1/deg(v), or 1 for isolates
};

inline TransitionMatrix transition_matrix(const Graph& graph) { return TransitionMatrix(graph); }

struct RwrOptions {
  double c = kDefaultRestart;
  double tol = kDefaultTol;
  int max_iter = kDefaultMaxIter;
  int threads = 1;
};

struct RwrKind {
  enum class Tag { converged, k_step, top_k };
  Tag tag = Tag::converged;
  int param = 0;  // k for k_step, K for top_k

  static RwrKind converged() { return {Tag::converged, 0}; }
  static RwrKind k_step(int k) { return {Tag::k_step, k}; }
  static RwrKind top_k(int K) { return {Tag::top_k, K}; }
  bool operator==(const RwrKind&) const = default;
};

// n x n matrix of RWR scores, row i = scores of the walk restarting at i.
// Dense rows for converged and k-step matrices; top-K matrices keep per-row
// (index, score) pairs sorted by index.
class RwrMatrix {
 public:
  RwrMatrix() = default;
  static RwrMatrix dense(int n, double c, double tol, RwrKind kind, std::vector<double> values);
  static RwrMatrix sparse(int n, double c, double tol, RwrKind kind, std::vector<std::size_t> offsets,
                          std::vector<int> indices, std::vector<double> values);

  int size() const { return n_; }
  double restart() const { return c_; }
  double tol() const { return tol_; }
  RwrKind kind() const { return kind_; }
  bool is_dense() const { return dense_; }

  double at(int i, int j) const;
  std::span<const double> dense_row(int i) const;
  std::size_t stored_entries(int i) const;
  std::size_t stored_entries() const { return values_.size(); }

  // f(j, score) for every stored entry of row i, ascending j.
  template <typename F>
  void for_each_in_row(int i, F&& f) const {
    if (dense_) {
      const double* row = values_.data() + static_cast<std::size_t>(i) * n_;
      for (int j = 0; j < n_; ++j) f(j, row[j]);
    } else {
      for (std::size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) f(indices_[p], values_[p]);
    }
  }

  Eigen::MatrixXd to_dense() const;

  bool operator==(const RwrMatrix& other) const = default;

 private:
  int n_ = 0;
  double c_ = kDefaultRestart;
  double tol_ = kDefaultTol;
  RwrKind kind_;
  bool dense_ = true;
  std::vector<std::size_t> offsets_;
  std::vector<int> indices_;
  std::vector<double> values_;
};

// Power iteration for r = (1-c) W r + c e_source starting at e_source.
// Stops once the sweep residual ||(1-c)Wr + c e - r||_1 is within tol and
// small enough that the returned vector is within tol (L1) of the fixed point.
// Throws ConvergenceError after max_iter sweeps.
std::vector<double> rwr_single(const TransitionMatrix& w, int source, const RwrOptions& options = {});
std::vector<double> rwr_single(const Graph& graph, int source, const RwrOptions& options = {});

// Row i is rwr_single from source i. Rows are solved independently on up to
// options.threads workers; the result does not depend on the thread count.
RwrMatrix rwr_matrix(const Graph& graph, const RwrOptions& options = {});

// Row v is the distribution after k steps of r <- (1-c) W r + c e_v from e_v.
RwrMatrix k_step_representation(const Graph& graph, int k, double c);

// Keeps the K largest entries of each row (ties to the lower index) without
// renormalising. Throws ConfigError unless 1 <= K <= n.
RwrMatrix top_k_sparsify(const RwrMatrix& s, int K);

// Text table: "# rwr n=.. c=.. tol=.. kind=.." header, "source,index,score"
// column header, then triples sorted by (source, index). Scores use the
// shortest round-trip decimal form, so read(write(S)) == S bit-exactly.
void write_rwr_table(std::ostream& out, const RwrMatrix& s);
RwrMatrix read_rwr_table(std::istream& in);

std::string kind_name(RwrKind kind);

}  // namespace rwrkit
