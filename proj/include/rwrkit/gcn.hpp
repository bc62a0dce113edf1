#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "rwrkit/graph.hpp"
#include "rwrkit/regularizer.hpp"

namespace rwrkit {

// node2: two GCN layers, softmax per node, RWRReg tap after layer 1.
// graph2: two ReLU GCN layers, max-pool, MLP (ReLU hidden) to class scores.
// tri3: three ReLU GCN layers, max-pool, single linear output.
// graph2 and tri3 tap the last GCN layer.
enum class Architecture { node2, graph2, tri3 };

// D~^{-1/2} (A + I) D~^{-1/2}, symmetric.
class NormalizedAdjacency {
 public:
  explicit NormalizedAdjacency(const Graph& graph);

  int size() const { return static_cast<int>(matrix_.rows()); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const { return matrix_ * x; }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix() const { return matrix_; }

 private:
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix_;
};

struct ModelShape {
  Architecture arch = Architecture::node2;
  int input_dim = 0;
  int outputs = 0;                 // classes, or 1 for regression
  std::vector<int> gcn_hidden;     // widths of all GCN layers but the node2 output layer
  int mlp_hidden = 0;              // graph2 only
};

// Appendix-style defaults: node2 {16}, graph2 {128, 128} + 256, tri3 {64, 64, 64}.
ModelShape default_shape(Architecture arch, int input_dim, int outputs);

// Parameters in a flat list: GCN layers first as (W, b) pairs, then MLP layers
// as (W, b) pairs. Biases are 1 x width matrices.
struct GcnModel {
  ModelShape shape;
  std::vector<Eigen::MatrixXd> params;
  double dropout = 0.0;

  int gcn_layers() const;
  int mlp_layers() const;
  int tap_layer() const { return shape.arch == Architecture::node2 ? 0 : gcn_layers() - 1; }
  const Eigen::MatrixXd& gcn_weight(int l) const { return params[2 * l]; }
  const Eigen::MatrixXd& gcn_bias(int l) const { return params[2 * l + 1]; }
  const Eigen::MatrixXd& mlp_weight(int m) const { return params[2 * (gcn_layers() + m)]; }
  const Eigen::MatrixXd& mlp_bias(int m) const { return params[2 * (gcn_layers() + m) + 1]; }
  static bool is_weight(std::size_t param_index) { return param_index % 2 == 0; }
};

// Glorot-uniform weights, zero biases, deterministic per seed.
GcnModel create_model(const ModelShape& shape, double dropout, std::uint64_t seed);

using Gradients = std::vector<Eigen::MatrixXd>;

// Dropout masks are drawn from (seed, epoch, sample, layer); identical keys
// reproduce identical masks.
struct DropoutKey {
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  std::uint64_t sample = 0;
};

struct ForwardResult {
  Eigen::MatrixXd logits;  // node2: n x C; graph2: 1 x C; tri3: 1 x 1
  Eigen::MatrixXd output;  // softmax of logits, or the regression value
  Eigen::MatrixXd tapped;  // embedding fed to the regulariser

  // backward cache
  std::vector<Eigen::MatrixXd> gcn_agg;    // A_hat * layer input
  std::vector<Eigen::MatrixXd> gcn_pre;    // pre-activation
  std::vector<Eigen::MatrixXd> gcn_mask;   // dropout mask applied after layer l (empty: none)
  std::vector<Eigen::Index> pool_argmax;   // per feature
  Eigen::MatrixXd pool_mask;
  std::vector<Eigen::MatrixXd> mlp_in;
  std::vector<Eigen::MatrixXd> mlp_pre;
  std::vector<Eigen::MatrixXd> mlp_mask;
};

ForwardResult gcn_forward(const GcnModel& model, const NormalizedAdjacency& adj, const Eigen::MatrixXd& x,
                          bool train_mode, const DropoutKey& key = {});

// Reverse pass for upstream gradients on the logits and (optionally) on the
// tapped embedding.
Gradients gcn_backward(const GcnModel& model, const NormalizedAdjacency& adj, const Eigen::MatrixXd& x,
                       const ForwardResult& fwd, const Eigen::MatrixXd& d_logits, const Eigen::MatrixXd* d_tapped);

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

// Mean of -log p[v, labels[v]] over `nodes`.
double cross_entropy(const Eigen::MatrixXd& probs, std::span<const int> labels, std::span<const int> nodes);

enum class Task { node_cls, graph_cls, tri_reg };

// One graph's contribution to a loss evaluation.
struct Sample {
  const NormalizedAdjacency* adj = nullptr;
  const Eigen::MatrixXd* x = nullptr;
  const DeltaOperator* delta = nullptr;
  // node_cls: labels for all nodes and the nodes that enter the loss
  const std::vector<int>* node_labels = nullptr;
  const std::vector<int>* loss_nodes = nullptr;
  int graph_label = 0;     // graph_cls
  double target = 0.0;     // tri_reg
  DropoutKey key;
};

struct LossBreakdown {
  double task = 0.0;
  double weight_decay = 0.0;
  double rwrreg = 0.0;  // unweighted Tr(H^T Delta H), batch mean
  double lambda = 0.0;

  double total() const { return task + weight_decay + lambda * rwrreg; }
};

struct LossResult {
  LossBreakdown loss;
  Gradients grads;
};

// L = mean task loss + (weight_decay / 2) sum ||W||^2 + lambda * mean Tr(H^T Delta H),
// with gradients for every parameter. Cross-entropy for the classification
// tasks, squared error for tri_reg. Throws ConfigError if lambda > 0 and a
// sample lacks its Delta operator.
LossResult total_loss(const GcnModel& model, Task task, std::span<const Sample> batch, double lambda,
                      double weight_decay, bool train_mode, bool with_gradients = true);

}  // namespace rwrkit
