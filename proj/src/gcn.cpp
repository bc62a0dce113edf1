#include "rwrkit/gcn.hpp"

#include <cmath>
#include <random>

#include "rwrkit/error.hpp"

namespace rwrkit {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mask_seed(const DropoutKey& key, std::uint64_t layer) {
  std::uint64_t h = splitmix(key.seed);
  h = splitmix(h ^ key.epoch);
  h = splitmix(h ^ key.sample);
  return splitmix(h ^ layer);
}

constexpr std::uint64_t kPoolLayer = 100;
constexpr std::uint64_t kMlpLayer = 200;

// Inverted dropout: kept entries are scaled by 1/(1-p).
Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double keep = 1.0 / (1.0 - p);
  Eigen::MatrixXd mask(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) mask(i, j) = unit(rng) < p ? 0.0 : keep;
  }
  return mask;
}

Eigen::MatrixXd affine(const Eigen::MatrixXd& in, const Eigen::MatrixXd& w, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out = in * w;
  out.rowwise() += b.row(0);
  return out;
}

Eigen::MatrixXd relu_grad(const Eigen::MatrixXd& upstream, const Eigen::MatrixXd& pre) {
  return (pre.array() > 0.0).select(upstream, 0.0);
}

}  // namespace

NormalizedAdjacency::NormalizedAdjacency(const Graph& graph) {
  const int n = graph.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (int v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(graph.degree(v) + 1));
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) + graph.indices().size());
  for (int u = 0; u < n; ++u) {
    triplets.emplace_back(u, u, inv_sqrt[u] * inv_sqrt[u]);
    for (int v : graph.neighbors(u)) triplets.emplace_back(u, v, inv_sqrt[u] * inv_sqrt[v]);
  }
  matrix_.resize(n, n);
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
}

ModelShape default_shape(Architecture arch, int input_dim, int outputs) {
  ModelShape shape;
  shape.arch = arch;
  shape.input_dim = input_dim;
  shape.outputs = outputs;
  switch (arch) {
    case Architecture::node2:
      shape.gcn_hidden = {16};
      break;
    case Architecture::graph2:
      shape.gcn_hidden = {128, 128};
      shape.mlp_hidden = 256;
      break;
    case Architecture::tri3:
      shape.gcn_hidden = {64, 64, 64};
      shape.outputs = 1;
      break;
  }
  return shape;
}

int GcnModel::gcn_layers() const {
  int hidden = static_cast<int>(shape.gcn_hidden.size());
  return shape.arch == Architecture::node2 ? hidden + 1 : hidden;
}

int GcnModel::mlp_layers() const {
  switch (shape.arch) {
    case Architecture::node2:
      return 0;
    case Architecture::graph2:
      return 2;
    case Architecture::tri3:
      return 1;
  }
  return 0;
}

GcnModel create_model(const ModelShape& shape, double dropout, std::uint64_t seed) {
  if (shape.input_dim < 1 || shape.outputs < 1) throw ConfigError("model needs positive input and output widths");
  if (shape.gcn_hidden.empty()) throw ConfigError("model needs at least one hidden GCN layer");
  if (shape.arch == Architecture::graph2 && shape.mlp_hidden < 1) throw ConfigError("graph2 needs an MLP width");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (shape.arch == Architecture::tri3 && shape.outputs != 1) throw ConfigError("tri3 has a single output");

  GcnModel model;
  model.shape = shape;
  model.dropout = dropout;
  std::mt19937_64 rng(seed);
  auto add_layer = [&](int in, int out) {
    const double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd w(in, out);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
    }
    model.params.push_back(std::move(w));
    model.params.push_back(Eigen::MatrixXd::Zero(1, out));
  };
  int in = shape.input_dim;
  for (int l = 0; l < model.gcn_layers(); ++l) {
    bool output_layer = shape.arch == Architecture::node2 && l == model.gcn_layers() - 1;
    int out = output_layer ? shape.outputs : shape.gcn_hidden[l];
    add_layer(in, out);
    in = out;
  }
  if (shape.arch == Architecture::graph2) {
    add_layer(in, shape.mlp_hidden);
    add_layer(shape.mlp_hidden, shape.outputs);
  } else if (shape.arch == Architecture::tri3) {
    add_layer(in, 1);
  }
  return model;
}

ForwardResult gcn_forward(const GcnModel& model, const NormalizedAdjacency& adj, const Eigen::MatrixXd& x,
                          bool train_mode, const DropoutKey& key) {
  const int layers = model.gcn_layers();
  if (x.cols() != model.gcn_weight(0).rows()) {
    throw ShapeError("feature width " + std::to_string(x.cols()) + " does not match model input " +
                     std::to_string(model.gcn_weight(0).rows()));
  }
  if (x.rows() != adj.size()) throw ShapeError("feature rows do not match graph size");
  if (x.rows() == 0) throw ShapeError("empty graph");
  const bool node_task = model.shape.arch == Architecture::node2;
  const bool drop = train_mode && model.dropout > 0.0;

  ForwardResult fwd;
  fwd.gcn_agg.resize(layers);
  fwd.gcn_pre.resize(layers);
  fwd.gcn_mask.resize(layers);
  Eigen::MatrixXd in = x;
  for (int l = 0; l < layers; ++l) {
    fwd.gcn_agg[l] = adj.apply(in);
    fwd.gcn_pre[l] = affine(fwd.gcn_agg[l], model.gcn_weight(l), model.gcn_bias(l));
    if (node_task && l == layers - 1) {
      fwd.logits = fwd.gcn_pre[l];
      break;
    }
    Eigen::MatrixXd h = fwd.gcn_pre[l].cwiseMax(0.0);
    if (l == model.tap_layer()) fwd.tapped = h;
    if (node_task && drop) {
      fwd.gcn_mask[l] = dropout_mask(h.rows(), h.cols(), model.dropout, mask_seed(key, l));
      in = h.cwiseProduct(fwd.gcn_mask[l]);
    } else {
      in = std::move(h);
    }
  }

  if (!node_task) {
    const Eigen::Index width = in.cols();
    Eigen::MatrixXd pooled(1, width);
    fwd.pool_argmax.resize(width);
    for (Eigen::Index j = 0; j < width; ++j) {
      Eigen::Index arg = 0;
      for (Eigen::Index i = 1; i < in.rows(); ++i) {
        if (in(i, j) > in(arg, j)) arg = i;
      }
      fwd.pool_argmax[j] = arg;
      pooled(0, j) = in(arg, j);
    }
    if (drop) {
      fwd.pool_mask = dropout_mask(1, width, model.dropout, mask_seed(key, kPoolLayer));
      pooled = pooled.cwiseProduct(fwd.pool_mask);
    }
    const int mlp = model.mlp_layers();
    fwd.mlp_in.resize(mlp);
    fwd.mlp_pre.resize(mlp);
    fwd.mlp_mask.resize(mlp);
    Eigen::MatrixXd cur = std::move(pooled);
    for (int m = 0; m < mlp; ++m) {
      fwd.mlp_in[m] = cur;
      fwd.mlp_pre[m] = affine(cur, model.mlp_weight(m), model.mlp_bias(m));
      if (m == mlp - 1) {
        fwd.logits = fwd.mlp_pre[m];
        break;
      }
      cur = fwd.mlp_pre[m].cwiseMax(0.0);
      if (drop) {
        fwd.mlp_mask[m] = dropout_mask(1, cur.cols(), model.dropout, mask_seed(key, kMlpLayer + m));
        cur = cur.cwiseProduct(fwd.mlp_mask[m]);
      }
    }
  }

  fwd.output = model.shape.arch == Architecture::tri3 ? fwd.logits : softmax_rows(fwd.logits);
  return fwd;
}

Gradients gcn_backward(const GcnModel& model, const NormalizedAdjacency& adj, const Eigen::MatrixXd& x,
                       const ForwardResult& fwd, const Eigen::MatrixXd& d_logits, const Eigen::MatrixXd* d_tapped) {
  (void)x;
  const int layers = model.gcn_layers();
  const bool node_task = model.shape.arch == Architecture::node2;
  Gradients grads(model.params.size());

  // dL/dH of the last GCN layer's activation (graph tasks) or dL/dZ of the
  // output layer (node task)
  Eigen::MatrixXd upstream;
  if (node_task) {
    upstream = d_logits;
  } else {
    Eigen::MatrixXd d = d_logits;
    for (int m = model.mlp_layers() - 1; m >= 0; --m) {
      std::size_t wi = 2 * static_cast<std::size_t>(layers + m);
      grads[wi] = fwd.mlp_in[m].transpose() * d;
      grads[wi + 1] = d.colwise().sum();
      Eigen::MatrixXd d_in = d * model.mlp_weight(m).transpose();
      if (m > 0) {
        if (fwd.mlp_mask[m - 1].size() > 0) d_in = d_in.cwiseProduct(fwd.mlp_mask[m - 1]);
        d = relu_grad(d_in, fwd.mlp_pre[m - 1]);
      } else {
        d = std::move(d_in);
      }
    }
    if (fwd.pool_mask.size() > 0) d = d.cwiseProduct(fwd.pool_mask);
    const Eigen::MatrixXd& last_pre = fwd.gcn_pre[layers - 1];
    upstream = Eigen::MatrixXd::Zero(last_pre.rows(), last_pre.cols());
    for (Eigen::Index j = 0; j < d.cols(); ++j) upstream(fwd.pool_argmax[j], j) = d(0, j);
  }

  for (int l = layers - 1; l >= 0; --l) {
    Eigen::MatrixXd d_pre;
    if (node_task && l == layers - 1) {
      d_pre = std::move(upstream);
    } else {
      if (l == model.tap_layer() && d_tapped) upstream += *d_tapped;
      d_pre = relu_grad(upstream, fwd.gcn_pre[l]);
    }
    grads[2 * l] = fwd.gcn_agg[l].transpose() * d_pre;
    grads[2 * l + 1] = d_pre.colwise().sum();
    if (l == 0) break;
    // A_hat is symmetric
    upstream = adj.apply(d_pre * model.gcn_weight(l).transpose());
    if (fwd.gcn_mask[l - 1].size() > 0) upstream = upstream.cwiseProduct(fwd.gcn_mask[l - 1]);
  }
  return grads;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double mx = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp();
    p.row(i) = e / e.sum();
  }
  return p;
}

double cross_entropy(const Eigen::MatrixXd& probs, std::span<const int> labels, std::span<const int> nodes) {
  if (nodes.empty()) return 0.0;
  double total = 0.0;
  for (int v : nodes) total -= std::log(probs(v, labels[v]));
  return total / static_cast<double>(nodes.size());
}

LossResult total_loss(const GcnModel& model, Task task, std::span<const Sample> batch, double lambda,
                      double weight_decay, bool train_mode, bool with_gradients) {
  if (batch.empty()) throw ConfigError("empty loss batch");
  if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
  LossResult result;
  result.loss.lambda = lambda;
  if (with_gradients) {
    result.grads.resize(model.params.size());
    for (std::size_t i = 0; i < model.params.size(); ++i) {
      result.grads[i] = Eigen::MatrixXd::Zero(model.params[i].rows(), model.params[i].cols());
    }
  }
  const double scale = 1.0 / static_cast<double>(batch.size());

  for (const Sample& s : batch) {
    if (lambda > 0.0 && !s.delta) throw ConfigError("lambda > 0 requires a delta operator for every sample");
    ForwardResult fwd = gcn_forward(model, *s.adj, *s.x, train_mode, s.key);

    Eigen::MatrixXd d_logits = Eigen::MatrixXd::Zero(fwd.logits.rows(), fwd.logits.cols());
    switch (task) {
      case Task::node_cls: {
        const auto& nodes = *s.loss_nodes;
        const auto& labels = *s.node_labels;
        result.loss.task += scale * cross_entropy(fwd.output, labels, nodes);
        if (!nodes.empty()) {
          const double w = scale / static_cast<double>(nodes.size());
          for (int v : nodes) {
            d_logits.row(v) = w * fwd.output.row(v);
            d_logits(v, labels[v]) -= w;
          }
        }
        break;
      }
      case Task::graph_cls: {
        result.loss.task -= scale * std::log(fwd.output(0, s.graph_label));
        d_logits = scale * fwd.output;
        d_logits(0, s.graph_label) -= scale;
        break;
      }
      case Task::tri_reg: {
        double err = fwd.output(0, 0) - s.target;
        result.loss.task += scale * err * err;
        d_logits(0, 0) = scale * 2.0 * err;
        break;
      }
    }

    Eigen::MatrixXd d_tap;
    if (lambda > 0.0) {
      Eigen::MatrixXd dh = s.delta->apply(fwd.tapped);
      result.loss.rwrreg += scale * fwd.tapped.cwiseProduct(dh).sum();
      d_tap = (2.0 * lambda * scale) * dh;
    }
    if (with_gradients) {
      Gradients g = gcn_backward(model, *s.adj, *s.x, fwd, d_logits, lambda > 0.0 ? &d_tap : nullptr);
      for (std::size_t i = 0; i < g.size(); ++i) result.grads[i] += g[i];
    }
  }

  for (std::size_t i = 0; i < model.params.size(); ++i) {
    if (!GcnModel::is_weight(i)) continue;
    result.loss.weight_decay += 0.5 * weight_decay * model.params[i].squaredNorm();
    if (with_gradients) result.grads[i] += weight_decay * model.params[i];
  }
  return result;
}

}  // namespace rwrkit
