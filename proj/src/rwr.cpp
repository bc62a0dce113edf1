#include "rwrkit/rwr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "rwrkit/error.hpp"
#include "rwrkit/format.hpp"
#include "rwrkit/parallel.hpp"

namespace rwrkit {

TransitionMatrix::TransitionMatrix(const Graph& graph)
    : n_(graph.num_nodes()),
      offsets_(graph.offsets().begin(), graph.offsets().end()),
      indices_(graph.indices().begin(), graph.indices().end()),
      column_weight_(n_) {
  for (int v = 0; v < n_; ++v) {
    int d = graph.degree(v);
    column_weight_[v] = d == 0 ? 1.0 : 1.0 / d;
  }
}

double TransitionMatrix::entry(int u, int v) const {
  if (offsets_[v] == offsets_[v + 1]) return u == v ? 1.0 : 0.0;
  auto first = indices_.begin() + offsets_[v];
  auto last = indices_.begin() + offsets_[v + 1];
  return std::binary_search(first, last, u) ? column_weight_[v] : 0.0;
}

void TransitionMatrix::apply(std::span<const double> r, std::span<double> out) const {
  // (W r)[u] = sum over v in N(u) of r[v] / deg(v); symmetric adjacency lets
  // column v's pattern be read from row u.
  for (int u = 0; u < n_; ++u) {
    int begin = offsets_[u];
    int end = offsets_[u + 1];
    if (begin == end) {
      out[u] = r[u];
      continue;
    }
    double acc = 0.0;
    for (int p = begin; p < end; ++p) {
      int v = indices_[p];
      acc += r[v] * column_weight_[v];
    }
    out[u] = acc;
  }
}

Eigen::MatrixXd TransitionMatrix::to_dense() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_, n_);
  for (int v = 0; v < n_; ++v) {
    if (offsets_[v] == offsets_[v + 1]) {
      w(v, v) = 1.0;
      continue;
    }
    for (int p = offsets_[v]; p < offsets_[v + 1]; ++p) w(indices_[p], v) = column_weight_[v];
  }
  return w;
}

RwrMatrix RwrMatrix::dense(int n, double c, double tol, RwrKind kind, std::vector<double> values) {
  if (values.size() != static_cast<std::size_t>(n) * n) throw ShapeError("dense RWR matrix needs n*n values");
  RwrMatrix s;
  s.n_ = n;
  s.c_ = c;
  s.tol_ = tol;
  s.kind_ = kind;
  s.dense_ = true;
  s.values_ = std::move(values);
  return s;
}

RwrMatrix RwrMatrix::sparse(int n, double c, double tol, RwrKind kind, std::vector<std::size_t> offsets,
                            std::vector<int> indices, std::vector<double> values) {
  if (offsets.size() != static_cast<std::size_t>(n) + 1 || offsets.front() != 0 ||
      offsets.back() != values.size() || indices.size() != values.size()) {
    throw ShapeError("inconsistent sparse RWR matrix layout");
  }
  RwrMatrix s;
  s.n_ = n;
  s.c_ = c;
  s.tol_ = tol;
  s.kind_ = kind;
  s.dense_ = false;
  s.offsets_ = std::move(offsets);
  s.indices_ = std::move(indices);
  s.values_ = std::move(values);
  return s;
}

double RwrMatrix::at(int i, int j) const {
  if (dense_) return values_[static_cast<std::size_t>(i) * n_ + j];
  auto first = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
  auto last = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
  auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? values_[static_cast<std::size_t>(it - indices_.begin())] : 0.0;
}

std::span<const double> RwrMatrix::dense_row(int i) const {
  if (!dense_) throw ConfigError("dense row requested from a sparse RWR matrix");
  return {values_.data() + static_cast<std::size_t>(i) * n_, static_cast<std::size_t>(n_)};
}

std::size_t RwrMatrix::stored_entries(int i) const {
  return dense_ ? static_cast<std::size_t>(n_) : offsets_[i + 1] - offsets_[i];
}

Eigen::MatrixXd RwrMatrix::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) for_each_in_row(i, [&](int j, double s) { m(i, j) = s; });
  return m;
}

std::vector<double> rwr_single(const TransitionMatrix& w, int source, const RwrOptions& options) {
  const int n = w.size();
  const double c = options.c;
  if (!(c > 0.0 && c <= 1.0)) throw ConfigError("restart probability must lie in (0, 1]");
  if (source < 0 || source >= n) throw BoundsError("RWR source " + std::to_string(source) + " out of range");
  if (!(options.tol > 0.0)) throw ConfigError("tolerance must be positive");

  // ||next - r*||_1 <= (1-c)/c * residual, so also require that bound <= tol.
  const double threshold = c >= 0.5 ? options.tol : options.tol * c / (1.0 - c);
  std::vector<double> r(n, 0.0), next(n);
  r[source] = 1.0;
  double residual = 0.0;
  for (int it = 0; it < options.max_iter; ++it) {
    w.apply(r, next);
    residual = 0.0;
    for (int u = 0; u < n; ++u) {
      next[u] *= (1.0 - c);
      if (u == source) next[u] += c;
      residual += std::abs(next[u] - r[u]);
    }
    std::swap(r, next);
    if (residual <= threshold) return r;
  }
  throw ConvergenceError(source, residual, options.max_iter);
}

std::vector<double> rwr_single(const Graph& graph, int source, const RwrOptions& options) {
  return rwr_single(TransitionMatrix(graph), source, options);
}

RwrMatrix rwr_matrix(const Graph& graph, const RwrOptions& options) {
  const int n = graph.num_nodes();
  TransitionMatrix w(graph);
  std::vector<double> values(static_cast<std::size_t>(n) * n);
  parallel_for(n, options.threads, [&](int source) {
    auto row = rwr_single(w, source, options);
    std::copy(row.begin(), row.end(), values.begin() + static_cast<std::ptrdiff_t>(source) * n);
  });
  return RwrMatrix::dense(n, options.c, options.tol, RwrKind::converged(), std::move(values));
}

RwrMatrix k_step_representation(const Graph& graph, int k, double c) {
  if (k < 1) throw ConfigError("k-step representation needs k >= 1");
  if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("restart probability must lie in [0, 1]");
  const int n = graph.num_nodes();
  TransitionMatrix w(graph);
  std::vector<double> values(static_cast<std::size_t>(n) * n);
  std::vector<double> r(n), next(n);
  for (int v = 0; v < n; ++v) {
    std::fill(r.begin(), r.end(), 0.0);
    r[v] = 1.0;
    for (int step = 0; step < k; ++step) {
      w.apply(r, next);
      for (int u = 0; u < n; ++u) next[u] *= (1.0 - c);
      next[v] += c;
      std::swap(r, next);
    }
    std::copy(r.begin(), r.end(), values.begin() + static_cast<std::ptrdiff_t>(v) * n);
  }
  return RwrMatrix::dense(n, c, 0.0, RwrKind::k_step(k), std::move(values));
}

RwrMatrix top_k_sparsify(const RwrMatrix& s, int K) {
  const int n = s.size();
  if (K < 1 || K > n) throw ConfigError("top-K needs 1 <= K <= n (K=" + std::to_string(K) + ")");
  std::vector<std::size_t> offsets{0};
  std::vector<int> indices;
  std::vector<double> values;
  std::vector<std::pair<int, double>> row;
  for (int i = 0; i < n; ++i) {
    row.clear();
    s.for_each_in_row(i, [&](int j, double v) { row.emplace_back(j, v); });
    auto by_rank = [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    };
    if (static_cast<int>(row.size()) > K) {
      std::nth_element(row.begin(), row.begin() + (K - 1), row.end(), by_rank);
      row.resize(K);
    }
    std::sort(row.begin(), row.end());
    for (auto [j, v] : row) {
      indices.push_back(j);
      values.push_back(v);
    }
    offsets.push_back(values.size());
  }
  return RwrMatrix::sparse(n, s.restart(), s.tol(), RwrKind::top_k(K), std::move(offsets), std::move(indices),
                           std::move(values));
}

std::string kind_name(RwrKind kind) {
  switch (kind.tag) {
    case RwrKind::Tag::converged:
      return "converged";
    case RwrKind::Tag::k_step:
      return "k_step:" + std::to_string(kind.param);
    case RwrKind::Tag::top_k:
      return "top_k:" + std::to_string(kind.param);
  }
  return "converged";
}

namespace {

RwrKind parse_kind(const std::string& text) {
  if (text == "converged") return RwrKind::converged();
  auto colon = text.find(':');
  if (colon != std::string::npos) {
    auto tag = text.substr(0, colon);
    int param = std::stoi(text.substr(colon + 1));
    if (tag == "k_step") return RwrKind::k_step(param);
    if (tag == "top_k") return RwrKind::top_k(param);
  }
  throw ConfigError("unknown RWR matrix kind \"" + text + "\"");
}

}  // namespace

void write_rwr_table(std::ostream& out, const RwrMatrix& s) {
  out << "# rwr n=" << s.size() << " c=" << format_double(s.restart()) << " tol=" << format_double(s.tol())
      << " kind=" << kind_name(s.kind()) << '\n';
  out << "source,index,score\n";
  for (int i = 0; i < s.size(); ++i) {
    s.for_each_in_row(i, [&](int j, double v) { out << i << ',' << j << ',' << format_double(v) << '\n'; });
  }
}

RwrMatrix read_rwr_table(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || !line.starts_with("# rwr ")) throw ParseError(lineno, "missing \"# rwr\" header");
  int n = -1;
  double c = 0.0, tol = 0.0;
  RwrKind kind;
  bool have_c = false, have_tol = false, have_kind = false;
  std::istringstream header(line.substr(6));
  std::string field;
  while (header >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "malformed header field \"" + field + "\"");
    auto key = field.substr(0, eq);
    auto value = field.substr(eq + 1);
    if (key == "n") {
      n = std::stoi(value);
    } else if (key == "c") {
      have_c = parse_double(value, c);
    } else if (key == "tol") {
      have_tol = parse_double(value, tol);
    } else if (key == "kind") {
      kind = parse_kind(value);
      have_kind = true;
    }
  }
  if (n < 0 || !have_c || !have_tol || !have_kind) throw ParseError(lineno, "incomplete RWR header");
  ++lineno;
  if (!std::getline(in, line) || line != "source,index,score") throw ParseError(lineno, "missing column header");

  std::vector<std::size_t> offsets(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> indices;
  std::vector<double> values;
  int prev_i = 0, prev_j = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto a = line.find(',');
    auto b = line.find(',', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) throw ParseError(lineno, "expected source,index,score");
    int i = 0, j = 0;
    double v = 0.0;
    try {
      i = std::stoi(line.substr(0, a));
      j = std::stoi(line.substr(a + 1, b - a - 1));
    } catch (const std::exception&) {
      throw ParseError(lineno, "non-integer index");
    }
    if (!parse_double(std::string_view(line).substr(b + 1), v)) throw ParseError(lineno, "malformed score");
    if (i < 0 || i >= n || j < 0 || j >= n) throw BoundsError("line " + std::to_string(lineno) + ": index out of range");
    if (i < prev_i || (i == prev_i && j <= prev_j)) throw ParseError(lineno, "triples not sorted by (source, index)");
    prev_i = i;
    prev_j = j;
    ++offsets[static_cast<std::size_t>(i) + 1];
    indices.push_back(j);
    values.push_back(v);
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  if (kind.tag == RwrKind::Tag::top_k) {
    return RwrMatrix::sparse(n, c, tol, kind, std::move(offsets), std::move(indices), std::move(values));
  }
  if (values.size() != static_cast<std::size_t>(n) * n) {
    throw ShapeError("dense RWR table must list all n*n entries");
  }
  return RwrMatrix::dense(n, c, tol, kind, std::move(values));
}

}  // namespace rwrkit
