#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "rwrkit/error.hpp"
#include "rwrkit/regularizer.hpp"
#include "rwrkit/rwr.hpp"
#include "support.hpp"

using namespace rwrkit;
using namespace rwrkit::testing;

namespace {

RwrMatrix two_node() { return RwrMatrix::dense(2, 0.15, 0.0, RwrKind::converged(), {0.0, 0.5, 0.5, 0.0}); }

RwrMatrix random_s(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  for (double& x : v) x = u(rng);
  return RwrMatrix::dense(n, 0.15, 0.0, RwrKind::converged(), v);
}

Eigen::MatrixXd random_h(int n, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd h(n, d);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = g(rng);
  return h;
}

}  // namespace

TEST_SUITE("regularizer") {

TEST_CASE("two-node fixture") {
  Eigen::MatrixXd h(2, 1);
  h << 0, 1;
  CHECK(rwrreg_direct(two_node(), h) == 1.0);
  DeltaOperator delta = build_delta(two_node());
  Eigen::MatrixXd expected(2, 2);
  expected << 1, -1, -1, 1;
  CHECK(delta.to_dense() == expected);
  CHECK(rwrreg_trace(delta, h) == 1.0);
  Eigen::MatrixXd grad = rwrreg_grad(delta, h);
  CHECK(grad(0, 0) == -2.0);
  CHECK(grad(1, 0) == 2.0);
}

TEST_CASE("degenerate inputs") {
  std::mt19937_64 rng(1);
  RwrMatrix s = random_s(6, rng);
  Eigen::MatrixXd constant = Eigen::MatrixXd::Ones(6, 3) * 2.5;
  CHECK(rwrreg_direct(s, constant) == 0.0);
  CHECK(std::abs(rwrreg_trace(build_delta(s), constant)) < 1e-12);
  CHECK(rwrreg_grad(build_delta(s), constant).cwiseAbs().maxCoeff() < 1e-12);

  std::vector<double> eye(16, 0.0);
  for (int i = 0; i < 4; ++i) eye[i * 5] = 1.0;
  DeltaOperator zero = build_delta(RwrMatrix::dense(4, 1.0, 0.0, RwrKind::converged(), eye));
  CHECK(zero.to_dense().isZero());
  Eigen::MatrixXd h = random_h(4, 2, rng);
  CHECK(rwrreg_trace(zero, h) == 0.0);
  CHECK(rwrreg_grad(zero, h).isZero());

  Eigen::MatrixXd hh = random_h(6, 3, rng);
  CHECK(rwrreg_direct(s, 3.0 * hh) == doctest::Approx(9.0 * rwrreg_direct(s, hh)).epsilon(1e-12));
}

TEST_CASE("symmetrised construction") {
  std::mt19937_64 rng(2);
  RwrMatrix sym = rwr_matrix(random_graph(8, 0.5, 3));  // not symmetric in general
  Eigen::MatrixXd s = sym.to_dense();
  Eigen::MatrixXd d = build_delta(sym).to_dense();
  for (int i = 0; i < 8; ++i) {
    CHECK(std::abs(d.row(i).sum()) < 1e-12);
    for (int j = 0; j < 8; ++j) {
      if (i != j) CHECK(d(i, j) == doctest::Approx(-(s(i, j) + s(j, i))).epsilon(1e-14));
    }
  }
  CHECK(d.isApprox(d.transpose(), 0.0));
}

TEST_CASE("trace form equals the direct sum") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    RwrMatrix s = random_s(50, rng);
    Eigen::MatrixXd h = random_h(50, 8, rng);
    double direct = rwrreg_direct(s, h);
    double trace = rwrreg_trace(build_delta(s), h);
    CHECK(std::abs(trace - direct) / direct < 1e-9);
    CHECK(direct >= 0.0);
  }
}

TEST_CASE("sparse operators from top-K matrices") {
  RwrMatrix s = rwr_matrix(random_graph(40, 0.1, 8));
  std::mt19937_64 rng(4);
  Eigen::MatrixXd h = random_h(40, 5, rng);
  for (int k : {1, 3, 5, 10, 20, 40}) {
    RwrMatrix t = top_k_sparsify(s, k);
    DeltaOperator delta = build_delta(t);
    CHECK(delta.is_dense() == (4 * t.stored_entries() >= 1600));
    CHECK(delta.nonzeros() <= static_cast<std::size_t>(40 * (2 * k + 1)));
    double direct = rwrreg_direct(t, h);
    CHECK(std::abs(rwrreg_trace(delta, h) - direct) / direct < 1e-9);
    CHECK((delta.apply(h) - delta.to_dense() * h).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 rng(5);
  RwrMatrix s = random_s(7, rng);
  DeltaOperator delta = build_delta(s);
  Eigen::MatrixXd h = random_h(7, 3, rng);
  Eigen::MatrixXd grad = rwrreg_grad(delta, h);
  const double step = 1e-5;
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      Eigen::MatrixXd up = h, down = h;
      up(i, j) += step;
      down(i, j) -= step;
      double numeric = (rwrreg_trace(delta, up) - rwrreg_trace(delta, down)) / (2 * step);
      CHECK(std::abs(numeric - grad(i, j)) <= 1e-4 * std::max(1.0, std::abs(grad(i, j))));
    }
  }
}

TEST_CASE("explicit operators") {
  Eigen::MatrixXd m(2, 2);
  m << 1, -1, -1, 1;
  DeltaOperator d = DeltaOperator::from_dense(m);
  CHECK(d.provenance() == "explicit");
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 0, 1, 1;
  CHECK_THROWS_AS(DeltaOperator::from_dense(bad), ShapeError);
  std::ostringstream out;
  write_delta_table(out, build_delta(two_node()));
  CHECK(out.str().rfind("# delta n=2", 0) == 0);
}

}
