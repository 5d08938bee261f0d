#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "sgwn/chebyshev.hpp"
#include "sgwn/errors.hpp"

using namespace sgwn;
using namespace sgwn::chebyshev;

namespace {

std::shared_ptr<const graph::Laplacian> random_laplacian(int n, std::mt19937_64& rng) {
  return std::make_shared<const graph::Laplacian>(
      oracle::laplacian(oracle::random_connected_adjacency(n, 0.3, rng)));
}

}  // namespace

TEST_SUITE("chebyshev") {

TEST_CASE("coefficients of simple functions") {
  const Vector one = cheb_coeffs([](double) { return 1.0; }, 2.0, 6);
  CHECK(one(0) == doctest::Approx(2.0).epsilon(1e-10));
  for (int k = 1; k <= 6; ++k) CHECK(std::abs(one(k)) < 1e-10);

  const Vector lin = cheb_coeffs([](double l) { return l; }, 2.0, 6);
  CHECK(std::abs(lin(0) - 2.0) < 1e-10);
  CHECK(std::abs(lin(1) - 1.0) < 1e-10);
  for (int k = 2; k <= 6; ++k) CHECK(std::abs(lin(k)) < 1e-10);
  for (double l : {0.0, 0.3, 1.0, 1.9, 2.0}) CHECK(std::abs(cheb_eval(lin, 2.0, l) - l) < 1e-12);

  const Vector e = cheb_coeffs([](double l) { return std::exp(-l); }, 2.0, 30);
  CHECK(e.size() == 31);
  double worst = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double l = 2.0 * i / 10000.0;
    worst = std::max(worst, std::abs(cheb_eval(e, 2.0, l) - std::exp(-l)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("coefficient errors") {
  CHECK(default_quad_points(2) == 500);
  CHECK(default_quad_points(99) == 800);
  CHECK_THROWS_AS(cheb_coeffs([](double) { return 1.0; }, 2.0, 10, 20), ValidationError);
  try {
    cheb_coeffs([](double l) { return l > 1.0 ? std::nan("") : l; }, 2.0, 4);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("theta") != std::string::npos);
  }
}

TEST_CASE("operator construction") {
  std::mt19937_64 rng(1);
  auto lap = random_laplacian(6, rng);
  const auto spec = kernels::mexican_hat(2.0, lap->lambda_max(), 2);
  const auto op = build_operator(spec, lap, 2);
  CHECK(op.band_count() == 3);
  for (const auto& b : op.coefficients().bands) CHECK(b.size() == 3);
  CHECK(op.lambda_max() == lap->lambda_max());
  const Vector h = cheb_coeffs(spec.band_function(0), lap->lambda_max(), 2);
  CHECK(op.coefficients().bands[0] == h);

  CHECK(build_operator(kernels::heat(lap->lambda_max(), 2), lap, 2).band_count() == 2);
  CHECK_THROWS_AS(build_operator(kernels::mexican_hat(2.0, 1.0, 2), lap, 2), ConfigError);
}

TEST_CASE("identity and degree-one series") {
  std::mt19937_64 rng(2);
  auto lap = random_laplacian(7, rng);
  const double lm = lap->lambda_max();
  ChebyshevCoefficients c;
  c.order = 3;
  c.lambda_max = lm;
  c.bands = {cheb_coeffs([](double) { return 1.0; }, lm, 3), cheb_coeffs([](double l) { return l; }, lm, 3)};
  const ChebyshevOperator op(c, lap);
  const Matrix x = oracle::random_matrix(7, 4, rng);
  const auto out = op.apply(x);
  CHECK((out[0] - x).norm() <= 1e-10 * x.norm());
  const Matrix lx = lap->matrix() * x;
  CHECK((out[1] - lx).norm() <= 1e-10 * lx.norm());
  CHECK(op.apply_band(1, x) == out[1]);
  CHECK_THROWS_AS(op.apply(oracle::random_matrix(6, 4, rng)), ValidationError);
}

TEST_CASE("exact apply special cases") {
  std::mt19937_64 rng(3);
  const Matrix a = oracle::random_connected_adjacency(8, 0.3, rng);
  const graph::Laplacian lap(oracle::laplacian(a));
  const auto s = graph::eigendecompose(lap);
  const auto spec = kernels::mexican_hat(2.0, lap.lambda_max(), 3);

  const Matrix c = Matrix::Constant(8, 2, 1.7);
  const auto bands = exact_apply(spec, s, c);
  for (int b = 1; b < 4; ++b) CHECK(bands[b].cwiseAbs().maxCoeff() < 1e-12);

  const auto e = oracle::eig(lap.matrix());
  for (int l = 0; l < 8; ++l) {
    const Matrix u = e.vectors.col(l);
    const auto out = exact_apply(spec, s, u);
    for (int b = 0; b < 4; ++b) {
      const Matrix expect = spec.band(b, std::max(e.values(l), 0.0)) * u;
      CHECK((out[b] - expect).norm() < 1e-10);
    }
  }

  // 2-node path: eigenvalues {0, 2}, eigenvectors (1,1)/sqrt2 and (1,-1)/sqrt2.
  const graph::Laplacian p2(oracle::laplacian((Matrix(2, 2) << 0, 1, 1, 0).finished()));
  const auto k = kernels::mexican_hat(2.0, p2.lambda_max(), 1);
  const Matrix delta = (Matrix(2, 1) << 1, 0).finished();
  const auto out = exact_apply(k, graph::eigendecompose(p2), delta);
  const double h0 = k.scaling(0.0), h2 = k.scaling(2.0), g2 = k.wavelet(0, 2.0);
  CHECK(out[0](0, 0) == doctest::Approx((h0 + h2) / 2).epsilon(1e-12));
  CHECK(out[0](1, 0) == doctest::Approx((h0 - h2) / 2).epsilon(1e-12));
  CHECK(out[1](0, 0) == doctest::Approx(g2 / 2).epsilon(1e-12));
  CHECK(out[1](1, 0) == doctest::Approx(-g2 / 2).epsilon(1e-12));
}

TEST_CASE("chebyshev converges to the exact oracle") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 4 + trial;
    const Matrix a = oracle::random_connected_adjacency(n, 0.35, rng);
    auto lap = std::make_shared<const graph::Laplacian>(oracle::laplacian(a));
    const auto spec = kernels::mexican_hat(2.0, lap->lambda_max(), 1 + trial % 3);
    const Matrix x = oracle::random_matrix(n, 3, rng);
    const auto e = oracle::eig(lap->matrix());
    const auto want = oracle::mexican_stack(e, lap->lambda_max(), spec.num_scales());
    std::vector<double> prev(spec.band_count(), 1e300);
    for (int k : {5, 10, 20, 40}) {
      const auto got = build_operator(spec, lap, k).apply(x);
      for (int b = 0; b < spec.band_count(); ++b) {
        const Matrix exact = want.middleRows(b * n, n) * x;
        const double err = oracle::rel_err(got[b], exact);
        CHECK(err <= std::max(prev[b], 1e-13));
        if (k == 40) CHECK(err <= 1e-6);
        prev[b] = err;
      }
    }
  }
}

TEST_CASE("operator error bounded by polynomial error on the spectrum") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = oracle::random_connected_adjacency(6, 0.4, rng);
    auto lap = std::make_shared<const graph::Laplacian>(oracle::laplacian(a));
    const auto spec = kernels::mexican_hat(2.0, lap->lambda_max(), 2);
    const auto op = build_operator(spec, lap, 3);
    const auto e = oracle::eig(lap->matrix());
    const Matrix x = oracle::random_matrix(6, 1, rng);
    const auto got = op.apply(x);
    for (int b = 0; b < 3; ++b) {
      double bound = 0.0;
      for (int l = 0; l < 6; ++l) {
        const double lam = std::max(e.values(l), 0.0);
        bound = std::max(bound, std::abs(cheb_eval(op.coefficients().bands[b], op.lambda_max(), lam) -
                                         spec.band(b, lam)));
      }
      const Matrix exact = oracle::spectral_filter(e, spec.band_function(b)) * x;
      CHECK((got[b] - exact).norm() <= bound * x.norm() * (1 + 1e-9) + 1e-14);
    }
  }
}

TEST_CASE("linearity and permutation equivariance") {
  std::mt19937_64 rng(6);
  const Matrix a = oracle::random_connected_adjacency(9, 0.3, rng);
  auto lap = std::make_shared<const graph::Laplacian>(oracle::laplacian(a));
  const auto spec = kernels::mexican_hat(2.0, lap->lambda_max(), 3);
  const auto op = build_operator(spec, lap, 12);
  const Matrix x = oracle::random_matrix(9, 2, rng), y = oracle::random_matrix(9, 2, rng);
  const auto fx = op.apply(x), fy = op.apply(y), fxy = op.apply(2.5 * x - 0.75 * y);
  for (int b = 0; b < 4; ++b) {
    const Matrix expect = 2.5 * fx[b] - 0.75 * fy[b];
    CHECK((fxy[b] - expect).norm() <= 1e-10 * expect.norm());
  }

  std::vector<int> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const graph::Graph pg = graph::Graph(a).permuted(perm);
  auto plap = std::make_shared<const graph::Laplacian>(graph::laplacian(pg));
  Matrix px(9, 2);
  for (int k = 0; k < 9; ++k) px.row(k) = x.row(perm[k]);
  // Same kernel design interval on both so the series agree.
  ChebyshevCoefficients c = op.coefficients();
  const auto pout = ChebyshevOperator(c, plap).apply(px);
  for (int b = 0; b < 4; ++b) {
    for (int k = 0; k < 9; ++k) {
      CHECK((pout[b].row(k) - fx[b].row(perm[k])).norm() <= 1e-12 * (1 + fx[b].norm()));
    }
  }
}

}

// The fourth-power scaling kernel has a truncation floor near 2e-8 relative at
// K = 40, so this example is tracked on its own.
TEST_SUITE("chebyshev-k40") {

TEST_CASE("10-node graph, K = 40, every band within 1e-8 of exact") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = oracle::random_connected_adjacency(10, 0.3, rng);
    auto lap = std::make_shared<const graph::Laplacian>(oracle::laplacian(a));
    const auto spec = kernels::mexican_hat(2.0, lap->lambda_max(), 2);
    const Matrix x = oracle::random_matrix(10, 3, rng);
    const auto exact = exact_apply(spec, graph::eigendecompose(*lap), x);
    const auto got = build_operator(spec, lap, 40).apply(x);
    for (int b = 0; b < spec.band_count(); ++b) {
      INFO("trial " << trial << " band " << b);
      CHECK(oracle::rel_err(got[b], exact[b]) <= 1e-8);
    }
  }
}

}
