#include <doctest.h>

#include <random>

#include "qpair/model.hpp"

using namespace qpair;

namespace {
Vector random_unit(int dim, unsigned seed) {
  std::mt19937 eng(seed);
  std::normal_distribution<double> nd;
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = Complex(nd(eng), nd(eng));
  return v / v.norm();
}
}  // namespace

TEST_CASE("coupling profiles") {
  ModelParams p;
  CHECK(coupling(1, p.pulse_center(1), p) == doctest::Approx(p.g));
  CHECK(coupling(2, p.pulse_center(2), p) == doctest::Approx(p.g));
  CHECK(coupling(1, p.pulse_center(1) + p.tau1, p) ==
        doctest::Approx(p.g * std::exp(-1.0)));

  p.pulse_shape = PulseShape::square;
  p.amp1 = 1.7;
  CHECK(coupling(1, p.t1 / 2, p) == doctest::Approx(1.7 * p.g));
  CHECK(coupling(1, p.t1 + 0.01, p) == 0.0);
  CHECK(coupling(2, p.t1 + p.t_flight / 2, p) == 0.0);  // between the windows
}

TEST_CASE("generalized Rabi frequency") {
  CHECK(generalized_rabi(1.0, 0, 0.0) == doctest::Approx(2.0));
  CHECK(generalized_rabi(1.3, 2, 0.7) == doctest::Approx(4.557411546042336));
}

TEST_CASE("Zeeman detunings from magnetic field") {
  auto [dp, dm] = detunings_from_field(1e-4);
  CHECK(dp == doctest::Approx(13191150.088785278));
  CHECK(dm == doctest::Approx(-13191150.088785278));
  auto [dp2, dm2] = detunings_from_field(2e-4, 0.75);
  CHECK(dp2 == doctest::Approx(dp));  // doubled field, halved g-factor
  CHECK(dm2 == doctest::Approx(dm));
}

TEST_CASE("Hamiltonian is Hermitian and sector-preserving") {
  auto basis = FockBasis::simulation_space();
  ModelParams p;
  p.delta_plus = 0.3;
  p.delta_minus = -0.1;
  for (double t : {0.2, 1.0, 1.9, 2.5}) {
    Matrix h = build_hamiltonian(t, *basis, p);
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    for (int i = 0; i < basis->dim(); ++i)
      for (int j = 0; j < basis->dim(); ++j)
        if (std::abs(h(i, j)) > 0) {
          CHECK(basis->state(i).excitation_plus() == basis->state(j).excitation_plus());
          CHECK(basis->state(i).excitation_minus() == basis->state(j).excitation_minus());
        }
  }
  p.g = 0.0;
  CHECK(build_hamiltonian(1.0, *basis, p).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("effective Hamiltonian equals H minus i/2 the rate sum") {
  auto basis = FockBasis::simulation_space();
  ModelParams p;
  p.set_kappa(0.08);
  p.gamma = 0.15;
  Matrix rate_sum = Matrix::Zero(basis->dim(), basis->dim());
  for (const JumpChannel& c : jump_operators(*basis, p))
    rate_sum += c.op.adjoint() * c.op;
  for (double t : {0.5, 1.5}) {
    Matrix diff = build_effective_hamiltonian(t, *basis, p) -
                  build_hamiltonian(t, *basis, p);
    CHECK((diff - Complex(0, -0.5) * rate_sum).cwiseAbs().maxCoeff() < 1e-14);
    // Anti-Hermitian part diagonal and negative semidefinite.
    Matrix anti = diff - diff.adjoint();
    for (int i = 0; i < basis->dim(); ++i) {
      CHECK(anti(i, i).imag() <= 0.0);
      for (int j = 0; j < basis->dim(); ++j)
        if (i != j) CHECK(std::abs(anti(i, j)) < 1e-15);
    }
  }
}

TEST_CASE("applier matches the dense builders") {
  auto basis = FockBasis::simulation_space();
  ModelParams p;
  p.delta_plus = 0.2;
  p.delta_minus = 0.2;
  p.set_kappa(0.05);
  p.gamma = 0.1;
  for (bool eff : {false, true}) {
    HamiltonianApplier h(basis, p, eff);
    for (double t : {0.0, 0.7, 2.3}) {
      Matrix dense = eff ? build_effective_hamiltonian(t, *basis, p)
                         : build_hamiltonian(t, *basis, p);
      CHECK((h.matrix(t) - dense).cwiseAbs().maxCoeff() < 1e-14);
      Vector x = random_unit(basis->dim(), 7 + eff);
      Vector y(basis->dim());
      h.apply(t, x, y);
      CHECK((y - dense * x).norm() < 1e-14);
    }
  }
}

TEST_CASE("channel rates and jumps match the dense operators") {
  auto basis = FockBasis::simulation_space();
  ModelParams p;
  p.kappa = {0.02, 0.03, 0.04, 0.05};
  p.gamma = 0.07;
  HamiltonianApplier h(basis, p, true);
  auto channels = jump_operators(*basis, p);
  REQUIRE(channels.size() == kNumChannels);

  Vector x = random_unit(basis->dim(), 11);
  std::array<double, kNumChannels> rates;
  h.channel_rates(x, rates);
  double total = 0.0;
  for (int m = 0; m < kNumChannels; ++m) {
    Vector cx = channels[m].op * x;
    CHECK(rates[m] == doctest::Approx(cx.squaredNorm()).epsilon(1e-12));
    total += rates[m];
    Vector y(basis->dim());
    h.apply_jump(channels[m].id, x, y);
    CHECK((y - cx).norm() < 1e-14);
  }
  CHECK(h.total_rate(x) == doctest::Approx(total).epsilon(1e-12));

  // max_total_rate bounds the rate of any normalized state.
  for (unsigned s = 0; s < 20; ++s)
    CHECK(h.total_rate(random_unit(basis->dim(), 100 + s)) <=
          h.max_total_rate() + 1e-12);
}

TEST_CASE("parameter validation") {
  ModelParams p;
  p.g = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ModelParams{};
  p.gamma = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ModelParams{};
  p.t1 = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_NOTHROW(ModelParams{}.validate());
}

TEST_CASE("presets") {
  for (const std::string& name : preset_names()) CHECK_NOTHROW(preset(name));
  CHECK_THROWS_AS(preset("nope"), std::invalid_argument);
  auto p = preset("optical");
  CHECK(p.kappa[0] == doctest::Approx(0.053));
  CHECK(p.gamma == doctest::Approx(0.08));
  CHECK(preset("fig6a").gamma == doctest::Approx(0.05));
  CHECK(preset("fig6b").kappa[2] == doctest::Approx(0.03));
}
