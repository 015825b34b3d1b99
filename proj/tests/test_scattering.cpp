#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "casimir/errors.hpp"
#include "casimir/force.hpp"
#include "casimir/scattering.hpp"
#include "support.hpp"

using namespace casimir;
using casimir::testing::log_grid;
using casimir::testing::StackGenerator;
using cplx = std::complex<double>;

namespace {

// Reference values from tests/oracles/compute_oracles.py (40-digit mpmath).
constexpr double kSlabR = -0.32789541080793653;     // eps = 4, l/c = 1, p = 1
constexpr double kSlabT = 0.12054334380538684;
constexpr double kTwoSlabR = -0.33323393329414018;  // two of them
constexpr double kTwoSlabT = 0.016281174759504845;
constexpr double kBraggR = -0.24164500320561817;    // 5 layers 4/2/4/2/4, l/c = 0.1, p = 1
constexpr double kBraggT = 0.38064886853761616;

Slab slab(double eps, double l) { return {PermittivityModel::constant(eps), l}; }

// Transfer matrix written out directly from (r, rbar, t), independent of the library.
Eigen::Matrix2cd hand_transfer(cplx r, cplx rb, cplx t) {
  Eigen::Matrix2cd m;
  m << (t * t - r * rb) / t, r / t, -rb / t, 1.0 / t;
  return m;
}

TwoPortScattering hand_product(const std::vector<TwoPortScattering>& parts) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  for (const auto& s : parts) m *= hand_transfer(s.r, s.r_bar, s.t);
  return {parts.front().at, m(0, 1) / m(1, 1), -m(1, 0) / m(1, 1), 1.0 / m(1, 1)};
}

// det T = 1 up to rounding in T11*T22 - T12*T21, which grows like 1/|t|^2.
double det_defect(const TransferMatrix& T) {
  const double scale = std::abs(T.m(0, 0) * T.m(1, 1)) + std::abs(T.m(0, 1) * T.m(1, 0));
  return std::abs(T.det() - 1.0) / std::max(1.0, scale);
}

std::vector<TwoPortScattering> slab_parts(const MirrorStack& stack, FrequencyPoint at) {
  std::vector<TwoPortScattering> parts;
  for (const auto& s : std::get<LayeredMirror>(stack.variant()).slabs) parts.push_back(slab_amplitudes(s, at));
  return parts;
}

}  // namespace

TEST_CASE("slab amplitudes on the imaginary axis") {
  SUBCASE("vacuum slab is a delay") {
    const auto s = slab_amplitudes_imag(slab(1.0, 0.7), 2.0);
    CHECK(s.r == 0.0);
    CHECK(s.t.real() == doctest::Approx(std::exp(-1.4)).epsilon(1e-15));
  }
  SUBCASE("transparent at zero frequency") {
    const auto s = slab_amplitudes_imag(slab(9.0, 3.0), 0.0);
    CHECK(s.r == 0.0);
    CHECK(s.r_bar == 0.0);
    CHECK(s.t == 1.0);
  }
  SUBCASE("eps = 4, l/c = 1, p = 1") {
    const auto s = slab_amplitudes_imag(slab(4.0, 1.0), 1.0);
    CHECK(s.r.real() == doctest::Approx(kSlabR).epsilon(1e-14));
    CHECK(s.t.real() == doctest::Approx(kSlabT).epsilon(1e-14));
    CHECK(s.r.imag() == 0.0);
    CHECK(s.t.imag() == 0.0);
    CHECK(s.r == s.r_bar);
  }
  SUBCASE("zero-thickness slab is the identity") {
    const auto s = slab_amplitudes_imag(slab(10.0, 0.0), 3.0);
    CHECK(s.r == 0.0);
    CHECK(s.t == 1.0);
  }
  CHECK_THROWS_AS(slab_amplitudes_imag(slab(4.0, 1.0), -0.1), DomainError);
}

TEST_CASE("slab amplitudes on the real axis") {
  const double pi = std::numbers::pi;
  SUBCASE("vacuum") {
    const auto s = slab_amplitudes_real(slab(1.0, 1.0), 3.0);
    CHECK(std::abs(s.r) == 0.0);
    CHECK(std::abs(s.t) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("half-wave slab is transparent") {
    const auto s = slab_amplitudes_real(slab(4.0, 1.0), pi / 2.0);  // omega xi = pi
    CHECK(std::abs(s.r) < 1e-15);
    CHECK(std::abs(s.t) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("quarter-wave slab") {
    const auto s = slab_amplitudes_real(slab(4.0, 1.0), pi / 4.0);  // omega xi = pi/2
    CHECK(std::abs(s.r) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(std::norm(s.r) + std::norm(s.t) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(slab_amplitudes_real(slab(4.0, 1.0), 0.0), DomainError);
  CHECK_THROWS_AS(slab_amplitudes_real({PermittivityModel::tabulated_imag({{0.1, 2.0}, {1.0, 1.5}}), 1.0}, 1.0),
                  UnsupportedError);
}

TEST_CASE("transfer matrix conversions") {
  const auto at = FrequencyPoint::imaginary(1.0);

  SUBCASE("transparent two-port is the identity") {
    const auto T = transfer_from_scattering(TwoPortScattering::identity(at));
    CHECK((T.m - Eigen::Matrix2cd::Identity()).norm() == 0.0);
    const auto back = scattering_from_transfer(T);
    CHECK(back.r == 0.0);
    CHECK(back.t == 1.0);
  }

  SUBCASE("symmetric beamsplitter") {
    const auto T = transfer_from_scattering({at, -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0});
    Eigen::Matrix2cd expected;
    expected << 0.5, -0.5, 0.5, 1.5;
    CHECK((T.m - expected).norm() < 1e-15);
    CHECK(std::abs(T.det() - 1.0) < 1e-15);
  }

  SUBCASE("slab example round trip") {
    const auto T = transfer_from_scattering(slab_amplitudes_imag(slab(4.0, 1.0), 1.0));
    CHECK(std::abs(T.det() - 1.0) < 1e-12);
    const auto s = scattering_from_transfer(T);
    CHECK(s.r.real() == doctest::Approx(kSlabR).epsilon(1e-13));
    CHECK(s.t.real() == doctest::Approx(kSlabT).epsilon(1e-13));
  }

  SUBCASE("random reciprocal transfer matrices round trip") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> n;
    for (int k = 0; k < 200; ++k) {
      Eigen::Matrix2cd m;
      m << cplx(n(rng), n(rng)), cplx(n(rng), n(rng)), cplx(n(rng), n(rng)), cplx(n(rng), n(rng));
      m /= std::sqrt(m.determinant());  // det = 1
      TransferMatrix T{at, m};
      const auto again = transfer_from_scattering(scattering_from_transfer(T));
      CHECK((again.m - m).norm() <= 1e-12 * m.norm());
    }
  }

  SUBCASE("singular inputs") {
    CHECK_THROWS_AS(transfer_from_scattering({at, -1.0, -1.0, 0.0}), SingularError);
    TransferMatrix T{at, Eigen::Matrix2cd::Zero()};
    CHECK_THROWS_AS(scattering_from_transfer(T), SingularError);
  }

  SUBCASE("every slab has det T = 1") {
    StackGenerator gen(7);
    for (int k = 0; k < 100; ++k) {
      const Slab s{gen.model(), gen.uniform(0.01, 1.0)};
      for (double p : {0.01, 0.3, 2.0}) {
        CHECK(det_defect(transfer_from_scattering(slab_amplitudes_imag(s, p))) < 1e-14);
      }
    }
  }
}

TEST_CASE("composition") {
  const auto at = FrequencyPoint::imaginary(1.0);
  const auto a = slab_amplitudes_imag(slab(4.0, 1.0), 1.0);

  SUBCASE("identity is neutral") {
    const auto left = compose(TwoPortScattering::identity(at), a);
    const auto right = compose(a, TwoPortScattering::identity(at));
    CHECK(left.r == a.r);
    CHECK(left.t == a.t);
    CHECK(right.r_bar == a.r_bar);
    CHECK(right.t == a.t);
  }

  SUBCASE("two identical slabs agree with the transfer-matrix product") {
    const auto ab = compose(a, a);
    const auto oracle = hand_product({a, a});
    CHECK(ab.r.real() == doctest::Approx(kTwoSlabR).epsilon(1e-13));
    CHECK(ab.t.real() == doctest::Approx(kTwoSlabT).epsilon(1e-13));
    CHECK(std::abs(ab.r - oracle.r) < 1e-12);
    CHECK(std::abs(ab.r_bar - oracle.r_bar) < 1e-12);
    CHECK(std::abs(ab.t - oracle.t) < 1e-12);
  }

  SUBCASE("theta adds up under composition") {
    const Slab s1 = slab(4.0, 1.0);
    const Slab s2{PermittivityModel::lorentz({{2.0, 3.0, 0.5}}), 0.4};
    auto slope = [](auto&& r_of_p) {
      // Richardson-extrapolated one-sided difference; r(0) = 0 exactly.
      const double h = 1e-6;
      const double d1 = r_of_p(h) / h;
      const double d2 = r_of_p(h / 2) / (h / 2);
      return 2.0 * d2 - d1;
    };
    const double dA = slope([&](double p) { return slab_amplitudes_imag(s1, p).r.real(); });
    const double dB = slope([&](double p) { return slab_amplitudes_imag(s2, p).r.real(); });
    const double dAB = slope([&](double p) {
      return compose(slab_amplitudes_imag(s1, p), slab_amplitudes_imag(s2, p)).r.real();
    });
    CHECK(dAB == doctest::Approx(dA + dB).epsilon(1e-6));
    CHECK(-dA == doctest::Approx(1.5).epsilon(1e-6));
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(compose(a, TwoPortScattering::identity(FrequencyPoint::imaginary(2.0))), DomainError);
    CHECK_THROWS_AS(compose(a, TwoPortScattering::identity(FrequencyPoint::real(1.0))), DomainError);
    const TwoPortScattering mirror{at, 1.0, 1.0, 0.0};
    CHECK_THROWS_AS(compose(mirror, mirror), DegenerateCompositionError);
  }
}

TEST_CASE("stack amplitudes") {
  const auto at = FrequencyPoint::imaginary(1.0);

  SUBCASE("empty stack is transparent") {
    const auto s = stack_amplitudes(MirrorStack::layers({}), at);
    CHECK(s.r == 0.0);
    CHECK(s.t == 1.0);
  }
  SUBCASE("single slab matches the slab formula") {
    const auto s = stack_amplitudes(MirrorStack::layers({slab(4.0, 1.0)}), at);
    CHECK(s.r.real() == doctest::Approx(kSlabR).epsilon(1e-14));
    CHECK(s.t.real() == doctest::Approx(kSlabT).epsilon(1e-14));
  }
  SUBCASE("five-layer alternating stack") {
    std::vector<Slab> layers;
    for (int k = 0; k < 5; ++k) layers.push_back(slab(k % 2 == 0 ? 4.0 : 2.0, 0.1));
    const auto s = stack_amplitudes(MirrorStack::layers(layers), at);
    CHECK(s.r.real() < 0.0);
    CHECK(s.t.real() > 0.0);
    CHECK(s.r.real() == doctest::Approx(kBraggR).epsilon(1e-13));
    CHECK(s.t.real() == doctest::Approx(kBraggT).epsilon(1e-13));
  }
  SUBCASE("analytic mirrors") {
    const auto perfect = stack_amplitudes(MirrorStack::perfect(), at);
    CHECK(perfect.r == -1.0);
    CHECK(perfect.r_bar == -1.0);
    CHECK(perfect.t == 0.0);

    const auto constant = stack_amplitudes(MirrorStack::constant_reflectivity(0.4), at);
    CHECK(constant.r == 0.4);
    CHECK(constant.t == 0.0);
    CHECK_THROWS_AS(MirrorStack::constant_reflectivity(1.2), DomainError);

    const std::vector<Slab> base{slab(4.0, 1.0), slab(2.0, 0.3)};
    const auto dielectric = stack_amplitudes(MirrorStack::layers(base), at);
    const auto magnetic = stack_amplitudes(MirrorStack::magnetic(base), at);
    CHECK(magnetic.r == -dielectric.r);
    CHECK(magnetic.r_bar == -dielectric.r_bar);
    CHECK(magnetic.t == dielectric.t);

    const auto toy = MirrorStack::narrowband_toy(0.1);
    CHECK(stack_amplitudes(toy, FrequencyPoint::imaginary(2.0)).r.real() == doctest::Approx(-0.2));
    CHECK(stack_amplitudes(toy, FrequencyPoint::imaginary(50.0)).r == -1.0);
    const auto capped = MirrorStack::narrowband_toy(0.1, 3.0);
    CHECK(stack_amplitudes(capped, FrequencyPoint::imaginary(50.0)).r.real() == doctest::Approx(-0.3));
    CHECK(toy.kinks() == std::vector<double>{10.0});
  }
  SUBCASE("asymmetric stacks keep both reflections") {
    const auto s = stack_amplitudes(MirrorStack::layers({slab(9.0, 0.2), slab(1.5, 1.0)}), at);
    CHECK(std::abs(s.r - s.r_bar) > 1e-3);
  }
}

TEST_CASE("impedance matrix") {
  const auto at = FrequencyPoint::imaginary(1.0);

  SUBCASE("matched load") {
    const auto z = impedance_from_scattering({at, 0.0, 0.0, 0.0});
    CHECK((z.z - Eigen::Matrix2cd::Identity()).norm() == 0.0);
  }
  SUBCASE("perfect mirror is a short circuit") {
    const auto z = impedance_from_scattering({at, -1.0, -1.0, 0.0});
    CHECK(z.z.norm() == 0.0);
    CHECK(impedance_passivity_margin(z) == doctest::Approx(0.0));
  }
  SUBCASE("fully transparent lossless port is singular") {
    CHECK_THROWS_AS(impedance_from_scattering({at, 0.0, 0.0, 1.0}), SingularError);
  }
  SUBCASE("random passive S: Z + Z^+ >= 0 and the SS^+ identity") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n;
    for (int k = 0; k < 200; ++k) {
      TwoPortScattering s{at, cplx(n(rng), n(rng)), cplx(n(rng), n(rng)), cplx(n(rng), n(rng))};
      const double norm = s.matrix().operatorNorm();
      const double target = std::uniform_real_distribution<double>(0.0, 0.999)(rng);
      s.r *= target / norm;
      s.r_bar *= target / norm;
      s.t *= target / norm;
      const auto z = impedance_from_scattering(s);
      CHECK(impedance_passivity_margin(z) >= -1e-12);

      const Eigen::Matrix2cd S = s.matrix();
      const Eigen::Matrix2cd one = Eigen::Matrix2cd::Identity();
      const Eigen::Matrix2cd lhs = one - S * S.adjoint();
      const Eigen::Matrix2cd rhs =
          2.0 * (z.z + one).inverse() * (z.z + z.z.adjoint()) * (z.z.adjoint() + one).inverse();
      CHECK((lhs - rhs).norm() < 1e-10);
    }
  }
}

TEST_CASE("passivity checker") {
  const auto grid = default_passivity_grid();

  SUBCASE("dielectric stacks pass") {
    StackGenerator gen(3);
    for (int k = 0; k < 20; ++k) {
      const auto report = check_passivity(gen.dielectric(), grid);
      CHECK(report.passed);
      CHECK(report.min_eigenvalue >= -kPassivityTolerance);
      CHECK(report.max_reflection <= 1.0 + 1e-12);
    }
  }
  SUBCASE("constant reflector passes") { CHECK(check_passivity(MirrorStack::constant_reflectivity(0.5), grid).passed); }
  SUBCASE("gain reflector fails at a located point") {
    const auto report = check_passivity(MirrorStack::unchecked_constant_reflectivity(1.2), grid);
    CHECK_FALSE(report.passed);
    REQUIRE(report.violation_at.has_value());
    CHECK(report.violation_at->real() >= 0.0);
    CHECK(report.min_eigenvalue == doctest::Approx(1.0 - 1.44));
  }
  SUBCASE("tabulated layers are only checked on the real p axis") {
    const auto stack =
        MirrorStack::layers({{PermittivityModel::tabulated_imag({{0.0, 4.0}, {1.0, 3.0}, {10.0, 1.2}}), 0.5}});
    const auto report = check_passivity(stack, grid);
    CHECK(report.passed);
    CHECK(report.skipped == grid.size() - 121);
  }
  SUBCASE("cavity report") {
    const auto report = check_passivity(MirrorStack::perfect(), MirrorStack::constant_reflectivity(-0.5), grid);
    CHECK(report.passed);
    CHECK(report.max_loop_gain == doctest::Approx(0.5));
    const auto bad = check_passivity(MirrorStack::perfect(), MirrorStack::unchecked_constant_reflectivity(-1.1), grid);
    CHECK_FALSE(bad.passed);
  }
  SUBCASE("left half-plane grid points are rejected") {
    const std::vector<cplx> bad{{-1.0, 0.0}};
    CHECK_THROWS_AS(check_passivity(MirrorStack::perfect(), bad), DomainError);
  }
}

TEST_CASE("property: composition matches the transfer-matrix product") {
  StackGenerator gen(2024);
  for (int k = 0; k < 200; ++k) {
    const auto stack = gen.dielectric();
    for (FrequencyPoint at : {FrequencyPoint::imaginary(gen.log_uniform(1e-3, 10.0)),
                              FrequencyPoint::real(gen.log_uniform(1e-2, 5.0)),
                              FrequencyPoint::laplace(std::polar(gen.log_uniform(1e-2, 5.0), 0.7))}) {
      const auto s = stack_amplitudes(stack, at);
      const auto oracle = hand_product(slab_parts(stack, at));
      CHECK(std::abs(s.t - oracle.t) <= 1e-12 * std::max(1.0, std::abs(oracle.t)));
      CHECK(std::abs(s.r - oracle.r) <= 1e-12);
      CHECK(std::abs(s.r_bar - oracle.r_bar) <= 1e-12);
      if (std::abs(s.t) > 1e-8) {
        CHECK(det_defect(transfer_from_scattering(s)) < 1e-12);
      }
    }
  }
}

TEST_CASE("property: composition is associative") {
  StackGenerator gen(99);
  for (int k = 0; k < 200; ++k) {
    const double p = gen.log_uniform(1e-3, 10.0);
    const auto at = FrequencyPoint::imaginary(p);
    const auto a = slab_amplitudes(Slab{gen.model(), gen.uniform(0.01, 1.0)}, at);
    const auto b = slab_amplitudes(Slab{gen.model(), gen.uniform(0.01, 1.0)}, at);
    const auto c = slab_amplitudes(Slab{gen.model(), gen.uniform(0.01, 1.0)}, at);
    const auto left = compose(compose(a, b), c);
    const auto right = compose(a, compose(b, c));
    CHECK(std::abs(left.r - right.r) < 1e-12);
    CHECK(std::abs(left.r_bar - right.r_bar) < 1e-12);
    CHECK(std::abs(left.t - right.t) < 1e-12);
  }
}

TEST_CASE("property: sign theorem and zero-frequency transparency") {
  StackGenerator gen(5);
  const auto grid = log_grid(1e-4, 1e4, 100);
  for (int k = 0; k < 100; ++k) {
    const auto stack = gen.dielectric();
    for (double p : grid) {
      const auto s = stack_amplitudes(stack, FrequencyPoint::imaginary(p));
      CHECK(s.r.imag() == 0.0);
      CHECK(s.r.real() <= 0.0);
      CHECK(s.r_bar.real() <= 0.0);
      CHECK(s.t.real() >= 0.0);
      CHECK(s.t.real() <= 1.0);
    }
    const auto zero = stack_amplitudes(stack, FrequencyPoint::imaginary(0.0));
    CHECK(zero.r == 0.0);
    CHECK(zero.r_bar == 0.0);
    CHECK(zero.t == 1.0);
  }
}

TEST_CASE("property: lossless stacks are unitary on the real axis") {
  StackGenerator gen(17);
  for (int k = 0; k < 100; ++k) {
    const auto stack = gen.dielectric(false);
    for (double w : log_grid(1e-2, 50.0, 40)) {
      const auto s = stack_amplitudes(stack, FrequencyPoint::real(w));
      CHECK(std::norm(s.r) + std::norm(s.t) == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(std::norm(s.r_bar) + std::norm(s.t) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}
