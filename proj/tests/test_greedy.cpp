#include <doctest.h>

#include "greedylab/analysis.hpp"
#include "greedylab/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

using namespace greedylab;

namespace {

Element vec(const Geometry& g, std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return Element(g, v);
}

Dictionary two_atom() {
  Matrix atoms(2, 2);
  const double c = std::sqrt(0.5);
  atoms << 1.0, c, 0.0, c;
  return Dictionary(Geometry::hilbert(2), atoms, "two_atom");
}

}  // namespace

TEST_CASE("rpga on the standard basis") {
  const auto d = build_orthonormal(Geometry::hilbert(2));
  const auto t = rpga_hilbert(vec(d.geometry(), {0.6, 0.8}), d, 10);
  REQUIRE(t.records.size() == 2);
  CHECK(t.records[0].atom_index == 1);
  CHECK(t.records[0].lambda == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(t.records[0].s == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t.records[0].error == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(t.records[1].error == 0.0);
  CHECK(t.stop_reason == StopReason::ExactRecovery);
  CHECK(t.algorithm == Algorithm::RpgaHilbert);
  CHECK(t.target_norm == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rpga two-atom hand trace") {
  const auto d = two_atom();
  const auto f = vec(d.geometry(), {0.8, 0.6});
  const auto t = rpga_hilbert(f, d, 2);
  REQUIRE(t.records.size() == 2);
  const auto& r1 = t.records[0];
  const auto& r2 = t.records[1];
  CHECK(r1.atom_index == 1);
  CHECK(std::abs(r1.lambda - 0.98994949366116653) <= 1e-15);
  CHECK(std::abs(r1.s - 1.0) <= 1e-15);
  CHECK(std::abs(r1.error - 0.14142135623730950) <= 1e-15);
  CHECK(r2.atom_index == 0);
  CHECK(std::abs(r2.lambda - 0.1) <= 1e-15);
  CHECK(std::abs(r2.s - 1.06 / 1.13) <= 1e-15);
  CHECK(std::abs(r2.error - std::sqrt(72.32) / 113.0) <= 1e-12);
  CHECK(std::abs(t.final_approx.coords()(0) - 0.75044247787610619) <= 1e-14);
  CHECK(std::abs(t.final_approx.coords()(1) - 0.65663716814159292) <= 1e-14);
  CHECK(t.stop_reason == StopReason::MaxIter);

  const auto p = pga_hilbert(f, d, 2);
  CHECK(std::abs(p.records[1].error - 0.1) <= 1e-12);
  CHECK(p.final_approx.coords()(0) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(p.final_approx.coords()(1) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(p.records[1].s == 1.0);

  const auto o = oga_hilbert(f, d, 2);
  CHECK(o.records[1].error <= 1e-13);
  CHECK(o.stop_reason == StopReason::ExactRecovery);

  const auto r = rga_hilbert(f, d, 2, RgaVariant::Classic);
  CHECK((r.final_approx.coords() - t.final_approx.coords()).norm() > 1e-3);
}

TEST_CASE("target equal to an atom is recovered in one step") {
  const auto d = build_random_unit(Geometry::hilbert(4), 8, 3);
  const Element f = d.atom_element(5);
  for (const auto& t : {rpga_hilbert(f, d, 5), pga_hilbert(f, d, 5), oga_hilbert(f, d, 5)}) {
    REQUIRE(t.records.size() == 1);
    CHECK(t.records[0].atom_index == 5);
    CHECK(t.stop_reason == StopReason::ExactRecovery);
  }
}

TEST_CASE("weak hilbert selection") {
  const auto d = build_orthonormal(Geometry::hilbert(2));
  const auto f = vec(d.geometry(), {0.6, 0.8});
  const auto t = wrpga_hilbert(f, d, WeaknessSequence::constant(0.7), 5);
  CHECK(t.records[0].atom_index == 0);
  CHECK(t.records[0].lambda == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(t.records[0].s == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t.records[0].error == doctest::Approx(0.8).epsilon(1e-15));
  REQUIRE(t.weakness.has_value());
  CHECK(*t.weakness == WeaknessSequence::constant(0.7));
}

TEST_CASE("constant(1) weakness reproduces the strict runs bit for bit") {
  const auto dh = build_random_unit(Geometry::hilbert(8), 24, 4);
  const auto th = make_a1_target(dh, 5, 2.0, 77);
  CHECK(wrpga_hilbert(th.f, dh, WeaknessSequence::constant(1), 60).records ==
        rpga_hilbert(th.f, dh, 60).records);
  const auto dl = build_random_unit(Geometry::lp(3, 8), 24, 4);
  const auto tl = make_a1_target(dl, 5, 2.0, 77);
  CHECK(wrpga_banach(tl.f, dl, WeaknessSequence::constant(1), 40).records ==
        rpga_banach(tl.f, dl, 40).records);
}

TEST_CASE("weakness sequences") {
  const auto c = WeaknessSequence::constant(0.5);
  CHECK(c(1) == 0.5);
  CHECK(c(1000) == 0.5);
  const auto pl = WeaknessSequence::power_law(0.8, 0.5);
  CHECK(pl(4) == doctest::Approx(0.4));
  const auto ex = WeaknessSequence::explicit_values({1.0, 0.3});
  CHECK(ex(1) == 1.0);
  CHECK(ex(2) == 0.3);
  CHECK(ex(3) == 1.0);
  CHECK_THROWS_AS(WeaknessSequence::constant(0.0), std::invalid_argument);
  CHECK_THROWS_AS(WeaknessSequence::constant(1.1), std::invalid_argument);
  CHECK_THROWS_AS(WeaknessSequence::power_law(0.5, -1), std::invalid_argument);
  CHECK_THROWS_AS(WeaknessSequence::explicit_values({}), std::invalid_argument);
  CHECK_THROWS_AS(WeaknessSequence::explicit_values({0.5, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(c(0), std::invalid_argument);
}

TEST_CASE("banach rpga on e1 in l4") {
  const auto g = Geometry::lp(4, 2);
  const auto d = build_orthonormal(g);
  const auto t = rpga_banach(vec(g, {1, 0}), d, 10);
  REQUIRE(t.records.size() == 1);
  CHECK(t.records[0].lambda == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(std::abs(t.records[0].s - 6.0) <= 1e-12);
  CHECK(t.stop_reason == StopReason::ExactRecovery);
}

TEST_CASE("banach rpga against a high-precision trace") {
  // l4, f = (0.6, 0.8), standard basis; reference computed to 50 digits.
  const auto g = Geometry::lp(4, 2);
  const auto d = build_orthonormal(g);
  const auto t = rpga_banach(vec(g, {0.6, 0.8}), d, 4);
  REQUIRE(t.records.size() == 4);
  const int idx[] = {1, 0, 0, 0};
  const double F[] = {0.81368732010992373, 1.0, 0.95554973405596740, 0.92111401675597185};
  const double lam[] = {0.11621007161660657, 0.1, 0.076089607854535835, 0.062389925329059673};
  const double s[] = {6.8840849065071822, 1.2941176470588235, 0.99552463039888127,
                      0.98470236652541527};
  const double e[] = {0.6, 0.47777486702798370, 0.40639871412740728, 0.35024134331152238};
  for (int m = 0; m < 4; ++m) {
    CAPTURE(m);
    CHECK(t.records[m].atom_index == idx[m]);
    CHECK(std::abs(t.records[m].dual_value - F[m]) <= 1e-10);
    CHECK(std::abs(t.records[m].lambda - lam[m]) <= 1e-10);
    CHECK(std::abs(t.records[m].s - s[m]) <= 1e-9);
    CHECK(std::abs(t.records[m].error - e[m]) <= 1e-10);
  }
}

TEST_CASE("weak banach selection in l4") {
  const auto g = Geometry::lp(4, 2);
  const auto d = build_orthonormal(g);
  const auto f = vec(g, {0.6, 0.8});
  // |F_f(e1)| / |F_f(e2)| = 0.6^3 / 0.8^3 = 0.421875 < 0.5.
  CHECK(wrpga_banach(f, d, WeaknessSequence::constant(0.5), 3).records[0].atom_index == 1);
  CHECK(wrpga_banach(f, d, WeaknessSequence::constant(0.4), 3).records[0].atom_index == 0);
}

TEST_CASE("l2 as lp follows the hilbert selections") {
  const auto dh = build_random_unit(Geometry::hilbert(6), 18, 9);
  const Dictionary dl(Geometry::lp(2, 6), dh.atoms(), "l2");
  const auto target = make_a1_target(dh, 4, 1.5, 12);
  const auto th = rpga_hilbert(target.f, dh, 30);
  const auto tl = rpga_banach(Element(dl.geometry(), target.f.coords()), dl, 30);
  CHECK(th.records[0].atom_index == tl.records[0].atom_index);
  const auto f = vec(Geometry::lp(2, 2), {0.6, 0.8});
  CHECK(rpga_banach(f, build_orthonormal(f.geometry()), 1).records[0].atom_index == 1);
}

TEST_CASE("banach stationarity after every line search") {
  for (double p : {1.5, 3.0, 4.0}) {
    const auto g = Geometry::lp(p, 8);
    const auto d = build_random_unit(g, 24, 31);
    const auto target = make_a1_target(d, 6, 3.0, 5);
    rpga_banach(target.f, d, 60, 0.0, 1e-12, [&](const IterationRecord&, const Vector& fm) {
      const Vector r = target.f.coords() - fm;
      if (norm(g, r) <= kExactRecoveryRel * norm(target.f)) return;
      const double stat = norming_representer(g, r).dot(fm);
      REQUIRE(std::abs(stat) <= 1e-6 * std::max(1.0, norm(g, fm)));
    });
  }
}

TEST_CASE("algorithm guards") {
  const auto dh = build_orthonormal(Geometry::hilbert(2));
  const auto dl = build_orthonormal(Geometry::lp(3, 2));
  const auto fh = vec(dh.geometry(), {1, 2});
  const auto fl = vec(dl.geometry(), {1, 2});
  CHECK_THROWS_AS(rpga_hilbert(fl, dl, 3), std::invalid_argument);
  CHECK_THROWS_AS(rpga_banach(fh, dh, 3), std::invalid_argument);
  CHECK_THROWS_AS(rpga_hilbert(fh, dh, 0), std::invalid_argument);
  CHECK_THROWS_AS(rpga_hilbert(fh, dh, 3, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(rpga_banach(fl, dl, 3, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rpga_hilbert(vec(Geometry::hilbert(3), {1, 2, 3}), dh, 3),
                  std::invalid_argument);
}

TEST_CASE("stop reasons") {
  const auto d = build_orthonormal(Geometry::hilbert(3));
  const auto f = vec(d.geometry(), {0.5, 0.3, 0.1});
  const auto tol = rpga_hilbert(f, d, 10, 0.2);
  CHECK(tol.stop_reason == StopReason::Tolerance);
  CHECK(tol.records.back().error <= 0.2);
  const auto mx = rpga_hilbert(f, d, 1);
  CHECK(mx.stop_reason == StopReason::MaxIter);
  CHECK(mx.records.size() == 1);
  const auto zero = rpga_hilbert(Element::zero(d.geometry()), d, 5);
  CHECK(zero.records.empty());
  CHECK(zero.stop_reason == StopReason::ExactRecovery);

  Matrix one(2, 1);
  one << 1.0, 0.0;
  const Dictionary partial(Geometry::hilbert(2), one, "partial");
  const auto z = rpga_hilbert(vec(partial.geometry(), {0.5, 0.5}), partial, 5);
  CHECK(z.stop_reason == StopReason::ZeroSupDual);
  CHECK(z.records.size() == 1);
  CHECK(z.records[0].error == doctest::Approx(0.5));
}

TEST_CASE("zero direction guard") {
  Vector f(2), h(2);
  f << 0.3, 0.4;
  h << 0.0, 0.0;
  CHECK(rescale_factor(Geometry::hilbert(2), f, h) == 0.0);
  CHECK(rescale_factor(Geometry::lp(3, 2), f, h) == 0.0);
  h << 0.6, 0.8;
  CHECK(rescale_factor(Geometry::hilbert(2), f, h) == doctest::Approx(0.5));
  CHECK(std::abs(rescale_factor(Geometry::lp(3, 2), f, h) - 0.5) <= 1e-12);
}

TEST_CASE("oga matches parseval on orthonormal dictionaries") {
  const auto d = build_orthonormal(Geometry::hilbert(6));
  Vector c(6);
  c << 0.1, -0.5, 0.25, 0.0, 0.9, -0.3;
  const Element f(d.geometry(), c);
  const auto t = oga_hilbert(f, d, 6);
  std::vector<double> sq;
  for (Index i = 0; i < 6; ++i) sq.push_back(c(i) * c(i));
  std::sort(sq.rbegin(), sq.rend());
  for (const auto& rec : t.records) {
    double tail = 0;
    for (std::size_t k = static_cast<std::size_t>(rec.m); k < sq.size(); ++k) tail += sq[k];
    CHECK(rec.error == doctest::Approx(std::sqrt(tail)).epsilon(1e-12));
  }
}

TEST_CASE("oga is monotone on redundant dictionaries") {
  const auto d = build_random_unit(Geometry::hilbert(5), 25, 6);
  const auto target = make_a1_target(d, 8, 2.0, 3);
  const auto t = oga_hilbert(target.f, d, 30);
  double prev = target.f.coords().norm();
  for (const auto& rec : t.records) {
    CHECK(rec.error <= prev + 1e-12);
    prev = rec.error;
  }
  CHECK(t.stop_reason == StopReason::ExactRecovery);
}

TEST_CASE("classic rga") {
  const auto d = build_orthonormal(Geometry::hilbert(2));
  const auto t = rga_hilbert(vec(d.geometry(), {0.6, 0.8}), d, 2, RgaVariant::Classic);
  REQUIRE(t.records.size() == 2);
  CHECK(t.records[0].atom_index == 1);
  CHECK(t.records[1].atom_index == 0);
  CHECK(t.final_approx.coords()(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(t.final_approx.coords()(1) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(t.records[1].s == 0.5);
  CHECK(t.algorithm == Algorithm::RgaClassic);
}

TEST_CASE("optimized rga on convex-hull targets") {
  const auto d = build_random_unit(Geometry::hilbert(4), 12, 8);
  std::map<Index, double> coeffs{{1, 0.3}, {4, -0.2}, {7, 0.5}};
  const auto target = make_a1_target(d, coeffs);
  const auto t = rga_hilbert(target.f, d, 400, RgaVariant::Optimized);
  double prev = target.f.coords().norm();
  for (const auto& rec : t.records) {
    REQUIRE(rec.error <= prev + 1e-12);
    REQUIRE(rec.s >= 0.0);
    REQUIRE(rec.s <= 1.0);
    prev = rec.error;
  }
  CHECK(t.records.back().error < 0.05 * target.f.coords().norm());
  CHECK(t.algorithm == Algorithm::RgaOptimized);
}

TEST_CASE("certified targets") {
  const auto d = build_random_unit(Geometry::hilbert(6), 20, 1);
  const auto one = make_a1_target(d, 1, 1.0, 4);
  REQUIRE(one.coeffs.size() == 1);
  const auto [k, c] = *one.coeffs.begin();
  CHECK(std::abs(c) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK((one.f.coords() - c * d.atom(k)).norm() <= 1e-15);
  CHECK(one.M == 1.0);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = make_a1_target(d, 1 + static_cast<Index>(seed % 8), 3.7, seed);
    double sum = 0;
    Vector rebuilt = Vector::Zero(6);
    for (const auto& [idx, v] : t.coeffs) {
      sum += std::abs(v);
      rebuilt += v * d.atom(idx);
    }
    REQUIRE(std::abs(sum - 3.7) <= 1e-12);
    REQUIRE((rebuilt - t.f.coords()).norm() <= 1e-10);
  }
  CHECK(make_a1_target(d, 4, 2.0, 9).f.coords() == make_a1_target(d, 4, 2.0, 9).f.coords());

  const auto o = build_orthonormal(Geometry::hilbert(3));
  const auto p = make_a1_target(o, {{0, 0.6}, {2, 0.8}});
  CHECK(p.M == doctest::Approx(1.4));
  CHECK(norm(p.f) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(make_a1_target(d, 21, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_a1_target(d, 0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_a1_target(d, 2, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_a1_target(d, {{20, 1.0}}), std::invalid_argument);
}

TEST_CASE("algorithm and stop-reason names round trip") {
  for (auto a : {Algorithm::RpgaHilbert, Algorithm::WrpgaHilbert, Algorithm::RpgaBanach,
                 Algorithm::WrpgaBanach, Algorithm::PgaHilbert, Algorithm::OgaHilbert,
                 Algorithm::RgaClassic, Algorithm::RgaOptimized}) {
    CHECK(parse_algorithm(to_string(a)) == a);
  }
  for (auto r : {StopReason::MaxIter, StopReason::ExactRecovery, StopReason::Tolerance,
                 StopReason::ZeroSupDual}) {
    CHECK(parse_stop_reason(to_string(r)) == r);
  }
  CHECK_FALSE(parse_algorithm("nope").has_value());
}
