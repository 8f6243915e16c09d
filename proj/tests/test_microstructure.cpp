#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "vkrod/microstructure.hpp"
#include "vkrod/verify.hpp"

using namespace vkrod;

namespace {

MicrostructureSpec two_phase_periodic(double f0 = 0.5) {
    MicrostructureSpec spec;
    spec.kind = MicrostructureKind::Periodic;
    spec.phases = {isotropic_tensor(1.0, 1.0), isotropic_tensor(1.0, 2.0)};
    spec.layout = {{0, f0}, {1, 1.0 - f0}};
    return spec;
}

MicrostructureSpec two_phase_renewal(double m0, double m1, std::uint64_t seed) {
    MicrostructureSpec spec;
    spec.kind = MicrostructureKind::Renewal;
    spec.phases = {isotropic_tensor(1.0, 1.0), isotropic_tensor(1.0, 2.0)};
    spec.mean_lengths = {m0, m1};
    spec.seed = seed;
    return spec;
}

} // namespace

TEST_CASE("periodic layout evaluation") {
    const MicrostructureRealization r = realize(two_phase_periodic());
    CHECK(r.phase_at(0.25) == 0);
    CHECK(r.phase_at(0.75) == 1);
    for (double s : {-3.7, -0.2, 0.1, 0.6, 2.49, 17.9})
        CHECK(r.phase_at(s) == r.phase_at(s + 1.0));
}

TEST_CASE("spec validation") {
    MicrostructureSpec bad = two_phase_periodic();
    bad.layout = {{0, 0.5}, {1, 0.6}};
    CHECK_THROWS_AS(realize(bad), std::invalid_argument);

    MicrostructureSpec quasi;
    quasi.kind = MicrostructureKind::Quasiperiodic;
    quasi.phases = {isotropic_tensor(1, 1), isotropic_tensor(1, 2)};
    quasi.f1 = 1.0;
    quasi.f2 = std::sqrt(2.0);
    CHECK_NOTHROW(realize(quasi));
    quasi.f2 = 2.0;
    CHECK_THROWS_AS(realize(quasi), std::invalid_argument);

    CHECK(ratio_is_rational(1.0, 3.0));
    CHECK(ratio_is_rational(0.3333333333333333, 1.0));
    CHECK_FALSE(ratio_is_rational(std::sqrt(2.0), 1.0));
    CHECK_FALSE(ratio_is_rational(M_PI, 1.0));
}

TEST_CASE("renewal determinism") {
    const auto spec = two_phase_renewal(1.0, 1.0, 42);
    const MicrostructureRealization r1 = realize(spec);
    const MicrostructureRealization r2 = realize(spec);
    const auto s1 = r1.segments_in(0.0, 50.0);
    const auto s2 = r2.segments_in(0.0, 50.0);
    REQUIRE(s1.size() == s2.size());
    for (size_t k = 0; k < s1.size(); ++k) {
        CHECK(s1[k].begin == s2[k].begin);
        CHECK(s1[k].end == s2[k].end);
        CHECK(s1[k].phase == s2[k].phase);
    }
}

TEST_CASE("renewal evaluation is order independent") {
    const auto spec = two_phase_renewal(0.7, 1.3, 7);
    const MicrostructureRealization fwd = realize(spec);
    const MicrostructureRealization bwd = realize(spec);
    std::vector<double> pts;
    for (int i = 0; i < 10000; ++i) pts.push_back(-20.0 + 0.004 * i);
    std::vector<int> a, b;
    for (double s : pts) a.push_back(fwd.phase_at(s));
    for (size_t i = pts.size(); i-- > 0;) b.push_back(bwd.phase_at(pts[i]));
    std::reverse(b.begin(), b.end());
    CHECK(a == b);
}

TEST_CASE("segments tile the window and match phase_at") {
    for (const auto& spec : {two_phase_periodic(0.3), two_phase_renewal(0.5, 0.9, 3)}) {
        const MicrostructureRealization r = realize(spec);
        const double a = -2.3, b = 7.9;
        const auto segs = r.segments_in(a, b);
        REQUIRE(!segs.empty());
        CHECK(segs.front().begin == doctest::Approx(a));
        CHECK(segs.back().end == doctest::Approx(b));
        for (size_t k = 0; k + 1 < segs.size(); ++k)
            CHECK(segs[k].end == doctest::Approx(segs[k + 1].begin));
        for (const auto& seg : segs)
            CHECK(r.phase_at(0.5 * (seg.begin + seg.end)) == seg.phase);
    }
}

TEST_CASE("birkhoff averages") {
    SUBCASE("periodic commensurate window is exact") {
        MicrostructureSpec spec = two_phase_periodic();
        const MicrostructureRealization r = realize(spec);
        CHECK(r.birkhoff_average({1.0, 3.0}, 4.0) == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(r.birkhoff_average({1.0, 3.0}, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
    }
    SUBCASE("constant observable") {
        const MicrostructureRealization r = realize(two_phase_renewal(1.0, 2.0, 5));
        CHECK(r.birkhoff_average({4.2, 4.2}, 123.4) == doctest::Approx(4.2).epsilon(1e-14));
    }
    SUBCASE("renewal sample mean near the ensemble mean") {
        const int n_seeds = 16;
        double sum = 0.0, sum2 = 0.0;
        for (int seed = 0; seed < n_seeds; ++seed) {
            const MicrostructureRealization r = realize(two_phase_renewal(1.0, 1.0, 100 + seed));
            const double avg = r.birkhoff_average({0.0, 1.0}, 1000.0);
            sum += avg;
            sum2 += avg * avg;
        }
        const double mean = sum / n_seeds;
        const double var = (sum2 - n_seeds * mean * mean) / (n_seeds - 1);
        const double sem = std::sqrt(var / n_seeds);
        CHECK(std::abs(mean - 0.5) <= 3.0 * std::max(sem, 1e-6));
    }
}

TEST_CASE("renewal regeneration oracle") {
    const auto spec = two_phase_renewal(1.0, 1.0, 7);
    const MicrostructureRealization r = realize(spec);
    const MicrostructureRealization regen = realize(spec);
    for (int i = 0; i < 10000; ++i) {
        const double s = 0.013 * i;
        CHECK(r.phase_at(s) == regen.phase_at(s));
    }
}

TEST_CASE("ergodic error decays like T^(-1/2)") {
    const std::vector<double> windows{1e2, 1e3, 1e4};
    std::vector<double> mean_err(windows.size(), 0.0);
    const int n_seeds = 16;
    for (int seed = 0; seed < n_seeds; ++seed) {
        const MicrostructureRealization r = realize(two_phase_renewal(1.0, 1.0, 500 + seed));
        for (size_t k = 0; k < windows.size(); ++k)
            mean_err[k] += std::abs(r.birkhoff_average({0.0, 1.0}, windows[k]) - 0.5);
    }
    for (double& e : mean_err) e /= n_seeds;
    const double slope = fit_loglog_rate(windows, mean_err);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.3));
}

TEST_CASE("quasiperiodic ensemble mean matches long-window average") {
    MicrostructureSpec quasi;
    quasi.kind = MicrostructureKind::Quasiperiodic;
    quasi.phases = {isotropic_tensor(1, 1), isotropic_tensor(1, 2)};
    quasi.f1 = 1.0;
    quasi.f2 = std::sqrt(2.0);
    quasi.threshold = 0.4;
    const MicrostructureRealization r = realize(quasi);
    const double mean = r.ensemble_mean({0.0, 1.0});
    const double avg = r.birkhoff_average({0.0, 1.0}, 3000.0);
    CHECK(avg == doctest::Approx(mean).epsilon(2e-3));
}

TEST_CASE("counter-based rng is reproducible") {
    CHECK(uniform01(1, 0) == uniform01(1, 0));
    CHECK(uniform01(1, 0) != uniform01(1, 1));
    CHECK(uniform01(1, 5) != uniform01(2, 5));
    for (int i = 0; i < 1000; ++i) {
        const double u = uniform01(9, i);
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}
