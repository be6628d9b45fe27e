#include <doctest.h>

#include <cmath>

#include "hypergrad/rng.hpp"

using namespace hypergrad;

TEST_CASE("identical keys reproduce identical draws") {
    const SampleKey key{derive_stream(42, 0), 17};
    KeyedRng a(key), b(key);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    KeyedRng c(key), d(key);
    for (int i = 0; i < 100; ++i) {
        CHECK(c.gaussian() == d.gaussian());
    }
}

TEST_CASE("distinct counters and streams give different draws") {
    const std::uint64_t s = derive_stream(42, 0);
    KeyedRng a({s, 0}), b({s, 1}), c({derive_stream(42, 1), 0});
    CHECK(a.next_u64() != b.next_u64());
    KeyedRng a2({s, 0});
    CHECK(a2.next_u64() != c.next_u64());
}

TEST_CASE("derive_stream separates masters and indices") {
    CHECK(derive_stream(1, 0) != derive_stream(1, 1));
    CHECK(derive_stream(1, 0) != derive_stream(2, 0));
    CHECK(derive_stream(1, 2) != derive_stream(2, 1));
}

TEST_CASE("paired draws across streams are uncorrelated") {
    const int n = 10000;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        KeyedRng a({derive_stream(7, 0), static_cast<std::uint64_t>(i)});
        KeyedRng b({derive_stream(7, 1), static_cast<std::uint64_t>(i)});
        const double x = a.gaussian(), y = b.gaussian();
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    const double corr = cov / std::sqrt(vx * vy);
    CHECK(std::fabs(corr) <= 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("gaussian moments are sane") {
    KeyedRng rng({derive_stream(3, 0), 0});
    const int n = 40000;
    double s = 0, ss = 0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        s += g;
        ss += g * g;
    }
    CHECK(std::fabs(s / n) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(ss / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("uniform_index stays in range and covers values") {
    KeyedRng rng({derive_stream(9, 0), 0});
    int counts[7] = {0};
    for (int i = 0; i < 7000; ++i) {
        const auto v = rng.uniform_index(7);
        REQUIRE(v < 7);
        ++counts[v];
    }
    for (int c : counts) CHECK(c > 700);  // ~1000 expected each
}

TEST_CASE("seeded_permutation is a permutation and deterministic") {
    const auto p = seeded_permutation(100, {derive_stream(5, 0), 3});
    const auto q = seeded_permutation(100, {derive_stream(5, 0), 3});
    CHECK(p == q);
    std::vector<bool> seen(100, false);
    for (auto v : p) {
        REQUIRE(v >= 0);
        REQUIRE(v < 100);
        CHECK(!seen[static_cast<std::size_t>(v)]);
        seen[static_cast<std::size_t>(v)] = true;
    }
}
