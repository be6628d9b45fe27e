#include <doctest.h>

#include <cmath>

#include "hypergrad/schedule.hpp"

using namespace hypergrad;

TEST_CASE("constant schedule formula and admissibility") {
    CHECK(StepSchedule::constant_step(0.0).value_at(0) == 1.0);
    CHECK(StepSchedule::constant_step(3.0).value_at(5) == 0.25);
    CHECK(StepSchedule::constant_step(0.0, 0.5).value_at(0) == 0.5);
    CHECK_THROWS(StepSchedule::constant_step(0.0, 1.5));
    CHECK_THROWS(StepSchedule::constant_step(0.0, 0.0));
    CHECK_THROWS(StepSchedule::constant_step(-1.0));
}

TEST_CASE("decreasing schedule defaults and admissibility") {
    const auto s = StepSchedule::decreasing(0.0, 0.0);
    CHECK(s.beta() == 2.0);
    CHECK(s.gamma() == 2.0);
    CHECK(s.value_at(0) == 1.0);
    CHECK(s.value_at(2) == 0.5);

    const auto s2 = StepSchedule::decreasing(0.5, 0.0);
    CHECK(s2.beta() == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(s2.gamma() == doctest::Approx(8.0 / 3.0).epsilon(1e-14));

    CHECK_THROWS(StepSchedule::decreasing(0.5, 0.0, 1.0));           // beta <= 1/(1-q^2) = 4/3
    CHECK_THROWS(StepSchedule::decreasing(0.0, 1.0, 2.0, 2.0));      // gamma < beta(1+sigma2)
    CHECK_THROWS(StepSchedule::decreasing(1.0, 0.0));
    CHECK_NOTHROW(StepSchedule::decreasing(0.0, 1.0, 2.0, 4.0));
}

TEST_CASE("two-phase schedule") {
    SUBCASE("sigma1 = 0 degenerates to the constant schedule") {
        const auto s = StepSchedule::two_phase(0.5, 0.0, 3.0, 10.0);
        CHECK(s.kind() == StepSchedule::Kind::Constant);
        CHECK(s.value_at(0) == 0.25);
        CHECK(!s.note().empty());
    }
    SUBCASE("switch point matches the envelope iteration") {
        const double q = 0.9, sigma1 = 1.0, sigma2 = 0.0, mse0 = 100.0;
        const auto s = StepSchedule::two_phase(q, sigma1, sigma2, mse0);
        // independent envelope iteration: transient below the floor
        const double eta = 1.0 / (1.0 + sigma2);
        const double qq = 1.0 - q * q;
        const double floor = eta * sigma1 / qq;
        double transient = mse0 - floor;
        std::int64_t expect = 0;
        while (transient > floor) {
            transient *= 1.0 - eta * qq;
            ++expect;
        }
        CHECK(s.switch_iter() == expect);
        CHECK(s.value_at(s.switch_iter() - 1) == eta);
        const double beta = 2.0 / qq;
        CHECK(s.value_at(s.switch_iter()) == doctest::Approx(beta / (beta * (1.0 + sigma2))).epsilon(1e-14));
    }
    SUBCASE("already inside the floor switches at zero") {
        const auto s = StepSchedule::two_phase(0.5, 10.0, 0.0, 0.1);
        CHECK(s.switch_iter() == 0);
    }
}

TEST_CASE("lipschitz_to_variance conversion") {
    {
        const auto [s1, s2] = lipschitz_to_variance(0.5, 0.5, 0.0);
        CHECK(s1 == 0.0);
        CHECK(s2 == doctest::Approx(4.0).epsilon(1e-14));
    }
    {
        // additive-noise map: L = q, var = d s^2
        const double q = 0.3, s = 0.1;
        const double var = 2.0 * s * s;
        const auto [s1, s2] = lipschitz_to_variance(q, q, var);
        CHECK(s1 == doctest::Approx(2.0 * var).epsilon(1e-14));
        CHECK(s2 == doctest::Approx(4.0 * q * q / ((1 - q) * (1 - q))).epsilon(1e-14));
    }
    {
        const auto [s1, s2] = lipschitz_to_variance(0.0, 0.0, 0.0);
        CHECK(s1 == 0.0);
        CHECK(s2 == 0.0);
    }
}
