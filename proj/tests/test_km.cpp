#include <doctest.h>

#include <cmath>
#include <vector>

#include "hypergrad/bounds.hpp"
#include "hypergrad/km.hpp"
#include "hypergrad/problems/toy_contraction.hpp"

using namespace hypergrad;

namespace {

SampledMap toy_map(const ToyContraction& toy) {
    return [&toy](const RealVec& w, const SampleKey& key) { return toy.phi_sample(w, {}, key); };
}

}  // namespace

TEST_CASE("noise-free iteration follows the geometric recursion") {
    const ToyContraction toy(0.5, {1.0, 1.0}, 0.0);
    const RealVec star = *toy.fixed_point({});
    const auto traj = km_run(toy_map(toy), {0.0, 0.0}, StepSchedule::fixed(1.0), 20, {derive_stream(1, 0), 0}, 1);
    REQUIRE(traj.checkpoints.size() == 21);
    for (const auto& [iter, w] : traj.checkpoints) {
        const double expect = std::pow(0.5, static_cast<double>(iter)) * norm2(star);
        CHECK(std::sqrt(sq_dist(w, star)) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("zero step size freezes the iterate") {
    const ToyContraction toy(0.5, {1.0, 1.0}, 1.0);
    const RealVec w0{3.0, -2.0};
    const auto traj = km_run(toy_map(toy), w0, StepSchedule::fixed(0.0), 50, {derive_stream(1, 0), 0});
    CHECK(traj.final == w0);
}

TEST_CASE("exactly `steps` samples are consumed from consecutive counters") {
    std::vector<SampleKey> seen;
    const SampledMap counting = [&seen](const RealVec& w, const SampleKey& key) {
        seen.push_back(key);
        return w;
    };
    const SampleKey start{derive_stream(9, 4), 100};
    const auto traj = km_run(counting, {0.0}, StepSchedule::fixed(1.0), 7, start);
    CHECK(traj.sample_count == 7);
    REQUIRE(seen.size() == 7);
    for (std::size_t i = 0; i < seen.size(); ++i) {
        CHECK(seen[i].stream_id == start.stream_id);
        CHECK(seen[i].counter == start.counter + i);
    }
}

TEST_CASE("deterministic contraction is monotone per step") {
    const ToyContraction toy(0.7, {0.3, -0.4, 1.0}, 0.0);
    const RealVec star = *toy.fixed_point({});
    const auto traj = km_run(toy_map(toy), {5.0, 5.0, 5.0}, StepSchedule::fixed(1.0), 30, {derive_stream(2, 0), 0}, 1);
    for (std::size_t i = 1; i < traj.checkpoints.size(); ++i) {
        const double prev = std::sqrt(sq_dist(traj.checkpoints[i - 1].value, star));
        const double cur = std::sqrt(sq_dist(traj.checkpoints[i].value, star));
        CHECK(cur <= 0.7 * prev + 1e-13);
    }
}

TEST_CASE("divergence guard reports the iteration") {
    const SampledMap exploding = [](const RealVec& w, const SampleKey&) {
        RealVec out(w);
        for (double& v : out) v = v * 10.0 + 1.0;
        return out;
    };
    try {
        km_run(exploding, {1.0}, StepSchedule::fixed(1.0), 100, {derive_stream(3, 0), 0});
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.iteration > 0);
        CHECK(e.iteration <= 100);
    }
}

TEST_CASE("checkpoints are strictly increasing and end at the final iterate") {
    const ToyContraction toy(0.5, {1.0}, 0.1);
    const auto traj = km_run(toy_map(toy), {0.0}, StepSchedule::fixed(0.5), 25, {derive_stream(4, 0), 0}, 10);
    REQUIRE(!traj.checkpoints.empty());
    for (std::size_t i = 1; i < traj.checkpoints.size(); ++i)
        CHECK(traj.checkpoints[i].iter > traj.checkpoints[i - 1].iter);
    CHECK(traj.checkpoints.back().iter == 25);
    CHECK(traj.checkpoints.back().value == traj.final);
}

// Empirical MSE stays below the theoretical envelopes (upper-bound checks
// with 10% slack; replicate noise is well inside that at these sizes).
TEST_CASE("constant-step MSE envelope holds") {
    const double q = 0.6, s = 0.05, eta = 1.0;
    const ToyContraction toy(q, {0.5, 0.5}, s);
    const RealVec star = *toy.fixed_point({});
    const RealVec w0{0.0, 0.0};
    const double mse0 = sq_dist(w0, star);
    const double sigma1 = toy.constants({}).sigma1_lower;

    const int reps = 1000;
    const std::vector<std::int64_t> marks{10, 50, 200};
    std::vector<double> mse(marks.size(), 0.0);
    for (int r = 0; r < reps; ++r) {
        const auto traj =
            km_run(toy_map(toy), w0, StepSchedule::fixed(eta), 200, {derive_stream(1000 + r, 0), 0}, 10);
        std::size_t m = 0;
        for (const auto& [iter, w] : traj.checkpoints) {
            if (m < marks.size() && iter == marks[m]) {
                mse[m] += sq_dist(w, star);
                ++m;
            }
        }
        REQUIRE(m == marks.size());
    }
    for (std::size_t m = 0; m < marks.size(); ++m) {
        mse[m] /= reps;
        const double envelope = bounds::km_constant_envelope(q, sigma1, eta, mse0, marks[m]);
        CHECK(mse[m] <= 1.1 * envelope);
    }
}

TEST_CASE("decreasing-step MSE envelope holds") {
    const double q = 0.6, s = 0.05;
    const ToyContraction toy(q, {0.1, 0.1}, s);
    const RealVec star = *toy.fixed_point({});
    const RealVec w0{0.0, 0.0};
    const double mse0 = sq_dist(w0, star);
    const double sigma1 = toy.constants({}).sigma1_lower;
    const auto sched = StepSchedule::decreasing(q, 0.0);
    const double c = bounds::km_decreasing_c(q, sigma1, sched.beta(), sched.gamma(), mse0);

    const int reps = 1000;
    const std::vector<std::int64_t> marks{10, 100, 1000};
    std::vector<double> mse(marks.size(), 0.0);
    for (int r = 0; r < reps; ++r) {
        const auto traj = km_run(toy_map(toy), w0, sched, 1000, {derive_stream(5000 + r, 0), 0}, 10);
        std::size_t m = 0;
        for (const auto& [iter, w] : traj.checkpoints) {
            if (m < marks.size() && iter == marks[m]) {
                mse[m] += sq_dist(w, star);
                ++m;
            }
        }
        REQUIRE(m == marks.size());
    }
    for (std::size_t m = 0; m < marks.size(); ++m) {
        mse[m] /= reps;
        CHECK(mse[m] <= 1.1 * c / (sched.gamma() + static_cast<double>(marks[m])));
    }
}

TEST_CASE("full-step steady state respects the noise floor") {
    const double q = 0.6, s = 0.1;
    const ToyContraction toy(q, {0.5, 0.5}, s);
    const RealVec star = *toy.fixed_point({});
    const double sigma1 = toy.constants({}).sigma1_lower;
    const double floor = 1.0 * sigma1 / (1.0 - q * q);

    double mse = 0.0;
    const int reps = 2000;
    for (int r = 0; r < reps; ++r) {
        const auto traj = km_run(toy_map(toy), {0.0, 0.0}, StepSchedule::fixed(1.0), 200,
                                 {derive_stream(7000 + r, 0), 0});
        mse += sq_dist(traj.final, star) / reps;
    }
    CHECK(mse <= floor);
}

TEST_CASE("two-phase schedule ends below the constant-step floor") {
    const double q = 0.6, s = 0.05;
    const ToyContraction toy(q, {0.5, 0.5}, s);
    const RealVec star = *toy.fixed_point({});
    const double sigma1 = toy.constants({}).sigma1_lower;
    const double mse0 = sq_dist(RealVec{0.0, 0.0}, star);
    const auto sched = StepSchedule::two_phase(q, sigma1, 0.0, mse0);
    REQUIRE(sched.kind() == StepSchedule::Kind::TwoPhase);

    double mse = 0.0;
    const int reps = 500;
    for (int r = 0; r < reps; ++r) {
        const auto traj = km_run(toy_map(toy), {0.0, 0.0}, sched, 500, {derive_stream(8000 + r, 0), 0});
        mse += sq_dist(traj.final, star) / reps;
    }
    CHECK(mse < sigma1 / (1.0 - q * q));  // below the constant-phase limit
}
