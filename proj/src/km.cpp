#include "hypergrad/km.hpp"

#include <string>

namespace hypergrad {

namespace {
constexpr double kDivergenceNorm = 1e12;

void check_finite(const RealVec& w, std::int64_t iter) {
    if (!all_finite(w) || norm2(w) > kDivergenceNorm)
        throw DivergenceError(iter, "km_run: non-finite or diverging iterate at iteration " + std::to_string(iter));
}
}  // namespace

Trajectory km_run(const SampledMap& map, RealVec w0, const StepSchedule& schedule, std::int64_t steps,
                  SampleKey stream, std::int64_t record_every) {
    if (steps < 0) throw std::invalid_argument("km_run: steps must be >= 0");
    check_finite(w0, 0);

    Trajectory traj;
    traj.checkpoints.push_back({0, w0});

    RealVec w = std::move(w0);
    for (std::int64_t t = 0; t < steps; ++t) {
        const double eta = schedule.value_at(t);
        const RealVec tw = map(w, stream.at(stream.counter + static_cast<std::uint64_t>(t)));
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += eta * (tw[i] - w[i]);
        check_finite(w, t + 1);
        ++traj.sample_count;
        if (record_every > 0 && (t + 1) % record_every == 0 && t + 1 != steps)
            traj.checkpoints.push_back({t + 1, w});
    }
    if (steps > 0) traj.checkpoints.push_back({steps, w});
    traj.final = std::move(w);
    return traj;
}

}  // namespace hypergrad
