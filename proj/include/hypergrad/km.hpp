#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hypergrad/linalg.hpp"
#include "hypergrad/rng.hpp"
#include "hypergrad/schedule.hpp"

namespace hypergrad {

/// Stochastic map evaluation addressed by a sample key.
using SampledMap = std::function<RealVec(const RealVec&, const SampleKey&)>;

struct Trajectory {
    struct Point {
        std::int64_t iter;
        RealVec value;
    };
    std::vector<Point> checkpoints;  // strictly increasing iteration indices
    RealVec final;                   // equals the last checkpoint iterate
    std::int64_t sample_count = 0;   // map-sample evaluations consumed
};

/// Thrown when an iterate leaves the finite range (non-finite entries or
/// norm above 1e12, the divergence guard for inadmissible schedules).
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::int64_t iteration, std::string what)
        : std::runtime_error(std::move(what)), iteration(iteration) {}
    std::int64_t iteration;
};

/// Relaxed fixed-point iteration w <- w + eta_t (T(w, zeta_t) - w), with
/// zeta_t drawn from consecutive counters of `stream`. Exactly `steps`
/// samples are consumed. Checkpoints are recorded at iteration 0, at every
/// multiple of `record_every` (when > 0), and at the final iterate.
Trajectory km_run(const SampledMap& map, RealVec w0, const StepSchedule& schedule, std::int64_t steps,
                  SampleKey stream, std::int64_t record_every = 0);

}  // namespace hypergrad
