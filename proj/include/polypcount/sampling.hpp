#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "polypcount/rng.hpp"
#include "polypcount/tracklets.hpp"

namespace polypcount {

// Positive-pair sampling knobs. Indices handed out by the samplers are
// 1-based positions within a tracklet.
struct SamplingConfig {
    double sigma = 30.0;               // Gaussian scale for frame pairs
    int fragment_len = 8;
    std::vector<int> strides{1, 2, 3, 4};
    double alpha_start = 1.0;
    double alpha_end = 0.5;
    double alpha_horizon = 0.75;       // fraction of steps the ramp spans
    std::uint64_t seed = 0;
    // When true (default) alpha is the probability of sampling the two
    // fragments from different tracklets; false inverts the reading.
    bool alpha_is_cross_probability = true;

    void validate() const;
};

// i uniform on [1, l]; j rounded from a Gaussian centered at i, redrawn
// until it lands in [1, l] \ {i} (after 100 attempts the nearest valid
// index to the last draw is used).
std::pair<int, int> sample_frame_pair(int l, const SamplingConfig& cfg, Rng& rng);

struct FragmentPair {
    std::vector<int> first;
    std::vector<int> second;
};

// Fragment starts are drawn from the two halves of the tracklet; each
// fragment draws its stride uniformly from cfg.strides. A stride that would
// run past the end is replaced by the largest stride that fits; when none
// fits the fragment repeats its start index.
FragmentPair sample_fragment_pair(int n, const SamplingConfig& cfg, Rng& rng);

struct CrossTrackletPair {
    std::vector<int> first;
    std::vector<int> second;
    std::size_t first_tracklet = 0;  // indices into the entity's tracklet list
    std::size_t second_tracklet = 0;
    bool same_tracklet = true;
};

// With the scheduled probability the two fragments come from two distinct
// tracklets of the entity (start uniform over the whole tracklet); otherwise
// both come from one tracklet via sample_fragment_pair.
CrossTrackletPair sample_cross_tracklet_pair(const std::vector<Tracklet>& entity_tracklets,
                                             std::int64_t step, std::int64_t total_steps,
                                             const SamplingConfig& cfg, Rng& rng);

// Linear from alpha_start at step 0 to alpha_end at alpha_horizon *
// total_steps, constant afterwards.
double alpha_schedule(std::int64_t step, std::int64_t total_steps,
                      const SamplingConfig& cfg);

} // namespace polypcount
