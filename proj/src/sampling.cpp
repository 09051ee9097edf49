#include "polypcount/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "polypcount/errors.hpp"

namespace polypcount {

void SamplingConfig::validate() const {
    if (!(sigma > 0.0)) throw ConfigError("sampling: sigma must be > 0");
    if (fragment_len < 1) throw ConfigError("sampling: fragment_len must be >= 1");
    if (strides.empty()) throw ConfigError("sampling: strides must be non-empty");
    for (int s : strides)
        if (s < 1) throw ConfigError("sampling: strides must be positive");
    if (!(alpha_end >= 0.0 && alpha_end <= alpha_start && alpha_start <= 1.0))
        throw ConfigError("sampling: need 0 <= alpha_end <= alpha_start <= 1");
    if (!(alpha_horizon > 0.0 && alpha_horizon <= 1.0))
        throw ConfigError("sampling: alpha_horizon must be in (0, 1]");
}

namespace {

// Valid frame index nearest to the real draw g: within [1, l] and != i,
// ties toward the smaller index.
int nearest_valid(double g, int l, int i) {
    int j = static_cast<int>(std::llround(g));
    j = std::clamp(j, 1, l);
    if (j != i) return j;
    const bool has_low = i > 1;
    const bool has_high = i < l;
    if (has_low && has_high)
        return g < static_cast<double>(i) ? i - 1 : i + 1;
    return has_low ? i - 1 : i + 1;
}

} // namespace

std::pair<int, int> sample_frame_pair(int l, const SamplingConfig& cfg, Rng& rng) {
    cfg.validate();
    if (l < 2) throw DataError("sample_frame_pair: tracklet length must be >= 2");
    const int i = static_cast<int>(rng.uniform_int(1, l));
    double g = static_cast<double>(i);
    for (int attempt = 0; attempt < 100; ++attempt) {
        g = rng.normal(static_cast<double>(i), cfg.sigma);
        const long long j = std::llround(g);
        if (j >= 1 && j <= l && j != i) return {i, static_cast<int>(j)};
    }
    return {i, nearest_valid(g, l, i)};
}

namespace {

// Indices start, start+stride, ... of length fragment_len. A drawn stride
// that would overrun n falls back to the largest stride that fits; when no
// stride fits the fragment repeats its start index.
std::vector<int> build_fragment(int start, int n, int drawn_stride,
                                const SamplingConfig& cfg) {
    const int len = cfg.fragment_len;
    auto fits = [&](int st) {
        return start + static_cast<long long>(len - 1) * st <= n;
    };
    int stride = 0;
    if (fits(drawn_stride)) {
        stride = drawn_stride;
    } else {
        for (int st : cfg.strides)
            if (fits(st)) stride = std::max(stride, st);
    }
    std::vector<int> out(static_cast<std::size_t>(len));
    for (int k = 0; k < len; ++k) out[static_cast<std::size_t>(k)] = start + k * stride;
    return out;
}

std::vector<int> sample_fragment(int start, int n, const SamplingConfig& cfg, Rng& rng) {
    const int stride =
        cfg.strides[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(cfg.strides.size()) - 1))];
    return build_fragment(start, n, stride, cfg);
}

} // namespace

FragmentPair sample_fragment_pair(int n, const SamplingConfig& cfg, Rng& rng) {
    cfg.validate();
    if (n < 2) throw DataError("sample_fragment_pair: tracklet length must be >= 2");
    const int half = n / 2;
    FragmentPair out;
    const int start1 = static_cast<int>(rng.uniform_int(1, half));
    out.first = sample_fragment(start1, n, cfg, rng);
    const int start2 = static_cast<int>(rng.uniform_int(half + 1, n));
    out.second = sample_fragment(start2, n, cfg, rng);
    return out;
}

CrossTrackletPair sample_cross_tracklet_pair(const std::vector<Tracklet>& entity_tracklets,
                                             std::int64_t step, std::int64_t total_steps,
                                             const SamplingConfig& cfg, Rng& rng) {
    cfg.validate();
    if (entity_tracklets.empty())
        throw DataError("sample_cross_tracklet_pair: entity has no tracklets");

    const double alpha = alpha_schedule(step, total_steps, cfg);
    const double p_cross = cfg.alpha_is_cross_probability ? alpha : 1.0 - alpha;
    const bool want_cross = rng.uniform01() < p_cross;

    CrossTrackletPair out;
    if (want_cross && entity_tracklets.size() >= 2) {
        const auto count = static_cast<std::int64_t>(entity_tracklets.size());
        const std::size_t a = static_cast<std::size_t>(rng.uniform_int(0, count - 1));
        std::size_t b = static_cast<std::size_t>(rng.uniform_int(0, count - 2));
        if (b >= a) ++b;
        const int na = static_cast<int>(entity_tracklets[a].length());
        const int nb = static_cast<int>(entity_tracklets[b].length());
        out.first = sample_fragment(static_cast<int>(rng.uniform_int(1, na)), na, cfg, rng);
        out.second = sample_fragment(static_cast<int>(rng.uniform_int(1, nb)), nb, cfg, rng);
        out.first_tracklet = a;
        out.second_tracklet = b;
        out.same_tracklet = false;
        return out;
    }

    const std::size_t t = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(entity_tracklets.size()) - 1));
    const int n = static_cast<int>(entity_tracklets[t].length());
    out.first_tracklet = t;
    out.second_tracklet = t;
    out.same_tracklet = true;
    if (n >= 2) {
        const FragmentPair pair = sample_fragment_pair(n, cfg, rng);
        out.first = pair.first;
        out.second = pair.second;
    } else {
        out.first.assign(static_cast<std::size_t>(cfg.fragment_len), 1);
        out.second.assign(static_cast<std::size_t>(cfg.fragment_len), 1);
    }
    return out;
}

double alpha_schedule(std::int64_t step, std::int64_t total_steps, const SamplingConfig& cfg) {
    cfg.validate();
    if (total_steps < 1) throw ConfigError("alpha_schedule: total_steps must be >= 1");
    const double knee = cfg.alpha_horizon * static_cast<double>(total_steps);
    const double s = std::clamp(static_cast<double>(step), 0.0, static_cast<double>(total_steps));
    if (s >= knee) return cfg.alpha_end;
    return cfg.alpha_start + (cfg.alpha_end - cfg.alpha_start) * (s / knee);
}

} // namespace polypcount
