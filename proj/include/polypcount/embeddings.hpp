#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "polypcount/tracklets.hpp"

namespace polypcount {

using Vec = std::vector<double>;

enum class Granularity { frame, tracklet };

// Appearance embeddings keyed by frame or by tracklet. Frame keys follow
// "<video_id>/<frame_idx>/<entity_id>"; tracklet keys are tracklet ids.
struct EmbeddingTable {
    int dim = 0;
    Granularity granularity = Granularity::frame;
    std::map<std::string, Vec> entries;
};

std::string frame_key(const std::string& video_id, std::int64_t frame_idx,
                      const std::string& entity_id);

// Mean of the embeddings at tracklet positions 0, s, 2s, ... (first frame
// always included). Missing keys are an error naming the key.
Vec aggregate_tracklet(const Tracklet& tracklet, const EmbeddingTable& table,
                       int stride = 4);

// Frame granularity aggregates per tracklet; tracklet granularity is a
// passthrough lookup.
std::map<std::string, Vec> tracklet_embeddings(const VideoRecord& video,
                                               const EmbeddingTable& table,
                                               int stride = 4);

// Desk-scale synthetic dataset: well-separated entity centers plus Gaussian
// per-frame noise, with tracklet structure that round-trips through
// build_tracklets.
struct SynthConfig {
    int dim = 32;
    int n_videos = 1;
    int entities_per_video = 2;
    int tracklets_per_entity = 3;
    int frames_per_tracklet = 8;
    double intra_sigma = 0.1;
    double inter_sep = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthResult {
    std::vector<FrameAnnotation> annotations;
    std::vector<VideoRecord> videos;
    EmbeddingTable table; // frame granularity
};

SynthResult synthesize(const SynthConfig& config);

// Binary "PEM1" format (little-endian) or the CSV alternative; readers
// detect the magic. See the README for the exact layout.
EmbeddingTable load_embeddings(const std::string& path);
void save_embeddings(const EmbeddingTable& table, const std::string& path);
void save_embeddings_csv(const EmbeddingTable& table, const std::string& path);

} // namespace polypcount
