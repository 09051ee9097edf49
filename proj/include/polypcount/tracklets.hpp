#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "polypcount/geometry.hpp"

namespace polypcount {

// One ground-truth bounding box of one polyp entity in one video frame.
struct FrameAnnotation {
    std::string video_id;
    std::int64_t frame_idx = 0;
    std::string entity_id;
    BBox box;
};

struct TrackletFrame {
    std::int64_t frame_idx = 0;
    BBox box;
};

// Maximal run of consecutive same-entity annotations linked by IoU. Frames
// are strictly consecutive (frame_idx steps of exactly 1) and every adjacent
// pair of boxes overlaps with IoU >= the build threshold.
struct Tracklet {
    std::string tracklet_id;
    std::string video_id;
    std::string entity_id;
    std::vector<TrackletFrame> frames;

    std::size_t length() const { return frames.size(); }
    std::int64_t start_frame() const { return frames.front().frame_idx; }
    std::int64_t end_frame() const { return frames.back().frame_idx; }
};

// All tracklets of one video plus the set of ground-truth entities.
struct VideoRecord {
    std::string video_id;
    std::string cohort;
    std::vector<Tracklet> tracklets;
    std::set<std::string> entity_ids;
};

struct SplitManifest {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;

    const std::vector<std::string>& split(const std::string& name) const;
};

// Deterministic tracklet id: "<video_id>/<entity_id>/<start frame, 8 digits>".
std::string make_tracklet_id(const std::string& video_id,
                             const std::string& entity_id,
                             std::int64_t start_frame);

// Splits each (video, entity) annotation run into tracklets. A new tracklet
// starts on a frame gap or when the IoU with the previous box drops below
// iou_min. Input order is irrelevant; duplicates of a (video, frame, entity)
// triple are rejected with the offending rows listed.
std::vector<Tracklet> build_tracklets(std::vector<FrameAnnotation> annotations,
                                      double iou_min = 0.1);

// Groups tracklets into per-video records, sorted by video_id.
std::vector<VideoRecord> group_videos(std::vector<Tracklet> tracklets);

// Checks the Tracklet invariants (consecutive frames, IoU link, shared ids).
void validate_tracklet(const Tracklet& t, double iou_min = 0.1);

// JSON Lines loader. Each row is an object with exactly the keys
// video_id, frame_idx, entity_id, bbox. Errors carry the 1-based line number.
std::vector<FrameAnnotation> load_annotations(const std::string& path);
void save_annotations(const std::vector<FrameAnnotation>& annotations,
                      const std::string& path);

// {"train": [...], "val": [...], "test": [...]}; ids must be unique and the
// three splits pairwise disjoint (overlap is a hard error, see cmd_sweep).
SplitManifest load_manifest(const std::string& path);
void save_manifest(const SplitManifest& manifest, const std::string& path);

} // namespace polypcount
