#include "polypcount/tracklets.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "polypcount/errors.hpp"

namespace polypcount {

using nlohmann::json;

const std::vector<std::string>& SplitManifest::split(const std::string& name) const {
    if (name == "train") return train;
    if (name == "val") return val;
    if (name == "test") return test;
    throw ConfigError("unknown split name: " + name);
}

std::string make_tracklet_id(const std::string& video_id, const std::string& entity_id,
                             std::int64_t start_frame) {
    std::ostringstream id;
    id << video_id << '/' << entity_id << '/';
    std::string frame = std::to_string(start_frame);
    for (std::size_t i = frame.size(); i < 8; ++i) id << '0';
    id << frame;
    return id.str();
}

std::vector<Tracklet> build_tracklets(std::vector<FrameAnnotation> annotations,
                                      double iou_min) {
    std::sort(annotations.begin(), annotations.end(),
              [](const FrameAnnotation& a, const FrameAnnotation& b) {
                  return std::tie(a.video_id, a.entity_id, a.frame_idx) <
                         std::tie(b.video_id, b.entity_id, b.frame_idx);
              });

    // Duplicate (video, frame, entity) triples are a corrupted dataset.
    std::vector<std::string> duplicates;
    for (std::size_t i = 1; i < annotations.size(); ++i) {
        const auto& p = annotations[i - 1];
        const auto& c = annotations[i];
        if (p.video_id == c.video_id && p.entity_id == c.entity_id &&
            p.frame_idx == c.frame_idx) {
            std::ostringstream row;
            row << "(" << c.video_id << ", " << c.frame_idx << ", " << c.entity_id << ")";
            duplicates.push_back(row.str());
        }
    }
    if (!duplicates.empty()) {
        std::ostringstream msg;
        msg << "build_tracklets: " << duplicates.size()
            << " duplicate (video, frame, entity) annotation(s):";
        const std::size_t shown = std::min<std::size_t>(duplicates.size(), 10);
        for (std::size_t i = 0; i < shown; ++i) msg << " " << duplicates[i];
        if (shown < duplicates.size()) msg << " ...";
        throw DataError(msg.str());
    }

    std::vector<Tracklet> out;
    Tracklet current;
    auto flush = [&] {
        if (!current.frames.empty()) {
            current.tracklet_id = make_tracklet_id(current.video_id, current.entity_id,
                                                   current.start_frame());
            out.push_back(std::move(current));
            current = Tracklet{};
        }
    };

    for (const auto& ann : annotations) {
        if (!ann.box.valid()) {
            std::ostringstream msg;
            msg << "build_tracklets: invalid bounding box for (" << ann.video_id << ", "
                << ann.frame_idx << ", " << ann.entity_id << ")";
            throw DataError(msg.str());
        }
        bool continues = false;
        if (!current.frames.empty() && current.video_id == ann.video_id &&
            current.entity_id == ann.entity_id) {
            const auto& last = current.frames.back();
            continues = ann.frame_idx == last.frame_idx + 1 &&
                        iou(last.box, ann.box) >= iou_min;
        }
        if (!continues) {
            flush();
            current.video_id = ann.video_id;
            current.entity_id = ann.entity_id;
        }
        current.frames.push_back({ann.frame_idx, ann.box});
    }
    flush();
    return out;
}

std::vector<VideoRecord> group_videos(std::vector<Tracklet> tracklets) {
    std::map<std::string, VideoRecord> by_video;
    for (auto& t : tracklets) {
        auto& rec = by_video[t.video_id];
        rec.video_id = t.video_id;
        rec.entity_ids.insert(t.entity_id);
        rec.tracklets.push_back(std::move(t));
    }
    std::vector<VideoRecord> out;
    out.reserve(by_video.size());
    for (auto& [id, rec] : by_video) {
        std::sort(rec.tracklets.begin(), rec.tracklets.end(),
                  [](const Tracklet& a, const Tracklet& b) {
                      return a.tracklet_id < b.tracklet_id;
                  });
        out.push_back(std::move(rec));
    }
    return out;
}

void validate_tracklet(const Tracklet& t, double iou_min) {
    if (t.frames.empty()) throw DataError("tracklet " + t.tracklet_id + " is empty");
    for (std::size_t i = 1; i < t.frames.size(); ++i) {
        if (t.frames[i].frame_idx != t.frames[i - 1].frame_idx + 1)
            throw DataError("tracklet " + t.tracklet_id + " has non-consecutive frames");
        if (iou(t.frames[i - 1].box, t.frames[i].box) < iou_min)
            throw DataError("tracklet " + t.tracklet_id + " breaks the IoU link");
    }
}

namespace {

void check_id_field(const std::string& value, const char* field, std::size_t line) {
    if (value.empty() || value.find('/') != std::string::npos) {
        std::ostringstream msg;
        msg << "line " << line << ": " << field
            << " must be non-empty and must not contain '/': \"" << value << "\"";
        throw DataError(msg.str());
    }
}

FrameAnnotation parse_annotation_row(const json& row, std::size_t line) {
    if (!row.is_object()) throw DataError("line " + std::to_string(line) + ": not a JSON object");
    static const std::set<std::string> known = {"video_id", "frame_idx", "entity_id", "bbox"};
    for (const auto& [key, _] : row.items()) {
        if (!known.count(key))
            throw DataError("line " + std::to_string(line) + ": unknown field \"" + key + "\"");
    }
    for (const auto& key : known) {
        if (!row.contains(key))
            throw DataError("line " + std::to_string(line) + ": missing field \"" + key + "\"");
    }

    FrameAnnotation ann;
    if (!row["video_id"].is_string() || !row["entity_id"].is_string())
        throw DataError("line " + std::to_string(line) + ": video_id/entity_id must be strings");
    ann.video_id = row["video_id"].get<std::string>();
    ann.entity_id = row["entity_id"].get<std::string>();
    check_id_field(ann.video_id, "video_id", line);
    check_id_field(ann.entity_id, "entity_id", line);

    if (!row["frame_idx"].is_number_integer() || row["frame_idx"].get<std::int64_t>() < 0)
        throw DataError("line " + std::to_string(line) + ": frame_idx must be a non-negative integer");
    ann.frame_idx = row["frame_idx"].get<std::int64_t>();

    const auto& bbox = row["bbox"];
    if (!bbox.is_array() || bbox.size() != 4)
        throw DataError("line " + std::to_string(line) + ": bbox must be an array of 4 numbers");
    double coords[4];
    for (std::size_t i = 0; i < 4; ++i) {
        if (!bbox[i].is_number())
            throw DataError("line " + std::to_string(line) + ": bbox must be an array of 4 numbers");
        coords[i] = bbox[i].get<double>();
    }
    ann.box = BBox{coords[0], coords[1], coords[2], coords[3]};
    if (!ann.box.valid())
        throw DataError("line " + std::to_string(line) +
                        ": degenerate bbox (zero area, negative or non-finite coordinates)");
    return ann;
}

} // namespace

std::vector<FrameAnnotation> load_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open annotation file: " + path);

    std::vector<FrameAnnotation> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(path + ": line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            out.push_back(parse_annotation_row(row, line_no));
        } catch (const DataError& e) {
            throw DataError(path + ": " + e.what());
        }
    }
    return out;
}

void save_annotations(const std::vector<FrameAnnotation>& annotations,
                      const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write annotation file: " + path);
    for (const auto& ann : annotations) {
        json row = {{"video_id", ann.video_id},
                    {"frame_idx", ann.frame_idx},
                    {"entity_id", ann.entity_id},
                    {"bbox", {ann.box.x_min, ann.box.y_min, ann.box.x_max, ann.box.y_max}}};
        out << row.dump() << '\n';
    }
}

SplitManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open split manifest: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
    if (!j.is_object()) throw DataError(path + ": manifest must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "train" && key != "val" && key != "test")
            throw DataError(path + ": unknown manifest key \"" + key + "\"");
    }

    SplitManifest manifest;
    auto read_split = [&](const char* name, std::vector<std::string>& dst) {
        if (!j.contains(name))
            throw DataError(path + ": missing manifest key \"" + std::string(name) + "\"");
        const auto& arr = j[name];
        if (!arr.is_array()) throw DataError(path + ": \"" + std::string(name) + "\" must be an array");
        for (const auto& v : arr) {
            if (!v.is_string()) throw DataError(path + ": video ids must be strings");
            dst.push_back(v.get<std::string>());
        }
    };
    read_split("train", manifest.train);
    read_split("val", manifest.val);
    read_split("test", manifest.test);

    std::map<std::string, std::string> seen;
    auto check = [&](const std::vector<std::string>& ids, const char* name) {
        std::set<std::string> local;
        for (const auto& id : ids) {
            if (!local.insert(id).second)
                throw DataError(path + ": duplicate video id \"" + id + "\" in split " + name);
            auto [it, inserted] = seen.emplace(id, name);
            if (!inserted)
                throw DataError(path + ": video id \"" + id + "\" appears in splits " +
                                it->second + " and " + name + " (splits must be disjoint)");
        }
    };
    check(manifest.train, "train");
    check(manifest.val, "val");
    check(manifest.test, "test");
    return manifest;
}

void save_manifest(const SplitManifest& manifest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write split manifest: " + path);
    json j = {{"train", manifest.train}, {"val", manifest.val}, {"test", manifest.test}};
    out << j.dump(2) << '\n';
}

} // namespace polypcount
