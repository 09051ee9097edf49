#include "polypcount/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "polypcount/errors.hpp"
#include "polypcount/rng.hpp"

namespace polypcount {

std::string frame_key(const std::string& video_id, std::int64_t frame_idx,
                      const std::string& entity_id) {
    return video_id + "/" + std::to_string(frame_idx) + "/" + entity_id;
}

Vec aggregate_tracklet(const Tracklet& tracklet, const EmbeddingTable& table, int stride) {
    if (table.granularity != Granularity::frame)
        throw DataError("aggregate_tracklet: table must have frame granularity");
    if (stride < 1) throw ConfigError("aggregate_tracklet: stride must be >= 1");
    if (tracklet.frames.empty())
        throw DataError("aggregate_tracklet: tracklet " + tracklet.tracklet_id + " is empty");

    Vec sum(static_cast<std::size_t>(table.dim), 0.0);
    std::size_t count = 0;
    for (std::size_t pos = 0; pos < tracklet.frames.size(); pos += static_cast<std::size_t>(stride)) {
        const std::string key = frame_key(tracklet.video_id, tracklet.frames[pos].frame_idx,
                                          tracklet.entity_id);
        auto it = table.entries.find(key);
        if (it == table.entries.end())
            throw DataError("aggregate_tracklet: missing frame embedding for key \"" + key + "\"");
        const Vec& v = it->second;
        for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += v[d];
        ++count;
    }
    for (double& x : sum) x /= static_cast<double>(count);
    return sum;
}

std::map<std::string, Vec> tracklet_embeddings(const VideoRecord& video,
                                               const EmbeddingTable& table, int stride) {
    std::map<std::string, Vec> out;
    for (const auto& t : video.tracklets) {
        if (table.granularity == Granularity::tracklet) {
            auto it = table.entries.find(t.tracklet_id);
            if (it == table.entries.end())
                throw DataError("tracklet_embeddings: missing tracklet embedding for key \"" +
                                t.tracklet_id + "\"");
            out.emplace(t.tracklet_id, it->second);
        } else {
            out.emplace(t.tracklet_id, aggregate_tracklet(t, table, stride));
        }
    }
    return out;
}

void SynthConfig::validate() const {
    if (dim < 1) throw ConfigError("synth: dim must be positive");
    if (n_videos < 1 || entities_per_video < 1 || tracklets_per_entity < 1 ||
        frames_per_tracklet < 1)
        throw ConfigError("synth: counts must be positive");
    if (!(intra_sigma > 0.0)) throw ConfigError("synth: intra_sigma must be > 0");
    if (!(inter_sep > 0.0)) throw ConfigError("synth: inter_sep must be > 0");
}

SynthResult synthesize(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);

    // Entity centers: Gaussian at scale inter_sep, rejection-sampled until all
    // pairwise distances reach inter_sep. Centers are global across videos.
    const int total_entities = config.n_videos * config.entities_per_video;
    std::vector<Vec> centers;
    centers.reserve(static_cast<std::size_t>(total_entities));
    for (int e = 0; e < total_entities; ++e) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            Vec c(static_cast<std::size_t>(config.dim));
            for (double& x : c) x = rng.normal(0.0, config.inter_sep);
            placed = true;
            for (const Vec& prev : centers) {
                double d2 = 0.0;
                for (std::size_t k = 0; k < c.size(); ++k) {
                    const double diff = c[k] - prev[k];
                    d2 += diff * diff;
                }
                if (std::sqrt(d2) < config.inter_sep) {
                    placed = false;
                    break;
                }
            }
            if (placed) centers.push_back(std::move(c));
        }
        if (!placed)
            throw DataError("synthesize: cannot place " + std::to_string(total_entities) +
                            " entity centers at inter_sep " + std::to_string(config.inter_sep) +
                            " in dim " + std::to_string(config.dim));
    }

    auto pad = [](int value, int width) {
        std::string s = std::to_string(value);
        return std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
    };

    SynthResult result;
    result.table.dim = config.dim;
    result.table.granularity = Granularity::frame;

    const BBox box{10.0, 10.0, 20.0, 20.0};
    const int gap = 2; // frame gap between consecutive tracklets of one entity
    int center_idx = 0;
    for (int v = 0; v < config.n_videos; ++v) {
        const std::string video_id = "synth_" + pad(v, 3);
        for (int e = 0; e < config.entities_per_video; ++e, ++center_idx) {
            const std::string entity_id = "p" + pad(e, 2);
            const Vec& center = centers[static_cast<std::size_t>(center_idx)];
            for (int t = 0; t < config.tracklets_per_entity; ++t) {
                const std::int64_t start =
                    static_cast<std::int64_t>(t) * (config.frames_per_tracklet + gap);
                for (int f = 0; f < config.frames_per_tracklet; ++f) {
                    const std::int64_t frame = start + f;
                    result.annotations.push_back({video_id, frame, entity_id, box});
                    Vec emb(static_cast<std::size_t>(config.dim));
                    for (std::size_t d = 0; d < emb.size(); ++d)
                        emb[d] = center[d] + rng.normal(0.0, config.intra_sigma);
                    result.table.entries.emplace(frame_key(video_id, frame, entity_id),
                                                 std::move(emb));
                }
            }
        }
    }

    result.videos = group_videos(build_tracklets(result.annotations));
    for (auto& video : result.videos) video.cohort = "synthetic";
    return result;
}

// --- file formats ---------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'P', 'E', 'M', '1'};

void write_u16(std::ostream& out, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

void write_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(out, bits);
}

std::uint64_t read_uint(std::istream& in, int bytes, const std::string& path) {
    unsigned char b[8] = {0};
    in.read(reinterpret_cast<char*>(b), bytes);
    if (!in) throw DataError(path + ": truncated embedding file");
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

EmbeddingTable load_embeddings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embedding file: " + path);

    std::string header;
    if (!std::getline(in, header))
        throw DataError(path + ": empty embedding CSV");
    // Header: "# polypcount embeddings granularity=<frame|tracklet> dim=<n>"
    EmbeddingTable table;
    {
        std::istringstream hs(header);
        std::string hash, name, kind, gran_kv, dim_kv;
        hs >> hash >> name >> kind >> gran_kv >> dim_kv;
        if (hash != "#" || name != "polypcount" || kind != "embeddings" ||
            gran_kv.rfind("granularity=", 0) != 0 || dim_kv.rfind("dim=", 0) != 0)
            throw DataError(path + ": line 1: bad embedding CSV header");
        const std::string gran = gran_kv.substr(12);
        if (gran == "frame") table.granularity = Granularity::frame;
        else if (gran == "tracklet") table.granularity = Granularity::tracklet;
        else throw DataError(path + ": line 1: unknown granularity \"" + gran + "\"");
        try {
            table.dim = std::stoi(dim_kv.substr(4));
        } catch (const std::exception&) {
            throw DataError(path + ": line 1: bad dim");
        }
        if (table.dim < 1) throw DataError(path + ": line 1: dim must be positive");
    }

    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string field;
        if (!std::getline(ls, field, ','))
            throw DataError(path + ": line " + std::to_string(line_no) + ": missing key");
        const std::string key = field;
        Vec v;
        v.reserve(static_cast<std::size_t>(table.dim));
        while (std::getline(ls, field, ',')) {
            try {
                std::size_t used = 0;
                const double x = std::stod(field, &used);
                if (used != field.size() && field.find_first_not_of(" \r", used) != std::string::npos)
                    throw std::invalid_argument(field);
                v.push_back(x);
            } catch (const std::exception&) {
                throw DataError(path + ": line " + std::to_string(line_no) +
                                ": bad number \"" + field + "\"");
            }
        }
        if (v.size() != static_cast<std::size_t>(table.dim))
            throw DataError(path + ": line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.dim) + " values, got " + std::to_string(v.size()));
        for (double x : v)
            if (!std::isfinite(x))
                throw DataError(path + ": line " + std::to_string(line_no) + ": non-finite value");
        if (!table.entries.emplace(key, std::move(v)).second)
            throw DataError(path + ": line " + std::to_string(line_no) + ": duplicate key \"" + key + "\"");
    }
    return table;
}

} // namespace

EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open embedding file: " + path);
    char magic[4] = {0};
    in.read(magic, 4);
    if (!(in && std::memcmp(magic, kMagic, 4) == 0)) return load_embeddings_csv(path);

    EmbeddingTable table;
    const std::uint64_t gran = read_uint(in, 1, path);
    if (gran > 1) throw DataError(path + ": bad granularity byte");
    table.granularity = gran == 0 ? Granularity::frame : Granularity::tracklet;
    const std::uint64_t dim = read_uint(in, 4, path);
    if (dim == 0 || dim > (1u << 20)) throw DataError(path + ": implausible dim");
    table.dim = static_cast<int>(dim);
    const std::uint64_t count = read_uint(in, 8, path);

    for (std::uint64_t r = 0; r < count; ++r) {
        const std::uint64_t key_len = read_uint(in, 2, path);
        std::string key(static_cast<std::size_t>(key_len), '\0');
        in.read(key.data(), static_cast<std::streamsize>(key_len));
        if (!in) throw DataError(path + ": truncated embedding file");
        Vec v(static_cast<std::size_t>(dim));
        for (std::size_t d = 0; d < v.size(); ++d) {
            const std::uint32_t bits = static_cast<std::uint32_t>(read_uint(in, 4, path));
            float f;
            std::memcpy(&f, &bits, 4);
            if (!std::isfinite(f))
                throw DataError(path + ": non-finite component in record for key \"" + key + "\"");
            v[d] = static_cast<double>(f);
        }
        if (!table.entries.emplace(key, std::move(v)).second)
            throw DataError(path + ": duplicate key \"" + key + "\"");
    }
    return table;
}

void save_embeddings(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write embedding file: " + path);
    out.write(kMagic, 4);
    const unsigned char gran = table.granularity == Granularity::frame ? 0 : 1;
    out.write(reinterpret_cast<const char*>(&gran), 1);
    write_u32(out, static_cast<std::uint32_t>(table.dim));
    write_u64(out, table.entries.size());
    for (const auto& [key, v] : table.entries) {
        if (key.size() > 0xffff)
            throw DataError("embedding key too long: \"" + key.substr(0, 64) + "...\"");
        if (v.size() != static_cast<std::size_t>(table.dim))
            throw DataError("embedding for key \"" + key + "\" has wrong dim");
        write_u16(out, static_cast<std::uint16_t>(key.size()));
        out.write(key.data(), static_cast<std::streamsize>(key.size()));
        for (double x : v) write_f32(out, static_cast<float>(x));
    }
    if (!out) throw DataError("write failed: " + path);
}

void save_embeddings_csv(const EmbeddingTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write embedding file: " + path);
    out << "# polypcount embeddings granularity="
        << (table.granularity == Granularity::frame ? "frame" : "tracklet")
        << " dim=" << table.dim << "\n";
    out << std::setprecision(17);
    for (const auto& [key, v] : table.entries) {
        out << key;
        for (double x : v) out << ',' << x;
        out << '\n';
    }
}

} // namespace polypcount
