#include "topomap/streams.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace topomap::streams {

void SyntheticStreamConfig::validate() const {
    if (!(square_size > 0.0)) {
        throw std::invalid_argument("square size must be > 0");
    }
    if (!(translation_per_frame >= 0.0)) {
        throw std::invalid_argument("frame translation must be >= 0");
    }
    if (points_per_frame == 0) {
        throw std::invalid_argument("points per frame must be > 0");
    }
    if (std::abs(direction.norm() - 1.0) > 1e-9) {
        throw std::invalid_argument("stream direction must be a unit vector");
    }
}

Frame synthetic_frame(const SyntheticStreamConfig& config, std::uint64_t frame_index) {
    config.validate();
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(frame_index),
                      static_cast<std::uint32_t>(frame_index >> 32), 0x5eedu};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Frame frame;
    frame.frame_index = frame_index;
    frame.window_origin = static_cast<double>(frame_index) * config.translation_per_frame *
                          config.direction;
    frame.points.reserve(config.points_per_frame);
    const double s = config.square_size;
    for (std::size_t i = 0; i < config.points_per_frame; ++i) {
        InputPoint p;
        const double u = unit(rng);
        const double v = unit(rng);
        p.position = {frame.window_origin.x() + u * s, frame.window_origin.y() + v * s,
                      config.z_value};
        frame.points.push_back(p);
    }
    return frame;
}

FrameFormatError::FrameFormatError(const std::string& path, std::size_t line,
                                   const std::string& what)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        const std::size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        if (i > start) {
            out.push_back(s.substr(start, i - start));
        }
    }
    return out;
}

bool parse_double(std::string_view token, double& value) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last && std::isfinite(value);
}

Vec3 checked_normal(const Vec3& n, const std::string& path, std::size_t line,
                    LoadReport& report) {
    const double len = n.norm();
    if (!(len > 1e-12)) {
        throw FrameFormatError(path, line, "zero-length normal");
    }
    if (std::abs(len - 1.0) > 1e-3) {
        ++report.renormalized_normals;
    }
    return n / len;
}

Frame load_text(std::istream& in, const std::string& path, LoadReport& report) {
    Frame frame;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = split_ws(line);
        if (tokens.empty() || tokens.front().front() == '#') {
            continue;
        }
        if (tokens.size() != 3 && tokens.size() != 6 && tokens.size() != 7) {
            throw FrameFormatError(path, line_no,
                                   "expected 3, 6 or 7 columns, found " +
                                       std::to_string(tokens.size()));
        }
        double v[7] = {};
        for (std::size_t k = 0; k < tokens.size(); ++k) {
            if (!parse_double(tokens[k], v[k])) {
                throw FrameFormatError(path, line_no,
                                       "malformed number '" + std::string(tokens[k]) + "'");
            }
        }
        InputPoint p;
        p.position = {v[0], v[1], v[2]};
        if (tokens.size() >= 6) {
            p.normal = checked_normal(Vec3(v[3], v[4], v[5]), path, line_no, report);
        }
        if (tokens.size() == 7) {
            if (v[6] != 0.0 && v[6] != 1.0) {
                throw FrameFormatError(path, line_no, "traversability must be 0 or 1");
            }
            p.traversability = v[6] == 1.0;
        }
        frame.points.push_back(p);
    }
    return frame;
}

Frame load_ply(std::istream& in, const std::string& path, LoadReport& report) {
    std::string line;
    std::size_t line_no = 0;
    std::getline(in, line);
    ++line_no;

    std::size_t vertex_count = 0;
    bool in_vertex = false;
    bool ascii = false;
    bool before_vertex = true;  // elements declared before "vertex" are unsupported
    std::vector<std::string> props;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = split_ws(line);
        if (tokens.empty()) {
            continue;
        }
        if (tokens[0] == "format") {
            if (tokens.size() < 2 || tokens[1] != "ascii") {
                throw FrameFormatError(path, line_no, "only ASCII PLY is supported");
            }
            ascii = true;
        } else if (tokens[0] == "element") {
            if (tokens.size() != 3) {
                throw FrameFormatError(path, line_no, "malformed element declaration");
            }
            in_vertex = tokens[1] == "vertex";
            if (in_vertex) {
                before_vertex = false;
                const std::string count(tokens[2]);
                try {
                    vertex_count = std::stoull(count);
                } catch (const std::exception&) {
                    throw FrameFormatError(path, line_no, "malformed vertex count");
                }
            } else if (before_vertex) {
                throw FrameFormatError(path, line_no,
                                       "elements before 'vertex' are not supported");
            }
        } else if (tokens[0] == "property") {
            if (in_vertex) {
                if (tokens.size() < 3 || tokens[1] == "list") {
                    throw FrameFormatError(path, line_no, "unsupported vertex property");
                }
                props.emplace_back(tokens.back());
            }
        } else if (tokens[0] == "end_header") {
            break;
        }
    }
    if (!ascii) {
        throw FrameFormatError(path, line_no, "missing 'format ascii' line");
    }
    auto index_of = [&](const char* name) -> int {
        const auto it = std::find(props.begin(), props.end(), name);
        return it == props.end() ? -1 : static_cast<int>(it - props.begin());
    };
    const int ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
    const int inx = index_of("nx"), iny = index_of("ny"), inz = index_of("nz");
    if (ix < 0 || iy < 0 || iz < 0) {
        throw FrameFormatError(path, line_no, "PLY vertex lacks x/y/z properties");
    }
    const bool has_normal = inx >= 0 && iny >= 0 && inz >= 0;

    Frame frame;
    frame.points.reserve(vertex_count);
    std::vector<double> values(props.size());
    while (frame.points.size() < vertex_count && std::getline(in, line)) {
        ++line_no;
        const auto tokens = split_ws(line);
        if (tokens.empty()) {
            continue;
        }
        if (tokens.size() != props.size()) {
            throw FrameFormatError(path, line_no,
                                   "expected " + std::to_string(props.size()) + " values");
        }
        for (std::size_t k = 0; k < tokens.size(); ++k) {
            if (!parse_double(tokens[k], values[k])) {
                throw FrameFormatError(path, line_no,
                                       "malformed number '" + std::string(tokens[k]) + "'");
            }
        }
        InputPoint p;
        p.position = {values[ix], values[iy], values[iz]};
        if (has_normal) {
            p.normal = checked_normal(Vec3(values[inx], values[iny], values[inz]), path, line_no,
                                      report);
        }
        frame.points.push_back(p);
    }
    if (frame.points.size() != vertex_count) {
        throw FrameFormatError(path, line_no, "file ends before all vertices were read");
    }
    return frame;
}

}  // namespace

Frame load_frame_file(const std::filesystem::path& path, LoadReport* report) {
    std::ifstream in(path);
    if (!in) {
        throw FrameFormatError(path.string(), 0, "cannot open file");
    }
    LoadReport local;
    LoadReport& r = report ? *report : local;
    r = {};
    if (in.peek() == 'p') {
        std::string magic;
        std::getline(in, magic);
        if (!magic.empty() && magic.back() == '\r') {
            magic.pop_back();
        }
        if (magic == "ply") {
            in.seekg(0);
            return load_ply(in, path.string(), r);
        }
        in.seekg(0);
    }
    return load_text(in, path.string(), r);
}

void save_frame_text(const Frame& frame, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& p : frame.points) {
        out << p.position.x() << ' ' << p.position.y() << ' ' << p.position.z();
        if (p.normal) {
            out << ' ' << p.normal->x() << ' ' << p.normal->y() << ' ' << p.normal->z();
            if (p.traversability) {
                out << ' ' << (*p.traversability ? 1 : 0);
            }
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

std::vector<std::filesystem::path> list_frame_files(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw std::runtime_error("not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file()) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<std::size_t> sample_indices(std::size_t frame_size, std::size_t count,
                                        std::mt19937_64& rng) {
    if (frame_size == 0) {
        throw std::invalid_argument("cannot sample from an empty frame");
    }
    std::uniform_int_distribution<std::size_t> pick(0, frame_size - 1);
    std::vector<std::size_t> out(count);
    for (auto& i : out) {
        i = pick(rng);
    }
    return out;
}

std::vector<InputPoint> sample_training_points(std::span<const InputPoint> frame,
                                               std::size_t count, std::mt19937_64& rng) {
    const auto idx = sample_indices(frame.size(), count, rng);
    std::vector<InputPoint> out;
    out.reserve(count);
    for (auto i : idx) {
        out.push_back(frame[i]);
    }
    return out;
}

}  // namespace topomap::streams
