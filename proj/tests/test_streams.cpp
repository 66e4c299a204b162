#include <doctest.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "topomap/streams.hpp"

using namespace topomap;
using namespace topomap::streams;

namespace {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("topomap_streams_" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }

    fs::path write(const std::string& name, const std::string& text) const {
        const auto p = path_ / name;
        std::ofstream(p) << text;
        return p;
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::size_t error_line(const fs::path& p) {
    try {
        load_frame_file(p);
    } catch (const FrameFormatError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST_CASE("synthetic frames") {
    SyntheticStreamConfig cfg;

    SUBCASE("frame 0 stays inside [0,20]^2 on z = 0") {
        const auto f = synthetic_frame(cfg, 0);
        CHECK(f.points.size() == 4000);
        for (const auto& p : f.points) {
            CHECK(p.position.x() >= 0.0);
            CHECK(p.position.x() <= 20.0);
            CHECK(p.position.y() >= 0.0);
            CHECK(p.position.y() <= 20.0);
            CHECK(p.position.z() == 0.0);
            CHECK_FALSE(p.normal);
            CHECK_FALSE(p.traversability);
        }
    }

    SUBCASE("frame 3 window origin") {
        const auto f = synthetic_frame(cfg, 3);
        CHECK(f.frame_index == 3);
        CHECK(f.window_origin.x() == 30.0);
        CHECK(f.window_origin.y() == 0.0);
        for (const auto& p : f.points) {
            CHECK(p.position.x() >= 30.0);
            CHECK(p.position.x() <= 50.0);
        }
    }

    SUBCASE("diagonal direction") {
        cfg.direction = Eigen::Vector2d(1.0, 1.0).normalized();
        cfg.z_value = 2.5;
        const auto f = synthetic_frame(cfg, 2);
        const double o = 20.0 / std::sqrt(2.0);
        CHECK(f.window_origin.x() == doctest::Approx(o));
        CHECK(f.window_origin.y() == doctest::Approx(o));
        for (const auto& p : f.points) {
            CHECK(p.position.z() == 2.5);
            CHECK(p.position.y() >= o - 1e-12);
        }
    }

    SUBCASE("deterministic per (seed, index)") {
        const auto a = synthetic_frame(cfg, 5);
        const auto b = synthetic_frame(cfg, 5);
        const auto c = synthetic_frame(cfg, 6);
        REQUIRE(a.points.size() == b.points.size());
        bool differs_from_next = false;
        for (std::size_t i = 0; i < a.points.size(); ++i) {
            CHECK(a.points[i].position == b.points[i].position);
            if ((a.points[i].position - c.points[i].position + Eigen::Vector3d(10, 0, 0)).norm() >
                1e-9) {
                differs_from_next = true;
            }
        }
        CHECK(differs_from_next);
    }

    SUBCASE("invalid configs") {
        cfg.square_size = 0.0;
        CHECK_THROWS(cfg.validate());
        cfg = {};
        cfg.translation_per_frame = -1.0;
        CHECK_THROWS(cfg.validate());
        cfg = {};
        cfg.direction = Eigen::Vector2d(1.0, 1.0);
        CHECK_THROWS(cfg.validate());
    }
}

TEST_CASE("synthetic points pass a chi-square uniformity test") {
    SyntheticStreamConfig cfg;
    cfg.points_per_frame = 100000;
    for (std::uint64_t index : {0u, 7u}) {
        const auto f = synthetic_frame(cfg, index);
        std::array<int, 100> counts{};
        for (const auto& p : f.points) {
            const double u = (p.position.x() - f.window_origin.x()) / cfg.square_size;
            const double v = (p.position.y() - f.window_origin.y()) / cfg.square_size;
            const int i = std::min(9, static_cast<int>(u * 10.0));
            const int j = std::min(9, static_cast<int>(v * 10.0));
            ++counts[static_cast<std::size_t>(i * 10 + j)];
        }
        const double expected = 1000.0;
        double chi2 = 0.0;
        for (int c : counts) {
            chi2 += (c - expected) * (c - expected) / expected;
        }
        // Upper 0.1% point of chi-square with 99 degrees of freedom.
        CHECK(chi2 < 148.23);
    }
}

TEST_CASE("text frame loader") {
    TempDir dir;

    SUBCASE("bare coordinates") {
        const auto f = load_frame_file(dir.write("a.txt", "1 2 3\n"));
        REQUIRE(f.points.size() == 1);
        CHECK(f.points[0].position == Vec3(1, 2, 3));
        CHECK_FALSE(f.points[0].normal);
        CHECK_FALSE(f.points[0].traversability);
    }

    SUBCASE("normal and traversability columns") {
        const auto f = load_frame_file(dir.write("b.txt", "# header\n\n1 2 3 0 0 1 1\n4 5 6 1 0 0\n"));
        REQUIRE(f.points.size() == 2);
        CHECK(*f.points[0].normal == Vec3(0, 0, 1));
        CHECK(f.points[0].traversability == true);
        CHECK(*f.points[1].normal == Vec3(1, 0, 0));
        CHECK_FALSE(f.points[1].traversability);
    }

    SUBCASE("errors carry line numbers") {
        CHECK(error_line(dir.write("c.txt", "1 2\n")) == 1);
        CHECK(error_line(dir.write("d.txt", "1 2 3\n1 2 3 4\n")) == 2);
        CHECK(error_line(dir.write("e.txt", "1 2 3\n# c\n1 2 x\n")) == 3);
        CHECK(error_line(dir.write("f.txt", "1 2 3 0 0 1 2\n")) == 1);
        CHECK(error_line(dir.write("g.txt", "1 2 3 0 0 0\n")) == 1);
        CHECK(error_line(dir.write("h.txt", "1 2 3 0 0 1 1 9\n")) == 1);
        CHECK_THROWS_AS(load_frame_file(dir.path() / "missing.txt"), FrameFormatError);
    }

    SUBCASE("every normal is stored unit length; only large deviations are counted") {
        LoadReport report;
        const auto f = load_frame_file(dir.write("n.txt", "0 0 0 0 0 1.0005\n0 0 0 0 0 2\n0 0 0 0 3 4\n"),
                                       &report);
        CHECK(report.renormalized_normals == 2);
        CHECK(f.points[0].normal->z() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK((*f.points[1].normal - Vec3(0, 0, 1)).norm() <= 1e-15);
        CHECK((*f.points[2].normal - Vec3(0, 0.6, 0.8)).norm() <= 1e-15);
    }

    SUBCASE("round trip within 1e-9") {
        Frame frame;
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-1000.0, 1000.0);
        for (int i = 0; i < 500; ++i) {
            InputPoint p;
            p.position = Vec3(u(rng), u(rng), u(rng));
            if (i % 2 == 0) {
                p.normal = Vec3(u(rng), u(rng), u(rng)).normalized();
            }
            if (i % 4 == 0) {
                p.traversability = (i % 8 == 0);
            }
            frame.points.push_back(p);
        }
        const auto path = dir.path() / "rt.txt";
        save_frame_text(frame, path);
        const auto back = load_frame_file(path);
        REQUIRE(back.points.size() == frame.points.size());
        for (std::size_t i = 0; i < frame.points.size(); ++i) {
            CHECK((back.points[i].position - frame.points[i].position).norm() <= 1e-9);
            REQUIRE(back.points[i].normal.has_value() == frame.points[i].normal.has_value());
            if (frame.points[i].normal) {
                CHECK((*back.points[i].normal - *frame.points[i].normal).norm() <= 1e-9);
            }
            CHECK(back.points[i].traversability == frame.points[i].traversability);
        }
    }
}

TEST_CASE("PLY frame loader") {
    TempDir dir;
    const std::string header =
        "ply\nformat ascii 1.0\ncomment test\nelement vertex 2\n"
        "property float x\nproperty float y\nproperty float z\n";

    SUBCASE("positions only") {
        const auto f = load_frame_file(dir.write("a.ply", header + "end_header\n1 2 3\n4 5 6\n"));
        REQUIRE(f.points.size() == 2);
        CHECK(f.points[1].position == Vec3(4, 5, 6));
        CHECK_FALSE(f.points[1].normal);
    }

    SUBCASE("normals and extra properties") {
        const auto f = load_frame_file(dir.write(
            "b.ply", header +
                         "property uchar red\nproperty float nx\nproperty float ny\n"
                         "property float nz\nend_header\n1 2 3 255 0 0 1\n4 5 6 0 1 0 0\n"));
        REQUIRE(f.points.size() == 2);
        CHECK(*f.points[0].normal == Vec3(0, 0, 1));
        CHECK(*f.points[1].normal == Vec3(1, 0, 0));
    }

    SUBCASE("faces after the vertices are ignored") {
        const auto f = load_frame_file(dir.write(
            "c.ply", header + "element face 1\nproperty list uchar int vertex_indices\n"
                              "end_header\n1 2 3\n4 5 6\n3 0 1 1\n"));
        CHECK(f.points.size() == 2);
    }

    SUBCASE("malformed files") {
        CHECK(error_line(dir.write("d.ply", header + "end_header\n1 2 3\n")) > 0);
        CHECK(error_line(dir.write("e.ply", "ply\nformat binary_little_endian 1.0\nend_header\n")) == 2);
        CHECK(error_line(dir.write("f.ply", "ply\nformat ascii 1.0\nelement vertex 1\n"
                                            "property float x\nproperty float y\nend_header\n1 2\n")) > 0);
        CHECK(error_line(dir.write("g.ply", header + "end_header\n1 2 3\n4 5\n")) == 10);
    }
}

TEST_CASE("bundled sample frames load") {
    const fs::path data = TOPOMAP_TEST_DATA_DIR;
    const auto files = list_frame_files(data / "sample_frames");
    REQUIRE(files.size() == 2);
    for (const auto& f : files) {
        LoadReport report;
        const auto frame = load_frame_file(f, &report);
        CHECK(frame.points.size() == 400);
        CHECK(report.renormalized_normals == 0);
        for (const auto& p : frame.points) {
            REQUIRE(p.normal);
        }
    }
}

TEST_CASE("training point sampling") {
    const auto frame = [] {
        SyntheticStreamConfig cfg;
        cfg.points_per_frame = 100;
        return synthetic_frame(cfg, 0);
    }();

    std::mt19937_64 rng(4);
    const auto samples = sample_training_points(frame.points, 4000, rng);
    CHECK(samples.size() == 4000);
    std::set<std::tuple<double, double>> known;
    for (const auto& p : frame.points) {
        known.emplace(p.position.x(), p.position.y());
    }
    std::set<std::tuple<double, double>> seen;
    for (const auto& p : samples) {
        CHECK(known.count({p.position.x(), p.position.y()}) == 1);
        seen.emplace(p.position.x(), p.position.y());
    }
    // 4000 draws from 100 points miss any given one with probability ~3e-18.
    CHECK(seen.size() == 100);

    std::mt19937_64 one(4);
    CHECK(sample_training_points(frame.points, 1, one).size() == 1);

    std::mt19937_64 r1(77), r2(77);
    CHECK(sample_indices(100, 500, r1) == sample_indices(100, 500, r2));

    // Draws match std::uniform_int_distribution over [0, n-1] on the same engine.
    std::mt19937_64 r3(12), r4(12);
    const auto idx = sample_indices(37, 200, r3);
    std::uniform_int_distribution<std::size_t> pick(0, 36);
    for (std::size_t k : idx) {
        CHECK(k == pick(r4));
    }

    std::vector<InputPoint> empty;
    CHECK_THROWS(sample_training_points(empty, 5, rng));
}
