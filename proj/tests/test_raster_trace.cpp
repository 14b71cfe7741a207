#include <doctest.h>

#include <algorithm>
#include <array>
#include <set>
#include <string>
#include <vector>

#include "inkline/errors.hpp"
#include "inkline/raster.hpp"
#include "inkline/raster_trace.hpp"
#include "inkline/rng.hpp"
#include "support/test_util.hpp"

using namespace inkline;
using test::binary_from_strings;
using test::binary_to_strings;
using test::clean_ring;
using test::gray_from_strings;

namespace {

// Independent Zhang-Suen deletability check: true when any foreground pixel
// satisfies either sub-iteration's deletion conditions. A correct thinning
// fixpoint admits none.
bool any_zs_deletable(const BinaryRaster& b) {
    static const int dx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    static const int dy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    for (int y = 0; y < b.height; ++y) {
        for (int x = 0; x < b.width; ++x) {
            if (!b.at(x, y)) continue;
            int p[8];
            int n = 0;
            for (int k = 0; k < 8; ++k) {
                p[k] = b.at_clamped(x + dx[k], y + dy[k]) ? 1 : 0;
                n += p[k];
            }
            if (n < 2 || n > 6) continue;
            int transitions = 0;
            for (int k = 0; k < 8; ++k) {
                transitions += (p[k] == 0 && p[(k + 1) % 8] == 1);
            }
            if (transitions != 1) continue;
            const int north = p[0], east = p[2], south = p[4], west = p[6];
            const bool sub1 = (north * east * south == 0) &&
                              (east * south * west == 0);
            const bool sub2 = (north * east * west == 0) &&
                              (north * south * west == 0);
            if (sub1 || sub2) return true;
        }
    }
    return false;
}

std::set<std::pair<int, int>> pixel_set(const BinaryRaster& b) {
    std::set<std::pair<int, int>> s;
    for (int y = 0; y < b.height; ++y) {
        for (int x = 0; x < b.width; ++x) {
            if (b.at(x, y)) s.insert({x, y});
        }
    }
    return s;
}

bool is_subset(const BinaryRaster& inner, const BinaryRaster& outer) {
    for (int y = 0; y < inner.height; ++y) {
        for (int x = 0; x < inner.width; ++x) {
            if (inner.at(x, y) && !outer.at(x, y)) return false;
        }
    }
    return true;
}

// Random spray of solid rectangles and discs.
BinaryRaster random_spray(Rng& rng, int size) {
    BinaryRaster b = make_binary(size, size);
    const int rects = 2 + static_cast<int>(rng.uniform_int(0, 3));
    for (int i = 0; i < rects; ++i) {
        const int w = 3 + static_cast<int>(rng.uniform_int(0, 14));
        const int h = 3 + static_cast<int>(rng.uniform_int(0, 14));
        const int ox = static_cast<int>(rng.uniform_int(0, size - 20));
        const int oy = static_cast<int>(rng.uniform_int(0, size - 20));
        for (int y = oy; y < oy + h; ++y) {
            for (int x = ox; x < ox + w; ++x) b.set(x, y, true);
        }
    }
    const int discs = 1 + static_cast<int>(rng.uniform_int(0, 2));
    for (int i = 0; i < discs; ++i) {
        const double r = 3.0 + rng.uniform(0.0, 6.0);
        const double cx = rng.uniform(r + 1.0, size - r - 1.0);
        const double cy = rng.uniform(r + 1.0, size - r - 1.0);
        for (int y = 0; y < size; ++y) {
            for (int x = 0; x < size; ++x) {
                const double ddx = x - cx;
                const double ddy = y - cy;
                if (ddx * ddx + ddy * ddy <= r * r) b.set(x, y, true);
            }
        }
    }
    return b;
}

int count_kind(const SkeletonGraph& g, NodeKind kind) {
    int n = 0;
    for (const auto& node : g.nodes) n += (node.kind == kind);
    return n;
}

void check_path_continuity(const PixelPath& p) {
    if (p.is_dot) {
        REQUIRE(p.points.size() == 1);
        return;
    }
    REQUIRE(p.points.size() >= 2);
    for (std::size_t i = 0; i + 1 < p.points.size(); ++i) {
        const PixelCoord a = p.points[i];
        const PixelCoord b = p.points[i + 1];
        INFO("points " << i << " and " << i + 1);
        CHECK((a != b));
        CHECK(std::abs(a.x - b.x) <= 1);
        CHECK(std::abs(a.y - b.y) <= 1);
    }
    if (p.closed) {
        const PixelCoord a = p.points.back();
        const PixelCoord b = p.points.front();
        CHECK(std::abs(a.x - b.x) <= 1);
        CHECK(std::abs(a.y - b.y) <= 1);
    }
}

}  // namespace

TEST_CASE("histogram counts every pixel once") {
    Rng rng(11);
    GrayRaster img;
    img.width = 37;
    img.height = 23;
    img.intensities.resize(37 * 23);
    std::array<std::uint64_t, 256> manual{};
    for (auto& v : img.intensities) {
        v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
        manual[v]++;
    }
    CHECK(histogram256(img) == manual);
}

TEST_CASE("otsu threshold maximizes inter-class variance") {
    SUBCASE("all-white page has no foreground") {
        GrayRaster img;
        img.width = 8;
        img.height = 8;
        img.intensities.assign(64, 255);
        const BinaryRaster b = binarize(img, BinarizePolicy::otsu());
        CHECK(b.count_foreground() == 0);
    }
    SUBCASE("uniform image settles on the plateau midpoint 127") {
        GrayRaster img;
        img.width = 4;
        img.height = 4;
        img.intensities.assign(16, 200);
        const auto h = histogram256(img);
        CHECK(otsu_threshold(h) == 127);
        // 200 > 127, so the uniform gray counts as paper under the <= rule.
        CHECK(binarize(img, BinarizePolicy::otsu()).count_foreground() == 0);
    }
    SUBCASE("bimodal split lands strictly between the modes") {
        GrayRaster img;
        img.width = 16;
        img.height = 2;
        img.intensities.assign(32, 10);
        for (int i = 16; i < 32; ++i) img.intensities[i] = 240;
        const auto h = histogram256(img);
        const int t = otsu_threshold(h);
        CHECK(t > 10);
        CHECK(t < 240);

        // Independent brute force over all 256 thresholds.
        double best = -1.0;
        std::vector<int> argmax;
        for (int cand = 0; cand < 256; ++cand) {
            double w0 = 0.0, w1 = 0.0, sum0 = 0.0, sum1 = 0.0;
            for (int v = 0; v < 256; ++v) {
                if (v <= cand) {
                    w0 += static_cast<double>(h[v]);
                    sum0 += static_cast<double>(h[v]) * v;
                } else {
                    w1 += static_cast<double>(h[v]);
                    sum1 += static_cast<double>(h[v]) * v;
                }
            }
            double var = 0.0;
            if (w0 > 0.0 && w1 > 0.0) {
                const double m0 = sum0 / w0;
                const double m1 = sum1 / w1;
                var = w0 * w1 * (m0 - m1) * (m0 - m1);
            }
            if (var > best + 1e-9) {
                best = var;
                argmax.assign(1, cand);
            } else if (var > best - 1e-9) {
                argmax.push_back(cand);
            }
        }
        CHECK(std::find(argmax.begin(), argmax.end(), t) != argmax.end());
        // Plateau midpoint rule.
        CHECK(t == argmax[(argmax.size() - 1) / 2]);

        const BinaryRaster b = binarize(img, BinarizePolicy::otsu());
        CHECK(b.count_foreground() == 16);
        CHECK(b.at(0, 0));
    }
    SUBCASE("fixed threshold boundary is inclusive") {
        GrayRaster img;
        img.width = 1;
        img.height = 1;
        img.intensities = {128};
        CHECK(binarize(img, BinarizePolicy::fixed(128)).at(0, 0));
        CHECK_FALSE(binarize(img, BinarizePolicy::fixed(127)).at(0, 0));
    }
}

TEST_CASE("thinning fixpoints, subsets, and component preservation") {
    SUBCASE("empty raster is a fixpoint") {
        const BinaryRaster empty = make_binary(9, 7);
        CHECK(thin(empty).count_foreground() == 0);
    }
    SUBCASE("single pixel survives") {
        BinaryRaster b = make_binary(5, 5);
        b.set(2, 2, true);
        const BinaryRaster t = thin(b);
        CHECK(t.count_foreground() == 1);
        CHECK(t.at(2, 2));
    }
    SUBCASE("3x20 solid bar collapses to its middle row") {
        BinaryRaster bar = make_binary(22, 5);
        for (int y = 1; y <= 3; ++y) {
            for (int x = 1; x <= 20; ++x) bar.set(x, y, true);
        }
        const std::vector<std::string> expected = {
            "......................",
            "......................",
            "..#################...",
            "......................",
            "......................",
        };
        CHECK(binary_to_strings(thin(bar)) == expected);
    }
    SUBCASE("solid 2x2 block keeps one component and loses three pixels") {
        BinaryRaster b = make_binary(6, 6);
        for (int y = 2; y <= 3; ++y) {
            for (int x = 2; x <= 3; ++x) b.set(x, y, true);
        }
        const BinaryRaster t = thin(b);
        CHECK(is_subset(t, b));
        CHECK(count_components8(t) == 1);
        CHECK(t.count_foreground() >= 1);
        // The result must be graphable (no 2x2 block remains).
        CHECK_NOTHROW(build_skeleton_graph(t));
    }
    SUBCASE("random sprays: subset, same components, idempotent, fixpoint") {
        Rng rng(2024);
        for (int trial = 0; trial < 25; ++trial) {
            INFO("trial " << trial);
            const BinaryRaster b = random_spray(rng, 48);
            const BinaryRaster t = thin(b);
            CHECK(is_subset(t, b));
            CHECK(count_components8(t) == count_components8(b));
            CHECK_FALSE(any_zs_deletable(t));
            const BinaryRaster tt = thin(t);
            CHECK(tt.foreground == t.foreground);
        }
    }
    SUBCASE("clean rings are already thin") {
        for (double r : {4.0, 9.5, 17.0}) {
            const int size = static_cast<int>(2 * r + 8);
            const BinaryRaster ring = clean_ring(size, r + 3.5, r + 3.5, r);
            CHECK(thin(ring).foreground == ring.foreground);
        }
    }
}

TEST_CASE("skeleton graph classification") {
    SUBCASE("straight 10-px line: two endpoints, one edge") {
        BinaryRaster b = make_binary(12, 3);
        for (int x = 1; x <= 10; ++x) b.set(x, 1, true);
        const SkeletonGraph g = build_skeleton_graph(b);
        CHECK(g.nodes.size() == 2);
        CHECK(count_kind(g, NodeKind::endpoint) == 2);
        CHECK(g.edges.size() == 1);
        CHECK(g.cycles.empty());
        CHECK(g.edges[0].chain.size() == 10);
    }
    SUBCASE("plus sign: one junction cluster, four arms") {
        BinaryRaster b = make_binary(9, 9);
        for (int i = 0; i < 9; ++i) {
            b.set(i, 4, true);
            b.set(4, i, true);
        }
        const SkeletonGraph g = build_skeleton_graph(b);
        CHECK(count_kind(g, NodeKind::junction) == 1);
        CHECK(count_kind(g, NodeKind::endpoint) == 4);
        CHECK(g.edges.size() == 4);
        CHECK(g.cycles.empty());
        for (const auto& node : g.nodes) {
            if (node.kind == NodeKind::junction) {
                CHECK(node.position == PixelCoord{4, 4});
            }
        }
    }
    SUBCASE("clean 1-px circle: exactly one cycle, nothing else") {
        for (double r : {5.0, 12.5, 23.0}) {
            const int size = static_cast<int>(2 * r + 8);
            const BinaryRaster ring = clean_ring(size, r + 3.5, r + 3.5, r);
            const SkeletonGraph g = build_skeleton_graph(ring);
            INFO("radius " << r);
            CHECK(g.nodes.empty());
            CHECK(g.edges.empty());
            REQUIRE(g.cycles.size() == 1);
            CHECK(g.cycles[0].size() == ring.count_foreground());
            // Deterministic start: lexicographically smallest pixel.
            const auto smallest =
                *std::min_element(g.cycles[0].begin(), g.cycles[0].end());
            CHECK(g.cycles[0].front() == smallest);
        }
    }
    SUBCASE("isolated pixel becomes an isolated node") {
        BinaryRaster b = make_binary(3, 3);
        b.set(1, 1, true);
        const SkeletonGraph g = build_skeleton_graph(b);
        REQUIRE(g.nodes.size() == 1);
        CHECK(g.nodes[0].kind == NodeKind::isolated);
        CHECK(g.nodes[0].position == PixelCoord{1, 1});
    }
    SUBCASE("solid 2x2 block is rejected with the pixel named") {
        BinaryRaster b = make_binary(8, 8);
        for (int y = 3; y <= 4; ++y) {
            for (int x = 5; x <= 6; ++x) b.set(x, y, true);
        }
        CHECK_THROWS_WITH_AS(build_skeleton_graph(b),
                             doctest::Contains("2x2"), InputError);
        try {
            build_skeleton_graph(b);
        } catch (const InputError& e) {
            const std::string what = e.what();
            CHECK(what.find("(5, 3)") != std::string::npos);
        }
    }
    SUBCASE("square ring: corner clusters, eight edges, no cycle") {
        // A 5x5 one-pixel-wide square ring. The pixels flanking each corner
        // have three neighbours (the diagonal shortcut across the corner),
        // so each corner becomes a two-pixel junction cluster with a short
        // self-loop edge; path extraction is responsible for re-merging the
        // ring into a single closed stroke.
        const BinaryRaster ring = binary_from_strings({
            ".......",
            ".#####.",
            ".#...#.",
            ".#...#.",
            ".#...#.",
            ".#####.",
            ".......",
        });
        const SkeletonGraph g = build_skeleton_graph(ring);
        CHECK(count_kind(g, NodeKind::junction) == 4);
        CHECK(g.edges.size() == 8);
        CHECK(g.cycles.empty());
    }
}

TEST_CASE("skeleton pixel ownership is a partition") {
    // Every skeleton pixel belongs to at least one node, edge chain, or
    // cycle, and interior chain pixels belong to exactly one edge.
    auto check_cover = [](const BinaryRaster& skel) {
        const SkeletonGraph g = build_skeleton_graph(skel);
        std::set<std::pair<int, int>> covered;
        std::set<std::pair<int, int>> interior_seen;
        for (const auto& node : g.nodes) {
            for (const auto& p : node.pixels) covered.insert({p.x, p.y});
        }
        for (const auto& e : g.edges) {
            REQUIRE(e.chain.size() >= 1);
            for (const auto& p : e.chain) covered.insert({p.x, p.y});
            for (std::size_t i = 1; i + 1 < e.chain.size(); ++i) {
                const auto key = std::make_pair(e.chain[i].x, e.chain[i].y);
                CHECK(interior_seen.insert(key).second);
            }
        }
        for (const auto& c : g.cycles) {
            for (const auto& p : c) covered.insert({p.x, p.y});
        }
        CHECK(covered == pixel_set(skel));
    };
    for (const auto& shape : test::junction_corpus()) {
        INFO(shape.name);
        check_cover(thin(shape.raster));
    }
    check_cover(clean_ring(30, 14.5, 14.5, 11.0));
}

TEST_CASE("path extraction merges straight continuations") {
    SUBCASE("single edge graph gives one open path") {
        BinaryRaster b = make_binary(12, 3);
        for (int x = 1; x <= 10; ++x) b.set(x, 1, true);
        const auto paths = extract_paths(build_skeleton_graph(b), 45.0, 4);
        REQUIRE(paths.size() == 1);
        CHECK_FALSE(paths[0].closed);
        CHECK(paths[0].points.size() == 10);
        check_path_continuity(paths[0]);
    }
    SUBCASE("X crossing passes straight through") {
        BinaryRaster b = make_binary(11, 11);
        for (int i = 0; i < 11; ++i) {
            b.set(i, i, true);
            b.set(i, 10 - i, true);
        }
        const auto paths = extract_paths(build_skeleton_graph(b), 45.0, 4);
        REQUIRE(paths.size() == 2);
        for (const auto& p : paths) {
            CHECK(p.points.size() == 11);
            CHECK_FALSE(p.closed);
            check_path_continuity(p);
            // Straight through: endpoints lie on opposite corners.
            const PixelCoord a = p.points.front();
            const PixelCoord z = p.points.back();
            CHECK(std::abs(a.x - z.x) == 10);
            CHECK(std::abs(a.y - z.y) == 10);
        }
    }
    SUBCASE("T junction keeps the bar, stem stays separate") {
        BinaryRaster b = make_binary(9, 9);
        for (int x = 0; x < 9; ++x) b.set(x, 0, true);
        for (int y = 1; y < 9; ++y) b.set(4, y, true);
        const auto paths = extract_paths(build_skeleton_graph(b), 45.0, 4);
        REQUIRE(paths.size() == 2);
        bool saw_bar = false;
        bool saw_stem = false;
        for (const auto& p : paths) {
            check_path_continuity(p);
            const PixelCoord a = p.points.front();
            const PixelCoord z = p.points.back();
            if (a.y == 0 && z.y == 0) {
                saw_bar = true;
                CHECK(p.points.size() == 9);
            } else {
                saw_stem = true;
                CHECK(std::max(a.y, z.y) == 8);
            }
        }
        CHECK(saw_bar);
        CHECK(saw_stem);
    }
    SUBCASE("zero threshold forbids the T merge too") {
        BinaryRaster b = make_binary(9, 9);
        for (int x = 0; x < 9; ++x) b.set(x, 0, true);
        for (int y = 1; y < 9; ++y) b.set(4, y, true);
        // The two bar halves are exactly collinear, so they still merge at
        // threshold 0; the stem can never merge (90 degrees).
        const auto paths = extract_paths(build_skeleton_graph(b), 0.0, 1);
        CHECK(paths.size() == 2);
    }
}

TEST_CASE("square ring extracts as one closed stroke") {
    const BinaryRaster ring = binary_from_strings({
        ".......",
        ".#####.",
        ".#...#.",
        ".#...#.",
        ".#...#.",
        ".#####.",
        ".......",
    });
    const SkeletonGraph g = build_skeleton_graph(ring);
    SUBCASE("default 45-degree threshold merges corners") {
        const auto paths = extract_paths(g, 45.0, 4);
        REQUIRE(paths.size() == 1);
        CHECK(paths[0].closed);
        CHECK(paths[0].points.size() == 16);
        check_path_continuity(paths[0]);
    }
    SUBCASE("below 45 degrees the ring falls apart into short pieces") {
        const auto paths = extract_paths(g, 40.0, 1);
        CHECK(paths.size() == 8);
        int closed = 0;
        for (const auto& p : paths) {
            CHECK(p.points.size() == 3);
            closed += p.closed ? 1 : 0;
            check_path_continuity(p);
        }
        // Four corner triangles (closed) and four open sides.
        CHECK(closed == 4);
        // All of them are noise at the default minimum length.
        CHECK(extract_paths(g, 40.0, 4).empty());
    }
}

TEST_CASE("cycles and dots pass through extraction") {
    SUBCASE("clean ring becomes a closed path from its smallest pixel") {
        const BinaryRaster ring = clean_ring(34, 16.5, 16.5, 13.0);
        const auto paths =
            extract_paths(build_skeleton_graph(ring), 45.0, 4);
        REQUIRE(paths.size() == 1);
        CHECK(paths[0].closed);
        CHECK(paths[0].points.size() == ring.count_foreground());
        check_path_continuity(paths[0]);
        CHECK(paths[0].points.front() ==
              *std::min_element(paths[0].points.begin(),
                                paths[0].points.end()));
    }
    SUBCASE("isolated pixel becomes a dot path") {
        BinaryRaster b = make_binary(5, 5);
        b.set(3, 2, true);
        // A dot is a 1-pixel path, so the default noise filter removes it;
        // it survives only when min_path_px admits single pixels.
        CHECK(extract_paths(build_skeleton_graph(b), 45.0, 4).empty());
        const auto paths = extract_paths(build_skeleton_graph(b), 45.0, 1);
        REQUIRE(paths.size() == 1);
        CHECK(paths[0].is_dot);
        CHECK(paths[0].points == std::vector<PixelCoord>{{3, 2}});
    }
    SUBCASE("short paths are dropped as noise") {
        BinaryRaster b = make_binary(8, 3);
        b.set(1, 1, true);
        b.set(2, 1, true);
        b.set(3, 1, true);
        const SkeletonGraph g = build_skeleton_graph(b);
        CHECK(extract_paths(g, 45.0, 4).empty());
        CHECK(extract_paths(g, 45.0, 3).size() == 1);
    }
}

TEST_CASE("ink conservation across extraction") {
    // With the noise filter disabled, the union of extracted path pixels
    // plus node pixels equals the skeleton foreground.
    auto check_conservation = [](const BinaryRaster& skel) {
        const SkeletonGraph g = build_skeleton_graph(skel);
        const auto paths = extract_paths(g, 45.0, 1);
        std::set<std::pair<int, int>> covered;
        for (const auto& p : paths) {
            for (const auto& q : p.points) covered.insert({q.x, q.y});
        }
        for (const auto& node : g.nodes) {
            for (const auto& q : node.pixels) covered.insert({q.x, q.y});
        }
        CHECK(covered == pixel_set(skel));
    };
    for (const auto& shape : test::junction_corpus()) {
        INFO(shape.name);
        check_conservation(thin(shape.raster));
    }
    check_conservation(clean_ring(26, 12.5, 12.5, 9.0));
    const BinaryRaster square = binary_from_strings({
        ".......",
        ".#####.",
        ".#...#.",
        ".#...#.",
        ".#...#.",
        ".#####.",
        ".......",
    });
    check_conservation(square);
}

TEST_CASE("junction corpus stroke counts are monotone in the threshold") {
    for (const auto& shape : test::junction_corpus()) {
        INFO(shape.name);
        const BinaryRaster skel = thin(shape.raster);
        const SkeletonGraph g = build_skeleton_graph(skel);
        std::size_t prev = static_cast<std::size_t>(-1);
        for (double deg : {0.0, 15.0, 30.0, 45.0, 60.0, 90.0}) {
            const std::size_t n = extract_paths(g, deg, 1).size();
            INFO("threshold " << deg);
            CHECK(n <= prev);
            prev = n;
        }
    }
}

TEST_CASE("argument validation") {
    const SkeletonGraph empty;
    CHECK_THROWS_AS(extract_paths(empty, -1.0, 4), InputError);
    CHECK_THROWS_AS(extract_paths(empty, 45.0, -1), InputError);
    CHECK_THROWS_AS(extract_paths(empty, 45.0, 4, 1), InputError);
    GrayRaster bad;
    CHECK_THROWS_AS(binarize(bad, BinarizePolicy::otsu()), InputError);
    GrayRaster one;
    one.width = 1;
    one.height = 1;
    one.intensities = {0};
    CHECK_THROWS_AS(binarize(one, BinarizePolicy::fixed(300)), InputError);
}
