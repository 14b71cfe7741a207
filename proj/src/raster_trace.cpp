#include "inkline/raster_trace.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "inkline/errors.hpp"
#include "inkline/geometry.hpp"

namespace inkline {

namespace {

// Zhang-Suen neighbour order P2..P9: N, NE, E, SE, S, SW, W, NW.
constexpr int kZsDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kZsDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

// Raster-scan neighbour order (by (y, x)); used wherever a deterministic
// tie-break across neighbours is needed.
constexpr int kScanDx[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
constexpr int kScanDy[8] = {-1, -1, -1, 0, 0, 1, 1, 1};

bool adjacent8(PixelCoord a, PixelCoord b) {
    return a != b && std::abs(a.x - b.x) <= 1 && std::abs(a.y - b.y) <= 1;
}

// One Zhang-Suen sub-iteration: mark deletable pixels from a snapshot, veto
// the erasure of isolated 2x2 blocks (keep their top-left pixel), then apply
// the deletions. Returns whether anything was deleted.
bool zs_sub_iteration(BinaryRaster& g, int sub) {
    const int w = g.width;
    const int h = g.height;
    std::vector<std::uint8_t> marks(static_cast<std::size_t>(w) * h, 0);

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!g.at(x, y)) continue;
            int p[8];
            int b = 0;
            for (int k = 0; k < 8; ++k) {
                p[k] = g.at_clamped(x + kZsDx[k], y + kZsDy[k]) ? 1 : 0;
                b += p[k];
            }
            if (b < 2 || b > 6) continue;
            int a = 0;
            for (int k = 0; k < 8; ++k) {
                if (p[k] == 0 && p[(k + 1) % 8] == 1) ++a;
            }
            if (a != 1) continue;
            // p[0]=N, p[2]=E, p[4]=S, p[6]=W
            if (sub == 0) {
                if (p[0] * p[2] * p[4] != 0) continue;
                if (p[2] * p[4] * p[6] != 0) continue;
            } else {
                if (p[0] * p[2] * p[6] != 0) continue;
                if (p[0] * p[4] * p[6] != 0) continue;
            }
            marks[static_cast<std::size_t>(y) * w + x] = 1;
        }
    }

    auto marked = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= w || y >= h) return false;
        return marks[static_cast<std::size_t>(y) * w + x] != 0;
    };

    // An isolated 2x2 block has every pixel deletable in one sub-iteration;
    // erasing all four would drop an 8-connected component. Keep top-left.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!(marked(x, y) && marked(x + 1, y) && marked(x, y + 1) &&
                  marked(x + 1, y + 1))) {
                continue;
            }
            bool ring_empty = true;
            for (int dy = -1; dy <= 2 && ring_empty; ++dy) {
                for (int dx = -1; dx <= 2 && ring_empty; ++dx) {
                    const bool inside =
                        dx >= 0 && dx <= 1 && dy >= 0 && dy <= 1;
                    if (inside) continue;
                    if (g.at_clamped(x + dx, y + dy)) ring_empty = false;
                }
            }
            if (ring_empty) {
                marks[static_cast<std::size_t>(y) * w + x] = 0;
            }
        }
    }

    bool changed = false;
    for (std::size_t i = 0; i < marks.size(); ++i) {
        if (marks[i]) {
            g.foreground[i] = 0;
            changed = true;
        }
    }
    return changed;
}

// Number of 8-connected components formed by the foreground neighbours of
// (x, y), with adjacency taken between the neighbour cells themselves.
// When this is exactly 1, deleting (x, y) cannot change the global
// 8-connected component count: any path through the pixel reroutes inside
// that single neighbour component.
int local_neighbour_components(const BinaryRaster& g, int x, int y) {
    PixelCoord cells[8];
    int n = 0;
    for (int k = 0; k < 8; ++k) {
        const int nx = x + kZsDx[k];
        const int ny = y + kZsDy[k];
        if (g.at_clamped(nx, ny)) cells[n++] = {nx, ny};
    }
    int comp = 0;
    bool seen[8] = {};
    for (int i = 0; i < n; ++i) {
        if (seen[i]) continue;
        ++comp;
        int stack[8];
        int top = 0;
        stack[top++] = i;
        seen[i] = true;
        while (top > 0) {
            const int c = stack[--top];
            for (int j = 0; j < n; ++j) {
                if (!seen[j] && adjacent8(cells[c], cells[j])) {
                    seen[j] = true;
                    stack[top++] = j;
                }
            }
        }
    }
    return comp;
}

// Breaks leftover solid 2x2 blocks (staircase configurations that
// Zhang-Suen cannot reduce) by deleting a block pixel whose neighbours form
// a single component. Returns whether anything was deleted.
bool break_solid_blocks(BinaryRaster& g) {
    const int w = g.width;
    const int h = g.height;
    bool changed = false;
    bool again = true;
    while (again) {
        again = false;
        for (int y = 0; y + 1 < h && !again; ++y) {
            for (int x = 0; x + 1 < w && !again; ++x) {
                if (!(g.at(x, y) && g.at(x + 1, y) && g.at(x, y + 1) &&
                      g.at(x + 1, y + 1))) {
                    continue;
                }
                const PixelCoord candidates[4] = {
                    {x, y}, {x + 1, y}, {x, y + 1}, {x + 1, y + 1}};
                for (const PixelCoord& c : candidates) {
                    if (local_neighbour_components(g, c.x, c.y) == 1) {
                        g.set(c.x, c.y, false);
                        changed = true;
                        again = true;
                        break;
                    }
                }
            }
        }
    }
    return changed;
}

}  // namespace

std::array<std::uint64_t, 256> histogram256(const GrayRaster& image) {
    std::array<std::uint64_t, 256> hist{};
    const long long total = static_cast<long long>(image.intensities.size());
#pragma omp parallel
    {
        std::array<std::uint64_t, 256> local{};
#pragma omp for schedule(static) nowait
        for (long long i = 0; i < total; ++i) {
            ++local[image.intensities[static_cast<std::size_t>(i)]];
        }
#pragma omp critical
        {
            for (int b = 0; b < 256; ++b) hist[b] += local[b];
        }
    }
    return hist;
}

int otsu_threshold(const std::array<std::uint64_t, 256>& histogram) {
    std::uint64_t total = 0;
    std::uint64_t total_sum = 0;
    for (int v = 0; v < 256; ++v) {
        total += histogram[v];
        total_sum += histogram[v] * static_cast<std::uint64_t>(v);
    }
    if (total == 0) return 127;

    // Inter-class variance for threshold t (class 0 = intensities <= t) is
    // proportional to (s0*N - c0*S)^2 / (c0*(N - c0)). Thresholds sharing
    // the same (c0, s0) evaluate to the exact same double, so plateau
    // detection by equality is reliable; the plateau midpoint is returned.
    double best = -1.0;
    int plateau_lo = 0;
    int plateau_hi = 0;
    std::uint64_t c0 = 0;
    std::uint64_t s0 = 0;
    for (int t = 0; t < 256; ++t) {
        c0 += histogram[t];
        s0 += histogram[t] * static_cast<std::uint64_t>(t);
        double variance = 0.0;
        if (c0 != 0 && c0 != total) {
            const double diff = static_cast<double>(s0) * total -
                                static_cast<double>(c0) * total_sum;
            variance = diff * diff /
                       (static_cast<double>(c0) *
                        static_cast<double>(total - c0));
        }
        if (variance > best) {
            best = variance;
            plateau_lo = plateau_hi = t;
        } else if (variance == best) {
            plateau_hi = t;
        }
    }
    return (plateau_lo + plateau_hi) / 2;
}

BinaryRaster binarize(const GrayRaster& image, const BinarizePolicy& policy) {
    require_input(image.width >= 1 && image.height >= 1 &&
                      image.intensities.size() ==
                          static_cast<std::size_t>(image.width) * image.height,
                  "binarize: invalid raster dimensions");
    int threshold = policy.threshold;
    if (policy.kind == BinarizePolicy::Kind::otsu) {
        threshold = otsu_threshold(histogram256(image));
    } else {
        require_input(threshold >= 0 && threshold <= 255,
                      "binarize: fixed threshold must be in [0, 255]");
    }
    BinaryRaster out = make_binary(image.width, image.height);
    const long long total = static_cast<long long>(image.intensities.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < total; ++i) {
        out.foreground[static_cast<std::size_t>(i)] =
            image.intensities[static_cast<std::size_t>(i)] <= threshold ? 1
                                                                        : 0;
    }
    return out;
}

BinaryRaster thin(const BinaryRaster& raster) {
    BinaryRaster g = raster;
    while (true) {
        bool changed = true;
        while (changed) {
            changed = zs_sub_iteration(g, 0);
            changed = zs_sub_iteration(g, 1) || changed;
        }
        if (!break_solid_blocks(g)) break;
    }
    return g;
}

namespace {

enum class PixelClass : std::uint8_t {
    background,
    isolated,
    endpoint,
    chain,
    junction
};

struct GraphBuilder {
    const BinaryRaster& s;
    int w;
    int h;
    std::vector<PixelClass> klass;
    std::vector<int> cluster_id;   // junction pixels -> cluster index, else -1
    std::vector<std::vector<PixelCoord>> cluster_pixels;
    std::vector<std::uint8_t> chain_claimed;
    std::vector<std::uint8_t> endpoint_used;

    explicit GraphBuilder(const BinaryRaster& skeleton)
        : s(skeleton), w(skeleton.width), h(skeleton.height) {}

    std::size_t idx(PixelCoord p) const {
        return static_cast<std::size_t>(p.y) * w + p.x;
    }
    PixelClass classify_at(PixelCoord p) const { return klass[idx(p)]; }

    int neighbour_count(int x, int y) const {
        int n = 0;
        for (int k = 0; k < 8; ++k) {
            if (s.at_clamped(x + kScanDx[k], y + kScanDy[k])) ++n;
        }
        return n;
    }

    void classify() {
        klass.assign(static_cast<std::size_t>(w) * h,
                     PixelClass::background);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!s.at(x, y)) continue;
                const int n = neighbour_count(x, y);
                PixelClass c = PixelClass::junction;
                if (n == 0) c = PixelClass::isolated;
                else if (n == 1) c = PixelClass::endpoint;
                else if (n == 2) c = PixelClass::chain;
                klass[static_cast<std::size_t>(y) * w + x] = c;
            }
        }
    }

    void cluster_junctions() {
        cluster_id.assign(static_cast<std::size_t>(w) * h, -1);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const PixelCoord p{x, y};
                if (classify_at(p) != PixelClass::junction ||
                    cluster_id[idx(p)] >= 0) {
                    continue;
                }
                const int id = static_cast<int>(cluster_pixels.size());
                cluster_pixels.emplace_back();
                std::vector<PixelCoord> stack{p};
                cluster_id[idx(p)] = id;
                while (!stack.empty()) {
                    const PixelCoord c = stack.back();
                    stack.pop_back();
                    cluster_pixels[id].push_back(c);
                    for (int k = 0; k < 8; ++k) {
                        const PixelCoord q{c.x + kScanDx[k],
                                           c.y + kScanDy[k]};
                        if (q.x < 0 || q.y < 0 || q.x >= w || q.y >= h)
                            continue;
                        if (classify_at(q) == PixelClass::junction &&
                            cluster_id[idx(q)] < 0) {
                            cluster_id[idx(q)] = id;
                            stack.push_back(q);
                        }
                    }
                }
                std::sort(cluster_pixels[id].begin(),
                          cluster_pixels[id].end());
            }
        }
    }

    // Follows chain pixels starting at `cur` (coming from `prev`) and
    // appends them to `chain`, claiming interiors, until a node pixel
    // (endpoint or junction) is appended.
    void walk(PixelCoord prev, PixelCoord cur, std::vector<PixelCoord>& chain) {
        while (true) {
            chain.push_back(cur);
            const PixelClass c = classify_at(cur);
            if (c != PixelClass::chain) return;
            require_invariant(!chain_claimed[idx(cur)],
                              "skeleton walk revisited a claimed chain pixel");
            chain_claimed[idx(cur)] = 1;
            PixelCoord next{-1, -1};
            for (int k = 0; k < 8; ++k) {
                const PixelCoord q{cur.x + kScanDx[k], cur.y + kScanDy[k]};
                if (q.x < 0 || q.y < 0 || q.x >= w || q.y >= h) continue;
                if (!s.at(q.x, q.y) || q == prev) continue;
                next = q;
                break;
            }
            require_invariant(next.x >= 0,
                              "chain pixel lost its forward neighbour");
            prev = cur;
            cur = next;
        }
    }
};

struct ProtoEdge {
    int node_a = -1;
    int node_b = -1;
    std::vector<PixelCoord> chain;
    bool dead = false;
};

struct ProtoNode {
    NodeKind kind = NodeKind::endpoint;
    std::vector<PixelCoord> pixels;  // sorted; single pixel unless a cluster
    bool dead = false;
};

// Deterministic BFS shortest path between two pixels of one cluster,
// moving only across the cluster's own pixels.
std::vector<PixelCoord> cluster_bridge(const std::vector<PixelCoord>& cluster,
                                       PixelCoord from, PixelCoord to) {
    if (from == to) return {from};
    std::vector<int> prev(cluster.size(), -1);
    auto find = [&](PixelCoord p) -> int {
        const auto it = std::lower_bound(cluster.begin(), cluster.end(), p);
        if (it == cluster.end() || *it != p) return -1;
        return static_cast<int>(it - cluster.begin());
    };
    const int src = find(from);
    const int dst = find(to);
    require_invariant(src >= 0 && dst >= 0,
                      "cluster bridge endpoints not in cluster");
    std::deque<int> queue{src};
    prev[src] = src;
    while (!queue.empty()) {
        const int c = queue.front();
        queue.pop_front();
        if (c == dst) break;
        for (int k = 0; k < 8; ++k) {
            const PixelCoord q{cluster[c].x + kScanDx[k],
                               cluster[c].y + kScanDy[k]};
            const int j = find(q);
            if (j >= 0 && prev[j] < 0) {
                prev[j] = c;
                queue.push_back(j);
            }
        }
    }
    require_invariant(prev[dst] >= 0, "cluster is not internally connected");
    std::vector<PixelCoord> path;
    for (int c = dst; c != src; c = prev[c]) path.push_back(cluster[c]);
    path.push_back(cluster[src]);
    std::reverse(path.begin(), path.end());
    return path;
}

// Rotates a closed pixel chain so it starts at its lexicographically
// smallest pixel and continues toward the smaller of that pixel's two
// chain neighbours.
void canonicalize_closed_chain(std::vector<PixelCoord>& pts) {
    if (pts.size() < 2) return;
    const auto smallest = std::min_element(pts.begin(), pts.end());
    std::rotate(pts.begin(), smallest, pts.end());
    if (pts.size() >= 3 && pts.back() < pts[1]) {
        std::reverse(pts.begin() + 1, pts.end());
    }
}

PixelCoord cluster_position(const std::vector<PixelCoord>& pixels) {
    if (pixels.size() == 1) return pixels.front();
    double sx = 0.0;
    double sy = 0.0;
    for (const PixelCoord& p : pixels) {
        sx += p.x;
        sy += p.y;
    }
    const PixelCoord rounded{
        static_cast<int>(std::llround(sx / static_cast<double>(pixels.size()))),
        static_cast<int>(std::llround(sy / static_cast<double>(pixels.size())))};
    if (std::binary_search(pixels.begin(), pixels.end(), rounded)) {
        return rounded;
    }
    // Snap to the nearest owned pixel (ties broken lexicographically).
    PixelCoord best = pixels.front();
    long long best_d2 = std::numeric_limits<long long>::max();
    for (const PixelCoord& p : pixels) {
        const long long dx = p.x - rounded.x;
        const long long dy = p.y - rounded.y;
        const long long d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best = p;
        }
    }
    return best;
}

}  // namespace

SkeletonGraph build_skeleton_graph(const BinaryRaster& skeleton) {
    const int w = skeleton.width;
    const int h = skeleton.height;
    for (int y = 0; y + 1 < h; ++y) {
        for (int x = 0; x + 1 < w; ++x) {
            if (skeleton.at(x, y) && skeleton.at(x + 1, y) &&
                skeleton.at(x, y + 1) && skeleton.at(x + 1, y + 1)) {
                std::ostringstream msg;
                msg << "skeleton is not thinned: solid 2x2 foreground block "
                       "with top-left pixel ("
                    << x << ", " << y << ")";
                throw InputError(msg.str());
            }
        }
    }

    GraphBuilder b(skeleton);
    b.classify();
    b.cluster_junctions();
    b.chain_claimed.assign(static_cast<std::size_t>(w) * h, 0);
    b.endpoint_used.assign(static_cast<std::size_t>(w) * h, 0);

    std::vector<ProtoNode> nodes;
    std::vector<int> node_of(static_cast<std::size_t>(w) * h, -1);
    auto add_node = [&](NodeKind kind, std::vector<PixelCoord> pixels) {
        const int id = static_cast<int>(nodes.size());
        for (const PixelCoord& p : pixels) node_of[b.idx(p)] = id;
        nodes.push_back(ProtoNode{kind, std::move(pixels), false});
        return id;
    };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const PixelCoord p{x, y};
            const PixelClass c = b.classify_at(p);
            if (c == PixelClass::isolated) add_node(NodeKind::isolated, {p});
            if (c == PixelClass::endpoint) add_node(NodeKind::endpoint, {p});
        }
    }
    for (const auto& pixels : b.cluster_pixels) {
        add_node(NodeKind::junction, pixels);
    }

    std::vector<ProtoEdge> edges;
    auto add_edge = [&](std::vector<PixelCoord> chain) {
        ProtoEdge e;
        e.node_a = node_of[b.idx(chain.front())];
        e.node_b = node_of[b.idx(chain.back())];
        require_invariant(e.node_a >= 0 && e.node_b >= 0,
                          "edge chain terminal is not a node pixel");
        e.chain = std::move(chain);
        edges.push_back(std::move(e));
    };

    // Trace from endpoint pixels first, then out of junction clusters.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const PixelCoord p{x, y};
            if (b.classify_at(p) != PixelClass::endpoint ||
                b.endpoint_used[b.idx(p)]) {
                continue;
            }
            PixelCoord nb{-1, -1};
            for (int k = 0; k < 8; ++k) {
                const PixelCoord q{x + kScanDx[k], y + kScanDy[k]};
                if (q.x >= 0 && q.y >= 0 && q.x < w && q.y < h &&
                    skeleton.at(q.x, q.y)) {
                    nb = q;
                    break;
                }
            }
            require_invariant(nb.x >= 0, "endpoint pixel has no neighbour");
            b.endpoint_used[b.idx(p)] = 1;
            std::vector<PixelCoord> chain{p};
            b.walk(p, nb, chain);
            if (b.classify_at(chain.back()) == PixelClass::endpoint) {
                b.endpoint_used[b.idx(chain.back())] = 1;
            }
            add_edge(std::move(chain));
        }
    }
    for (const auto& cluster : b.cluster_pixels) {
        for (const PixelCoord& c : cluster) {
            for (int k = 0; k < 8; ++k) {
                const PixelCoord q{c.x + kScanDx[k], c.y + kScanDy[k]};
                if (q.x < 0 || q.y < 0 || q.x >= w || q.y >= h) continue;
                const PixelClass qc = b.classify_at(q);
                if (qc == PixelClass::chain && !b.chain_claimed[b.idx(q)]) {
                    std::vector<PixelCoord> chain{c};
                    b.walk(c, q, chain);
                    if (b.classify_at(chain.back()) == PixelClass::endpoint) {
                        b.endpoint_used[b.idx(chain.back())] = 1;
                    }
                    add_edge(std::move(chain));
                } else if (qc == PixelClass::endpoint &&
                           !b.endpoint_used[b.idx(q)]) {
                    b.endpoint_used[b.idx(q)] = 1;
                    add_edge({c, q});
                }
            }
        }
    }

    // Remaining unclaimed chain pixels form node-free cycles.
    std::vector<std::vector<PixelCoord>> cycles;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const PixelCoord p{x, y};
            if (b.classify_at(p) != PixelClass::chain ||
                b.chain_claimed[b.idx(p)]) {
                continue;
            }
            std::vector<PixelCoord> ring{p};
            b.chain_claimed[b.idx(p)] = 1;
            PixelCoord second{-1, -1};
            for (int k = 0; k < 8; ++k) {
                const PixelCoord q{x + kScanDx[k], y + kScanDy[k]};
                if (q.x >= 0 && q.y >= 0 && q.x < w && q.y < h &&
                    skeleton.at(q.x, q.y)) {
                    second = q;
                    break;
                }
            }
            require_invariant(second.x >= 0, "cycle pixel has no neighbour");
            PixelCoord prev = p;
            PixelCoord cur = second;
            while (cur != p) {
                require_invariant(
                    b.classify_at(cur) == PixelClass::chain &&
                        !b.chain_claimed[b.idx(cur)],
                    "cycle walk left the unclaimed chain set");
                ring.push_back(cur);
                b.chain_claimed[b.idx(cur)] = 1;
                PixelCoord next{-1, -1};
                for (int k = 0; k < 8; ++k) {
                    const PixelCoord q{cur.x + kScanDx[k],
                                       cur.y + kScanDy[k]};
                    if (q.x < 0 || q.y < 0 || q.x >= w || q.y >= h) continue;
                    if (!skeleton.at(q.x, q.y) || q == prev) continue;
                    next = q;
                    break;
                }
                require_invariant(next.x >= 0, "cycle walk lost its way");
                prev = cur;
                cur = next;
            }
            canonicalize_closed_chain(ring);
            cycles.push_back(std::move(ring));
        }
    }

    // Demote junction clusters with fewer than three incident edge ends.
    // Degree 2 dissolves into a through chain (its two incident edges are
    // spliced across the cluster); degree 1 and 0 become endpoint/isolated
    // nodes below.
    auto incident_ends = [&](int node) {
        std::vector<std::pair<int, int>> ends;  // (edge index, end: 0 front)
        for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
            if (edges[e].dead) continue;
            if (edges[e].node_a == node) ends.push_back({e, 0});
            if (edges[e].node_b == node) ends.push_back({e, 1});
        }
        return ends;
    };

    bool dissolved = true;
    while (dissolved) {
        dissolved = false;
        for (int n = 0; n < static_cast<int>(nodes.size()); ++n) {
            if (nodes[n].dead || nodes[n].kind != NodeKind::junction) continue;
            const auto ends = incident_ends(n);
            if (ends.size() != 2) continue;
            const auto [e1, end1] = ends[0];
            const auto [e2, end2] = ends[1];
            const std::vector<PixelCoord>& cluster = nodes[n].pixels;
            if (e1 == e2) {
                // Self-loop: the dissolved cluster turns the edge into a
                // node-free cycle.
                std::vector<PixelCoord> ring = edges[e1].chain;
                if (ring.front() == ring.back()) {
                    ring.pop_back();
                } else {
                    const auto bridge =
                        cluster_bridge(cluster, ring.back(), ring.front());
                    ring.insert(ring.end(), bridge.begin() + 1,
                                bridge.end() - 1);
                }
                canonicalize_closed_chain(ring);
                cycles.push_back(std::move(ring));
                edges[e1].dead = true;
            } else {
                ProtoEdge merged;
                std::vector<PixelCoord> left = edges[e1].chain;
                if (end1 == 0) std::reverse(left.begin(), left.end());
                std::vector<PixelCoord> right = edges[e2].chain;
                if (end2 == 1) std::reverse(right.begin(), right.end());
                merged.node_a =
                    end1 == 0 ? edges[e1].node_b : edges[e1].node_a;
                merged.node_b =
                    end2 == 1 ? edges[e2].node_a : edges[e2].node_b;
                merged.chain = std::move(left);
                const auto bridge = cluster_bridge(
                    cluster, merged.chain.back(), right.front());
                merged.chain.insert(merged.chain.end(), bridge.begin() + 1,
                                    bridge.end());
                merged.chain.insert(merged.chain.end(), right.begin() + 1,
                                    right.end());
                edges[e1].dead = true;
                edges[e2].dead = true;
                edges.push_back(std::move(merged));
            }
            nodes[n].dead = true;
            dissolved = true;
            break;
        }
    }

    for (int n = 0; n < static_cast<int>(nodes.size()); ++n) {
        if (nodes[n].dead || nodes[n].kind != NodeKind::junction) continue;
        const std::size_t degree = incident_ends(n).size();
        if (degree == 1) nodes[n].kind = NodeKind::endpoint;
        if (degree == 0) nodes[n].kind = NodeKind::isolated;
    }

    SkeletonGraph out;
    out.width = w;
    out.height = h;
    std::vector<int> node_map(nodes.size(), -1);
    for (int n = 0; n < static_cast<int>(nodes.size()); ++n) {
        if (nodes[n].dead) continue;
        node_map[n] = static_cast<int>(out.nodes.size());
        SkeletonNode sn;
        sn.kind = nodes[n].kind;
        sn.pixels = nodes[n].pixels;
        sn.position = cluster_position(sn.pixels);
        out.nodes.push_back(std::move(sn));
    }
    for (auto& e : edges) {
        if (e.dead) continue;
        SkeletonEdge se;
        se.node_a = node_map[e.node_a];
        se.node_b = node_map[e.node_b];
        require_invariant(se.node_a >= 0 && se.node_b >= 0,
                          "edge refers to a dissolved node");
        se.chain = std::move(e.chain);
        out.edges.push_back(std::move(se));
    }
    out.cycles = std::move(cycles);
    return out;
}

namespace {

struct EndRef {
    int edge = -1;
    int end = -1;  // 0 = chain front, 1 = chain back
    bool operator==(const EndRef&) const = default;
};

Vec2 arrival_direction(const SkeletonEdge& e, int end, int window) {
    const auto& c = e.chain;
    const int n = static_cast<int>(c.size());
    const int span = std::min(window, n) - 1;
    PixelCoord tip{};
    PixelCoord back{};
    if (end == 1) {
        tip = c[n - 1];
        back = c[n - 1 - span];
    } else {
        tip = c[0];
        back = c[span];
    }
    return Vec2{static_cast<double>(tip.x - back.x),
                static_cast<double>(tip.y - back.y)};
}

}  // namespace

std::vector<PixelPath> extract_paths(const SkeletonGraph& graph,
                                     double max_turn_deg, int min_path_px,
                                     int tangent_window) {
    require_input(max_turn_deg >= 0.0, "max_turn_deg must be >= 0");
    require_input(min_path_px >= 0, "min_path_px must be >= 0");
    require_input(tangent_window >= 2, "tangent window must be >= 2");

    const int edge_count = static_cast<int>(graph.edges.size());
    // partner[e][end]: the edge end this end continues into, if any.
    std::vector<std::array<std::optional<EndRef>, 2>> partner(edge_count);
    std::vector<std::array<int, 2>> end_node(edge_count);
    for (int e = 0; e < edge_count; ++e) {
        end_node[e][0] = graph.edges[e].node_a;
        end_node[e][1] = graph.edges[e].node_b;
    }

    for (int n = 0; n < static_cast<int>(graph.nodes.size()); ++n) {
        if (graph.nodes[n].kind != NodeKind::junction) continue;
        std::vector<EndRef> ends;
        for (int e = 0; e < edge_count; ++e) {
            if (end_node[e][0] == n) ends.push_back({e, 0});
            if (end_node[e][1] == n) ends.push_back({e, 1});
        }
        const int m = static_cast<int>(ends.size());
        std::vector<Vec2> dir(m);
        for (int i = 0; i < m; ++i) {
            dir[i] = arrival_direction(graph.edges[ends[i].edge],
                                       ends[i].end, tangent_window);
        }
        auto turn = [&](int i, int j) {
            return angle_between_deg(dir[i], -1.0 * dir[j]);
        };
        // The threshold is inclusive; common pixel geometry lands exactly on
        // it (a staircase corner loop meets a straight side at precisely 45
        // degrees), so acos rounding must not flip the comparison.
        const double turn_limit = max_turn_deg + 1e-9;
        // An end never pairs with the opposite end of its own edge: a short
        // self-loop's two tangent chords are the same segment, so the pair
        // would score ~0 degrees and hijack the matching (detaching every
        // staircase corner from its sides as a tiny closed triangle).
        auto eligible = [&](int i, int j) {
            return ends[i].edge != ends[j].edge;
        };

        // Greedy minimal-turn pairing over eligible end pairs.
        struct Candidate {
            double t;
            int i;
            int j;
        };
        std::vector<Candidate> cands;
        for (int i = 0; i < m; ++i) {
            for (int j = i + 1; j < m; ++j) {
                if (!eligible(i, j)) continue;
                const double t = turn(i, j);
                if (t <= turn_limit) cands.push_back({t, i, j});
            }
        }
        std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
            if (a.t != b.t) return a.t < b.t;
            if (a.i != b.i) return a.i < b.i;
            return a.j < b.j;
        });
        std::vector<int> mate(m, -1);
        for (const auto& c : cands) {
            if (mate[c.i] < 0 && mate[c.j] < 0) {
                mate[c.i] = c.j;
                mate[c.j] = c.i;
            }
        }

        // 2-swap polish: re-pair two merged pairs when a legal alternative
        // strictly reduces their total turning angle.
        std::vector<std::pair<int, int>> pairs;
        for (int i = 0; i < m; ++i) {
            if (mate[i] > i) pairs.push_back({i, mate[i]});
        }
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t p = 0; p < pairs.size() && !improved; ++p) {
                for (std::size_t q = p + 1; q < pairs.size() && !improved;
                     ++q) {
                    const auto [a, bb] = pairs[p];
                    const auto [c, d] = pairs[q];
                    const double base = turn(a, bb) + turn(c, d);
                    const std::pair<int, int> alts[2][2] = {
                        {{a, c}, {bb, d}}, {{a, d}, {bb, c}}};
                    for (const auto& alt : alts) {
                        if (!eligible(alt[0].first, alt[0].second) ||
                            !eligible(alt[1].first, alt[1].second)) {
                            continue;
                        }
                        const double t1 = turn(alt[0].first, alt[0].second);
                        const double t2 = turn(alt[1].first, alt[1].second);
                        if (t1 <= turn_limit && t2 <= turn_limit &&
                            t1 + t2 < base - 1e-12) {
                            pairs[p] = alt[0];
                            pairs[q] = alt[1];
                            improved = true;
                            break;
                        }
                    }
                }
            }
        }
        for (const auto& [i, j] : pairs) {
            partner[ends[i].edge][ends[i].end] = ends[j];
            partner[ends[j].edge][ends[j].end] = ends[i];
        }
    }

    // Assemble linked edges into pixel paths.
    std::vector<PixelPath> paths;
    std::vector<std::uint8_t> visited(edge_count, 0);

    auto oriented_chain = [&](int e, int enter_end) {
        std::vector<PixelCoord> c = graph.edges[e].chain;
        if (enter_end == 1) std::reverse(c.begin(), c.end());
        return c;
    };
    auto append_linked = [&](std::vector<PixelCoord>& pts, int via_node,
                             const std::vector<PixelCoord>& chain) {
        const PixelCoord from = pts.back();
        const PixelCoord to = chain.front();
        if (from == to) {
            pts.insert(pts.end(), chain.begin() + 1, chain.end());
        } else if (adjacent8(from, to)) {
            pts.insert(pts.end(), chain.begin(), chain.end());
        } else {
            const auto bridge = cluster_bridge(
                graph.nodes[via_node].pixels, from, to);
            pts.insert(pts.end(), bridge.begin() + 1, bridge.end() - 1);
            pts.insert(pts.end(), chain.begin(), chain.end());
        }
    };
    auto close_loop = [&](std::vector<PixelCoord>& pts, int via_node) {
        if (pts.back() == pts.front()) {
            pts.pop_back();
        } else if (!adjacent8(pts.back(), pts.front())) {
            const auto bridge = cluster_bridge(graph.nodes[via_node].pixels,
                                               pts.back(), pts.front());
            pts.insert(pts.end(), bridge.begin() + 1, bridge.end() - 1);
        }
    };
    auto emit_from = [&](EndRef start, bool closed) {
        PixelPath path;
        path.closed = closed;
        EndRef cur = start;
        while (true) {
            visited[cur.edge] = 1;
            const auto chain = oriented_chain(cur.edge, cur.end);
            if (path.points.empty()) {
                path.points = chain;
            } else {
                append_linked(path.points, end_node[cur.edge][cur.end],
                              chain);
            }
            const int exit_end = 1 - cur.end;
            const auto& link = partner[cur.edge][exit_end];
            if (!link.has_value()) break;
            cur = *link;
            if (closed && cur == start) {
                close_loop(path.points, end_node[cur.edge][cur.end]);
                break;
            }
        }
        if (closed) canonicalize_closed_chain(path.points);
        paths.push_back(std::move(path));
    };

    // A self-loop edge whose ends both stayed unpaired returns to its own
    // junction; emit it closed (bridging through the cluster) rather than as
    // an open path that happens to end where it began.
    for (int e = 0; e < edge_count; ++e) {
        if (visited[e]) continue;
        if (partner[e][0].has_value() || partner[e][1].has_value()) continue;
        if (end_node[e][0] != end_node[e][1]) continue;
        visited[e] = 1;
        PixelPath path;
        path.closed = true;
        path.points = graph.edges[e].chain;
        close_loop(path.points, end_node[e][0]);
        canonicalize_closed_chain(path.points);
        paths.push_back(std::move(path));
    }
    for (int e = 0; e < edge_count; ++e) {
        for (int end = 0; end < 2 && !visited[e]; ++end) {
            if (!partner[e][end].has_value()) emit_from({e, end}, false);
        }
    }
    for (int e = 0; e < edge_count; ++e) {
        if (!visited[e]) emit_from({e, 0}, true);
    }
    for (const auto& ring : graph.cycles) {
        PixelPath path;
        path.points = ring;
        path.closed = true;
        paths.push_back(std::move(path));
    }
    for (const auto& node : graph.nodes) {
        if (node.kind != NodeKind::isolated) continue;
        PixelPath dot;
        dot.points = {node.position};
        dot.is_dot = true;
        paths.push_back(std::move(dot));
    }

    std::vector<PixelPath> kept;
    for (auto& p : paths) {
        if (static_cast<int>(p.points.size()) >= min_path_px) {
            kept.push_back(std::move(p));
        }
    }
    return kept;
}

}  // namespace inkline
