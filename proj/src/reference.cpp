#include "inkline/reference.hpp"

#include <cstdlib>

#include "inkline/lora_math.hpp"
#include "inkline/raster_trace.hpp"

namespace inkline::reference {

namespace {

// Zhang-Suen neighbour order P2..P9: N, NE, E, SE, S, SW, W, NW.
constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

bool deletable(const BinaryRaster& g, int x, int y, int sub) {
    if (!g.at(x, y)) return false;
    int p[8];
    int count = 0;
    for (int k = 0; k < 8; ++k) {
        p[k] = g.at_clamped(x + kDx[k], y + kDy[k]) ? 1 : 0;
        count += p[k];
    }
    if (count < 2 || count > 6) return false;
    int transitions = 0;
    for (int k = 0; k < 8; ++k) {
        if (p[k] == 0 && p[(k + 1) % 8] == 1) ++transitions;
    }
    if (transitions != 1) return false;
    if (sub == 0) {
        return p[0] * p[2] * p[4] == 0 && p[2] * p[4] * p[6] == 0;
    }
    return p[0] * p[2] * p[6] == 0 && p[0] * p[4] * p[6] == 0;
}

bool sub_iteration(BinaryRaster& g, int sub) {
    const int w = g.width;
    const int h = g.height;
    std::vector<std::uint8_t> marks(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (deletable(g, x, y, sub))
                marks[static_cast<std::size_t>(y) * w + x] = 1;

    auto marked = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= w || y >= h) return false;
        return marks[static_cast<std::size_t>(y) * w + x] != 0;
    };

    // Keep the top-left pixel of any isolated fully-marked 2x2 block, which
    // would otherwise vanish in a single sub-iteration.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!(marked(x, y) && marked(x + 1, y) && marked(x, y + 1) &&
                  marked(x + 1, y + 1))) {
                continue;
            }
            bool ring_empty = true;
            for (int dy = -1; dy <= 2 && ring_empty; ++dy) {
                for (int dx = -1; dx <= 2 && ring_empty; ++dx) {
                    if (dx >= 0 && dx <= 1 && dy >= 0 && dy <= 1) continue;
                    if (g.at_clamped(x + dx, y + dy)) ring_empty = false;
                }
            }
            if (ring_empty) marks[static_cast<std::size_t>(y) * w + x] = 0;
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

int neighbour_components(const BinaryRaster& g, int x, int y) {
    int nx[8];
    int ny[8];
    int n = 0;
    for (int k = 0; k < 8; ++k) {
        const int cx = x + kDx[k];
        const int cy = y + kDy[k];
        if (g.at_clamped(cx, cy)) {
            nx[n] = cx;
            ny[n] = cy;
            ++n;
        }
    }
    bool seen[8] = {};
    int components = 0;
    for (int i = 0; i < n; ++i) {
        if (seen[i]) continue;
        ++components;
        int stack[8];
        int top = 0;
        stack[top++] = i;
        seen[i] = true;
        while (top > 0) {
            const int c = stack[--top];
            for (int j = 0; j < n; ++j) {
                if (seen[j]) continue;
                if (std::abs(nx[c] - nx[j]) <= 1 &&
                    std::abs(ny[c] - ny[j]) <= 1) {
                    seen[j] = true;
                    stack[top++] = j;
                }
            }
        }
    }
    return components;
}

bool break_blocks(BinaryRaster& g) {
    bool changed = false;
    bool again = true;
    while (again) {
        again = false;
        for (int y = 0; y + 1 < g.height && !again; ++y) {
            for (int x = 0; x + 1 < g.width && !again; ++x) {
                if (!(g.at(x, y) && g.at(x + 1, y) && g.at(x, y + 1) &&
                      g.at(x + 1, y + 1))) {
                    continue;
                }
                const int cx[4] = {x, x + 1, x, x + 1};
                const int cy[4] = {y, y, y + 1, y + 1};
                for (int c = 0; c < 4; ++c) {
                    if (neighbour_components(g, cx[c], cy[c]) == 1) {
                        g.set(cx[c], cy[c], false);
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
    for (std::uint8_t v : image.intensities) ++hist[v];
    return hist;
}

BinaryRaster thin(const BinaryRaster& raster) {
    BinaryRaster g = raster;
    while (true) {
        bool changed = true;
        while (changed) {
            changed = sub_iteration(g, 0);
            changed = sub_iteration(g, 1) || changed;
        }
        if (!break_blocks(g)) break;
    }
    return g;
}

Matrix merge_lora(const Matrix& W, const MergeSpec& spec) {
    Matrix out = W;
    for (const WeightedAdapter& wa : spec.items) {
        const Matrix& B = wa.adapter.B;
        const Matrix& A = wa.adapter.A;
        const double w = wa.weight;
        for (int i = 0; i < out.rows; ++i) {
            for (int j = 0; j < out.cols; ++j) {
                double acc = 0.0;
                for (int k = 0; k < wa.adapter.rank; ++k)
                    acc += B.at(i, k) * A.at(k, j);
                out.at(i, j) += w * acc;
            }
        }
    }
    return out;
}

}  // namespace inkline::reference
