#include "inkline/raster.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "inkline/errors.hpp"

namespace inkline {

BinaryRaster make_binary(int width, int height) {
    BinaryRaster r;
    r.width = width;
    r.height = height;
    r.foreground.assign(static_cast<std::size_t>(width) * height, 0);
    return r;
}

int count_components8(const BinaryRaster& raster) {
    const int w = raster.width;
    const int h = raster.height;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
    std::vector<std::pair<int, int>> stack;
    int components = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (!raster.at(x, y) || seen[idx]) continue;
            ++components;
            seen[idx] = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = cx + dx;
                        const int ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const std::size_t nidx =
                            static_cast<std::size_t>(ny) * w + nx;
                        if (!raster.at(nx, ny) || seen[nidx]) continue;
                        seen[nidx] = 1;
                        stack.push_back({nx, ny});
                    }
                }
            }
        }
    }
    return components;
}

namespace {

// Reads the next whitespace/comment-delimited token of a PGM header.
std::string next_pgm_token(std::istream& in) {
    std::string token;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            // skip
        } else {
            break;
        }
        c = in.get();
    }
    while (c != EOF && !std::isspace(c) && c != '#') {
        token.push_back(static_cast<char>(c));
        c = in.get();
    }
    if (c != EOF) in.unget();
    return token;
}

int parse_pgm_int(std::istream& in, const char* what) {
    const std::string token = next_pgm_token(in);
    require_input(!token.empty(), std::string("PGM header: missing ") + what);
    try {
        std::size_t pos = 0;
        const int value = std::stoi(token, &pos);
        require_input(pos == token.size() && value >= 0,
                      std::string("PGM header: bad ") + what + " '" + token + "'");
        return value;
    } catch (const std::exception&) {
        throw InputError(std::string("PGM header: bad ") + what + " '" + token +
                         "'");
    }
}

}  // namespace

GrayRaster read_pgm(std::istream& in) {
    const std::string magic = next_pgm_token(in);
    require_input(magic == "P5" || magic == "P2",
                  "PGM: expected magic P5 or P2, got '" + magic + "'");
    GrayRaster image;
    image.width = parse_pgm_int(in, "width");
    image.height = parse_pgm_int(in, "height");
    const int maxval = parse_pgm_int(in, "maxval");
    require_input(image.width >= 1 && image.height >= 1,
                  "PGM: dimensions must be at least 1x1");
    require_input(maxval >= 1 && maxval <= 255,
                  "PGM: only 8-bit images supported (maxval <= 255)");
    const std::size_t count =
        static_cast<std::size_t>(image.width) * image.height;
    image.intensities.resize(count);
    if (magic == "P5") {
        const int sep = in.get();
        require_input(sep != EOF && std::isspace(sep),
                      "PGM: missing separator before pixel data");
        in.read(reinterpret_cast<char*>(image.intensities.data()),
                static_cast<std::streamsize>(count));
        require_input(static_cast<std::size_t>(in.gcount()) == count,
                      "PGM: truncated pixel data");
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const int v = parse_pgm_int(in, "pixel value");
            require_input(v <= maxval, "PGM: pixel value exceeds maxval");
            image.intensities[i] = static_cast<std::uint8_t>(v);
        }
    }
    if (maxval != 255) {
        for (auto& v : image.intensities) {
            v = static_cast<std::uint8_t>(v * 255 / maxval);
        }
    }
    return image;
}

GrayRaster read_pgm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require_input(in.good(), "cannot open image file: " + path);
    return read_pgm(in);
}

void write_pgm(std::ostream& out, const GrayRaster& image) {
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.intensities.data()),
              static_cast<std::streamsize>(image.intensities.size()));
}

void write_pgm_file(const std::string& path, const GrayRaster& image) {
    std::ofstream out(path, std::ios::binary);
    require_input(out.good(), "cannot open output file: " + path);
    write_pgm(out, image);
    out.flush();
    require_input(out.good(), "failed writing image file: " + path);
}

}  // namespace inkline
