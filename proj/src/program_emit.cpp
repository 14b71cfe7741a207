#include "inkline/program_emit.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>

#include "inkline/errors.hpp"

namespace inkline {

namespace {

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", quantize4(v));
    return buf;
}

double chord_deviation(const Vec2& p, const Vec2& a, const Vec2& b) {
    return point_segment_distance(p, a, b);
}

bool flat_enough(const CubicBezier& seg, double tol) {
    return std::max(chord_deviation(seg.p1, seg.p0, seg.p3),
                    chord_deviation(seg.p2, seg.p0, seg.p3)) <= tol;
}

void flatten_segment(const CubicBezier& seg, double tol, int depth,
                     std::vector<Vec2>& out) {
    if (flat_enough(seg, tol) || depth >= 32) {
        out.push_back(seg.p3);
        return;
    }
    auto [left, right] = seg.split(0.5);
    flatten_segment(left, tol, depth + 1, out);
    flatten_segment(right, tol, depth + 1, out);
}

}  // namespace

FlattenedStroke flatten(const Stroke& s, double tol) {
    require_input(tol > 0.0, "flatten: tolerance must be positive");
    require_input(!s.segments.empty(), "flatten: stroke has no segments");
    require_input(!s.is_dot(), "flatten: dot stroke has no extent");

    std::vector<Vec2> pts;
    pts.push_back(s.segments.front().p0);
    for (const CubicBezier& seg : s.segments) flatten_segment(seg, tol, 0, pts);

    // Collapse duplicates from degenerate segments.
    std::vector<Vec2> dedup;
    dedup.reserve(pts.size());
    for (const Vec2& p : pts)
        if (dedup.empty() || !(p == dedup.back())) dedup.push_back(p);

    FlattenedStroke out;
    out.line.closed = s.closed;
    if (s.closed && dedup.size() > 1 && dedup.front() == dedup.back())
        dedup.pop_back();
    out.line.points = std::move(dedup);
    require_invariant(out.line.points.size() >= 2,
                      "flatten: stroke collapsed to a single point");
    return out;
}

std::string emit_svg(const std::vector<Stroke>& strokes, double canvas_w,
                     double canvas_h) {
    require_input(canvas_w > 0.0 && canvas_h > 0.0,
                  "emit_svg: canvas size must be positive");
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           fmt4(canvas_w) + "mm\" height=\"" + fmt4(canvas_h) +
           "mm\" viewBox=\"0 0 " + fmt4(canvas_w) + " " + fmt4(canvas_h) +
           "\">\n";
    for (const Stroke& s : strokes) {
        require_input(!s.segments.empty(), "emit_svg: stroke has no segments");
        std::string d = "M " + fmt4(s.segments.front().p0.x) + " " +
                        fmt4(s.segments.front().p0.y);
        for (const CubicBezier& seg : s.segments) {
            d += " C " + fmt4(seg.p1.x) + " " + fmt4(seg.p1.y) + " " +
                 fmt4(seg.p2.x) + " " + fmt4(seg.p2.y) + " " + fmt4(seg.p3.x) +
                 " " + fmt4(seg.p3.y);
        }
        if (s.closed) d += " Z";
        out += "  <path d=\"" + d +
               "\" fill=\"none\" stroke=\"black\" stroke-width=\"0.35\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

namespace {

// Cursor over SVG path data; offsets index the whole document so
// diagnostics can point at the byte.
struct PathScanner {
    const std::string& text;
    size_t pos;
    size_t end;

    void skip_separators() {
        while (pos < end) {
            char c = text[pos];
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ',')
                ++pos;
            else
                break;
        }
    }

    bool done() {
        skip_separators();
        return pos >= end;
    }

    bool number_ahead() {
        skip_separators();
        if (pos >= end) return false;
        char c = text[pos];
        return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
    }

    double number() {
        skip_separators();
        require_input(pos < end, "parse_svg: path data ends mid-command at byte offset " +
                                     std::to_string(pos));
        const char* start = text.c_str() + pos;
        char* stop = nullptr;
        double v = std::strtod(start, &stop);
        require_input(stop != start && std::isfinite(v),
                      "parse_svg: malformed number at byte offset " +
                          std::to_string(pos));
        size_t consumed = static_cast<size_t>(stop - start);
        require_input(pos + consumed <= end,
                      "parse_svg: malformed number at byte offset " +
                          std::to_string(pos));
        pos += consumed;
        return v;
    }
};

CubicBezier line_cubic(const Vec2& a, const Vec2& b) {
    Vec2 d = b - a;
    return CubicBezier{a, a + d * (1.0 / 3.0), a + d * (2.0 / 3.0), b};
}

void parse_path_data(const std::string& text, size_t begin, size_t end,
                     std::vector<Stroke>& strokes) {
    PathScanner sc{text, begin, end};
    std::vector<CubicBezier> segs;
    Vec2 cur{0, 0};
    Vec2 subpath_start{0, 0};
    bool has_cur = false;

    auto flush_open = [&]() {
        if (!segs.empty()) strokes.push_back(Stroke{segs, false});
        segs.clear();
    };

    char cmd = 0;
    while (!sc.done()) {
        char c = text[sc.pos];
        if (std::isalpha(static_cast<unsigned char>(c))) {
            ++sc.pos;
            switch (c) {
                case 'M':
                case 'm':
                case 'L':
                case 'l':
                case 'C':
                case 'c':
                case 'Z':
                case 'z':
                    cmd = c;
                    break;
                case 'A':
                case 'Q':
                case 'S':
                case 'T':
                case 'H':
                case 'V':
                case 'a':
                case 'q':
                case 's':
                case 't':
                case 'h':
                case 'v':
                    throw InputError(
                        std::string("parse_svg: unsupported path command '") +
                        c + "' at byte offset " + std::to_string(sc.pos - 1));
                default:
                    throw InputError(
                        std::string("parse_svg: unknown path command '") + c +
                        "' at byte offset " + std::to_string(sc.pos - 1));
            }
        } else if (cmd == 0) {
            throw InputError(
                "parse_svg: number before any path command at byte offset " +
                std::to_string(sc.pos));
        }

        if (cmd == 'Z' || cmd == 'z') {
            if (!segs.empty()) {
                if (!(cur == subpath_start))
                    segs.push_back(line_cubic(cur, subpath_start));
                strokes.push_back(Stroke{segs, true});
                segs.clear();
            }
            cur = subpath_start;
            cmd = 0;  // a number may not follow a closepath
            continue;
        }

        if (cmd == 'M' || cmd == 'm') {
            double x = sc.number();
            double y = sc.number();
            Vec2 target{x, y};
            if (cmd == 'm' && has_cur) target = cur + Vec2{x, y};
            flush_open();
            subpath_start = target;
            cur = target;
            has_cur = true;
            // Further coordinate pairs are implicit linetos.
            cmd = (cmd == 'M') ? 'L' : 'l';
            continue;
        }

        require_input(has_cur,
                      std::string("parse_svg: command '") + cmd +
                          "' before any moveto at byte offset " +
                          std::to_string(sc.pos));
        if (cmd == 'L' || cmd == 'l') {
            double x = sc.number();
            double y = sc.number();
            Vec2 target = (cmd == 'l') ? cur + Vec2{x, y} : Vec2{x, y};
            if (!(target == cur)) segs.push_back(line_cubic(cur, target));
            cur = target;
        } else {  // C / c
            double nums[6];
            for (double& v : nums) v = sc.number();
            Vec2 p1{nums[0], nums[1]};
            Vec2 p2{nums[2], nums[3]};
            Vec2 p3{nums[4], nums[5]};
            if (cmd == 'c') {
                p1 = cur + p1;
                p2 = cur + p2;
                p3 = cur + p3;
            }
            segs.push_back(CubicBezier{cur, p1, p2, p3});
            cur = p3;
        }
    }
    flush_open();
}

}  // namespace

std::vector<Stroke> parse_svg(const std::string& text) {
    std::vector<Stroke> strokes;
    size_t pos = 0;
    while ((pos = text.find("<path", pos)) != std::string::npos) {
        size_t after = pos + 5;
        require_input(after < text.size(),
                      "parse_svg: truncated <path element at byte offset " +
                          std::to_string(pos));
        char boundary = text[after];
        if (!(boundary == ' ' || boundary == '\t' || boundary == '\n' ||
              boundary == '\r' || boundary == '/' || boundary == '>')) {
            pos = after;  // e.g. <pathology>; not a path element
            continue;
        }
        size_t tag_end = text.find('>', pos);
        require_input(tag_end != std::string::npos,
                      "parse_svg: unterminated <path element at byte offset " +
                          std::to_string(pos));
        // Locate a standalone d attribute inside the tag.
        size_t dpos = std::string::npos;
        for (size_t i = after; i + 1 < tag_end; ++i) {
            if (text[i] != 'd') continue;
            char before = text[i - 1];
            if (!(before == ' ' || before == '\t' || before == '\n' ||
                  before == '\r'))
                continue;
            size_t eq = i + 1;
            while (eq < tag_end && (text[eq] == ' ' || text[eq] == '\t')) ++eq;
            if (eq < tag_end && text[eq] == '=') {
                dpos = eq + 1;
                break;
            }
        }
        if (dpos == std::string::npos) {
            pos = tag_end + 1;  // path without data draws nothing
            continue;
        }
        while (dpos < tag_end && (text[dpos] == ' ' || text[dpos] == '\t'))
            ++dpos;
        require_input(dpos < tag_end &&
                          (text[dpos] == '"' || text[dpos] == '\''),
                      "parse_svg: malformed d attribute at byte offset " +
                          std::to_string(dpos));
        char quote = text[dpos];
        size_t dstart = dpos + 1;
        size_t dend = text.find(quote, dstart);
        require_input(dend != std::string::npos && dend <= tag_end,
                      "parse_svg: unterminated d attribute at byte offset " +
                          std::to_string(dpos));
        parse_path_data(text, dstart, dend, strokes);
        pos = tag_end + 1;
    }
    return strokes;
}

namespace {

ProgramHeader quantize_header(const ProgramHeader& h) {
    ProgramHeader q;
    q.workspace_w = quantize4(h.workspace_w);
    q.workspace_h = quantize4(h.workspace_h);
    q.pen_up_z = quantize4(h.pen_up_z);
    q.pen_down_z = quantize4(h.pen_down_z);
    q.draw_feed = quantize4(h.draw_feed);
    q.travel_feed = quantize4(h.travel_feed);
    return q;
}

}  // namespace

MotionProgram emit_program(const StrokePlan& plan,
                           const std::vector<Stroke>& strokes,
                           const ProgramHeader& header, double tol,
                           double lift_seconds) {
    require_input(tol > 0.0, "emit_program: flatten tolerance must be positive");
    require_input(lift_seconds >= 0.0,
                  "emit_program: lift cost must be non-negative");
    require_input(header.workspace_w > 0.0 && header.workspace_h > 0.0,
                  "emit_program: workspace must be positive");
    require_input(header.draw_feed > 0.0 && header.travel_feed > 0.0,
                  "emit_program: feeds must be positive");
    double recomputed = travel_cost(plan, strokes);  // also validates items
    require_invariant(
        std::abs(recomputed - plan.total_travel) <=
            1e-9 * std::max(1.0, std::abs(recomputed)),
        "emit_program: plan travel bookkeeping out of sync");

    MotionProgram prog;
    prog.header = quantize_header(header);

    auto check_point = [&](int stroke_index, double x, double y) {
        if (x < 0.0 || x > prog.header.workspace_w || y < 0.0 ||
            y > prog.header.workspace_h) {
            throw InputError("emit_program: stroke " +
                             std::to_string(stroke_index) + " coordinate (" +
                             fmt4(x) + ", " + fmt4(y) +
                             ") outside workspace " +
                             fmt4(prog.header.workspace_w) + " x " +
                             fmt4(prog.header.workspace_h));
        }
    };

    for (const PlanItem& item : plan.items) {
        const Stroke& s = strokes[static_cast<size_t>(item.stroke)];
        prog.instructions.push_back({OpCode::penup, 0, 0});
        if (s.is_dot()) {
            Vec2 p = entry_point(s, item.reversed);
            double x = quantize4(p.x), y = quantize4(p.y);
            check_point(item.stroke, x, y);
            prog.instructions.push_back({OpCode::dot, x, y});
            continue;
        }
        Stroke oriented = item.reversed ? s.reversed() : s;
        FlattenedStroke flat = flatten(oriented, tol);
        const std::vector<Vec2>& pts = flat.line.points;
        for (size_t k = 0; k < pts.size(); ++k) {
            double x = quantize4(pts[k].x), y = quantize4(pts[k].y);
            check_point(item.stroke, x, y);
            prog.instructions.push_back({OpCode::move, x, y});
            if (k == 0)
                prog.instructions.push_back({OpCode::pendown, 0, 0});
        }
        if (flat.line.closed) {
            double x = quantize4(pts.front().x), y = quantize4(pts.front().y);
            prog.instructions.push_back({OpCode::move, x, y});
        }
    }
    prog.instructions.push_back({OpCode::penup, 0, 0});

    prog.pen_lifts =
        plan.items.empty() ? 0 : static_cast<int>(plan.items.size()) + 1;
    prog.ink_mm = quantize4(plan.total_ink);
    prog.travel_mm = quantize4(plan.total_travel);
    prog.estimated_seconds =
        quantize4(plan.total_ink / header.draw_feed +
                  plan.total_travel / header.travel_feed +
                  static_cast<double>(prog.pen_lifts) * lift_seconds);
    return prog;
}

std::string render_program(const MotionProgram& program) {
    std::string out;
    out += "UNITS MM\n";
    out += "WORKSPACE " + fmt4(program.header.workspace_w) + " " +
           fmt4(program.header.workspace_h) + "\n";
    out += "PEN_UP_Z " + fmt4(program.header.pen_up_z) + "\n";
    out += "PEN_DOWN_Z " + fmt4(program.header.pen_down_z) + "\n";
    out += "DRAW_FEED " + fmt4(program.header.draw_feed) + "\n";
    out += "TRAVEL_FEED " + fmt4(program.header.travel_feed) + "\n";
    out += "BEGIN\n";
    for (const Instruction& ins : program.instructions) {
        switch (ins.op) {
            case OpCode::penup: out += "PENUP\n"; break;
            case OpCode::pendown: out += "PENDOWN\n"; break;
            case OpCode::move:
                out += "MOVE " + fmt4(ins.x) + " " + fmt4(ins.y) + "\n";
                break;
            case OpCode::dot:
                out += "DOT " + fmt4(ins.x) + " " + fmt4(ins.y) + "\n";
                break;
        }
    }
    out += "END\n";
    out += "# ink_mm " + fmt4(program.ink_mm) + "\n";
    out += "# travel_mm " + fmt4(program.travel_mm) + "\n";
    out += "# pen_lifts " + std::to_string(program.pen_lifts) + "\n";
    out += "# estimated_seconds " + fmt4(program.estimated_seconds) + "\n";
    return out;
}

namespace {

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

double parse_number_token(const std::string& tok, int line_no,
                          const char* what) {
    const char* start = tok.c_str();
    char* stop = nullptr;
    double v = std::strtod(start, &stop);
    require_input(stop == start + tok.size() && std::isfinite(v),
                  std::string("parse_program: malformed ") + what + " '" +
                      tok + "' at line " + std::to_string(line_no));
    return v;
}

int parse_int_token(const std::string& tok, int line_no, const char* what) {
    double v = parse_number_token(tok, line_no, what);
    int i = static_cast<int>(v);
    require_input(static_cast<double>(i) == v,
                  std::string("parse_program: ") + what + " must be an integer at line " +
                      std::to_string(line_no));
    return i;
}

}  // namespace

MotionProgram parse_program(const std::string& text) {
    MotionProgram prog;
    enum class Phase { header, body, trailer };
    Phase phase = Phase::header;

    bool have_units = false, have_workspace = false, have_up = false,
         have_down = false, have_draw = false, have_travel = false;
    bool pen_down = false;
    bool has_pos = false;
    bool saw_instruction = false;

    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string line = (eol == std::string::npos)
                               ? text.substr(pos)
                               : text.substr(pos, eol - pos);
        pos = (eol == std::string::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();

        std::vector<std::string> tokens = split_tokens(line);
        if (tokens.empty()) continue;
        bool comment = tokens[0][0] == '#';

        if (comment) {
            if (phase == Phase::trailer && tokens.size() >= 3 &&
                tokens[0] == "#") {
                if (tokens[1] == "ink_mm")
                    prog.ink_mm = parse_number_token(tokens[2], line_no, "trailer value");
                else if (tokens[1] == "travel_mm")
                    prog.travel_mm = parse_number_token(tokens[2], line_no, "trailer value");
                else if (tokens[1] == "pen_lifts")
                    prog.pen_lifts = parse_int_token(tokens[2], line_no, "pen_lifts");
                else if (tokens[1] == "estimated_seconds")
                    prog.estimated_seconds =
                        parse_number_token(tokens[2], line_no, "trailer value");
            }
            continue;
        }

        const std::string& key = tokens[0];
        if (phase == Phase::header) {
            auto expect_values = [&](size_t n) {
                require_input(tokens.size() == n + 1,
                              "parse_program: " + key + " expects " +
                                  std::to_string(n) + " value(s) at line " +
                                  std::to_string(line_no));
            };
            if (key == "BEGIN") {
                expect_values(0);
                require_input(have_units && have_workspace && have_up &&
                                  have_down && have_draw && have_travel,
                              "parse_program: header incomplete before BEGIN "
                              "at line " +
                                  std::to_string(line_no));
                phase = Phase::body;
            } else if (key == "UNITS") {
                expect_values(1);
                require_input(tokens[1] == "MM",
                              "parse_program: unsupported units '" + tokens[1] +
                                  "' at line " + std::to_string(line_no));
                require_input(!have_units, "parse_program: duplicate UNITS at line " +
                                               std::to_string(line_no));
                have_units = true;
            } else if (key == "WORKSPACE") {
                expect_values(2);
                require_input(!have_workspace,
                              "parse_program: duplicate WORKSPACE at line " +
                                  std::to_string(line_no));
                prog.header.workspace_w =
                    parse_number_token(tokens[1], line_no, "workspace width");
                prog.header.workspace_h =
                    parse_number_token(tokens[2], line_no, "workspace height");
                require_input(prog.header.workspace_w > 0.0 &&
                                  prog.header.workspace_h > 0.0,
                              "parse_program: workspace must be positive at "
                              "line " +
                                  std::to_string(line_no));
                have_workspace = true;
            } else if (key == "PEN_UP_Z" || key == "PEN_DOWN_Z" ||
                       key == "DRAW_FEED" || key == "TRAVEL_FEED") {
                expect_values(1);
                double v = parse_number_token(tokens[1], line_no, "header value");
                if (key == "PEN_UP_Z") {
                    require_input(!have_up, "parse_program: duplicate PEN_UP_Z at line " +
                                                std::to_string(line_no));
                    prog.header.pen_up_z = v;
                    have_up = true;
                } else if (key == "PEN_DOWN_Z") {
                    require_input(!have_down,
                                  "parse_program: duplicate PEN_DOWN_Z at line " +
                                      std::to_string(line_no));
                    prog.header.pen_down_z = v;
                    have_down = true;
                } else if (key == "DRAW_FEED") {
                    require_input(!have_draw,
                                  "parse_program: duplicate DRAW_FEED at line " +
                                      std::to_string(line_no));
                    require_input(v > 0.0, "parse_program: DRAW_FEED must be positive at line " +
                                               std::to_string(line_no));
                    prog.header.draw_feed = v;
                    have_draw = true;
                } else {
                    require_input(!have_travel,
                                  "parse_program: duplicate TRAVEL_FEED at line " +
                                      std::to_string(line_no));
                    require_input(v > 0.0,
                                  "parse_program: TRAVEL_FEED must be positive at line " +
                                      std::to_string(line_no));
                    prog.header.travel_feed = v;
                    have_travel = true;
                }
            } else {
                throw InputError("parse_program: unknown header key '" + key +
                                 "' at line " + std::to_string(line_no));
            }
            continue;
        }

        if (phase == Phase::body) {
            auto check_point = [&](double x, double y) {
                if (x < 0.0 || x > prog.header.workspace_w || y < 0.0 ||
                    y > prog.header.workspace_h) [[unlikely]] {
                    require_input(
                        false, "parse_program: coordinate (" + tokens[1] +
                                   ", " + tokens[2] +
                                   ") outside workspace at line " +
                                   std::to_string(line_no));
                }
            };
            if (key == "END") {
                require_input(tokens.size() == 1,
                              "parse_program: END takes no values at line " +
                                  std::to_string(line_no));
                require_input(saw_instruction,
                              "parse_program: empty instruction body at line " +
                                  std::to_string(line_no));
                phase = Phase::trailer;
                continue;
            }
            if (!saw_instruction) {
                require_input(key == "PENUP",
                              "parse_program: program must begin with PENUP, "
                              "got '" +
                                  key + "' at line " + std::to_string(line_no));
            }
            if (key == "PENUP") {
                require_input(tokens.size() == 1,
                              "parse_program: PENUP takes no values at line " +
                                  std::to_string(line_no));
                pen_down = false;
                prog.instructions.push_back({OpCode::penup, 0, 0});
            } else if (key == "PENDOWN") {
                require_input(tokens.size() == 1,
                              "parse_program: PENDOWN takes no values at line " +
                                  std::to_string(line_no));
                require_input(!pen_down,
                              "parse_program: PENDOWN issued twice without "
                              "intervening PENUP at line " +
                                  std::to_string(line_no));
                require_input(has_pos,
                              "parse_program: PENDOWN before any position is "
                              "established at line " +
                                  std::to_string(line_no));
                pen_down = true;
                prog.instructions.push_back({OpCode::pendown, 0, 0});
            } else if (key == "MOVE" || key == "DOT") {
                require_input(tokens.size() == 3,
                              "parse_program: " + key +
                                  " expects 2 coordinates at line " +
                                  std::to_string(line_no));
                double x = parse_number_token(tokens[1], line_no, "coordinate");
                double y = parse_number_token(tokens[2], line_no, "coordinate");
                check_point(x, y);
                if (key == "DOT") {
                    require_input(!pen_down,
                                  "parse_program: DOT requires the pen up at "
                                  "line " +
                                      std::to_string(line_no));
                    prog.instructions.push_back({OpCode::dot, x, y});
                } else {
                    prog.instructions.push_back({OpCode::move, x, y});
                }
                has_pos = true;
            } else {
                throw InputError("parse_program: unknown opcode '" + key +
                                 "' at line " + std::to_string(line_no));
            }
            saw_instruction = true;
            continue;
        }

        throw InputError("parse_program: unexpected content '" + key +
                         "' after END at line " + std::to_string(line_no));
    }

    require_input(phase == Phase::trailer,
                  phase == Phase::header
                      ? "parse_program: missing BEGIN"
                      : "parse_program: missing END");
    return prog;
}

}  // namespace inkline
