#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "inkline/errors.hpp"
#include "inkline/metrics.hpp"
#include "inkline/program_emit.hpp"
#include "inkline/stroke_plan.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace inkline;
using test::deviation_to_polyline;
using test::line_stroke;
using test::sample_stroke;
using test::stroke_corpus;

namespace {

Stroke translated(const Stroke& s, Vec2 dv) {
    Stroke out = s;
    for (CubicBezier& seg : out.segments) {
        seg.p0 = seg.p0 + dv;
        seg.p1 = seg.p1 + dv;
        seg.p2 = seg.p2 + dv;
        seg.p3 = seg.p3 + dv;
    }
    return out;
}

Stroke dot_stroke(Vec2 p) {
    Stroke s;
    s.segments.push_back({p, p, p, p});
    return s;
}

Stroke quarter_circle(double r) {
    const double k = 0.5522847498307936 * r;
    Stroke s;
    s.segments = {{{r, 0.0}, {r, k}, {k, r}, {0.0, r}}};
    return s;
}

std::string program_header_text() {
    return
        "UNITS MM\n"
        "WORKSPACE 100.0000 100.0000\n"
        "PEN_UP_Z 2.0000\n"
        "PEN_DOWN_Z 0.0000\n"
        "DRAW_FEED 50.0000\n"
        "TRAVEL_FEED 150.0000\n"
        "BEGIN\n";  // BEGIN is line 7
}

// Sum of pen-down polyline lengths implied by the instruction list.
double drawn_length(const MotionProgram& prog) {
    double total = 0.0;
    bool down = false;
    bool has_pos = false;
    Vec2 pos{0.0, 0.0};
    for (const Instruction& ins : prog.instructions) {
        switch (ins.op) {
            case OpCode::penup: down = false; break;
            case OpCode::pendown: down = true; break;
            case OpCode::dot: has_pos = true; pos = {ins.x, ins.y}; break;
            case OpCode::move: {
                const Vec2 p{ins.x, ins.y};
                if (down && has_pos) total += dist(pos, p);
                pos = p;
                has_pos = true;
                break;
            }
        }
    }
    return total;
}

}  // namespace

TEST_CASE("flatten subdivides until the chord fits") {
    SUBCASE("straight cubic flattens to its two endpoints") {
        const FlattenedStroke f =
            flatten(line_stroke({0.0, 0.0}, {30.0, 0.0}), 0.2);
        REQUIRE(f.line.points.size() == 2);
        CHECK(f.line.points[0] == Vec2{0.0, 0.0});
        CHECK(f.line.points[1] == Vec2{30.0, 0.0});
        CHECK_FALSE(f.line.closed);
    }
    SUBCASE("huge tolerance keeps only the endpoints") {
        const FlattenedStroke f = flatten(quarter_circle(50.0), 1000.0);
        REQUIRE(f.line.points.size() == 2);
        CHECK(f.line.points.front() == Vec2{50.0, 0.0});
        CHECK(f.line.points.back() == Vec2{0.0, 50.0});
    }
    SUBCASE("quarter circle r=50 at tol 0.1 meets a dense oracle") {
        const Stroke s = quarter_circle(50.0);
        const FlattenedStroke f = flatten(s, 0.1);
        CHECK(f.line.points.size() > 2);
        CHECK(f.line.points.front() == s.segments.front().p0);
        CHECK(f.line.points.back() == s.segments.back().p3);
        const std::vector<Vec2> samples = sample_stroke(s, 10000);
        CHECK(deviation_to_polyline(samples, f.line) <= 0.1);
    }
    SUBCASE("corpus strokes stay within tolerance everywhere") {
        const std::vector<Stroke> corpus = stroke_corpus(7, 10);
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const FlattenedStroke f = flatten(corpus[i], 0.2);
            INFO("stroke " << i);
            CHECK(deviation_to_polyline(sample_stroke(corpus[i], 2000),
                                        f.line) <= 0.2 + 1e-9);
        }
    }
    SUBCASE("closed stroke flattens to a closed polyline without a seam "
            "duplicate") {
        const std::vector<Stroke> corpus = stroke_corpus(7, 0);
        REQUIRE(corpus[0].closed);
        const FlattenedStroke f = flatten(corpus[0], 0.2);
        CHECK(f.line.closed);
        CHECK_FALSE(f.line.points.front() == f.line.points.back());
    }
    SUBCASE("invalid input is rejected") {
        CHECK_THROWS_AS(flatten(line_stroke({0, 0}, {1, 0}), 0.0), InputError);
        CHECK_THROWS_AS(flatten(line_stroke({0, 0}, {1, 0}), -1.0),
                        InputError);
        CHECK_THROWS_AS(flatten(dot_stroke({1.0, 1.0}), 0.2), InputError);
        CHECK_THROWS_AS(flatten(Stroke{}, 0.2), InputError);
    }
}

TEST_CASE("emit_svg serializes strokes as M/C paths") {
    SUBCASE("empty stroke list gives a valid SVG with zero paths") {
        const std::string svg = emit_svg({}, 210.0, 148.0);
        CHECK(svg.find("<svg ") != std::string::npos);
        CHECK(svg.find("</svg>") != std::string::npos);
        CHECK(svg.find("210.0000mm") != std::string::npos);
        CHECK(svg.find("<path") == std::string::npos);
    }
    SUBCASE("single straight cubic serializes with 4 decimal places") {
        Stroke s;
        s.segments = {{{0.0, 0.0}, {10.0, 0.0}, {20.0, 0.0}, {30.0, 0.0}}};
        const std::string svg = emit_svg({s}, 100.0, 100.0);
        CHECK(svg.find("M 0.0000 0.0000 C 10.0000 0.0000 20.0000 0.0000 "
                       "30.0000 0.0000") != std::string::npos);
    }
    SUBCASE("closed strokes end with Z") {
        const std::vector<Stroke> corpus = stroke_corpus(7, 0);
        REQUIRE(corpus[0].closed);
        const std::string svg = emit_svg({corpus[0]}, 200.0, 200.0);
        CHECK(svg.find(" Z\"") != std::string::npos);
    }
    SUBCASE("canvas must be positive") {
        CHECK_THROWS_AS(emit_svg({}, 0.0, 100.0), InputError);
        CHECK_THROWS_AS(emit_svg({}, 100.0, -5.0), InputError);
    }
}

TEST_CASE("parse_svg reads the documented subset") {
    SUBCASE("lineto becomes an exact cubic with control points at thirds") {
        const std::vector<Stroke> strokes =
            parse_svg("<svg><path d=\"M 0 0 L 3 0\"/></svg>");
        REQUIRE(strokes.size() == 1);
        REQUIRE(strokes[0].segments.size() == 1);
        const CubicBezier& c = strokes[0].segments[0];
        CHECK(c.p0 == Vec2{0.0, 0.0});
        CHECK(dist(c.p1, {1.0, 0.0}) < 1e-12);
        CHECK(dist(c.p2, {2.0, 0.0}) < 1e-12);
        CHECK(c.p3 == Vec2{3.0, 0.0});
    }
    SUBCASE("relative commands and implicit linetos") {
        const std::vector<Stroke> strokes =
            parse_svg("<svg><path d=\"m 1 1 l 2 0 1 1\"/></svg>");
        REQUIRE(strokes.size() == 1);
        REQUIRE(strokes[0].segments.size() == 2);
        CHECK(strokes[0].segments[0].p0 == Vec2{1.0, 1.0});
        CHECK(strokes[0].segments[0].p3 == Vec2{3.0, 1.0});
        CHECK(strokes[0].segments[1].p3 == Vec2{4.0, 2.0});
    }
    SUBCASE("implicit lineto after moveto") {
        const std::vector<Stroke> strokes =
            parse_svg("<svg><path d=\"M 0 0 5 5 10 0\"/></svg>");
        REQUIRE(strokes.size() == 1);
        CHECK(strokes[0].segments.size() == 2);
    }
    SUBCASE("Z closes the subpath, bridging back to its start") {
        const std::vector<Stroke> strokes =
            parse_svg("<svg><path d=\"M 0 0 L 4 0 L 4 3 Z\"/></svg>");
        REQUIRE(strokes.size() == 1);
        CHECK(strokes[0].closed);
        REQUIRE(strokes[0].segments.size() == 3);
        CHECK(strokes[0].segments.back().p3 == Vec2{0.0, 0.0});
    }
    SUBCASE("multiple subpaths become separate strokes") {
        const std::vector<Stroke> strokes = parse_svg(
            "<svg><path d=\"M 0 0 L 1 0 M 5 5 L 6 5\"/>"
            "<path d='M 9 9 C 10 9 11 9 12 9'/></svg>");
        REQUIRE(strokes.size() == 3);
        CHECK(strokes[0].segments[0].p0 == Vec2{0.0, 0.0});
        CHECK(strokes[1].segments[0].p0 == Vec2{5.0, 5.0});
        CHECK(strokes[2].segments[0].p3 == Vec2{12.0, 9.0});
    }
    SUBCASE("elements that merely start with 'path' are not paths") {
        CHECK(parse_svg("<svg><pathology d=\"M 0 0 L 1 1\"/></svg>").empty());
        CHECK(parse_svg("<svg><path stroke=\"black\"/></svg>").empty());
        CHECK(parse_svg("<svg><path d=\"\"/></svg>").empty());
    }
    SUBCASE("unsupported commands name the letter and byte offset") {
        const std::string text =
            "<svg><path d=\"M 0 0 A 1 1 0 0 0 5 5\"/></svg>";
        const std::size_t expected_offset = text.find('A');
        const std::string want = "unsupported path command 'A' at byte offset " +
                                 std::to_string(expected_offset);
        CHECK_THROWS_WITH_AS(parse_svg(text), doctest::Contains(want.c_str()),
                             InputError);
        CHECK_THROWS_WITH_AS(
            parse_svg("<svg><path d=\"M 0 0 Q 1 1 2 2\"/></svg>"),
            doctest::Contains("'Q'"), InputError);
    }
    SUBCASE("malformed input names the byte offset") {
        CHECK_THROWS_WITH_AS(parse_svg("<svg><path d=\"M 0 0 L - 5\"/></svg>"),
                             doctest::Contains("malformed number"),
                             InputError);
        CHECK_THROWS_WITH_AS(parse_svg("<svg><path d=\"0 0 L 1 1\"/></svg>"),
                             doctest::Contains("number before any path"),
                             InputError);
        CHECK_THROWS_WITH_AS(parse_svg("<svg><path d=\"M 0 0 X 1 1\"/></svg>"),
                             doctest::Contains("unknown path command 'X'"),
                             InputError);
        CHECK_THROWS_WITH_AS(parse_svg("<svg><path d=\"L 1 1\"/></svg>"),
                             doctest::Contains("before any moveto"),
                             InputError);
        CHECK_THROWS_AS(parse_svg("<svg><path d=\"M 0 0 L 1\"/></svg>"),
                        InputError);
    }
}

TEST_CASE("SVG round-trip preserves the corpus within 1e-3 mm") {
    const std::vector<Stroke> corpus = stroke_corpus();
    REQUIRE(corpus.size() >= 50);
    const std::string svg = emit_svg(corpus, 400.0, 400.0);
    const std::vector<Stroke> back = parse_svg(svg);
    REQUIRE(back.size() == corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        INFO("stroke " << i);
        CHECK(back[i].closed == corpus[i].closed);
        REQUIRE(back[i].segments.size() == corpus[i].segments.size());
        for (std::size_t k = 0; k < corpus[i].segments.size(); ++k) {
            const CubicBezier& a = corpus[i].segments[k];
            const CubicBezier& b = back[i].segments[k];
            CHECK(dist(a.p0, b.p0) <= 1e-3);
            CHECK(dist(a.p1, b.p1) <= 1e-3);
            CHECK(dist(a.p2, b.p2) <= 1e-3);
            CHECK(dist(a.p3, b.p3) <= 1e-3);
        }
    }
}

TEST_CASE("emit_program enumerates pen motion per plan item") {
    const ProgramHeader header;  // 210 x 148, feeds 50/150
    SUBCASE("empty plan emits a lone PENUP and zero stats") {
        const StrokePlan plan = greedy_plan({}, {0.0, 0.0});
        const MotionProgram prog = emit_program(plan, {}, header, 0.2);
        REQUIRE(prog.instructions.size() == 1);
        CHECK(prog.instructions[0].op == OpCode::penup);
        CHECK(prog.pen_lifts == 0);
        CHECK(prog.ink_mm == 0.0);
        CHECK(prog.travel_mm == 0.0);
        CHECK(prog.estimated_seconds == 0.0);
    }
    SUBCASE("single straight stroke: exact instruction sequence") {
        const std::vector<Stroke> strokes = {
            line_stroke({0.0, 0.0}, {30.0, 0.0})};
        const StrokePlan plan = greedy_plan(strokes, {0.0, 0.0});
        const MotionProgram prog = emit_program(plan, strokes, header, 0.2);
        const std::vector<Instruction> want = {
            {OpCode::penup, 0.0, 0.0},
            {OpCode::move, 0.0, 0.0},
            {OpCode::pendown, 0.0, 0.0},
            {OpCode::move, 30.0, 0.0},
            {OpCode::penup, 0.0, 0.0},
        };
        CHECK(prog.instructions == want);
        CHECK(prog.pen_lifts == 2);
        CHECK(prog.ink_mm == doctest::Approx(30.0));
        CHECK(prog.travel_mm == 0.0);
        // ink/draw + travel/travel + lifts * 0.3 = 0.6 + 0 + 0.6
        CHECK(prog.estimated_seconds == doctest::Approx(1.2));
    }
    SUBCASE("without lift cost the estimate is the pure feed arithmetic") {
        const std::vector<Stroke> strokes = {
            line_stroke({10.0, 0.0}, {40.0, 0.0})};
        const StrokePlan plan = greedy_plan(strokes, {0.0, 0.0});
        const MotionProgram prog =
            emit_program(plan, strokes, header, 0.2, 0.0);
        CHECK(prog.estimated_seconds ==
              quantize4(30.0 / 50.0 + 10.0 / 150.0));
    }
    SUBCASE("a reversed item is emitted in reversed geometry") {
        const std::vector<Stroke> strokes = {
            line_stroke({0.0, 0.0}, {30.0, 0.0})};
        const StrokePlan plan = greedy_plan(strokes, {35.0, 0.0});
        REQUIRE(plan.items[0].reversed);
        const MotionProgram prog = emit_program(plan, strokes, header, 0.2);
        REQUIRE(prog.instructions.size() == 5);
        CHECK(prog.instructions[1] == Instruction{OpCode::move, 30.0, 0.0});
        CHECK(prog.instructions[3] == Instruction{OpCode::move, 0.0, 0.0});
    }
    SUBCASE("closed strokes return to their first point") {
        std::vector<Stroke> strokes = {
            translated(stroke_corpus(7, 0)[0], {20.0, 20.0})};
        REQUIRE(strokes[0].closed);
        const StrokePlan plan = greedy_plan(strokes, {0.0, 0.0});
        const MotionProgram prog = emit_program(plan, strokes, header, 0.2);
        const Instruction& first_move = prog.instructions[1];
        REQUIRE(prog.instructions.size() >= 4);
        const Instruction& last_move =
            prog.instructions[prog.instructions.size() - 2];
        CHECK(first_move.op == OpCode::move);
        CHECK(last_move.op == OpCode::move);
        CHECK(first_move.x == last_move.x);
        CHECK(first_move.y == last_move.y);
    }
    SUBCASE("dots emit DOT with the pen up") {
        const std::vector<Stroke> strokes = {dot_stroke({5.0, 7.0})};
        const StrokePlan plan = greedy_plan(strokes, {0.0, 0.0});
        const MotionProgram prog = emit_program(plan, strokes, header, 0.2);
        const std::vector<Instruction> want = {
            {OpCode::penup, 0.0, 0.0},
            {OpCode::dot, 5.0, 7.0},
            {OpCode::penup, 0.0, 0.0},
        };
        CHECK(prog.instructions == want);
        CHECK(prog.pen_lifts == 2);
    }
    SUBCASE("out-of-workspace coordinates name the stroke") {
        const std::vector<Stroke> strokes = {
            line_stroke({0.0, 0.0}, {10.0, 0.0}),
            line_stroke({200.0, 100.0}, {250.0, 100.0})};
        const StrokePlan plan = greedy_plan(strokes, {0.0, 0.0});
        CHECK_THROWS_WITH_AS(emit_program(plan, strokes, header, 0.2),
                             doctest::Contains("stroke 1"), InputError);
        CHECK_THROWS_WITH_AS(emit_program(plan, strokes, header, 0.2),
                             doctest::Contains("outside workspace"),
                             InputError);
    }
    SUBCASE("argument validation") {
        const std::vector<Stroke> strokes = {
            line_stroke({0.0, 0.0}, {10.0, 0.0})};
        const StrokePlan plan = greedy_plan(strokes, {0.0, 0.0});
        CHECK_THROWS_AS(emit_program(plan, strokes, header, 0.0), InputError);
        CHECK_THROWS_AS(emit_program(plan, strokes, header, 0.2, -0.1),
                        InputError);
        ProgramHeader bad = header;
        bad.draw_feed = 0.0;
        CHECK_THROWS_AS(emit_program(plan, strokes, bad, 0.2), InputError);
        StrokePlan tampered = plan;
        tampered.total_travel += 5.0;
        CHECK_THROWS_AS(emit_program(tampered, strokes, header, 0.2),
                        InvariantError);
    }
}

TEST_CASE("program trailer agrees with the metrics module and the ink") {
    ProgramHeader header;
    header.workspace_w = 600.0;
    header.workspace_h = 600.0;
    std::vector<Stroke> strokes;
    for (const Stroke& s : stroke_corpus()) {
        strokes.push_back(translated(s, {200.0, 200.0}));
    }
    strokes.push_back(dot_stroke({50.0, 50.0}));
    const StrokePlan plan =
        two_opt_improve(greedy_plan(strokes, {0.0, 0.0}), strokes, 8);
    const MotionProgram prog = emit_program(plan, strokes, header, 0.2);

    SUBCASE("estimated duration within 1% of compute_metrics") {
        const VectorFriendlinessReport report =
            compute_metrics(plan, strokes, header);
        CHECK(prog.estimated_seconds ==
              doctest::Approx(report.estimated_draw_seconds).epsilon(0.01));
    }
    SUBCASE("pen-down length within 1% of the declared ink") {
        CHECK(drawn_length(prog) ==
              doctest::Approx(prog.ink_mm).epsilon(0.01));
    }
    SUBCASE("travel matches the plan bookkeeping") {
        CHECK(prog.travel_mm == doctest::Approx(plan.total_travel));
        CHECK(prog.pen_lifts == static_cast<int>(plan.items.size()) + 1);
    }
}

TEST_CASE("program round-trip is exact on a 58-shape corpus") {
    ProgramHeader header;
    header.workspace_w = 600.0;
    header.workspace_h = 600.0;
    std::vector<Stroke> strokes;
    for (const Stroke& s : stroke_corpus()) {
        strokes.push_back(translated(s, {200.0, 200.0}));
    }
    strokes.push_back(dot_stroke({50.0, 50.0}));
    REQUIRE(strokes.size() >= 50);
    const StrokePlan plan =
        two_opt_improve(greedy_plan(strokes, {0.0, 0.0}), strokes, 8);
    const MotionProgram prog = emit_program(plan, strokes, header, 0.2);
    const std::string text = render_program(prog);
    const MotionProgram back = parse_program(text);
    CHECK(back == prog);
    // Render once more: the text itself must be reproduced byte for byte.
    CHECK(render_program(back) == text);
}

TEST_CASE("parse_program validates structure with line numbers") {
    const std::string head = program_header_text();
    SUBCASE("double PENDOWN reports the offending line") {
        const std::string text = head +
                                 "PENUP\n"           // line 8
                                 "MOVE 1 1\n"        // line 9
                                 "PENDOWN\n"         // line 10
                                 "PENDOWN\n"         // line 11
                                 "END\n";
        CHECK_THROWS_WITH_AS(parse_program(text),
                             doctest::Contains("at line 11"), InputError);
        CHECK_THROWS_WITH_AS(parse_program(text),
                             doctest::Contains("PENDOWN issued twice"),
                             InputError);
    }
    SUBCASE("unknown opcode names itself") {
        const std::string text = head + "PENUP\nJUMP 3 4\nEND\n";
        CHECK_THROWS_WITH_AS(parse_program(text),
                             doctest::Contains("unknown opcode 'JUMP'"),
                             InputError);
        CHECK_THROWS_WITH_AS(parse_program(text),
                             doctest::Contains("at line 9"), InputError);
    }
    SUBCASE("PENDOWN needs an established position") {
        const std::string text = head + "PENUP\nPENDOWN\nEND\n";
        CHECK_THROWS_WITH_AS(parse_program(text),
                             doctest::Contains("before any position"),
                             InputError);
    }
    SUBCASE("the body must open with PENUP") {
        const std::string text = head + "MOVE 1 1\nEND\n";
        CHECK_THROWS_WITH_AS(parse_program(text),
                             doctest::Contains("must begin with PENUP"),
                             InputError);
    }
    SUBCASE("content after END is rejected") {
        const std::string text =
            head + "PENUP\nMOVE 1 1\nEND\nMOVE 2 2\n";
        CHECK_THROWS_WITH_AS(parse_program(text),
                             doctest::Contains("after END"), InputError);
    }
    SUBCASE("DOT requires the pen up") {
        const std::string text =
            head + "PENUP\nMOVE 1 1\nPENDOWN\nDOT 2 2\nEND\n";
        CHECK_THROWS_WITH_AS(parse_program(text),
                             doctest::Contains("DOT requires the pen up"),
                             InputError);
    }
    SUBCASE("coordinates outside the declared workspace are rejected") {
        const std::string text = head + "PENUP\nMOVE 150 20\nEND\n";
        CHECK_THROWS_WITH_AS(parse_program(text),
                             doctest::Contains("outside workspace"),
                             InputError);
    }
    SUBCASE("malformed coordinates are rejected") {
        const std::string text = head + "PENUP\nMOVE abc 20\nEND\n";
        CHECK_THROWS_WITH_AS(parse_program(text),
                             doctest::Contains("malformed"), InputError);
    }
    SUBCASE("incomplete or malformed headers are rejected") {
        CHECK_THROWS_WITH_AS(parse_program("UNITS MM\nBEGIN\nPENUP\nEND\n"),
                             doctest::Contains("header incomplete"),
                             InputError);
        CHECK_THROWS_WITH_AS(
            parse_program("UNITS INCH\n"),
            doctest::Contains("unsupported units"), InputError);
        const std::string dup = "UNITS MM\nUNITS MM\n";
        CHECK_THROWS_WITH_AS(parse_program(dup),
                             doctest::Contains("duplicate UNITS"),
                             InputError);
        CHECK_THROWS_WITH_AS(parse_program("SPEED 3\n"),
                             doctest::Contains("unknown header key"),
                             InputError);
        CHECK_THROWS_WITH_AS(parse_program(program_header_text() + "PENUP\n"),
                             doctest::Contains("missing END"), InputError);
        CHECK_THROWS_WITH_AS(parse_program(""),
                             doctest::Contains("missing BEGIN"), InputError);
        CHECK_THROWS_WITH_AS(parse_program(head + "END\n"),
                             doctest::Contains("empty instruction body"),
                             InputError);
    }
    SUBCASE("comments and blank lines are ignored in the body") {
        const std::string text = head +
                                 "# a comment\n"
                                 "PENUP\n"
                                 "\n"
                                 "MOVE 1 1\n"
                                 "END\n";
        const MotionProgram prog = parse_program(text);
        REQUIRE(prog.instructions.size() == 2);
        CHECK(prog.instructions[1] == Instruction{OpCode::move, 1.0, 1.0});
    }
    SUBCASE("trailer statistics are recovered") {
        const std::string text = head +
                                 "PENUP\nMOVE 1 1\nEND\n"
                                 "# ink_mm 12.5000\n"
                                 "# travel_mm 3.2500\n"
                                 "# pen_lifts 4\n"
                                 "# estimated_seconds 1.7500\n";
        const MotionProgram prog = parse_program(text);
        CHECK(prog.ink_mm == 12.5);
        CHECK(prog.travel_mm == 3.25);
        CHECK(prog.pen_lifts == 4);
        CHECK(prog.estimated_seconds == 1.75);
    }
}
