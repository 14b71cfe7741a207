#pragma once

#include <string>
#include <vector>

#include "inkline/geometry.hpp"
#include "inkline/stroke_plan.hpp"

namespace inkline {

// Pen-motion program: a line-oriented textual format standing in for a
// robot vendor hand-off.
//
// Grammar (UTF-8, LF line endings, "#" starts a full-line comment):
//
//   UNITS MM
//   WORKSPACE <width> <height>
//   PEN_UP_Z <z>
//   PEN_DOWN_Z <z>
//   DRAW_FEED <mm_per_s>
//   TRAVEL_FEED <mm_per_s>
//   BEGIN
//   PENUP | PENDOWN | MOVE <x> <y> | DOT <x> <y>   (one per line)
//   END
//   # ink_mm <v>            (trailer: drawn length)
//   # travel_mm <v>         (trailer: pen-up length)
//   # pen_lifts <n>         (trailer: number of pen lifts)
//   # estimated_seconds <v> (trailer: ink/draw_feed + travel/travel_feed
//                            + pen_lifts x lift cost)
//
// All numbers print with exactly 4 decimal places; values are quantized to
// 4 decimals before storage so render/parse round-trips are bit-exact.

struct ProgramHeader {
    double workspace_w = 210.0;
    double workspace_h = 148.0;
    double pen_up_z = 2.0;
    double pen_down_z = 0.0;
    double draw_feed = 50.0;
    double travel_feed = 150.0;
    bool operator==(const ProgramHeader&) const = default;
};

enum class OpCode { penup, pendown, move, dot };

struct Instruction {
    OpCode op = OpCode::penup;
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Instruction&) const = default;
};

// Invariants: instructions begin with PENUP; PENDOWN requires an
// established position (a prior MOVE or DOT) and never repeats without an
// intervening PENUP; DOT requires the pen up; every coordinate lies within
// the workspace.
struct MotionProgram {
    ProgramHeader header;
    std::vector<Instruction> instructions;
    double ink_mm = 0.0;
    double travel_mm = 0.0;
    int pen_lifts = 0;
    double estimated_seconds = 0.0;
    bool operator==(const MotionProgram&) const = default;
};

struct FlattenedStroke {
    Polyline line;  // closed flag mirrors the source stroke
};

// Adaptive de Casteljau subdivision; a segment becomes a chord once the
// larger control-point distance to that chord is <= tol. Endpoints exact.
FlattenedStroke flatten(const Stroke& s, double tol);

// One <path> element per stroke, M/C commands only (plus Z when closed),
// coordinates with 4 decimal places, millimeter user units.
std::string emit_svg(const std::vector<Stroke>& strokes, double canvas_w,
                     double canvas_h);

// Accepts path commands M, m, C, c, L, l, Z, z (with implicit command
// repetition and implicit lineto after moveto, per SVG). L segments become
// exact cubics with control points at the chord thirds; each subpath is a
// separate stroke. Unsupported commands (A, Q, S, T, H, V) and malformed
// numbers raise diagnostics naming the command/text and its byte offset.
std::vector<Stroke> parse_svg(const std::string& text);

// Builds the instruction sequence for a plan: per item PENUP, MOVE to the
// oriented entry, PENDOWN, MOVE through the flattened points (dots instead
// emit PENUP, DOT x y), and one final PENUP. Trailer stats come from the
// plan; the duration estimate adds lift_seconds per pen lift on top of
// ink/draw_feed + travel/travel_feed.
MotionProgram emit_program(const StrokePlan& plan,
                           const std::vector<Stroke>& strokes,
                           const ProgramHeader& header, double tol,
                           double lift_seconds = 0.3);

// Serializes per the grammar above.
std::string render_program(const MotionProgram& program);

// Parses and structurally validates; violations (double PENDOWN, unknown
// opcode, out-of-workspace coordinate, ...) report the line number.
MotionProgram parse_program(const std::string& text);

}  // namespace inkline
