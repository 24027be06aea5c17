#pragma once

#include "unroll/transformer.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace unroll {

// Non-erasing four-instruction tape machine: move left, move right, mark the
// current cell, and a conditional jump taken when the current cell is marked.
enum class BOp { MoveLeft, MoveRight, Mark, JumpIfMarked };

struct BInstruction {
    BOp op = BOp::MoveLeft;
    size_t target = 0; // jump destination, 0-based; meaningful for jumps only
};

struct BProgram {
    std::vector<BInstruction> instructions;

    void validate() const; // jump targets must land inside the program
    // One instruction per line: "L", "R", "M", "J <index>". '#' comments and
    // blank lines are skipped.
    static BProgram parse(const std::string& text);
};

struct BTape {
    std::set<long> marked;
    long head = 0;
};

struct BStepRecord {
    size_t step = 0; // 1-based
    size_t pc = 0;   // instruction executed
    BOp op = BOp::MoveLeft;
    long head_after = 0;
    std::set<long> marked_after;
};

struct BRunResult {
    BTape tape;
    std::vector<BStepRecord> trace;
    bool halted = false; // fell off the end of the program
    size_t steps = 0;
    bool budget_exhausted() const { return !halted; }
};

BRunResult b_run(const BProgram& program, BTape tape, size_t max_steps);

// Causal tape view of an autoregressive run: each sequence position is one
// cell, each emitted vector one appended symbol. Writes must land exactly at
// the frontier (prompt_len + step) and reads must stay at or below the last
// written cell.
struct CausalStep {
    size_t step = 0;
    std::vector<size_t> reads; // attended positions
    size_t write = 0;          // appended position
    size_t frontier_after = 0; // next append position once this step commits
};

struct CausalReplayResult {
    bool ok = true;
    size_t violation_step = 0; // first offending step when not ok
    std::string reason;
    std::vector<CausalStep> steps;
};

CausalReplayResult causal_replay(const std::vector<TraceRecord>& trace,
                                 const LayoutConfig& layout, size_t prompt_len);

std::string to_string(BOp op);

} // namespace unroll
