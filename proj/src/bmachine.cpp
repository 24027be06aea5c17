#include "unroll/bmachine.hpp"

#include "unroll/errors.hpp"

#include <sstream>

namespace unroll {

std::string to_string(BOp op) {
    switch (op) {
    case BOp::MoveLeft: return "L";
    case BOp::MoveRight: return "R";
    case BOp::Mark: return "M";
    case BOp::JumpIfMarked: return "J";
    }
    return "?";
}

void BProgram::validate() const {
    for (size_t pc = 0; pc < instructions.size(); ++pc)
        if (instructions[pc].op == BOp::JumpIfMarked &&
            instructions[pc].target >= instructions.size())
            throw ValidationError("jump_target",
                                  "instruction " + std::to_string(pc) + " jumps to " +
                                      std::to_string(instructions[pc].target) +
                                      ", program length " +
                                      std::to_string(instructions.size()));
}

BProgram BProgram::parse(const std::string& text) {
    BProgram program;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string mnemonic;
        if (!(ls >> mnemonic))
            continue; // blank or comment-only line
        BInstruction instr;
        if (mnemonic == "L") {
            instr.op = BOp::MoveLeft;
        } else if (mnemonic == "R") {
            instr.op = BOp::MoveRight;
        } else if (mnemonic == "M") {
            instr.op = BOp::Mark;
        } else if (mnemonic == "J") {
            instr.op = BOp::JumpIfMarked;
            long target = -1;
            if (!(ls >> target) || target < 0)
                throw ValidationError("bad_instruction",
                                      "line " + std::to_string(line_no) +
                                          ": J needs a non-negative instruction index");
            instr.target = static_cast<size_t>(target);
        } else {
            throw ValidationError("bad_instruction",
                                  "line " + std::to_string(line_no) + ": unknown mnemonic '" +
                                      mnemonic + "'");
        }
        std::string trailing;
        if (ls >> trailing)
            throw ValidationError("bad_instruction",
                                  "line " + std::to_string(line_no) + ": trailing text '" +
                                      trailing + "'");
        program.instructions.push_back(instr);
    }
    program.validate();
    return program;
}

BRunResult b_run(const BProgram& program, BTape tape, size_t max_steps) {
    program.validate();
    BRunResult result;
    size_t pc = 0;
    for (size_t step = 1; step <= max_steps; ++step) {
        if (pc >= program.instructions.size()) {
            result.halted = true;
            break;
        }
        const BInstruction& instr = program.instructions[pc];
        const size_t executed_pc = pc;
        switch (instr.op) {
        case BOp::MoveLeft:
            --tape.head;
            ++pc;
            break;
        case BOp::MoveRight:
            ++tape.head;
            ++pc;
            break;
        case BOp::Mark:
            tape.marked.insert(tape.head); // non-erasing: marks only accumulate
            ++pc;
            break;
        case BOp::JumpIfMarked:
            pc = tape.marked.count(tape.head) ? instr.target : pc + 1;
            break;
        }
        result.trace.push_back(
            BStepRecord{step, executed_pc, instr.op, tape.head, tape.marked});
        result.steps = step;
        if (pc >= program.instructions.size()) {
            result.halted = true;
            break;
        }
    }
    if (program.instructions.empty())
        result.halted = true;
    result.tape = std::move(tape);
    return result;
}

CausalReplayResult causal_replay(const std::vector<TraceRecord>& trace,
                                 const LayoutConfig& layout, size_t prompt_len) {
    CausalReplayResult result;
    if (prompt_len < 2) {
        result.ok = false;
        result.reason = "prompt must contain at least the end and start markers";
        return result;
    }
    size_t last_written = prompt_len; // prompt cells are pre-written
    for (size_t s = 0; s < trace.size(); ++s) {
        const TraceRecord& rec = trace[s];
        const size_t step = s + 1;
        const size_t frontier = last_written + 1;
        CausalStep cs;
        cs.step = step;
        cs.write = frontier;
        if (rec.step != step) {
            result.ok = false;
            result.violation_step = step;
            result.reason = "write out of order: record " + std::to_string(rec.step) +
                            " arrived at step " + std::to_string(step);
            return result;
        }
        // The emitted vector's own position counter certifies where it lands.
        if (rec.z.data.size() != layout.d_model() ||
            rec.z.i_of(layout) != Rational(static_cast<long>(frontier))) {
            result.ok = false;
            result.violation_step = step;
            result.reason = "write not at the frontier: emitted position " +
                            (rec.z.data.size() == layout.d_model()
                                 ? rec.z.i_of(layout).str()
                                 : std::string("?")) +
                            ", frontier " + std::to_string(frontier);
            return result;
        }
        for (const auto& lt : rec.layers)
            for (size_t pos : lt.selected) {
                cs.reads.push_back(pos);
                if (pos > last_written) {
                    result.ok = false;
                    result.violation_step = step;
                    result.reason = "read at position " + std::to_string(pos) +
                                    " beyond the last written cell " +
                                    std::to_string(last_written);
                    return result;
                }
            }
        last_written = frontier;
        cs.frontier_after = last_written + 1;
        result.steps.push_back(std::move(cs));
    }
    return result;
}

} // namespace unroll
