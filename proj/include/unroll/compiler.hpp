#pragma once

#include "unroll/rnn.hpp"
#include "unroll/transformer.hpp"

#include <string>
#include <vector>

namespace unroll {

// Widen a d_embed attention output into the x-block of a d_model vector.
AgglomerationMap build_agglomeration(const LayoutConfig& layout);

// Translate an RNN into a single-layer, single-head decoder model over the
// standard layout (d_model = 2 * d_embed + 3). Every token embedding other
// than the end marker must keep a coordinate-sum gap of at least epsilon
// below d_embed. The result is self-checked on the empty input.
TransformerModel compile(const RnnSpec& rnn, const Rational& epsilon);

struct EquivalenceViolation {
    std::string condition; // "input", "hidden", "halt", "one_hot"
    size_t step = 0;       // 1-based, 0 when not step-specific
    long channel = -1;     // offending coordinate, -1 when not channel-specific
    std::string detail;
};

// Outcome of running both machines side by side. The three named conditions:
// (1) the input consumed by the reference machine is presented to the model's
// step network each step, (2) the hidden state matches each step, (3) both
// machines stop at the same step. One-hot attention is tracked separately.
struct EquivalenceReport {
    bool input_match = true;
    bool hidden_match = true;
    bool halt_match = true;
    bool one_hot = true;
    size_t steps_compared = 0;
    bool rnn_halted = false, model_halted = false;
    size_t rnn_halt_step = 0, model_halt_step = 0;
    std::vector<EquivalenceViolation> violations;

    bool pass() const { return input_match && hidden_match && halt_match && one_hot; }
    // e.g. "3/3 conditions PASS" / "2/3 conditions FAIL"
    std::string summary() const;
};

EquivalenceReport verify(const RnnSpec& rnn, const TransformerModel& model,
                         const std::vector<std::string>& inputs, size_t max_steps);

} // namespace unroll
