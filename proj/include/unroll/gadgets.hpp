#pragma once

#include "unroll/ffn.hpp"
#include "unroll/rnn.hpp"
#include "unroll/transformer.hpp"

#include <vector>

namespace unroll {

// second(first(x)) as a single net. The junction fuses first's final linear
// layer into second's first layer, so the result is exactly as deep as the
// two nets' hidden parts plus one output layer; equality is exact on every
// input. Widths must agree.
FeedForwardNet compose_cascade(const FeedForwardNet& first, const FeedForwardNet& second);

// Runs nets side by side on disjoint input blocks (inputs and outputs are
// concatenated in order). Shallower nets are padded with saturating
// passthrough layers, which is exact because hidden units are saturated; a
// net with no hidden layer at all gets its *inputs* passed through a
// saturating layer, so such blocks must only ever see values in [0, 1].
FeedForwardNet stack_parallel(const std::vector<FeedForwardNet>& nets, std::string tag = "");

// depth saturating passthrough layers plus a linear output; exact identity
// for inputs in [0, 1]^width.
FeedForwardNet satlin_carrier(size_t width, size_t depth);

// Upper bound B on |pre-activation| of the listed outputs, taken over the
// unit box of the final hidden layer (sound for every input domain, since
// hidden units are saturated). The override precondition is big_M >= B + 1.
Rational override_bound(const FeedForwardNet& net, const std::vector<size_t>& override_outputs);

// Adds one trailing input (a {0,1} flag) and a column of saturating units.
// flag = 0: output identical to the original net on every input. flag = 1:
// each listed output is forced to exactly 1; the rest are untouched.
// Requires at least one hidden layer and listed outputs whose static range
// stays inside [0, 1] (i.e. outputs that read only saturated units); throws
// ValidationError("override_restructure", ...) otherwise.
FeedForwardNet add_override_column(const FeedForwardNet& net,
                                   const std::vector<size_t>& override_outputs,
                                   const Rational& big_M);

// One summing unit over a d_embed-wide input with bias epsilon - d_embed,
// then a 1/epsilon rescale stage. Output is exactly 0 when sum(x) is at
// least epsilon below d, exactly 1 at the all-ones end-marker embedding,
// and strictly positive ("fires") exactly on sum(x) > d - epsilon.
FeedForwardNet make_stop_recognizer(size_t d_embed, const Rational& epsilon);

// The compiled model's per-step network, mapping a post-attention vector
// r = [h, x, i, t, stop] to the residual delta [h'-h, -x, 1, 1, stop'-stop]
// where x* is x overridden with the end marker once stop is set,
// stop' = OR(stop, recognizer(x*)) and h' = cell(h, x*). Built by cascading
// the override, recognizer and cell gadgets.
FeedForwardNet build_bookkeeping(const LayoutConfig& layout, const RnnSpec& rnn,
                                 const Rational& epsilon);

} // namespace unroll
