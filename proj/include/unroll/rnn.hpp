#pragma once

#include "unroll/embedding.hpp"
#include "unroll/ffn.hpp"

#include <string>
#include <vector>

namespace unroll {

// Recurrent machine over exact rationals. One step feeds [h; x] through the
// cell to produce the next hidden state h'. The run consumes the embedded
// input tokens, then the end marker forever, and halts at the first step
// whose hidden state has the halt coordinate exactly equal to 1.
struct RnnSpec {
    EmbeddingTable embedding;
    FeedForwardNet cell; // [h (d); x (d)] -> h' (d)
    size_t halt_index = 0;

    size_t d_embed() const { return embedding.d_embed(); }

    // Throws ValidationError on any structural violation: cell width chain,
    // hidden activations, halt index, or a final layer whose static range
    // over saturated inputs can leave [0, 1].
    void validate() const;
};

struct RnnStep {
    RVector x; // input consumed at this step
    RVector h; // hidden state after this step
};

struct RnnTrace {
    std::vector<RnnStep> steps;
    bool halted = false;
    // 1-based step at which the halt coordinate first equaled 1 (only when halted).
    size_t halt_step = 0;
    bool budget_exhausted() const { return !halted; }
};

// One cell application; h and x are d_embed wide.
RVector rnn_step(const RnnSpec& spec, const RVector& h, const RVector& x);

// Runs from h_0 = 0 over the embedded inputs padded with the end marker.
// Input tokens must be vocabulary members other than the two markers.
RnnTrace rnn_run(const RnnSpec& spec, const std::vector<std::string>& inputs,
                 size_t max_steps);

// Rejects inputs containing "$" or the start marker, or unknown tokens.
void check_input_tokens(const EmbeddingTable& embedding,
                        const std::vector<std::string>& inputs);

} // namespace unroll
