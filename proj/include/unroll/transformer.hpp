#pragma once

#include "unroll/embedding.hpp"
#include "unroll/ffn.hpp"

#include <string>
#include <vector>

namespace unroll {

// Channel layout of a state vector: [h-block | x-block | i | t | stop].
// The x-block ("pad") must be at least as wide as the token embedding; the
// standard layout uses exactly d_embed, giving d_model = 2*d_embed + 3.
class LayoutConfig {
public:
    static LayoutConfig standard(size_t d_embed) { return with_pad(d_embed, d_embed); }
    static LayoutConfig with_pad(size_t d_embed, size_t pad_width);

    size_t d_embed() const { return d_embed_; }
    size_t pad_width() const { return pad_; }
    size_t d_model() const { return d_embed_ + pad_ + 3; }

    size_t h_begin() const { return 0; }
    size_t x_begin() const { return d_embed_; }
    size_t i_index() const { return d_embed_ + pad_; }
    size_t t_index() const { return d_embed_ + pad_ + 1; }
    size_t stop_index() const { return d_embed_ + pad_ + 2; }

    bool operator==(const LayoutConfig& o) const {
        return d_embed_ == o.d_embed_ && pad_ == o.pad_;
    }

private:
    LayoutConfig(size_t d_embed, size_t pad) : d_embed_(d_embed), pad_(pad) {}
    size_t d_embed_, pad_;
};

// One sequence element, addressed through a LayoutConfig.
struct StateVector {
    RVector data;

    RVector h_block(const LayoutConfig& l) const { return data.slice(l.h_begin(), l.d_embed()); }
    RVector x_block(const LayoutConfig& l) const { return data.slice(l.x_begin(), l.pad_width()); }
    const Rational& i_of(const LayoutConfig& l) const { return data[l.i_index()]; }
    const Rational& t_of(const LayoutConfig& l) const { return data[l.t_index()]; }
    const Rational& stop_of(const LayoutConfig& l) const { return data[l.stop_index()]; }
};

StateVector make_state(const LayoutConfig& layout, const RVector& h, const RVector& x,
                       const Rational& i, const Rational& t, const Rational& stop);

// Single attention head with the fixed scoring rule -|<Q(q), K(k)>|.
// Q and K are affine (weights plus bias) into a 2-dimensional space; V is a
// linear extraction of the block that holds token embeddings.
struct AttentionHead {
    RMatrix q_weight; // 2 x d_model
    RVector q_bias;   // 2
    RMatrix k_weight; // 2 x d_model
    RVector k_bias;   // 2
    RMatrix v_weight; // d_embed x d_model
};

// Widens the attended d_embed-vector back to d_model (into the x-block).
struct AgglomerationMap {
    RMatrix w; // d_model x d_embed
};

struct DecoderLayer {
    AttentionHead head;
    AgglomerationMap conn;
    FeedForwardNet ffn; // d_model -> d_model, added residually
};

struct TransformerModel {
    LayoutConfig layout;
    EmbeddingTable embedding;
    std::vector<DecoderLayer> layers;
    size_t halt_index = 0; // h-block coordinate that ends a run when it hits 1

    void validate() const;
};

// Per-layer attention data for one query position.
struct LayerTrace {
    RVector scores;               // one score per context position
    RVector weights;              // hardmax weights
    std::vector<size_t> selected; // 1-based positions with nonzero weight
    StateVector r;                // post-attention residual vector
};

struct TraceRecord {
    size_t step = 0; // 1-based autoregressive step
    std::vector<LayerTrace> layers;
    StateVector z; // emitted vector, appended to the sequence
};

struct AttendResult {
    RVector value; // d_embed
    RVector scores;
    RVector weights;
    std::vector<size_t> selected;
};

// Prompt layout: one vector per input token (position i, t = 0), then the end
// marker in the penultimate slot, then the start vector with t = 1.
std::vector<StateVector> encode_prompt(const EmbeddingTable& embedding,
                                       const LayoutConfig& layout,
                                       const std::vector<std::string>& inputs);

// Scores the query against every provided position (the caller passes the
// causal prefix) and mixes values under hardmax weights.
AttendResult attend(const AttentionHead& head, const StateVector& query,
                    const std::vector<StateVector>& keys_values);

struct LayerResult {
    StateVector z;
    LayerTrace trace;
};

// r = Conn(attended) + query; z = ffn(r) + r. The query must be the last
// element of the context.
LayerResult layer_forward(const DecoderLayer& layer, const LayoutConfig& layout,
                          const StateVector& query,
                          const std::vector<StateVector>& context);

enum class RunMode { FullRecompute, Incremental };

struct RunResult {
    std::vector<TraceRecord> trace;
    std::vector<StateVector> response; // emitted vectors, in order
    bool halted = false;
    size_t steps = 0;
    bool budget_exhausted() const { return !halted; }
};

// Decode until the emitted h-block halt coordinate equals 1 or max_steps is
// spent. Both modes produce bit-identical results; FullRecompute re-evaluates
// every position each step, Incremental extends cached per-layer sequences.
RunResult run_autoregressive(const TransformerModel& model,
                             const std::vector<std::string>& inputs, size_t max_steps,
                             RunMode mode);

} // namespace unroll
