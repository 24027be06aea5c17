#include "unroll/transformer.hpp"

#include "unroll/errors.hpp"
#include "unroll/rnn.hpp"

namespace unroll {

LayoutConfig LayoutConfig::with_pad(size_t d_embed, size_t pad_width) {
    if (d_embed == 0)
        throw ValidationError("embedding_width", "d_embed must be at least 1");
    if (pad_width < d_embed)
        throw ValidationError("pad_width",
                              "pad width " + std::to_string(pad_width) +
                                  " cannot hold a d_embed = " + std::to_string(d_embed) +
                                  " token vector");
    return LayoutConfig(d_embed, pad_width);
}

StateVector make_state(const LayoutConfig& layout, const RVector& h, const RVector& x,
                       const Rational& i, const Rational& t, const Rational& stop) {
    if (h.size() != layout.d_embed() || x.size() != layout.pad_width())
        throw ValidationError("dimension_mismatch",
                              "make_state: h " + std::to_string(h.size()) + ", x " +
                                  std::to_string(x.size()) + " for layout " +
                                  std::to_string(layout.d_embed()) + "+" +
                                  std::to_string(layout.pad_width()));
    RVector v = h.concat(x);
    v = v.concat(RVector{i, t, stop});
    return StateVector{v};
}

void TransformerModel::validate() const {
    const size_t d_model = layout.d_model();
    const size_t d = layout.d_embed();
    if (embedding.d_embed() != d)
        throw ValidationError("embedding_width",
                              "embedding width " + std::to_string(embedding.d_embed()) +
                                  " vs layout d_embed " + std::to_string(d));
    if (layers.empty())
        throw ValidationError("empty_model", "model has no decoder layers");
    for (size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        const std::string where = "layer " + std::to_string(l);
        if (layer.head.q_weight.rows() != 2 || layer.head.q_weight.cols() != d_model ||
            layer.head.q_bias.size() != 2)
            throw ValidationError("head_shape", where + ": query map must be 2 x d_model");
        if (layer.head.k_weight.rows() != 2 || layer.head.k_weight.cols() != d_model ||
            layer.head.k_bias.size() != 2)
            throw ValidationError("head_shape", where + ": key map must be 2 x d_model");
        if (layer.head.v_weight.rows() != d || layer.head.v_weight.cols() != d_model)
            throw ValidationError("head_shape", where + ": value map must be d_embed x d_model");
        if (layer.conn.w.rows() != d_model || layer.conn.w.cols() != d)
            throw ValidationError("conn_shape", where + ": widening map must be d_model x d_embed");
        if (layer.ffn.input_width() != d_model || layer.ffn.output_width() != d_model)
            throw ValidationError("ffn_shape", where + ": ffn must map d_model to d_model");
    }
    if (halt_index >= d)
        throw ValidationError("halt_index",
                              "halt index " + std::to_string(halt_index) +
                                  " outside h-block width " + std::to_string(d));
}

std::vector<StateVector> encode_prompt(const EmbeddingTable& embedding,
                                       const LayoutConfig& layout,
                                       const std::vector<std::string>& inputs) {
    check_input_tokens(embedding, inputs);
    if (embedding.d_embed() != layout.d_embed())
        throw ValidationError("embedding_width",
                              "embedding width " + std::to_string(embedding.d_embed()) +
                                  " vs layout d_embed " + std::to_string(layout.d_embed()));
    const RVector pad = RVector::zeros(layout.pad_width());
    const RVector zero_h = RVector::zeros(layout.d_embed());
    std::vector<StateVector> prompt;
    prompt.reserve(inputs.size() + 2);
    for (size_t n = 0; n < inputs.size(); ++n)
        prompt.push_back(make_state(layout, embedding.embed(inputs[n]), pad,
                                    Rational(static_cast<long>(n + 1)), Rational(0),
                                    Rational(0)));
    const long k = static_cast<long>(inputs.size()) + 2;
    prompt.push_back(make_state(layout, embedding.embed(EmbeddingTable::kEnd), pad,
                                Rational(k - 1), Rational(0), Rational(0)));
    // Start vector: the query that launches decoding. Its clock starts at 1 so
    // the first step recalls position 1.
    prompt.push_back(make_state(layout, zero_h, pad, Rational(k), Rational(1), Rational(0)));
    return prompt;
}

AttendResult attend(const AttentionHead& head, const StateVector& query,
                    const std::vector<StateVector>& keys_values) {
    if (keys_values.empty())
        throw ValidationError("empty_context", "attention needs at least one position");
    const RVector q = matvec(head.q_weight, query.data) + head.q_bias;
    RVector scores(keys_values.size());
    for (size_t j = 0; j < keys_values.size(); ++j) {
        const RVector k = matvec(head.k_weight, keys_values[j].data) + head.k_bias;
        scores[j] = -q.dot(k).abs();
    }
    AttendResult out;
    out.scores = scores;
    out.weights = hardmax(scores);
    RVector value = RVector::zeros(head.v_weight.rows());
    for (size_t j = 0; j < keys_values.size(); ++j) {
        if (out.weights[j].is_zero())
            continue;
        out.selected.push_back(j + 1);
        value = value + matvec(head.v_weight, keys_values[j].data).scaled(out.weights[j]);
    }
    out.value = value;
    return out;
}

LayerResult layer_forward(const DecoderLayer& layer, const LayoutConfig& layout,
                          const StateVector& query,
                          const std::vector<StateVector>& context) {
    if (context.empty() || !(context.back().data == query.data))
        throw ValidationError("query_position", "the query must be the last context element");
    AttendResult att = attend(layer.head, query, context);
    const RVector r = matvec(layer.conn.w, att.value) + query.data;
    const RVector z = layer.ffn.apply(r) + r;
    LayerResult out{StateVector{z},
                    LayerTrace{std::move(att.scores), std::move(att.weights),
                               std::move(att.selected), StateVector{r}}};
    return out;
}

namespace {

// Runs every layer over the full sequence, returning the last position's
// output and per-layer traces for that position.
StateVector forward_all_positions(const TransformerModel& model,
                                  const std::vector<StateVector>& sequence,
                                  std::vector<LayerTrace>& last_traces) {
    std::vector<StateVector> current = sequence;
    last_traces.clear();
    for (const auto& layer : model.layers) {
        std::vector<StateVector> next;
        next.reserve(current.size());
        LayerResult last{};
        for (size_t j = 0; j < current.size(); ++j) {
            std::vector<StateVector> prefix(current.begin(),
                                            current.begin() + static_cast<long>(j + 1));
            last = layer_forward(layer, model.layout, current[j], prefix);
            next.push_back(last.z);
        }
        last_traces.push_back(last.trace);
        current = std::move(next);
    }
    return current.back();
}

} // namespace

RunResult run_autoregressive(const TransformerModel& model,
                             const std::vector<std::string>& inputs, size_t max_steps,
                             RunMode mode) {
    model.validate();
    std::vector<StateVector> sequence = encode_prompt(model.embedding, model.layout, inputs);

    // Incremental mode: cached output sequence of every layer. stages[l] holds
    // layer l's outputs for all positions computed so far; causality makes
    // each entry final the moment it is computed. The prefill stops one short
    // of the prompt's end — the last position is the first step's query.
    std::vector<std::vector<StateVector>> stages(model.layers.size());
    if (mode == RunMode::Incremental) {
        for (size_t j = 0; j + 1 < sequence.size(); ++j) {
            const std::vector<StateVector>* below = &sequence;
            for (size_t l = 0; l < model.layers.size(); ++l) {
                std::vector<StateVector> prefix(below->begin(),
                                                below->begin() + static_cast<long>(j + 1));
                stages[l].push_back(
                    layer_forward(model.layers[l], model.layout, prefix.back(), prefix).z);
                below = &stages[l];
            }
        }
    }

    RunResult result;
    for (size_t step = 1; step <= max_steps; ++step) {
        TraceRecord record;
        record.step = step;
        StateVector z{};
        if (mode == RunMode::FullRecompute) {
            z = forward_all_positions(model, sequence, record.layers);
        } else {
            const std::vector<StateVector>* below = &sequence;
            for (size_t l = 0; l < model.layers.size(); ++l) {
                LayerResult res =
                    layer_forward(model.layers[l], model.layout, below->back(), *below);
                stages[l].push_back(res.z);
                record.layers.push_back(res.trace);
                below = &stages[l];
            }
            z = below->back();
        }
        record.z = z;
        sequence.push_back(z);
        result.trace.push_back(std::move(record));
        result.response.push_back(z);
        result.steps = step;
        if (z.h_block(model.layout)[model.halt_index] == Rational(1)) {
            result.halted = true;
            break;
        }
    }
    return result;
}

} // namespace unroll
