#include "unroll/rnn.hpp"

#include "unroll/errors.hpp"

namespace unroll {

void RnnSpec::validate() const {
    const size_t d = d_embed();
    if (cell.input_width() != 2 * d)
        throw ValidationError("cell_width",
                              "cell consumes " + std::to_string(cell.input_width()) +
                                  " values, expected [h; x] = " + std::to_string(2 * d));
    if (cell.output_width() != d)
        throw ValidationError("cell_width",
                              "cell produces " + std::to_string(cell.output_width()) +
                                  " values, expected " + std::to_string(d));
    const auto& layers = cell.layers();
    for (size_t l = 0; l + 1 < layers.size(); ++l)
        if (layers[l].activation != Activation::SaturatedLinear)
            throw ValidationError("cell_hidden_activation",
                                  "cell hidden layer " + std::to_string(l) +
                                      " must be saturated-linear");
    if (halt_index >= d)
        throw ValidationError("halt_index",
                              "halt index " + std::to_string(halt_index) +
                                  " outside hidden width " + std::to_string(d));
    // h stays in [0,1] by induction: inputs [h; x] lie in the unit box, so the
    // final layer's static range over that box must stay inside [0, 1].
    const auto range = output_range_over_unit_box(cell);
    for (size_t i = 0; i < range.size(); ++i)
        if (range[i].lo < Rational(0) || range[i].hi > Rational(1))
            throw ValidationError("cell_output_range",
                                  "cell output " + std::to_string(i) + " can reach [" +
                                      range[i].lo.str() + ", " + range[i].hi.str() +
                                      "] over saturated inputs; restructure so the final "
                                      "layer reads saturated units only");
}

void check_input_tokens(const EmbeddingTable& embedding,
                        const std::vector<std::string>& inputs) {
    for (const auto& token : inputs) {
        if (token == EmbeddingTable::kEnd || token == EmbeddingTable::kStart)
            throw ValidationError("reserved_token",
                                  "input may not contain the marker token '" + token + "'");
        if (!embedding.has(token))
            throw ValidationError("unknown_token",
                                  "input token '" + token + "' is not in the vocabulary");
    }
}

RVector rnn_step(const RnnSpec& spec, const RVector& h, const RVector& x) {
    if (h.size() != spec.d_embed() || x.size() != spec.d_embed())
        throw ValidationError("dimension_mismatch",
                              "rnn_step: h " + std::to_string(h.size()) + ", x " +
                                  std::to_string(x.size()) + ", expected both " +
                                  std::to_string(spec.d_embed()));
    return spec.cell.apply(h.concat(x));
}

RnnTrace rnn_run(const RnnSpec& spec, const std::vector<std::string>& inputs,
                 size_t max_steps) {
    check_input_tokens(spec.embedding, inputs);
    const RVector end = spec.embedding.embed(EmbeddingTable::kEnd);
    RnnTrace trace;
    RVector h = RVector::zeros(spec.d_embed());
    for (size_t t = 1; t <= max_steps; ++t) {
        const RVector& x = t <= inputs.size() ? spec.embedding.embed(inputs[t - 1]) : end;
        h = rnn_step(spec, h, x);
        trace.steps.push_back(RnnStep{x, h});
        if (h[spec.halt_index] == Rational(1)) {
            trace.halted = true;
            trace.halt_step = t;
            break;
        }
    }
    return trace;
}

} // namespace unroll
