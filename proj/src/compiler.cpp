#include "unroll/compiler.hpp"

#include "unroll/errors.hpp"
#include "unroll/gadgets.hpp"

namespace unroll {

AgglomerationMap build_agglomeration(const LayoutConfig& layout) {
    RMatrix w(layout.d_model(), layout.d_embed());
    for (size_t i = 0; i < layout.d_embed(); ++i)
        w.at(layout.x_begin() + i, i) = 1;
    return AgglomerationMap{std::move(w)};
}

TransformerModel compile(const RnnSpec& rnn, const Rational& epsilon) {
    rnn.validate();
    if (epsilon <= Rational(0) || epsilon >= Rational(1))
        throw ValidationError("epsilon_range",
                              "epsilon = " + epsilon.str() + " outside (0, 1)");
    for (const auto& token : rnn.embedding.vocabulary()) {
        if (token == EmbeddingTable::kEnd)
            continue;
        const Rational gap =
            Rational(static_cast<long>(rnn.d_embed())) - rnn.embedding.embed(token).sum();
        if (gap < epsilon)
            throw ValidationError("separation",
                                  "token '" + token + "' sits " + gap.str() +
                                      " below the end marker; needs at least epsilon = " +
                                      epsilon.str());
    }

    const LayoutConfig layout = LayoutConfig::standard(rnn.d_embed());
    const size_t D = layout.d_model();

    // Score factorization: Q(y) = (1, -t_y), K(y_j) = (i_j, 1), so the inner
    // product is i_j - t_query and -|.| peaks exactly where the recalled
    // position equals the query's step clock.
    AttentionHead head{RMatrix::zeros(2, D), RVector::zeros(2), RMatrix::zeros(2, D),
                       RVector::zeros(2), RMatrix::zeros(layout.d_embed(), D)};
    head.q_bias[0] = 1;
    head.q_weight.at(1, layout.t_index()) = -1;
    head.k_weight.at(0, layout.i_index()) = 1;
    head.k_bias[1] = 1;
    for (size_t i = 0; i < layout.d_embed(); ++i)
        head.v_weight.at(i, layout.h_begin() + i) = 1; // token embeddings ride the h-block

    TransformerModel model{layout,
                           rnn.embedding,
                           {DecoderLayer{std::move(head), build_agglomeration(layout),
                                         build_bookkeeping(layout, rnn, epsilon)}},
                           rnn.halt_index};
    model.validate();

    const EquivalenceReport probe = verify(rnn, model, {}, 16);
    if (!probe.pass())
        throw ValidationError("self_check",
                              "compiled model diverges on the empty input: " +
                                  probe.summary());
    return model;
}

std::string EquivalenceReport::summary() const {
    const int passed = (input_match ? 1 : 0) + (hidden_match ? 1 : 0) + (halt_match ? 1 : 0);
    return std::to_string(passed) + "/3 conditions " + (pass() ? "PASS" : "FAIL");
}

EquivalenceReport verify(const RnnSpec& rnn, const TransformerModel& model,
                         const std::vector<std::string>& inputs, size_t max_steps) {
    rnn.validate();
    model.validate();
    if (model.layout.d_embed() != rnn.d_embed())
        throw ValidationError("embedding_width",
                              "model d_embed " + std::to_string(model.layout.d_embed()) +
                                  " vs rnn d_embed " + std::to_string(rnn.d_embed()));

    const RnnTrace oracle = rnn_run(rnn, inputs, max_steps);
    const RunResult run = run_autoregressive(model, inputs, max_steps, RunMode::Incremental);
    const LayoutConfig& layout = model.layout;
    const RVector ones = RVector::constant(layout.d_embed(), Rational(1));

    EquivalenceReport report;
    report.rnn_halted = oracle.halted;
    report.model_halted = run.halted;
    report.rnn_halt_step = oracle.halt_step;
    report.model_halt_step = run.halted ? run.steps : 0;

    const size_t common = std::min(oracle.steps.size(), run.trace.size());
    report.steps_compared = common;
    for (size_t s = 0; s < common; ++s) {
        const TraceRecord& rec = run.trace[s];
        const size_t step = s + 1;
        for (const auto& lt : rec.layers) {
            bool one_hot = lt.selected.size() == 1;
            for (size_t j = 0; one_hot && j < lt.weights.size(); ++j)
                if (!lt.weights[j].is_zero() && lt.weights[j] != Rational(1))
                    one_hot = false;
            if (!one_hot) {
                report.one_hot = false;
                report.violations.push_back(
                    {"one_hot", step, -1,
                     "attention spread over " + std::to_string(lt.selected.size()) +
                         " positions"});
            }
        }
        // The step network reads r = [h_{t-1}, x_t, i, t, stop]; once stop is
        // up the x-block is overridden with the end marker inside the net.
        const LayerTrace& lt = rec.layers.front();
        const RVector r_h = lt.r.h_block(layout);
        const RVector r_x_raw = lt.r.x_block(layout).slice(0, layout.d_embed());
        const bool stopped = lt.r.stop_of(layout) == Rational(1);
        const RVector& presented = stopped ? ones : r_x_raw;
        const RVector& expected_x = oracle.steps[s].x;
        const RVector expected_h =
            s == 0 ? RVector::zeros(layout.d_embed()) : oracle.steps[s - 1].h;
        for (size_t i = 0; i < layout.d_embed(); ++i) {
            if (presented[i] != expected_x[i]) {
                report.input_match = false;
                report.violations.push_back(
                    {"input", step, static_cast<long>(i),
                     "x[" + std::to_string(i) + "] = " + presented[i].str() + ", oracle " +
                         expected_x[i].str()});
            }
            if (r_h[i] != expected_h[i]) {
                report.hidden_match = false;
                report.violations.push_back(
                    {"hidden", step, static_cast<long>(i),
                     "h[" + std::to_string(i) + "] = " + r_h[i].str() + ", oracle " +
                         expected_h[i].str()});
            }
        }
        const RVector z_h = rec.z.h_block(layout);
        for (size_t i = 0; i < layout.d_embed(); ++i)
            if (z_h[i] != oracle.steps[s].h[i]) {
                report.hidden_match = false;
                report.violations.push_back(
                    {"hidden", step, static_cast<long>(i),
                     "emitted h[" + std::to_string(i) + "] = " + z_h[i].str() + ", oracle " +
                         oracle.steps[s].h[i].str()});
            }
    }

    if (oracle.halted != run.halted ||
        (oracle.halted && oracle.halt_step != run.steps)) {
        report.halt_match = false;
        const auto describe = [](bool halted, size_t at, size_t budget_steps) {
            return halted ? "halted at step " + std::to_string(at)
                          : "still running after " + std::to_string(budget_steps) + " steps";
        };
        report.violations.push_back(
            {"halt", 0, -1,
             "reference " + describe(oracle.halted, oracle.halt_step, oracle.steps.size()) +
                 ", model " + describe(run.halted, run.steps, run.steps)});
    }
    return report;
}

} // namespace unroll
