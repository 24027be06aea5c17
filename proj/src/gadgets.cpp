#include "unroll/gadgets.hpp"

#include "unroll/errors.hpp"

#include <algorithm>
#include <set>

namespace unroll {

namespace {

// Block-diagonal merge of one level's layers.
FfnLayer merge_level(const std::vector<FfnLayer>& parts) {
    size_t rows = 0, cols = 0;
    for (const auto& p : parts) {
        rows += p.weights.rows();
        cols += p.weights.cols();
    }
    RMatrix w(rows, cols);
    RVector b(rows);
    size_t ro = 0, co = 0;
    for (const auto& p : parts) {
        for (size_t r = 0; r < p.weights.rows(); ++r) {
            b[ro + r] = p.biases[r];
            for (size_t c = 0; c < p.weights.cols(); ++c)
                w.at(ro + r, co + c) = p.weights.at(r, c);
        }
        ro += p.weights.rows();
        co += p.weights.cols();
    }
    return FfnLayer{std::move(w), std::move(b), parts.front().activation};
}

FfnLayer satlin_passthrough(size_t width) {
    return FfnLayer{RMatrix::identity(width), RVector::zeros(width),
                    Activation::SaturatedLinear};
}

// Inserts saturating passthrough levels before the final layer until the net
// has `target` hidden layers.
std::vector<FfnLayer> pad_hidden(const FeedForwardNet& net, size_t target) {
    std::vector<FfnLayer> layers(net.layers().begin(), net.layers().end() - 1);
    const size_t width = layers.empty() ? net.input_width() : layers.back().weights.rows();
    for (size_t l = net.hidden_count(); l < target; ++l)
        layers.push_back(satlin_passthrough(width));
    layers.push_back(net.layers().back());
    return layers;
}

} // namespace

FeedForwardNet compose_cascade(const FeedForwardNet& first, const FeedForwardNet& second) {
    if (first.output_width() != second.input_width())
        throw ValidationError("dimension_mismatch",
                              "cascade: first net produces " +
                                  std::to_string(first.output_width()) + " values, second "
                                  "consumes " +
                                  std::to_string(second.input_width()));
    std::vector<FfnLayer> layers(first.layers().begin(), first.layers().end() - 1);
    // The first net ends linearly, so its output layer folds into the second
    // net's entry layer: act(Ws(Wf u + bf) + bs) = act((Ws Wf) u + Ws bf + bs).
    const FfnLayer& f = first.layers().back();
    const FfnLayer& s = second.layers().front();
    layers.push_back(FfnLayer{matmul(s.weights, f.weights),
                              matvec(s.weights, f.biases) + s.biases, s.activation});
    layers.insert(layers.end(), second.layers().begin() + 1, second.layers().end());
    return FeedForwardNet(std::move(layers));
}

FeedForwardNet satlin_carrier(size_t width, size_t depth) {
    std::vector<FfnLayer> layers;
    for (size_t l = 0; l < depth; ++l)
        layers.push_back(satlin_passthrough(width));
    layers.push_back(FfnLayer{RMatrix::identity(width), RVector::zeros(width),
                              Activation::Identity});
    return FeedForwardNet(std::move(layers), "carrier");
}

FeedForwardNet stack_parallel(const std::vector<FeedForwardNet>& nets, std::string tag) {
    if (nets.empty())
        throw ValidationError("empty_stack", "no nets to stack");
    size_t depth = 0;
    for (const auto& net : nets)
        depth = std::max(depth, net.hidden_count());
    std::vector<std::vector<FfnLayer>> padded;
    padded.reserve(nets.size());
    for (const auto& net : nets) {
        auto layers = pad_hidden(net, depth);
        for (size_t l = 0; l + 1 < layers.size(); ++l)
            if (layers[l].activation != Activation::SaturatedLinear)
                throw ValidationError("stack_activation",
                                      "stacked nets must have saturated hidden layers");
        padded.push_back(std::move(layers));
    }
    std::vector<FfnLayer> combined;
    for (size_t level = 0; level <= depth; ++level) {
        std::vector<FfnLayer> parts;
        parts.reserve(padded.size());
        for (const auto& layers : padded)
            parts.push_back(layers[level]);
        combined.push_back(merge_level(parts));
    }
    return FeedForwardNet(std::move(combined), std::move(tag));
}

Rational override_bound(const FeedForwardNet& net,
                        const std::vector<size_t>& override_outputs) {
    if (net.hidden_count() == 0)
        throw ValidationError("override_restructure",
                              "outputs read raw inputs directly; add a saturated hidden "
                              "layer so the override has units to force");
    const FfnLayer& fin = net.layers().back();
    const std::vector<Interval> box(fin.weights.cols(), unit_interval());
    const auto ranges = affine_row_ranges(fin.weights, fin.biases, box);
    Rational bound(0);
    for (size_t j : override_outputs) {
        if (j >= net.output_width())
            throw ValidationError("override_index",
                                  "output " + std::to_string(j) + " outside width " +
                                      std::to_string(net.output_width()));
        bound = max(bound, max(ranges[j].lo.abs(), ranges[j].hi.abs()));
    }
    return bound;
}

FeedForwardNet add_override_column(const FeedForwardNet& net,
                                   const std::vector<size_t>& override_outputs,
                                   const Rational& big_M) {
    const std::set<size_t> targets(override_outputs.begin(), override_outputs.end());
    const Rational bound =
        override_bound(net, std::vector<size_t>(targets.begin(), targets.end()));
    if (big_M < bound + Rational(1))
        throw ValidationError("override_margin",
                              "big_M = " + big_M.str() + " below required bound " +
                                  (bound + Rational(1)).str());
    const FfnLayer& fin = net.layers().back();
    {
        // Transparency at flag = 0 runs the listed outputs through a
        // saturating unit, so their whole static range must sit in [0, 1].
        const std::vector<Interval> box(fin.weights.cols(), unit_interval());
        const auto ranges = affine_row_ranges(fin.weights, fin.biases, box);
        for (size_t j : targets)
            if (ranges[j].lo < Rational(0) || ranges[j].hi > Rational(1))
                throw ValidationError("override_restructure",
                                      "output " + std::to_string(j) + " ranges over [" +
                                          ranges[j].lo.str() + ", " + ranges[j].hi.str() +
                                          "]; restructure it to read only saturated units");
    }

    std::vector<FfnLayer> layers;
    const size_t hidden = net.hidden_count();
    // Existing hidden layers, each widened by one column unit that relays the
    // flag: column(1) = satlin(M * flag), column(l+1) = satlin(M * column(l)).
    for (size_t l = 0; l < hidden; ++l) {
        const FfnLayer& src = net.layers()[l];
        RMatrix w(src.weights.rows() + 1, src.weights.cols() + 1);
        RVector b(src.weights.rows() + 1);
        for (size_t r = 0; r < src.weights.rows(); ++r) {
            b[r] = src.biases[r];
            for (size_t c = 0; c < src.weights.cols(); ++c)
                w.at(r, c) = src.weights.at(r, c);
        }
        w.at(src.weights.rows(), src.weights.cols()) = big_M;
        layers.push_back(FfnLayer{std::move(w), std::move(b), Activation::SaturatedLinear});
    }
    // New saturating stage: passthroughs for every last hidden unit, plus one
    // forcing unit per overridden output. At flag = 0 the forcing unit equals
    // the output's own (in-range) pre-activation; at flag = 1 the +M kick
    // saturates it to exactly 1.
    const size_t w_last = fin.weights.cols();
    const std::vector<size_t> ordered(targets.begin(), targets.end());
    {
        RMatrix w(w_last + ordered.size(), w_last + 1);
        RVector b(w_last + ordered.size());
        for (size_t m = 0; m < w_last; ++m)
            w.at(m, m) = 1;
        for (size_t s = 0; s < ordered.size(); ++s) {
            const size_t j = ordered[s];
            b[w_last + s] = fin.biases[j];
            for (size_t c = 0; c < w_last; ++c)
                w.at(w_last + s, c) = fin.weights.at(j, c);
            w.at(w_last + s, w_last) = big_M;
        }
        layers.push_back(FfnLayer{std::move(w), std::move(b), Activation::SaturatedLinear});
    }
    // Output layer: overridden outputs read their forcing unit; the rest
    // re-apply their original row to the passthroughs.
    {
        RMatrix w(net.output_width(), w_last + ordered.size());
        RVector b(net.output_width());
        for (size_t j = 0; j < net.output_width(); ++j) {
            const auto pos = std::find(ordered.begin(), ordered.end(), j);
            if (pos != ordered.end()) {
                w.at(j, w_last + static_cast<size_t>(pos - ordered.begin())) = 1;
            } else {
                b[j] = fin.biases[j];
                for (size_t c = 0; c < w_last; ++c)
                    w.at(j, c) = fin.weights.at(j, c);
            }
        }
        layers.push_back(FfnLayer{std::move(w), std::move(b), Activation::Identity});
    }
    return FeedForwardNet(std::move(layers), "override");
}

FeedForwardNet make_stop_recognizer(size_t d_embed, const Rational& epsilon) {
    if (d_embed == 0)
        throw ValidationError("embedding_width", "recognizer needs d_embed >= 1");
    if (epsilon <= Rational(0) || epsilon >= Rational(1))
        throw ValidationError("epsilon_range",
                              "epsilon = " + epsilon.str() + " outside (0, 1)");
    std::vector<FfnLayer> layers;
    {
        RMatrix w(1, d_embed);
        for (size_t c = 0; c < d_embed; ++c)
            w.at(0, c) = 1;
        RVector b{epsilon - Rational(static_cast<long>(d_embed))};
        layers.push_back(FfnLayer{std::move(w), std::move(b), Activation::SaturatedLinear});
    }
    {
        RMatrix w(1, 1);
        w.at(0, 0) = Rational(1) / epsilon;
        layers.push_back(FfnLayer{std::move(w), RVector::zeros(1), Activation::SaturatedLinear});
    }
    layers.push_back(FfnLayer{RMatrix::identity(1), RVector::zeros(1), Activation::Identity});
    return FeedForwardNet(std::move(layers), "stop-recognizer");
}

FeedForwardNet build_bookkeeping(const LayoutConfig& layout, const RnnSpec& rnn,
                                 const Rational& epsilon) {
    rnn.validate();
    const size_t d = layout.d_embed();
    if (layout.pad_width() != d)
        throw ValidationError("pad_width", "bookkeeping expects the standard layout");
    if (rnn.d_embed() != d)
        throw ValidationError("embedding_width",
                              "cell is " + std::to_string(rnn.d_embed()) + "-wide, layout is " +
                                  std::to_string(d));
    const size_t D = layout.d_model();

    // Stage 1: override. Wire [h, x, i, t, stop] -> [h, x, stop, flag=stop],
    // then force a duplicated x path to all-ones whenever the flag is up.
    RMatrix wire1(2 * d + 2, D);
    for (size_t i = 0; i < d; ++i) {
        wire1.at(i, layout.h_begin() + i) = 1;
        wire1.at(d + i, layout.x_begin() + i) = 1;
    }
    wire1.at(2 * d, layout.stop_index()) = 1;
    wire1.at(2 * d + 1, layout.stop_index()) = 1;

    std::vector<FfnLayer> carrier_layers;
    {
        RMatrix w(3 * d + 1, 2 * d + 1);
        for (size_t i = 0; i < d; ++i) {
            w.at(i, i) = 1;              // h
            w.at(d + i, d + i) = 1;      // x
            w.at(2 * d + i, d + i) = 1;  // x again, the path to be overridden
        }
        w.at(3 * d, 2 * d) = 1; // stop
        carrier_layers.push_back(
            FfnLayer{std::move(w), RVector::zeros(3 * d + 1), Activation::SaturatedLinear});
        carrier_layers.push_back(FfnLayer{RMatrix::identity(3 * d + 1),
                                          RVector::zeros(3 * d + 1), Activation::Identity});
    }
    const FeedForwardNet duplicator(std::move(carrier_layers));
    std::vector<size_t> override_set;
    for (size_t i = 0; i < d; ++i)
        override_set.push_back(2 * d + i);
    const Rational big_m = override_bound(duplicator, override_set) + Rational(1);
    const FeedForwardNet overridden = add_override_column(duplicator, override_set, big_m);
    const FeedForwardNet stage1 = compose_cascade(
        FeedForwardNet::affine(std::move(wire1), RVector::zeros(2 * d + 2)), overridden);

    // Stage 2: recognize the end marker on the overridden path and carry
    // everything else. [h, x, x*, stop] -> [h, x, x*, stop, fire].
    RMatrix wire2(4 * d + 1, 3 * d + 1);
    for (size_t i = 0; i < 3 * d + 1; ++i)
        wire2.at(i, i) = 1;
    for (size_t i = 0; i < d; ++i)
        wire2.at(3 * d + 1 + i, 2 * d + i) = 1; // x* copy feeding the recognizer
    const FeedForwardNet stage2 = compose_cascade(
        FeedForwardNet::affine(std::move(wire2), RVector::zeros(4 * d + 1)),
        stack_parallel({FeedForwardNet::identity(3 * d + 1),
                        make_stop_recognizer(d, epsilon)}));

    // Stage 3: cell step, stop latch, and the residual-compensating output.
    // [h, x, x*, stop, fire] -> [h, x*, h, x, stop, stop, fire] feeds
    // (cell | carrier | or-latch), then the linear head emits
    // [h'-h, -x, 1, 1, stop'-stop].
    RMatrix wire3(4 * d + 3, 3 * d + 2);
    for (size_t i = 0; i < d; ++i) {
        wire3.at(i, i) = 1;                  // h for the cell
        wire3.at(d + i, 2 * d + i) = 1;      // x* for the cell
        wire3.at(2 * d + i, i) = 1;          // h carried
        wire3.at(3 * d + i, d + i) = 1;      // x carried
    }
    wire3.at(4 * d, 3 * d) = 1;     // stop carried
    wire3.at(4 * d + 1, 3 * d) = 1; // stop into the latch
    wire3.at(4 * d + 2, 3 * d + 1) = 1; // fire into the latch

    std::vector<FfnLayer> or_layers;
    {
        RMatrix w(1, 2);
        w.at(0, 0) = 1;
        w.at(0, 1) = 1;
        or_layers.push_back(FfnLayer{std::move(w), RVector::zeros(1),
                                     Activation::SaturatedLinear});
        or_layers.push_back(
            FfnLayer{RMatrix::identity(1), RVector::zeros(1), Activation::Identity});
    }
    const FeedForwardNet stacked3 = stack_parallel(
        {rnn.cell, FeedForwardNet::identity(2 * d + 1), FeedForwardNet(std::move(or_layers))});

    RMatrix out(D, 3 * d + 2);
    RVector out_bias = RVector::zeros(D);
    for (size_t i = 0; i < d; ++i) {
        out.at(layout.h_begin() + i, i) = 1;       // h'
        out.at(layout.h_begin() + i, d + i) = -1;  // minus carried h
        out.at(layout.x_begin() + i, 2 * d + i) = -1; // erase the x-block
    }
    out_bias[layout.i_index()] = 1; // position counter advances by one
    out_bias[layout.t_index()] = 1; // step clock advances by one
    out.at(layout.stop_index(), 3 * d) = -1;
    out.at(layout.stop_index(), 3 * d + 1) = 1;

    const FeedForwardNet stage3 = compose_cascade(
        compose_cascade(FeedForwardNet::affine(std::move(wire3), RVector::zeros(4 * d + 3)),
                        stacked3),
        FeedForwardNet::affine(std::move(out), std::move(out_bias)));

    FeedForwardNet book = compose_cascade(compose_cascade(stage1, stage2), stage3);
    return FeedForwardNet(book.layers(), "bookkeeping");
}

} // namespace unroll
