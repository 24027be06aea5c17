#include "unroll/ffn.hpp"

#include "unroll/errors.hpp"

namespace unroll {

FeedForwardNet::FeedForwardNet(std::vector<FfnLayer> layers, std::string tag)
    : layers_(std::move(layers)), tag_(std::move(tag)) {
    if (layers_.empty())
        throw ValidationError("empty_net", "a feed-forward net needs at least one layer");
    for (size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.weights.rows() != layer.biases.size())
            throw ValidationError("layer_shape",
                                  "layer " + std::to_string(l) + ": " +
                                      std::to_string(layer.weights.rows()) + " rows vs " +
                                      std::to_string(layer.biases.size()) + " biases");
        if (l > 0 && layer.weights.cols() != layers_[l - 1].weights.rows())
            throw ValidationError("layer_shape",
                                  "layer " + std::to_string(l) + " consumes " +
                                      std::to_string(layer.weights.cols()) + " values, previous "
                                      "layer produces " +
                                      std::to_string(layers_[l - 1].weights.rows()));
    }
    if (layers_.back().activation != Activation::Identity)
        throw ValidationError("final_activation", "the final layer must be linear (identity)");
}

RVector FeedForwardNet::apply(const RVector& input) const {
    if (input.size() != input_width())
        throw ValidationError("dimension_mismatch",
                              "net expects " + std::to_string(input_width()) + " inputs, got " +
                                  std::to_string(input.size()));
    RVector v = input;
    for (const auto& layer : layers_)
        v = apply_activation(layer.activation, matvec(layer.weights, v) + layer.biases);
    return v;
}

FeedForwardNet FeedForwardNet::affine(RMatrix w, RVector b, std::string tag) {
    return FeedForwardNet({FfnLayer{std::move(w), std::move(b), Activation::Identity}},
                          std::move(tag));
}

FeedForwardNet FeedForwardNet::identity(size_t width) {
    return affine(RMatrix::identity(width), RVector::zeros(width));
}

std::vector<Interval> affine_row_ranges(const RMatrix& w, const RVector& b,
                                        const std::vector<Interval>& input_box) {
    if (w.cols() != input_box.size())
        throw ValidationError("dimension_mismatch",
                              "range analysis: " + std::to_string(w.cols()) + " columns vs " +
                                  std::to_string(input_box.size()) + " input intervals");
    std::vector<Interval> out(w.rows());
    for (size_t r = 0; r < w.rows(); ++r) {
        Rational lo = b[r], hi = b[r];
        for (size_t c = 0; c < w.cols(); ++c) {
            const Rational& k = w.at(r, c);
            if (k.is_zero())
                continue;
            if (k > Rational(0)) {
                lo += k * input_box[c].lo;
                hi += k * input_box[c].hi;
            } else {
                lo += k * input_box[c].hi;
                hi += k * input_box[c].lo;
            }
        }
        out[r] = Interval{lo, hi};
    }
    return out;
}

std::vector<Interval> output_range_over_unit_box(const FeedForwardNet& net) {
    std::vector<Interval> box(net.input_width(), unit_interval());
    for (const auto& layer : net.layers()) {
        box = affine_row_ranges(layer.weights, layer.biases, box);
        if (layer.activation == Activation::SaturatedLinear)
            for (auto& iv : box)
                iv = Interval{satlin(iv.lo), satlin(iv.hi)};
    }
    return box;
}

} // namespace unroll
