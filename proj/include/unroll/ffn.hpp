#pragma once

#include "unroll/linalg.hpp"

#include <string>
#include <vector>

namespace unroll {

struct FfnLayer {
    RMatrix weights;
    RVector biases;
    Activation activation = Activation::Identity;
};

// Feed-forward network: ordered affine layers, each followed by its
// activation. The final layer's activation is always Identity (validated);
// hidden layers here are saturated-linear throughout this codebase.
class FeedForwardNet {
public:
    FeedForwardNet(std::vector<FfnLayer> layers, std::string tag = "");

    size_t input_width() const { return layers_.front().weights.cols(); }
    size_t output_width() const { return layers_.back().weights.rows(); }
    size_t hidden_count() const { return layers_.size() - 1; }
    const std::vector<FfnLayer>& layers() const { return layers_; }
    const std::string& tag() const { return tag_; }

    RVector apply(const RVector& input) const;

    // Single identity layer: f(x) = Wx + b.
    static FeedForwardNet affine(RMatrix w, RVector b, std::string tag = "");
    static FeedForwardNet identity(size_t width);

private:
    std::vector<FfnLayer> layers_;
    std::string tag_;
};

// Closed interval over rationals, for static range analysis of layers.
struct Interval {
    Rational lo, hi;
};

// Range of each affine row b + W*u as u varies over the given input box.
std::vector<Interval> affine_row_ranges(const RMatrix& w, const RVector& b,
                                        const std::vector<Interval>& input_box);

// Output range of the whole net when every input lies in [0, 1].
std::vector<Interval> output_range_over_unit_box(const FeedForwardNet& net);

inline Interval unit_interval() { return Interval{Rational(0), Rational(1)}; }

} // namespace unroll
