#pragma once

#include "unroll/rational.hpp"

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace unroll {

// Dense vector of rationals. All operations dimension-check and throw
// ValidationError("dimension_mismatch", ...) naming both shapes.
class RVector {
public:
    RVector() = default;
    explicit RVector(size_t n) : e_(n) {}
    RVector(std::initializer_list<Rational> init) : e_(init) {}
    explicit RVector(std::vector<Rational> e) : e_(std::move(e)) {}

    static RVector zeros(size_t n) { return RVector(n); }
    static RVector constant(size_t n, const Rational& value);

    size_t size() const { return e_.size(); }
    Rational& operator[](size_t i) { return e_[i]; }
    const Rational& operator[](size_t i) const { return e_[i]; }

    RVector slice(size_t begin, size_t count) const;
    RVector concat(const RVector& tail) const;
    Rational sum() const;
    Rational dot(const RVector& o) const;

    RVector operator+(const RVector& o) const;
    RVector operator-(const RVector& o) const;
    RVector scaled(const Rational& k) const;

    bool operator==(const RVector& o) const { return e_ == o.e_; }
    bool operator!=(const RVector& o) const { return e_ != o.e_; }

    std::string str() const; // "[1/2, 0, -3]"

private:
    std::vector<Rational> e_;
};

// Dense row-major matrix of rationals.
class RMatrix {
public:
    RMatrix() : rows_(0), cols_(0) {}
    RMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), e_(rows * cols) {}

    static RMatrix identity(size_t n);
    static RMatrix zeros(size_t rows, size_t cols) { return RMatrix(rows, cols); }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    Rational& at(size_t r, size_t c) { return e_[r * cols_ + c]; }
    const Rational& at(size_t r, size_t c) const { return e_[r * cols_ + c]; }

    RVector row(size_t r) const;

    bool operator==(const RMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && e_ == o.e_;
    }

private:
    size_t rows_, cols_;
    std::vector<Rational> e_;
};

RVector matvec(const RMatrix& m, const RVector& v);
RMatrix matmul(const RMatrix& a, const RMatrix& b);

// Saturated linear unit: clamp to [0, 1].
Rational satlin(const Rational& x);
RVector satlin_apply(const RVector& v);

// hardmax: probability vector placing weight 1/m on each of the m positions
// attaining the exact maximum, 0 elsewhere. Throws on an empty input.
RVector hardmax(const RVector& scores);

enum class Activation { SaturatedLinear, Identity };

RVector apply_activation(Activation a, const RVector& v);

} // namespace unroll
