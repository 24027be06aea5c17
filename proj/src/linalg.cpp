#include "unroll/linalg.hpp"

#include "unroll/errors.hpp"

#include <sstream>

namespace unroll {

namespace {

[[noreturn]] void dim_error(const std::string& op, const std::string& lhs,
                            const std::string& rhs) {
    throw ValidationError("dimension_mismatch", op + ": " + lhs + " vs " + rhs);
}

std::string vec_shape(const RVector& v) {
    return std::to_string(v.size());
}

std::string mat_shape(const RMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

} // namespace

RVector RVector::constant(size_t n, const Rational& value) {
    std::vector<Rational> e(n, value);
    return RVector(std::move(e));
}

RVector RVector::slice(size_t begin, size_t count) const {
    if (begin + count > e_.size())
        dim_error("slice", std::to_string(begin) + "+" + std::to_string(count), vec_shape(*this));
    return RVector(std::vector<Rational>(e_.begin() + static_cast<long>(begin),
                                         e_.begin() + static_cast<long>(begin + count)));
}

RVector RVector::concat(const RVector& tail) const {
    std::vector<Rational> e = e_;
    for (size_t i = 0; i < tail.size(); ++i)
        e.push_back(tail[i]);
    return RVector(std::move(e));
}

Rational RVector::sum() const {
    Rational s;
    for (const auto& x : e_)
        s += x;
    return s;
}

Rational RVector::dot(const RVector& o) const {
    if (size() != o.size())
        dim_error("dot", vec_shape(*this), vec_shape(o));
    Rational s;
    for (size_t i = 0; i < size(); ++i)
        s += e_[i] * o[i];
    return s;
}

RVector RVector::operator+(const RVector& o) const {
    if (size() != o.size())
        dim_error("vector add", vec_shape(*this), vec_shape(o));
    RVector r(size());
    for (size_t i = 0; i < size(); ++i)
        r[i] = e_[i] + o[i];
    return r;
}

RVector RVector::operator-(const RVector& o) const {
    if (size() != o.size())
        dim_error("vector sub", vec_shape(*this), vec_shape(o));
    RVector r(size());
    for (size_t i = 0; i < size(); ++i)
        r[i] = e_[i] - o[i];
    return r;
}

RVector RVector::scaled(const Rational& k) const {
    RVector r(size());
    for (size_t i = 0; i < size(); ++i)
        r[i] = e_[i] * k;
    return r;
}

std::string RVector::str() const {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < size(); ++i)
        os << (i ? ", " : "") << e_[i].str();
    os << "]";
    return os.str();
}

RMatrix RMatrix::identity(size_t n) {
    RMatrix m(n, n);
    for (size_t i = 0; i < n; ++i)
        m.at(i, i) = 1;
    return m;
}

RVector RMatrix::row(size_t r) const {
    RVector v(cols_);
    for (size_t c = 0; c < cols_; ++c)
        v[c] = at(r, c);
    return v;
}

RVector matvec(const RMatrix& m, const RVector& v) {
    if (m.cols() != v.size())
        dim_error("matvec", mat_shape(m), vec_shape(v));
    RVector r(m.rows());
    for (size_t i = 0; i < m.rows(); ++i) {
        Rational s;
        for (size_t j = 0; j < m.cols(); ++j)
            s += m.at(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

RMatrix matmul(const RMatrix& a, const RMatrix& b) {
    if (a.cols() != b.rows())
        dim_error("matmul", mat_shape(a), mat_shape(b));
    RMatrix r(a.rows(), b.cols());
    for (size_t i = 0; i < a.rows(); ++i)
        for (size_t k = 0; k < a.cols(); ++k) {
            if (a.at(i, k).is_zero())
                continue;
            for (size_t j = 0; j < b.cols(); ++j)
                r.at(i, j) += a.at(i, k) * b.at(k, j);
        }
    return r;
}

Rational satlin(const Rational& x) {
    if (x < Rational(0))
        return Rational(0);
    if (x > Rational(1))
        return Rational(1);
    return x;
}

RVector satlin_apply(const RVector& v) {
    RVector r(v.size());
    for (size_t i = 0; i < v.size(); ++i)
        r[i] = satlin(v[i]);
    return r;
}

RVector hardmax(const RVector& scores) {
    if (scores.size() == 0)
        throw ValidationError("empty_scores", "hardmax of an empty score vector");
    Rational best = scores[0];
    for (size_t i = 1; i < scores.size(); ++i)
        best = max(best, scores[i]);
    size_t ties = 0;
    for (size_t i = 0; i < scores.size(); ++i)
        if (scores[i] == best)
            ++ties;
    const Rational share(1, static_cast<long>(ties));
    RVector r(scores.size());
    for (size_t i = 0; i < scores.size(); ++i)
        if (scores[i] == best)
            r[i] = share;
    return r;
}

RVector apply_activation(Activation a, const RVector& v) {
    return a == Activation::SaturatedLinear ? satlin_apply(v) : v;
}

} // namespace unroll
