#pragma once

#include "unroll/embedding.hpp"
#include "unroll/errors.hpp"
#include "unroll/ffn.hpp"
#include "unroll/linalg.hpp"
#include "unroll/rational.hpp"

#include <functional>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

namespace unroll::testutil {

inline Rational rat(const std::string& text) { return Rational::from_string(text); }

inline RVector vec(std::initializer_list<const char*> entries) {
    std::vector<Rational> e;
    for (const char* t : entries)
        e.push_back(rat(t));
    return RVector(std::move(e));
}

inline RMatrix mat(std::initializer_list<std::initializer_list<const char*>> rows) {
    const size_t r = rows.size();
    const size_t c = rows.begin()->size();
    RMatrix m(r, c);
    size_t i = 0;
    for (const auto& row : rows) {
        size_t j = 0;
        for (const char* t : row)
            m.at(i, j++) = rat(t);
        ++i;
    }
    return m;
}

inline FfnLayer satlin_layer(std::initializer_list<std::initializer_list<const char*>> w,
                             std::initializer_list<const char*> b) {
    return FfnLayer{mat(w), vec(b), Activation::SaturatedLinear};
}

inline FfnLayer linear_layer(std::initializer_list<std::initializer_list<const char*>> w,
                             std::initializer_list<const char*> b) {
    return FfnLayer{mat(w), vec(b), Activation::Identity};
}

// Returns the ValidationError name thrown by f, or "" if nothing was thrown.
inline std::string thrown_name(const std::function<void()>& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        return e.name();
    }
    return "";
}

// Small two-token table: a -> [1/2, 0...], b -> [0, 1/2, 0...] over d >= 1.
inline EmbeddingTable ab_table(size_t d) {
    std::map<std::string, RVector> vectors;
    RVector a = RVector::zeros(d), b = RVector::zeros(d);
    a[0] = rat("1/2");
    b[d > 1 ? 1 : 0] = rat(d > 1 ? "1/2" : "1/4");
    vectors.emplace("a", a);
    vectors.emplace("b", b);
    vectors.emplace(EmbeddingTable::kEnd, RVector::constant(d, Rational(1)));
    vectors.emplace(EmbeddingTable::kStart, RVector::zeros(d));
    return EmbeddingTable(d, {"a", "b", EmbeddingTable::kEnd, EmbeddingTable::kStart},
                          std::move(vectors));
}

inline std::string corpus_path(const std::string& name) {
    return std::string(UNROLL_CORPUS_DIR) + "/" + name;
}

} // namespace unroll::testutil
