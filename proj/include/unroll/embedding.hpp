#pragma once

#include "unroll/linalg.hpp"

#include <map>
#include <string>
#include <vector>

namespace unroll {

// Token-to-vector table over [0,1]^d. Two distinguished tokens are always
// present: the end marker "$" (embedded as all-ones) and the start marker
// "⊥" (all-zeros, never consumed as input).
class EmbeddingTable {
public:
    static const std::string kEnd;   // "$"
    static const std::string kStart; // "⊥"

    EmbeddingTable(size_t d_embed, std::vector<std::string> vocabulary,
                   std::map<std::string, RVector> vectors);

    size_t d_embed() const { return d_embed_; }
    const std::vector<std::string>& vocabulary() const { return vocabulary_; }
    bool has(const std::string& token) const { return vectors_.count(token) != 0; }
    const RVector& embed(const std::string& token) const;

    // Smallest gap d - sum(f(token)) over tokens other than the end marker.
    // The end-of-input recognizer is sound for any epsilon <= this value.
    Rational separation() const;

private:
    size_t d_embed_;
    std::vector<std::string> vocabulary_;
    std::map<std::string, RVector> vectors_;
};

} // namespace unroll
