#include "unroll/embedding.hpp"

#include "unroll/errors.hpp"

#include <set>

namespace unroll {

const std::string EmbeddingTable::kEnd = "$";
const std::string EmbeddingTable::kStart = "⊥"; // ⊥

EmbeddingTable::EmbeddingTable(size_t d_embed, std::vector<std::string> vocabulary,
                               std::map<std::string, RVector> vectors)
    : d_embed_(d_embed), vocabulary_(std::move(vocabulary)), vectors_(std::move(vectors)) {
    if (d_embed_ == 0)
        throw ValidationError("embedding_width", "d_embed must be at least 1");
    if (vocabulary_.empty())
        throw ValidationError("empty_vocabulary", "vocabulary has no tokens");
    std::set<std::string> seen;
    for (const auto& token : vocabulary_) {
        if (token.empty())
            throw ValidationError("empty_token", "vocabulary contains an empty token name");
        if (!seen.insert(token).second)
            throw ValidationError("duplicate_token", "token '" + token + "' listed twice");
    }
    if (!seen.count(kEnd))
        throw ValidationError("missing_end_token", "vocabulary lacks the end marker '$'");
    if (!seen.count(kStart))
        throw ValidationError("missing_start_token", "vocabulary lacks the start marker");
    for (const auto& token : vocabulary_) {
        auto it = vectors_.find(token);
        if (it == vectors_.end())
            throw ValidationError("missing_embedding", "no vector for token '" + token + "'");
        const RVector& v = it->second;
        if (v.size() != d_embed_)
            throw ValidationError("embedding_width",
                                  "token '" + token + "' has " + std::to_string(v.size()) +
                                      " coordinates, expected " + std::to_string(d_embed_));
        for (size_t i = 0; i < v.size(); ++i)
            if (v[i] < Rational(0) || v[i] > Rational(1))
                throw ValidationError("embedding_range",
                                      "token '" + token + "' coordinate " + std::to_string(i) +
                                          " = " + v[i].str() + " outside [0, 1]");
    }
    if (vectors_.size() != vocabulary_.size())
        throw ValidationError("missing_embedding", "embedding table lists unknown tokens");
    if (embed(kEnd) != RVector::constant(d_embed_, Rational(1)))
        throw ValidationError("end_embedding", "the end marker must embed as all-ones");
    if (embed(kStart) != RVector::zeros(d_embed_))
        throw ValidationError("start_embedding", "the start marker must embed as all-zeros");
}

const RVector& EmbeddingTable::embed(const std::string& token) const {
    auto it = vectors_.find(token);
    if (it == vectors_.end())
        throw ValidationError("unknown_token", "token '" + token + "' is not in the vocabulary");
    return it->second;
}

Rational EmbeddingTable::separation() const {
    Rational best(static_cast<long>(d_embed_));
    bool found = false;
    for (const auto& token : vocabulary_) {
        if (token == kEnd)
            continue;
        const Rational gap = Rational(static_cast<long>(d_embed_)) - embed(token).sum();
        if (!found || gap < best) {
            best = gap;
            found = true;
        }
    }
    return best;
}

} // namespace unroll
