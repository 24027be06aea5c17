#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "unroll/io.hpp"
#include "unroll/rnn.hpp"

#include <map>
#include <string>
#include <vector>

using namespace unroll;
using namespace unroll::testutil;

namespace {

EmbeddingTable table_with(size_t d, std::map<std::string, RVector> extra,
                          std::vector<std::string> vocabulary) {
    extra.emplace(EmbeddingTable::kEnd, RVector::constant(d, Rational(1)));
    extra.emplace(EmbeddingTable::kStart, RVector::zeros(d));
    vocabulary.push_back(EmbeddingTable::kEnd);
    vocabulary.push_back(EmbeddingTable::kStart);
    return EmbeddingTable(d, std::move(vocabulary), std::move(extra));
}

// d = 1 machine whose hidden state never reaches the halt value.
RnnSpec never_halting() {
    std::map<std::string, RVector> vectors;
    vectors.emplace("a", vec({"1/4"}));
    return RnnSpec{table_with(1, std::move(vectors), {"a"}),
                   FeedForwardNet({linear_layer({{"0", "0"}}, {"0"})}), 0};
}

} // namespace

TEST_CASE("embedding table rejects malformed instances") {
    CHECK(thrown_name([] {
              EmbeddingTable(0, {"$", "⊥"}, {{"$", RVector()}, {"⊥", RVector()}});
          }) == "embedding_width");
    CHECK(thrown_name([] { EmbeddingTable(2, {}, {}); }) == "empty_vocabulary");
    CHECK(thrown_name([] {
              EmbeddingTable(1, {"a", "a"}, {{"a", vec({"0"})}});
          }) == "duplicate_token");
    CHECK(thrown_name([] {
              EmbeddingTable(1, {"a"}, {{"a", vec({"0"})}});
          }) == "missing_end_token");
    CHECK(thrown_name([] {
              EmbeddingTable(1, {"a", "$"}, {{"a", vec({"0"})}, {"$", vec({"1"})}});
          }) == "missing_start_token");
    CHECK(thrown_name([] {
              EmbeddingTable(1, {"a", "$", "⊥"}, {{"$", vec({"1"})}, {"⊥", vec({"0"})}});
          }) == "missing_embedding");
    CHECK(thrown_name([] {
              EmbeddingTable(1, {"", "$", "⊥"},
                             {{"", vec({"0"})}, {"$", vec({"1"})}, {"⊥", vec({"0"})}});
          }) == "empty_token");
    // coordinate outside [0, 1]
    CHECK(thrown_name([] {
              EmbeddingTable(1, {"a", "$", "⊥"},
                             {{"a", vec({"3/2"})}, {"$", vec({"1"})}, {"⊥", vec({"0"})}});
          }) == "embedding_range");
    // end marker must be all-ones, start all-zeros
    CHECK(thrown_name([] {
              EmbeddingTable(1, {"a", "$", "⊥"},
                             {{"a", vec({"0"})}, {"$", vec({"1/2"})}, {"⊥", vec({"0"})}});
          }) == "end_embedding");
    CHECK(thrown_name([] {
              EmbeddingTable(1, {"a", "$", "⊥"},
                             {{"a", vec({"0"})}, {"$", vec({"1"})}, {"⊥", vec({"1/4"})}});
          }) == "start_embedding");
    // wrong width vector
    CHECK(thrown_name([] {
              EmbeddingTable(2, {"a", "$", "⊥"},
                             {{"a", vec({"0"})},
                              {"$", vec({"1", "1"})},
                              {"⊥", vec({"0", "0"})}});
          }) == "embedding_width");

    const EmbeddingTable t = ab_table(2);
    CHECK(t.embed("a") == vec({"1/2", "0"}));
    CHECK(thrown_name([&] { (void)t.embed("z"); }) == "unknown_token");
}

TEST_CASE("separation is the smallest end-marker gap") {
    // ab_table(2): sums are 1/2 (a), 1/2 (b), 0 (start) -> gap 3/2
    CHECK(ab_table(2).separation() == rat("3/2"));
    const RnnSpec parity = load_rnn(corpus_path("parity.rnn"));
    // parity tokens sum to 1 in d = 2 -> gap 1
    CHECK(parity.embedding.separation() == Rational(1));
}

TEST_CASE("spec validation rejects structural violations") {
    const EmbeddingTable t = ab_table(2);
    // cell must map 2d -> d
    CHECK(thrown_name([&] {
              RnnSpec{t, FeedForwardNet({linear_layer({{"0", "0"}}, {"0"})}), 0}.validate();
          }) == "cell_width");
    CHECK(thrown_name([&] {
              RnnSpec{t,
                      FeedForwardNet({linear_layer(
                          {{"0", "0", "0", "0"}, {"0", "0", "0", "0"},
                           {"0", "0", "0", "0"}},
                          {"0", "0", "0"})}),
                      0}
                  .validate();
          }) == "cell_width");
    // halt index must address a hidden coordinate
    CHECK(thrown_name([&] {
              RnnSpec{t,
                      FeedForwardNet({linear_layer(
                          {{"0", "0", "0", "0"}, {"0", "0", "0", "0"}}, {"0", "0"})}),
                      2}
                  .validate();
          }) == "halt_index");
    // a final layer that can leave [0, 1] on saturated inputs is rejected
    CHECK(thrown_name([&] {
              RnnSpec{t,
                      FeedForwardNet({linear_layer(
                          {{"2", "0", "0", "0"}, {"0", "0", "0", "0"}}, {"0", "0"})}),
                      0}
                  .validate();
          }) == "cell_output_range");
    CHECK(thrown_name([&] {
              RnnSpec{t,
                      FeedForwardNet({linear_layer(
                          {{"0", "0", "0", "0"}, {"0", "0", "0", "0"}}, {"-1", "0"})}),
                      0}
                  .validate();
          }) == "cell_output_range");
}

TEST_CASE("input token screening") {
    const EmbeddingTable t = ab_table(2);
    CHECK(thrown_name([&] { check_input_tokens(t, {"a", "$"}); }) == "reserved_token");
    CHECK(thrown_name([&] { check_input_tokens(t, {"⊥"}); }) == "reserved_token");
    CHECK(thrown_name([&] { check_input_tokens(t, {"z"}); }) == "unknown_token");
    CHECK_NOTHROW(check_input_tokens(t, {"a", "b", "a"}));
    CHECK_NOTHROW(check_input_tokens(t, {}));
}

TEST_CASE("parity machine follows the exclusive-or truth table") {
    const RnnSpec parity = load_rnn(corpus_path("parity.rnn"));
    const RVector zero = parity.embedding.embed("0");
    const RVector one = parity.embedding.embed("1");
    const RVector end = parity.embedding.embed("$");
    // (previous parity, consumed bit) -> next parity; halt only fires on $
    CHECK(rnn_step(parity, vec({"0", "0"}), zero) == vec({"0", "0"}));
    CHECK(rnn_step(parity, vec({"0", "0"}), one) == vec({"1", "0"}));
    CHECK(rnn_step(parity, vec({"1", "0"}), zero) == vec({"1", "0"}));
    CHECK(rnn_step(parity, vec({"1", "0"}), one) == vec({"0", "0"}));
    // the end marker preserves parity and raises the halt coordinate
    CHECK(rnn_step(parity, vec({"0", "0"}), end) == vec({"0", "1"}));
    CHECK(rnn_step(parity, vec({"1", "0"}), end) == vec({"1", "1"}));
}

TEST_CASE("parity run consumes its input then halts on the end marker") {
    const RnnSpec parity = load_rnn(corpus_path("parity.rnn"));
    const RnnTrace trace = rnn_run(parity, {"1", "1", "0", "1"}, 100);
    REQUIRE(trace.halted);
    CHECK(trace.halt_step == 5);
    CHECK(trace.steps.size() == 5);
    CHECK(trace.steps.back().h == vec({"1", "1"}));
    CHECK(trace.steps[0].h == vec({"1", "0"}));
    CHECK(trace.steps[1].h == vec({"0", "0"}));
    CHECK(trace.steps[2].h == vec({"0", "0"}));
    CHECK(trace.steps[3].h == vec({"1", "0"}));
    // the x consumed at step 5 is the end marker
    CHECK(trace.steps[4].x == vec({"1", "1"}));
    CHECK_FALSE(trace.budget_exhausted());

    const RnnTrace empty = rnn_run(parity, {}, 100);
    REQUIRE(empty.halted);
    CHECK(empty.halt_step == 1);
    CHECK(empty.steps[0].h == vec({"0", "1"}));
}

TEST_CASE("immediate halter stops at step one regardless of input") {
    const RnnSpec halter = load_rnn(corpus_path("halter.rnn"));
    for (const auto& inputs :
         std::vector<std::vector<std::string>>{{}, {"a"}, {"a", "b", "a", "b"}}) {
        const RnnTrace trace = rnn_run(halter, inputs, 10);
        REQUIRE(trace.halted);
        CHECK(trace.halt_step == 1);
        CHECK(trace.steps[0].h == vec({"0", "1"}));
    }
}

TEST_CASE("letter counter tracks the count of a modulo three") {
    const RnnSpec mod3 = load_rnn(corpus_path("mod3.rnn"));
    struct Case {
        std::vector<std::string> inputs;
        const char* c1;
        const char* c2;
    };
    for (const auto& c : std::vector<Case>{{{}, "0", "0"},
                                           {{"a"}, "1", "0"},
                                           {{"a", "a"}, "0", "1"},
                                           {{"a", "a", "a"}, "0", "0"},
                                           {{"b", "a", "b", "a"}, "0", "1"},
                                           {{"a", "b", "a", "b", "a", "a"}, "1", "0"}}) {
        const RnnTrace trace = rnn_run(mod3, c.inputs, 100);
        REQUIRE(trace.halted);
        CHECK(trace.halt_step == c.inputs.size() + 1);
        CHECK(trace.steps.back().h == vec({c.c1, c.c2, "1"}));
    }
}

TEST_CASE("latch machine remembers the last input token") {
    const RnnSpec latch = load_rnn(corpus_path("copylast.rnn"));
    struct Case {
        std::vector<std::string> inputs;
        const char* ma;
        const char* mb;
    };
    for (const auto& c : std::vector<Case>{{{}, "0", "0"},
                                           {{"a"}, "1", "0"},
                                           {{"b"}, "0", "1"},
                                           {{"a", "b", "b", "a"}, "1", "0"},
                                           {{"a", "a", "b"}, "0", "1"}}) {
        const RnnTrace trace = rnn_run(latch, c.inputs, 100);
        REQUIRE(trace.halted);
        CHECK(trace.halt_step == c.inputs.size() + 1);
        CHECK(trace.steps.back().h == vec({c.ma, c.mb, "1"}));
    }
}

TEST_CASE("the step budget caps non-halting runs") {
    const RnnSpec spec = never_halting();
    spec.validate();
    const RnnTrace trace = rnn_run(spec, {"a", "a"}, 7);
    CHECK_FALSE(trace.halted);
    CHECK(trace.budget_exhausted());
    CHECK(trace.steps.size() == 7);
    // steps 3.. consume the end-marker padding
    CHECK(trace.steps[2].x == vec({"1"}));
    CHECK(trace.steps[6].x == vec({"1"}));
    CHECK(trace.steps[6].h == vec({"0"}));
}

TEST_CASE("rnn specs survive a serialization round trip") {
    const RnnSpec parity = load_rnn(corpus_path("parity.rnn"));
    const std::string text = rnn_to_text(parity);
    const RnnSpec again = rnn_from_text(text);
    CHECK(rnn_to_text(again) == text); // serialization is a fixed point
    const RnnTrace a = rnn_run(parity, {"1", "0", "1"}, 50);
    const RnnTrace b = rnn_run(again, {"1", "0", "1"}, 50);
    REQUIRE(a.halted);
    REQUIRE(b.halted);
    CHECK(a.halt_step == b.halt_step);
    for (size_t i = 0; i < a.steps.size(); ++i) {
        CHECK(a.steps[i].h == b.steps[i].h);
        CHECK(a.steps[i].x == b.steps[i].x);
    }
}
