#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "unroll/compiler.hpp"
#include "unroll/io.hpp"
#include "unroll/transformer.hpp"

#include <string>
#include <vector>

using namespace unroll;
using namespace unroll::testutil;

namespace {

// The fixed scoring head over the standard layout: Q(y) = (1, -t), K(y) = (i, 1),
// so the inner product is i - t and the score -|i - t| peaks where i == t.
AttentionHead clock_head(const LayoutConfig& layout) {
    AttentionHead head;
    head.q_weight = RMatrix::zeros(2, layout.d_model());
    head.q_weight.at(1, layout.t_index()) = Rational(-1);
    head.q_bias = RVector{Rational(1), Rational(0)};
    head.k_weight = RMatrix::zeros(2, layout.d_model());
    head.k_weight.at(0, layout.i_index()) = Rational(1);
    head.k_bias = RVector{Rational(0), Rational(1)};
    head.v_weight = RMatrix::zeros(layout.d_embed(), layout.d_model());
    for (size_t i = 0; i < layout.d_embed(); ++i)
        head.v_weight.at(i, layout.h_begin() + i) = Rational(1);
    return head;
}

TransformerModel with_inert_second_layer(TransformerModel model) {
    const size_t D = model.layout.d_model();
    AttentionHead head = model.layers[0].head;
    head.v_weight = RMatrix::zeros(model.layout.d_embed(), D);
    model.layers.push_back(
        DecoderLayer{std::move(head),
                     AgglomerationMap{RMatrix::zeros(D, model.layout.d_embed())},
                     FeedForwardNet::affine(RMatrix::zeros(D, D), RVector::zeros(D))});
    return model;
}

void check_same_run(const RunResult& a, const RunResult& b) {
    CHECK(a.halted == b.halted);
    CHECK(a.steps == b.steps);
    REQUIRE(a.trace.size() == b.trace.size());
    for (size_t s = 0; s < a.trace.size(); ++s) {
        CHECK(a.trace[s].step == b.trace[s].step);
        CHECK(a.trace[s].z.data == b.trace[s].z.data);
        REQUIRE(a.trace[s].layers.size() == b.trace[s].layers.size());
        for (size_t l = 0; l < a.trace[s].layers.size(); ++l) {
            CHECK(a.trace[s].layers[l].scores == b.trace[s].layers[l].scores);
            CHECK(a.trace[s].layers[l].weights == b.trace[s].layers[l].weights);
            CHECK(a.trace[s].layers[l].selected == b.trace[s].layers[l].selected);
            CHECK(a.trace[s].layers[l].r.data == b.trace[s].layers[l].r.data);
        }
    }
}

} // namespace

TEST_CASE("layout indices follow the h|x|i|t|stop order") {
    const LayoutConfig l = LayoutConfig::standard(2);
    CHECK(l.d_model() == 7);
    CHECK(l.d_embed() == 2);
    CHECK(l.pad_width() == 2);
    CHECK(l.h_begin() == 0);
    CHECK(l.x_begin() == 2);
    CHECK(l.i_index() == 4);
    CHECK(l.t_index() == 5);
    CHECK(l.stop_index() == 6);

    const LayoutConfig wide = LayoutConfig::with_pad(2, 5);
    CHECK(wide.d_model() == 10);
    CHECK(wide.i_index() == 7);

    // the x-block must at least fit a token embedding
    CHECK(thrown_name([] { LayoutConfig::with_pad(3, 2); }) == "pad_width");
    CHECK(thrown_name([] { LayoutConfig::with_pad(1, 0); }) == "pad_width");
}

TEST_CASE("state vectors expose their blocks through the layout") {
    const LayoutConfig l = LayoutConfig::standard(2);
    const StateVector sv = make_state(l, vec({"1/2", "0"}), vec({"1", "1/4"}), Rational(3),
                                      Rational(1), Rational(0));
    CHECK(sv.data == vec({"1/2", "0", "1", "1/4", "3", "1", "0"}));
    CHECK(sv.h_block(l) == vec({"1/2", "0"}));
    CHECK(sv.x_block(l) == vec({"1", "1/4"}));
    CHECK(sv.i_of(l) == Rational(3));
    CHECK(sv.t_of(l) == Rational(1));
    CHECK(sv.stop_of(l) == Rational(0));
}

TEST_CASE("prompt encoding: tokens, end marker, then the start vector") {
    const RnnSpec halter = load_rnn(corpus_path("halter.rnn"));
    const LayoutConfig l = LayoutConfig::standard(2);
    const auto prompt = encode_prompt(halter.embedding, l, {"a"});
    REQUIRE(prompt.size() == 3);
    CHECK(prompt[0].data == vec({"1/2", "0", "0", "0", "1", "0", "0"}));
    CHECK(prompt[1].data == vec({"1", "1", "0", "0", "2", "0", "0"}));
    CHECK(prompt[2].data == vec({"0", "0", "0", "0", "3", "1", "0"}));

    const auto empty = encode_prompt(halter.embedding, l, {});
    REQUIRE(empty.size() == 2);
    CHECK(empty[0].data == vec({"1", "1", "0", "0", "1", "0", "0"}));
    CHECK(empty[1].data == vec({"0", "0", "0", "0", "2", "1", "0"}));

    CHECK(thrown_name([&] { (void)encode_prompt(halter.embedding, l, {"$"}); }) ==
          "reserved_token");
    CHECK(thrown_name([&] { (void)encode_prompt(halter.embedding, l, {"z"}); }) ==
          "unknown_token");
    CHECK(thrown_name([&] {
              (void)encode_prompt(halter.embedding, LayoutConfig::standard(3), {});
          }) == "embedding_width");
}

TEST_CASE("attention recalls exactly the position matching the clock") {
    const RnnSpec halter = load_rnn(corpus_path("halter.rnn"));
    const LayoutConfig l = LayoutConfig::standard(2);
    const AttentionHead head = clock_head(l);
    const auto prompt = encode_prompt(halter.embedding, l, {"a"});

    const AttendResult res = attend(head, prompt.back(), prompt);
    CHECK(res.scores == vec({"0", "-1", "-2"}));
    CHECK(res.weights == vec({"1", "0", "0"}));
    CHECK(res.selected == std::vector<size_t>{1});
    CHECK(res.value == vec({"1/2", "0"}));

    // a clock of 5 over seven positions picks position 5
    std::vector<StateVector> seq;
    for (long j = 1; j <= 7; ++j)
        seq.push_back(make_state(l, vec({"0", "0"}), vec({"0", "0"}), Rational(j),
                                 Rational(j == 7 ? 5 : 0), Rational(0)));
    const AttendResult five = attend(head, seq.back(), seq);
    CHECK(five.selected == std::vector<size_t>{5});
    CHECK(five.weights[4] == Rational(1));
    CHECK(five.scores == vec({"-4", "-3", "-2", "-1", "0", "-1", "-2"}));

    CHECK(thrown_name([&] { (void)attend(head, prompt.back(), {}); }) == "empty_context");
}

TEST_CASE("tied scores split attention evenly and mix values") {
    const RnnSpec halter = load_rnn(corpus_path("halter.rnn"));
    const LayoutConfig l = LayoutConfig::standard(2);
    AttentionHead head = clock_head(l);
    head.k_weight = RMatrix::zeros(2, l.d_model());
    head.k_bias = RVector::zeros(2); // every key collapses to the origin
    const auto prompt = encode_prompt(halter.embedding, l, {"a"});
    const AttendResult res = attend(head, prompt.back(), prompt);
    CHECK(res.scores == vec({"0", "0", "0"}));
    CHECK(res.weights == vec({"1/3", "1/3", "1/3"}));
    CHECK(res.selected == std::vector<size_t>{1, 2, 3});
    // ([1/2,0] + [1,1] + [0,0]) / 3
    CHECK(res.value == vec({"1/2", "1/3"}));
}

TEST_CASE("layer forward adds the widened value then the residual step network") {
    const RnnSpec halter = load_rnn(corpus_path("halter.rnn"));
    const TransformerModel model = compile(halter, rat("1/2"));
    const auto prompt = encode_prompt(model.embedding, model.layout, {"a"});
    const LayerResult res =
        layer_forward(model.layers[0], model.layout, prompt.back(), prompt);
    CHECK(res.trace.r.data == vec({"0", "0", "1/2", "0", "3", "1", "0"}));
    CHECK(res.trace.selected == std::vector<size_t>{1});
    // z carries the next hidden state, a cleared x-block, advanced counters
    CHECK(res.z.data == vec({"0", "1", "0", "0", "4", "2", "0"}));

    CHECK(thrown_name([&] {
              (void)layer_forward(model.layers[0], model.layout, prompt[0], prompt);
          }) == "query_position");
}

TEST_CASE("autoregression halts when the emitted halt coordinate reaches one") {
    const RnnSpec parity = load_rnn(corpus_path("parity.rnn"));
    const TransformerModel model = compile(parity, rat("1/2"));
    const RunResult run = run_autoregressive(model, {"1", "1"}, 50, RunMode::Incremental);
    REQUIRE(run.halted);
    CHECK(run.steps == 3);
    REQUIRE(run.trace.size() == 3);
    // parity of "11" is 0; the halt flag rides in the second hidden coordinate
    CHECK(run.response.back().h_block(model.layout) == vec({"0", "1"}));
    for (size_t s = 0; s < run.trace.size(); ++s) {
        CHECK(run.trace[s].step == s + 1);
        REQUIRE(run.trace[s].layers.size() == 1);
        // step t recalls exactly position t
        CHECK(run.trace[s].layers[0].selected == std::vector<size_t>{s + 1});
        CHECK(run.trace[s].z.data == run.response[s].data);
        // the emitted position counter extends the sequence by one each step
        CHECK(run.trace[s].z.i_of(model.layout) == Rational(static_cast<long>(5 + s)));
    }
    // the stop flag latches exactly when the end marker is recalled (step k-1)
    CHECK(run.trace[0].z.stop_of(model.layout) == Rational(0));
    CHECK(run.trace[1].z.stop_of(model.layout) == Rational(0));
    CHECK(run.trace[2].z.stop_of(model.layout) == Rational(1));
}

TEST_CASE("step budget exhaustion leaves the run unfinished") {
    const RnnSpec parity = load_rnn(corpus_path("parity.rnn"));
    const TransformerModel model = compile(parity, rat("1/2"));
    const RunResult run =
        run_autoregressive(model, {"1", "1", "0", "1"}, 2, RunMode::FullRecompute);
    CHECK_FALSE(run.halted);
    CHECK(run.budget_exhausted());
    CHECK(run.steps == 2);
    CHECK(run.response.size() == 2);
}

TEST_CASE("full recompute and incremental decoding are bit-identical") {
    for (const char* name : {"parity.rnn", "halter.rnn", "mod3.rnn", "copylast.rnn"}) {
        const RnnSpec rnn = load_rnn(corpus_path(name));
        const TransformerModel model = compile(rnn, rat("1/2"));
        std::vector<std::vector<std::string>> inputs_set;
        if (name == std::string("parity.rnn"))
            inputs_set = {{}, {"1"}, {"1", "0", "1", "1"}};
        else if (name == std::string("halter.rnn"))
            inputs_set = {{}, {"a", "b"}};
        else
            inputs_set = {{}, {"a"}, {"b", "a", "b", "a", "a"}};
        for (const auto& inputs : inputs_set) {
            const RunResult full =
                run_autoregressive(model, inputs, 64, RunMode::FullRecompute);
            const RunResult inc =
                run_autoregressive(model, inputs, 64, RunMode::Incremental);
            check_same_run(full, inc);
        }
    }
}

TEST_CASE("an inert second layer changes nothing") {
    const RnnSpec parity = load_rnn(corpus_path("parity.rnn"));
    const TransformerModel one = compile(parity, rat("1/2"));
    const TransformerModel two = with_inert_second_layer(one);
    two.validate();
    for (const auto& inputs :
         std::vector<std::vector<std::string>>{{}, {"1", "0"}, {"1", "1", "1"}}) {
        for (const RunMode mode : {RunMode::FullRecompute, RunMode::Incremental}) {
            const RunResult a = run_autoregressive(one, inputs, 64, mode);
            const RunResult b = run_autoregressive(two, inputs, 64, mode);
            CHECK(a.halted == b.halted);
            CHECK(a.steps == b.steps);
            REQUIRE(a.response.size() == b.response.size());
            for (size_t s = 0; s < a.response.size(); ++s)
                CHECK(a.response[s].data == b.response[s].data);
            // the second layer's attention is still one-hot at every step
            for (const auto& rec : b.trace) {
                REQUIRE(rec.layers.size() == 2);
                CHECK(rec.layers[1].selected.size() == 1);
            }
        }
    }
    // and the two decoding modes agree on the deeper model too
    check_same_run(run_autoregressive(two, {"1", "0"}, 64, RunMode::FullRecompute),
                   run_autoregressive(two, {"1", "0"}, 64, RunMode::Incremental));
}

TEST_CASE("model validation names each structural defect") {
    const RnnSpec halter = load_rnn(corpus_path("halter.rnn"));
    const TransformerModel good = compile(halter, rat("1/2"));

    TransformerModel bad = good;
    bad.layers.clear();
    CHECK(thrown_name([&] { bad.validate(); }) == "empty_model");

    bad = good;
    bad.layers[0].head.q_weight = RMatrix::zeros(3, good.layout.d_model());
    CHECK(thrown_name([&] { bad.validate(); }) == "head_shape");

    bad = good;
    bad.layers[0].head.v_weight = RMatrix::zeros(1, good.layout.d_model());
    CHECK(thrown_name([&] { bad.validate(); }) == "head_shape");

    bad = good;
    bad.layers[0].conn.w = RMatrix::zeros(3, 2);
    CHECK(thrown_name([&] { bad.validate(); }) == "conn_shape");

    bad = good;
    bad.layers[0].ffn = FeedForwardNet::identity(3);
    CHECK(thrown_name([&] { bad.validate(); }) == "ffn_shape");

    bad = good;
    bad.halt_index = 2;
    CHECK(thrown_name([&] { bad.validate(); }) == "halt_index");
}

TEST_CASE("models survive a serialization round trip") {
    const RnnSpec parity = load_rnn(corpus_path("parity.rnn"));
    const TransformerModel model = compile(parity, rat("1/2"));
    const std::string text = model_to_text(model);
    const TransformerModel again = model_from_text(text);
    CHECK(model_to_text(again) == text);
    check_same_run(run_autoregressive(model, {"1", "0", "1"}, 64, RunMode::Incremental),
                   run_autoregressive(again, {"1", "0", "1"}, 64, RunMode::Incremental));
}
