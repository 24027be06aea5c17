#include "unroll/bmachine.hpp"
#include "unroll/compiler.hpp"
#include "unroll/errors.hpp"
#include "unroll/io.hpp"
#include "unroll/rnn.hpp"
#include "unroll/transformer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

namespace {

using namespace unroll;

// Splits a command-line string into one token per UTF-8 code point, so that
// multi-byte vocabulary symbols survive tokenization.
std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    for (size_t i = 0; i < text.size();) {
        size_t len = 1;
        const auto byte = static_cast<unsigned char>(text[i]);
        if ((byte & 0xE0u) == 0xC0u)
            len = 2;
        else if ((byte & 0xF0u) == 0xE0u)
            len = 3;
        else if ((byte & 0xF8u) == 0xF0u)
            len = 4;
        len = std::min(len, text.size() - i);
        tokens.push_back(text.substr(i, len));
        i += len;
    }
    return tokens;
}

size_t default_max_steps() {
    if (const char* env = std::getenv("UNROLL_MAX_STEPS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0' && v > 0)
            return static_cast<size_t>(v);
    }
    return 1000;
}

void maybe_write_trace(const std::string& path,
                       const std::function<void(std::ostream&)>& writer) {
    if (path.empty())
        return;
    std::ofstream out(path);
    if (!out)
        throw ValidationError("io", "cannot write '" + path + "'");
    writer(out);
}

int cmd_compile(const std::string& rnn_path, const std::string& out_path,
                const std::string& epsilon_text) {
    const RnnSpec rnn = load_rnn(rnn_path);
    const Rational epsilon = Rational::from_string(epsilon_text);
    const TransformerModel model = compile(rnn, epsilon);
    save_model(model, out_path);
    std::cout << "compiled: d_embed=" << rnn.d_embed() << " d_model=" << model.layout.d_model()
              << " epsilon=" << epsilon.str() << " -> " << out_path << "\n";
    return 0;
}

int cmd_run(const std::string& rnn_path, const std::string& model_path,
            const std::string& input, size_t max_steps, const std::string& trace_path,
            const std::string& mode_name) {
    const std::vector<std::string> tokens = tokenize(input);
    if (!rnn_path.empty()) {
        const RnnSpec rnn = load_rnn(rnn_path);
        const RnnTrace trace = rnn_run(rnn, tokens, max_steps);
        maybe_write_trace(trace_path, [&](std::ostream& os) { write_rnn_trace(os, trace); });
        if (trace.halted)
            std::cout << "halt=" << trace.halt_step;
        else
            std::cout << "halt=none steps=" << trace.steps.size();
        std::cout << " h="
                  << (trace.steps.empty() ? RVector(rnn.d_embed()).str()
                                          : trace.steps.back().h.str())
                  << "\n";
        return 0;
    }
    const TransformerModel model = load_model(model_path);
    const RunMode mode = mode_name == "full" ? RunMode::FullRecompute : RunMode::Incremental;
    const RunResult run = run_autoregressive(model, tokens, max_steps, mode);
    maybe_write_trace(trace_path, [&](std::ostream& os) {
        write_run_trace(os, model.layout, tokens.size() + 2, run);
    });
    if (run.halted)
        std::cout << "halt=" << run.steps;
    else
        std::cout << "halt=none steps=" << run.steps;
    std::cout << " h="
              << (run.response.empty() ? RVector(model.layout.d_embed()).str()
                                       : run.response.back().h_block(model.layout).str())
              << "\n";
    return 0;
}

int cmd_compare(const std::string& rnn_path, const std::string& model_path,
                const std::string& input, size_t max_steps, const std::string& report_path) {
    const RnnSpec rnn = load_rnn(rnn_path);
    const TransformerModel model = load_model(model_path);
    const EquivalenceReport report = verify(rnn, model, tokenize(input), max_steps);
    std::cout << "input: " << (report.input_match ? "PASS" : "FAIL") << "\n"
              << "hidden: " << (report.hidden_match ? "PASS" : "FAIL") << "\n"
              << "halt: " << (report.halt_match ? "PASS" : "FAIL") << "\n"
              << "one-hot: " << (report.one_hot ? "PASS" : "FAIL") << "\n";
    for (const auto& v : report.violations)
        std::cout << "violation[" << v.condition << "] step=" << v.step
                  << " channel=" << v.channel << ": " << v.detail << "\n";
    std::cout << report.summary() << "\n";
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out)
            throw ValidationError("io", "cannot write '" + report_path + "'");
        out << report_to_text(report) << "\n";
    }
    return report.pass() ? 0 : 1;
}

int cmd_bmachine(const std::string& prog_path, const std::string& replay_path,
                 size_t max_steps) {
    if (!replay_path.empty()) {
        const TraceFile file = load_run_trace(replay_path);
        const CausalReplayResult replay =
            causal_replay(file.records, file.layout, file.prompt_len);
        if (replay.ok) {
            const size_t frontier = replay.steps.empty() ? file.prompt_len + 1
                                                         : replay.steps.back().frontier_after;
            std::cout << "causal: OK steps=" << replay.steps.size() << " frontier=" << frontier
                      << "\n";
            return 0;
        }
        std::cout << "causal: VIOLATION step=" << replay.violation_step << ": "
                  << replay.reason << "\n";
        return 1;
    }
    std::ifstream in(prog_path);
    if (!in)
        throw ValidationError("io", "cannot open '" + prog_path + "'");
    const std::string text((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    const BProgram program = BProgram::parse(text);
    const BRunResult run = b_run(program, BTape{}, max_steps);
    std::cout << "halted=" << (run.halted ? "yes" : "no") << " steps=" << run.steps
              << " head=" << run.tape.head << " marked=[";
    bool first = true;
    for (long cell : run.tape.marked) {
        if (!first)
            std::cout << ", ";
        std::cout << cell;
        first = false;
    }
    std::cout << "]\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact-arithmetic recurrent machines, decoder models, and the translator "
                 "between them"};
    app.require_subcommand(1);

    std::string rnn_path, model_path, out_path, input, trace_path, report_path;
    std::string prog_path, replay_path;
    std::string epsilon_text = "1/2";
    std::string mode_name = "incremental";
    size_t max_steps = default_max_steps();

    CLI::App* compile_cmd = app.add_subcommand("compile", "Translate a recurrent machine");
    compile_cmd->add_option("--rnn", rnn_path, "recurrent machine file")->required();
    compile_cmd->add_option("--out", out_path, "output model file")->required();
    compile_cmd->add_option("--epsilon", epsilon_text, "end-marker margin (rational)");

    CLI::App* run_cmd = app.add_subcommand("run", "Run a machine on an input string");
    auto* run_rnn = run_cmd->add_option("--rnn", rnn_path, "recurrent machine file");
    auto* run_model = run_cmd->add_option("--model", model_path, "decoder model file");
    run_rnn->excludes(run_model);
    run_cmd->add_option("--input", input, "input string, one token per character");
    run_cmd->add_option("--max-steps", max_steps, "step budget");
    run_cmd->add_option("--trace", trace_path, "write a JSON-lines trace here");
    run_cmd->add_option("--mode", mode_name, "full | incremental")
        ->check(CLI::IsMember({"full", "incremental"}));

    CLI::App* compare_cmd =
        app.add_subcommand("compare", "Run both machines and check equivalence");
    compare_cmd->add_option("--rnn", rnn_path, "recurrent machine file")->required();
    compare_cmd->add_option("--model", model_path, "decoder model file")->required();
    compare_cmd->add_option("--input", input, "input string, one token per character");
    compare_cmd->add_option("--max-steps", max_steps, "step budget");
    compare_cmd->add_option("--report", report_path, "write the JSON report here");

    CLI::App* bm_cmd = app.add_subcommand("bmachine", "Run a tape program or audit a trace");
    auto* bm_prog = bm_cmd->add_option("--prog", prog_path, "program file");
    auto* bm_replay = bm_cmd->add_option("--replay", replay_path, "trace file to audit");
    bm_prog->excludes(bm_replay);
    bm_cmd->add_option("--max-steps", max_steps, "step budget");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(compile_cmd))
            return cmd_compile(rnn_path, out_path, epsilon_text);
        if (app.got_subcommand(run_cmd)) {
            if (rnn_path.empty() && model_path.empty())
                throw ValidationError("cli", "run needs --rnn or --model");
            return cmd_run(rnn_path, model_path, input, max_steps, trace_path, mode_name);
        }
        if (app.got_subcommand(compare_cmd))
            return cmd_compare(rnn_path, model_path, input, max_steps, report_path);
        if (app.got_subcommand(bm_cmd)) {
            if (prog_path.empty() && replay_path.empty())
                throw ValidationError("cli", "bmachine needs --prog or --replay");
            return cmd_bmachine(prog_path, replay_path, max_steps);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
