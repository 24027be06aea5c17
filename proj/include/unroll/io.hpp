#pragma once

#include "unroll/bmachine.hpp"
#include "unroll/compiler.hpp"
#include "unroll/rnn.hpp"
#include "unroll/transformer.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace unroll {

// All artifacts are JSON with every number carried as "p/q" text, so files
// round-trip exactly. Traces are JSON-lines: one header object, then one
// object per step.

RnnSpec load_rnn(const std::string& path);
RnnSpec rnn_from_text(const std::string& text);
void save_rnn(const RnnSpec& spec, const std::string& path);
std::string rnn_to_text(const RnnSpec& spec);

TransformerModel load_model(const std::string& path);
TransformerModel model_from_text(const std::string& text);
void save_model(const TransformerModel& model, const std::string& path);
std::string model_to_text(const TransformerModel& model);

void write_run_trace(std::ostream& os, const LayoutConfig& layout, size_t prompt_len,
                     const RunResult& run);
void write_rnn_trace(std::ostream& os, const RnnTrace& trace);

struct TraceFile {
    LayoutConfig layout = LayoutConfig::standard(1);
    size_t prompt_len = 0;
    bool halted = false;
    std::vector<TraceRecord> records;
};

TraceFile read_run_trace(std::istream& is);
TraceFile load_run_trace(const std::string& path);

std::string report_to_text(const EquivalenceReport& report); // JSON object

} // namespace unroll
