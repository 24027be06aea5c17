#include "unroll/io.hpp"

#include "unroll/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace unroll {

namespace {

using nlohmann::json;

json to_json(const Rational& r) {
    return r.str();
}

Rational rational_from(const json& j, const std::string& where) {
    if (j.is_number_integer())
        return Rational(j.get<long>());
    if (!j.is_string())
        throw ValidationError("bad_rational", where + ": expected \"p/q\" text");
    return Rational::from_string(j.get<std::string>());
}

json to_json(const RVector& v) {
    json a = json::array();
    for (size_t i = 0; i < v.size(); ++i)
        a.push_back(to_json(v[i]));
    return a;
}

RVector vector_from(const json& j, const std::string& where) {
    if (!j.is_array())
        throw ValidationError("bad_format", where + ": expected an array");
    std::vector<Rational> e;
    e.reserve(j.size());
    for (const auto& x : j)
        e.push_back(rational_from(x, where));
    return RVector(std::move(e));
}

json to_json(const RMatrix& m) {
    json rows = json::array();
    for (size_t r = 0; r < m.rows(); ++r)
        rows.push_back(to_json(m.row(r)));
    return rows;
}

RMatrix matrix_from(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        throw ValidationError("bad_format", where + ": expected a non-empty array of rows");
    const size_t rows = j.size();
    const size_t cols = j[0].is_array() ? j[0].size() : 0;
    RMatrix m(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        const RVector row = vector_from(j[r], where);
        if (row.size() != cols)
            throw ValidationError("bad_format", where + ": ragged rows");
        for (size_t c = 0; c < cols; ++c)
            m.at(r, c) = row[c];
    }
    return m;
}

json to_json(const FeedForwardNet& net) {
    json layers = json::array();
    for (const auto& layer : net.layers())
        layers.push_back(
            {{"weights", to_json(layer.weights)},
             {"biases", to_json(layer.biases)},
             {"activation",
              layer.activation == Activation::SaturatedLinear ? "satlin" : "identity"}});
    json j{{"layers", layers}};
    if (!net.tag().empty())
        j["tag"] = net.tag();
    return j;
}

FeedForwardNet net_from(const json& j, const std::string& where) {
    if (!j.contains("layers"))
        throw ValidationError("bad_format", where + ": net needs a \"layers\" array");
    std::vector<FfnLayer> layers;
    for (const auto& lj : j.at("layers")) {
        const std::string act = lj.at("activation").get<std::string>();
        if (act != "satlin" && act != "identity")
            throw ValidationError("bad_format", where + ": unknown activation '" + act + "'");
        layers.push_back(FfnLayer{matrix_from(lj.at("weights"), where + " weights"),
                                  vector_from(lj.at("biases"), where + " biases"),
                                  act == "satlin" ? Activation::SaturatedLinear
                                                  : Activation::Identity});
    }
    return FeedForwardNet(std::move(layers), j.value("tag", ""));
}

EmbeddingTable embedding_from(const json& j) {
    const size_t d = j.at("d_embed").get<size_t>();
    std::vector<std::string> vocabulary =
        j.at("vocabulary").get<std::vector<std::string>>();
    std::map<std::string, RVector> vectors;
    for (const auto& [token, vec] : j.at("embeddings").items())
        vectors.emplace(token, vector_from(vec, "embedding of '" + token + "'"));
    return EmbeddingTable(d, std::move(vocabulary), std::move(vectors));
}

void embedding_to(json& j, const EmbeddingTable& table) {
    j["d_embed"] = table.d_embed();
    j["vocabulary"] = table.vocabulary();
    json em = json::object();
    for (const auto& token : table.vocabulary())
        em[token] = to_json(table.embed(token));
    j["embeddings"] = em;
}

json parse_text(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ValidationError("bad_format", what + ": malformed JSON");
    return j;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("io", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        throw ValidationError("io", "cannot write '" + path + "'");
    out << text;
}

json state_to_json(const StateVector& sv) {
    return to_json(sv.data);
}

} // namespace

std::string rnn_to_text(const RnnSpec& spec) {
    json j;
    embedding_to(j, spec.embedding);
    j["cell"] = to_json(spec.cell);
    j["halt_index"] = spec.halt_index;
    return j.dump(2) + "\n";
}

RnnSpec rnn_from_text(const std::string& text) {
    const json j = parse_text(text, "rnn spec");
    RnnSpec spec{embedding_from(j), net_from(j.at("cell"), "cell"),
                 j.at("halt_index").get<size_t>()};
    spec.validate();
    return spec;
}

RnnSpec load_rnn(const std::string& path) {
    return rnn_from_text(slurp(path));
}

void save_rnn(const RnnSpec& spec, const std::string& path) {
    spit(path, rnn_to_text(spec));
}

std::string model_to_text(const TransformerModel& model) {
    json j;
    j["layout"] = {{"d_embed", model.layout.d_embed()},
                   {"pad_width", model.layout.pad_width()}};
    embedding_to(j, model.embedding);
    j["halt_index"] = model.halt_index;
    json layers = json::array();
    for (const auto& layer : model.layers)
        layers.push_back({{"head",
                           {{"q_weight", to_json(layer.head.q_weight)},
                            {"q_bias", to_json(layer.head.q_bias)},
                            {"k_weight", to_json(layer.head.k_weight)},
                            {"k_bias", to_json(layer.head.k_bias)},
                            {"v_weight", to_json(layer.head.v_weight)}}},
                          {"conn", to_json(layer.conn.w)},
                          {"ffn", to_json(layer.ffn)}});
    j["layers"] = layers;
    return j.dump(2) + "\n";
}

TransformerModel model_from_text(const std::string& text) {
    const json j = parse_text(text, "model");
    const auto& lj = j.at("layout");
    const LayoutConfig layout = LayoutConfig::with_pad(lj.at("d_embed").get<size_t>(),
                                                       lj.at("pad_width").get<size_t>());
    std::vector<DecoderLayer> layers;
    for (const auto& dj : j.at("layers")) {
        const auto& hj = dj.at("head");
        layers.push_back(
            DecoderLayer{AttentionHead{matrix_from(hj.at("q_weight"), "q_weight"),
                                       vector_from(hj.at("q_bias"), "q_bias"),
                                       matrix_from(hj.at("k_weight"), "k_weight"),
                                       vector_from(hj.at("k_bias"), "k_bias"),
                                       matrix_from(hj.at("v_weight"), "v_weight")},
                         AgglomerationMap{matrix_from(dj.at("conn"), "conn")},
                         net_from(dj.at("ffn"), "ffn")});
    }
    TransformerModel model{layout, embedding_from(j), std::move(layers),
                           j.at("halt_index").get<size_t>()};
    model.validate();
    return model;
}

TransformerModel load_model(const std::string& path) {
    return model_from_text(slurp(path));
}

void save_model(const TransformerModel& model, const std::string& path) {
    spit(path, model_to_text(model));
}

void write_run_trace(std::ostream& os, const LayoutConfig& layout, size_t prompt_len,
                     const RunResult& run) {
    os << json{{"kind", "run_trace"},
               {"d_embed", layout.d_embed()},
               {"pad_width", layout.pad_width()},
               {"prompt_len", prompt_len},
               {"halted", run.halted}}
              .dump()
       << "\n";
    for (const auto& rec : run.trace) {
        json layers = json::array();
        for (const auto& lt : rec.layers)
            layers.push_back({{"scores", to_json(lt.scores)},
                              {"weights", to_json(lt.weights)},
                              {"selected", lt.selected},
                              {"r", state_to_json(lt.r)}});
        os << json{{"step", rec.step}, {"layers", layers}, {"z", state_to_json(rec.z)}}.dump()
           << "\n";
    }
}

void write_rnn_trace(std::ostream& os, const RnnTrace& trace) {
    os << json{{"kind", "rnn_trace"},
               {"halted", trace.halted},
               {"halt_step", trace.halt_step}}
              .dump()
       << "\n";
    size_t step = 0;
    for (const auto& s : trace.steps)
        os << json{{"step", ++step}, {"x", to_json(s.x)}, {"h", to_json(s.h)}}.dump() << "\n";
}

TraceFile read_run_trace(std::istream& is) {
    std::string line;
    if (!std::getline(is, line))
        throw ValidationError("bad_format", "trace: empty file");
    const json header = parse_text(line, "trace header");
    if (header.value("kind", "") != "run_trace")
        throw ValidationError("bad_format", "trace: header kind must be \"run_trace\"");
    TraceFile file;
    file.layout = LayoutConfig::with_pad(header.at("d_embed").get<size_t>(),
                                         header.at("pad_width").get<size_t>());
    file.prompt_len = header.at("prompt_len").get<size_t>();
    file.halted = header.value("halted", false);
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const json j = parse_text(line, "trace record");
        TraceRecord rec;
        rec.step = j.at("step").get<size_t>();
        for (const auto& lj : j.at("layers")) {
            LayerTrace lt;
            lt.scores = vector_from(lj.at("scores"), "trace scores");
            lt.weights = vector_from(lj.at("weights"), "trace weights");
            lt.selected = lj.at("selected").get<std::vector<size_t>>();
            lt.r = StateVector{vector_from(lj.at("r"), "trace r")};
            rec.layers.push_back(std::move(lt));
        }
        rec.z = StateVector{vector_from(j.at("z"), "trace z")};
        file.records.push_back(std::move(rec));
    }
    return file;
}

TraceFile load_run_trace(const std::string& path) {
    std::istringstream is(slurp(path));
    return read_run_trace(is);
}

std::string report_to_text(const EquivalenceReport& report) {
    json violations = json::array();
    for (const auto& v : report.violations)
        violations.push_back({{"condition", v.condition},
                              {"step", v.step},
                              {"channel", v.channel},
                              {"detail", v.detail}});
    return json{{"pass", report.pass()},
                {"input_match", report.input_match},
                {"hidden_match", report.hidden_match},
                {"halt_match", report.halt_match},
                {"one_hot", report.one_hot},
                {"steps_compared", report.steps_compared},
                {"violations", violations}}
        .dump(2);
}

} // namespace unroll
