#pragma once

// File formats: model JSON and DOT, tree JSON, reports, run configuration, synthetic specs, CSV logs.
// Every JSON document carries "format_version".

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "slar/abstraction.hpp"
#include "slar/detail/text.hpp"
#include "slar/error.hpp"
#include "slar/log_model.hpp"
#include "slar/markov.hpp"
#include "slar/property.hpp"
#include "slar/psa.hpp"
#include "slar/pst.hpp"
#include "slar/slar.hpp"
#include "slar/synthetic.hpp"

namespace slar {

using json = nlohmann::json;

inline constexpr int format_version = 1;

namespace detail {

inline void check_document(const json& j, std::string_view kind) {
    if (!j.is_object()) throw FormatError("expected a JSON object");
    if (j.value("format_version", 0) != format_version)
        throw FormatError("unsupported format_version (expected " + std::to_string(format_version) + ")");
    if (j.value("kind", std::string{}) != kind) throw FormatError("expected a document of kind '" + std::string(kind) + "'");
}

template <class T>
T required(const json& j, const char* key) {
    if (!j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("field '") + key + "': " + e.what());
    }
}

inline std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace detail

// ---- model ---------------------------------------------------------------

struct ModelDocument {
    PredicateSet predicates;
    StationaryChain chain;
};

inline json model_to_json(const StationaryChain& chain, const PredicateSet& predicates) {
    json j;
    j["format_version"] = format_version;
    j["kind"] = "psa";
    j["predicates"] = json::array();
    for (const auto& p : predicates.predicates()) j["predicates"].push_back(to_string(p));
    j["alphabet"] = chain.alphabet;
    j["states"] = json::array();
    j["transitions"] = json::array();
    for (std::size_t i = 0; i < chain.size(); ++i) {
        j["states"].push_back({{"id", i}, {"label", chain.states[i].label}});
        for (const auto& t : chain.states[i].out)
            j["transitions"].push_back({{"from", i}, {"symbol", t.symbol}, {"to", t.target}, {"probability", t.probability}});
    }
    return j;
}

inline ModelDocument model_from_json(const json& j) {
    detail::check_document(j, "psa");
    ModelDocument doc;
    std::vector<Predicate> preds;
    for (const auto& s : detail::required<std::vector<std::string>>(j, "predicates")) preds.push_back(parse_predicate(s));
    doc.predicates = PredicateSet(std::move(preds));
    doc.chain.alphabet = detail::required<std::vector<Symbol>>(j, "alphabet");
    const auto states = detail::required<json>(j, "states");
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (detail::required<std::size_t>(states[i], "id") != i) throw FormatError("state ids must be 0..n-1 in order");
        doc.chain.states.push_back({detail::required<Word>(states[i], "label"), {}});
    }
    for (const auto& t : detail::required<json>(j, "transitions")) {
        const auto from = detail::required<std::size_t>(t, "from");
        if (from >= doc.chain.size()) throw FormatError("transition source out of range");
        doc.chain.states[from].out.push_back({detail::required<Symbol>(t, "symbol"), detail::required<std::size_t>(t, "to"),
                                              detail::required<double>(t, "probability")});
    }
    for (auto& s : doc.chain.states)
        std::sort(s.out.begin(), s.out.end(), [](const Transition& a, const Transition& b) { return a.symbol < b.symbol; });
    try {
        doc.chain.validate(1e-9);
    } catch (const Error& e) {
        throw FormatError(std::string("invalid chain: ") + e.what());
    }
    return doc;
}

/// Every state with its suffix label, every transition with its probability to 6 decimals.
inline std::string chain_to_dot(const StationaryChain& chain) {
    std::ostringstream out;
    out << "digraph psa {\n  rankdir=LR;\n";
    for (std::size_t i = 0; i < chain.size(); ++i)
        out << "  s" << i << " [label=\"" << label_string(chain.states[i].label) << "\"];\n";
    for (std::size_t i = 0; i < chain.size(); ++i)
        for (const auto& t : chain.states[i].out)
            out << "  s" << i << " -> s" << t.target << " [label=\"" << detail::fixed6(t.probability) << "\"];\n";
    out << "}\n";
    return out.str();
}

enum class ModelFormat { json, dot };

inline std::string export_model(const StationaryChain& chain, const PredicateSet& predicates, ModelFormat format) {
    return format == ModelFormat::json ? model_to_json(chain, predicates).dump(2) + "\n" : chain_to_dot(chain);
}

inline ModelDocument import_model(std::string_view text) {
    try {
        return model_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw FormatError(std::string("model JSON: ") + e.what());
    }
}

// ---- tree ----------------------------------------------------------------

inline json pst_to_json(const PST& pst) {
    json j;
    j["format_version"] = format_version;
    j["kind"] = "pst";
    j["alphabet"] = pst.alphabet;
    j["frequency_threshold"] = pst.options.frequency_threshold;
    j["divergence_threshold"] = pst.options.divergence_threshold;
    j["max_depth"] = pst.options.max_depth;
    j["nodes"] = json::array();
    for (const auto& [w, dist] : pst.nodes) {
        json next = json::array();
        for (const auto& [s, p] : dist) next.push_back({{"symbol", s}, {"probability", p}});
        j["nodes"].push_back({{"word", w}, {"next", next}});
    }
    return j;
}

inline PST pst_from_json(const json& j) {
    detail::check_document(j, "pst");
    PST pst;
    pst.alphabet = detail::required<std::vector<Symbol>>(j, "alphabet");
    pst.options.frequency_threshold = detail::required<double>(j, "frequency_threshold");
    pst.options.divergence_threshold = detail::required<double>(j, "divergence_threshold");
    pst.options.max_depth = detail::required<std::size_t>(j, "max_depth");
    for (const auto& n : detail::required<json>(j, "nodes")) {
        NextDistribution d;
        for (const auto& e : detail::required<json>(n, "next"))
            d[detail::required<Symbol>(e, "symbol")] = detail::required<double>(e, "probability");
        pst.nodes[detail::required<Word>(n, "word")] = std::move(d);
    }
    return pst;
}

// ---- reports -------------------------------------------------------------

inline json report_to_json(const VerificationReport& r) {
    json j;
    j["format_version"] = format_version;
    j["kind"] = "report";
    j["property"] = to_string(r.property);
    j["outcome"] = std::string(to_string(r.outcome));
    j["reason"] = r.reason;
    j["predicates"] = json::array();
    for (const auto& p : r.predicates.predicates()) j["predicates"].push_back(to_string(p));
    j["p_train"] = r.p_train;
    j["threshold"] = r.property.threshold;
    j["p_learn"] = r.p_learn;
    j["p_test"] = r.p_test ? json(*r.p_test) : json(nullptr);
    j["test_length"] = r.test_length;
    j["test_unsafe"] = r.test_unsafe;
    j["confidence"] = r.confidence ? json(*r.confidence) : json(nullptr);
    j["model_size"] = r.model_size;
    j["epsilon"] = r.epsilon;
    j["seconds"] = r.seconds;
    j["diagnostics"] = {{"zero_support", r.zero_support},
                        {"reducible_fallback", r.reducible_fallback},
                        {"desyncs", r.desyncs},
                        {"warnings", r.warnings}};
    j["rounds"] = json::array();
    for (const auto& rr : r.rounds) {
        json e{{"round", rr.round},
               {"predicates", rr.predicate_count},
               {"epsilon", rr.epsilon},
               {"epsilon_retried", rr.epsilon_retried},
               {"model_size", rr.model_size},
               {"p_learn", rr.p_learn},
               {"p_test", rr.p_test ? json(*rr.p_test) : json(nullptr)},
               {"reducible_fallback", rr.reducible_fallback},
               {"desyncs", rr.desyncs},
               {"spurious_edges", rr.spurious_edges}};
        if (rr.refined_edge)
            e["refined_edge"] = {{"from", rr.refined_edge->from}, {"to", rr.refined_edge->to},
                                 {"deviation", rr.refined_edge->deviation}};
        if (rr.added_predicate) e["added_predicate"] = *rr.added_predicate;
        j["rounds"].push_back(std::move(e));
    }
    j["model"] = r.chain ? model_to_json(*r.chain, r.predicates) : json(nullptr);
    return j;
}

inline std::string_view result_code(std::string_view outcome) {
    if (outcome == "verified") return "SUC";
    if (outcome == "violated") return "VIO";
    return "FAL";
}

inline std::string report_table_header() {
    return "| Sensor | Property | P_train | r | P_learn | P_test | Result | Model Size | eps | Time (s) |";
}

/// One row in the layout of the published results table.
inline std::string report_table_row(const json& j) {
    detail::check_document(j, "report");
    const auto prop = parse_property(detail::required<std::string>(j, "property"));
    const auto num = [](const json& v, int prec) {
        if (v.is_null()) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.*f", prec, v.get<double>());
        return std::string(buf);
    };
    std::ostringstream out;
    out << "| " << prop.variable << " | " << to_string(prop.sense) << ' ' << detail::format_double(prop.bound) << " | "
        << num(j.at("p_train"), 4) << " | " << num(j.at("threshold"), 4) << " | " << num(j.at("p_learn"), 4) << " | "
        << num(j.at("p_test"), 4) << " | " << result_code(j.at("outcome").get<std::string>()) << " | "
        << j.at("model_size").get<std::size_t>() << " | " << detail::format_double(j.at("epsilon").get<double>())
        << " | " << num(j.at("seconds"), 2) << " |";
    return out.str();
}

inline std::string report_table_row(const VerificationReport& r) { return report_table_row(report_to_json(r)); }

// ---- run configuration ---------------------------------------------------

/// Schema fields as written in the config; `variables` empty means infer from the log header.
struct SchemaConfig {
    std::vector<Variable> variables;
    std::optional<std::string> timestamp_column;
    double sample_period = 1.0;

    ObservationSchema resolve(std::string_view log_text) const {
        if (variables.empty()) return infer_schema(log_text, timestamp_column, sample_period);
        return ObservationSchema(variables, timestamp_column, sample_period);
    }
};

struct RunConfig {
    SchemaConfig schema;
    SlarConfig slar;
};

inline RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("config must be a JSON object");
    if (j.value("format_version", format_version) != format_version) throw FormatError("unsupported format_version");
    RunConfig c;
    try {
        if (j.contains("schema")) {
            const auto& s = j.at("schema");
            if (s.contains("timestamp") && !s.at("timestamp").is_null())
                c.schema.timestamp_column = s.at("timestamp").get<std::string>();
            c.schema.sample_period = s.value("sample_period", 1.0);
            for (const auto& v : s.value("variables", json::array())) {
                if (v.is_string()) {
                    c.schema.variables.push_back({v.get<std::string>(), VariableKind::numeric});
                } else {
                    const auto kind = v.value("kind", std::string("numeric"));
                    if (kind != "numeric" && kind != "discrete") throw FormatError("variable kind must be numeric or discrete");
                    c.schema.variables.push_back(
                        {v.at("name").get<std::string>(), kind == "discrete" ? VariableKind::discrete : VariableKind::numeric});
                }
            }
        }
        auto& s = c.slar;
        s.epsilon = j.value("epsilon", s.epsilon);
        if (j.contains("divergence_epsilon") && !j.at("divergence_epsilon").is_null())
            s.divergence_epsilon = j.at("divergence_epsilon").get<double>();
        s.max_depth = j.value("max_depth", s.max_depth);
        s.stride = j.value("stride", s.stride);
        s.epsilon_retry_factor = j.value("epsilon_retry_factor", s.epsilon_retry_factor);
        s.svm_epochs = j.value("svm_epochs", s.svm_epochs);
        s.svm_c = j.value("svm_c", s.svm_c);
        s.max_rounds = j.value("max_rounds", s.max_rounds);
        s.seed = j.value("seed", s.seed);
        const auto mode = j.value("confidence", std::string("tail"));
        if (mode != "tail" && mode != "point_mass") throw FormatError("confidence must be tail or point_mass");
        s.confidence = mode == "tail" ? ConfidenceMode::tail : ConfidenceMode::point_mass;
        if (j.contains("solver")) {
            const auto& so = j.at("solver");
            s.solver.dense_limit = so.value("dense_limit", s.solver.dense_limit);
            s.solver.power_tolerance = so.value("power_tolerance", s.solver.power_tolerance);
            s.solver.power_max_iterations = so.value("power_max_iterations", s.solver.power_max_iterations);
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    c.slar.validate();
    return c;
}

// ---- synthetic -----------------------------------------------------------

inline SyntheticSpec synthetic_spec_from_json(const json& j) {
    detail::check_document(j, "synthetic");
    SyntheticSpec spec;
    try {
        spec.variables = detail::required<std::vector<std::string>>(j, "variables");
        spec.transitions = detail::required<Matrix>(j, "transitions");
        spec.length = detail::required<std::size_t>(j, "length");
        spec.seed = j.value("seed", std::uint64_t{0});
        spec.sample_period = j.value("sample_period", 1.0);
        for (const auto& row : detail::required<json>(j, "emissions")) {
            std::vector<Emission> es;
            for (const auto& e : row) {
                const auto law = detail::required<std::string>(e, "law");
                if (law == "uniform")
                    es.push_back(Emission::uniform(detail::required<double>(e, "low"), detail::required<double>(e, "high")));
                else if (law == "normal")
                    es.push_back(Emission::normal(detail::required<double>(e, "mean"), detail::required<double>(e, "sd")));
                else
                    throw InvalidSpec("emission law must be uniform or normal");
            }
            spec.emissions.push_back(std::move(es));
        }
    } catch (const json::exception& e) {
        throw InvalidSpec(std::string("synthetic spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

inline void write_log_csv(std::ostream& out, const SystemLog& log, bool with_timestamp = true) {
    if (with_timestamp) out << "t,";
    const auto& vars = log.schema().variables();
    for (std::size_t i = 0; i < vars.size(); ++i) out << (i ? "," : "") << vars[i].name;
    out << '\n';
    for (const auto& o : log.observations()) {
        if (with_timestamp) out << detail::format_double(o.timestamp) << ',';
        for (std::size_t i = 0; i < o.values.size(); ++i) out << (i ? "," : "") << detail::format_double(o.values[i]);
        out << '\n';
    }
}

}  // namespace slar
