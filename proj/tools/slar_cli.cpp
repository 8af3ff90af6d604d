// Command-line front end: learn, verify, slar, synth, report.
//
// Exit status: 0 verified, 1 violated, 2 inconclusive, 3 operational error.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "slar/all.hpp"

namespace {

constexpr int exit_error = 3;

int exit_code(slar::Outcome o) {
    switch (o) {
        case slar::Outcome::verified: return 0;
        case slar::Outcome::violated: return 1;
        case slar::Outcome::inconclusive: return 2;
    }
    return exit_error;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw slar::Error("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw slar::Error("cannot write '" + path + "'");
    out << text;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!slar::detail::trim(item).empty()) out.emplace_back(slar::detail::trim(item));
    return out;
}

/// Config file (optional) overridden by individual flags.
struct CommonOptions {
    std::string config_path;
    std::optional<std::string> timestamp;
    std::optional<double> period;
    std::string variables;
    std::optional<double> epsilon;
    std::optional<std::size_t> depth;
    std::optional<std::size_t> stride;
    std::optional<std::size_t> max_rounds;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* app, bool learning) {
        app->add_option("-c,--config", config_path, "JSON run configuration");
        app->add_option("--timestamp", timestamp, "timestamp column name");
        app->add_option("--period", period, "sample period in seconds");
        app->add_option("--variables", variables, "comma-separated variable columns (default: all numeric)");
        if (!learning) return;
        app->add_option("--epsilon", epsilon, "learning threshold");
        app->add_option("--depth", depth, "maximum tree depth");
        app->add_option("--stride", stride, "downsampling stride");
        app->add_option("--max-rounds", max_rounds, "refinement round cap");
        app->add_option("--seed", seed, "classifier seed");
    }

    slar::RunConfig resolve() const {
        slar::RunConfig c = config_path.empty() ? slar::RunConfig{} : slar::config_from_json(slar::json::parse(read_file(config_path)));
        if (timestamp) c.schema.timestamp_column = *timestamp;
        if (period) c.schema.sample_period = *period;
        if (!variables.empty()) {
            c.schema.variables.clear();
            for (auto& v : split_list(variables)) c.schema.variables.push_back({v, slar::VariableKind::numeric});
        }
        if (epsilon) c.slar.epsilon = *epsilon;
        if (depth) c.slar.max_depth = *depth;
        if (stride) c.slar.stride = *stride;
        if (max_rounds) c.slar.max_rounds = *max_rounds;
        if (seed) c.slar.seed = *seed;
        c.slar.validate();
        return c;
    }
};

slar::SystemLog load_log(const std::string& path, const slar::SchemaConfig& schema) {
    const auto text = read_file(path);
    return slar::parse_log(text, schema.resolve(text));
}

int cmd_learn(const CommonOptions& common, const std::string& train_path, const std::vector<std::string>& predicate_texts,
              const std::string& property_text, const std::string& format, const std::string& out_path,
              const std::string& tree_path) {
    const auto cfg = common.resolve();
    auto log = load_log(train_path, cfg.schema);
    if (cfg.slar.stride > 1) log = slar::downsample(log, cfg.slar.stride);

    slar::PredicateSet predicates;
    if (!property_text.empty()) predicates.add(slar::parse_property(property_text).predicate());
    for (const auto& p : predicate_texts) predicates.add(slar::parse_predicate(p));
    if (predicates.empty()) throw slar::Error("learn needs --property or at least one --predicate");

    const auto model = slar::learn_model(log, predicates, 0, cfg.slar);
    if (!tree_path.empty()) write_output(tree_path, slar::pst_to_json(model.tree).dump(2) + "\n");
    write_output(out_path, slar::export_model(model.chain, predicates,
                                              format == "dot" ? slar::ModelFormat::dot : slar::ModelFormat::json));
    std::cerr << "learned " << model.chain.size() << " states (epsilon " << model.epsilon
              << (model.epsilon_retried ? ", retried" : "") << ")\n";
    return 0;
}

int cmd_verify(const std::string& model_path, const std::string& property_text) {
    const auto doc = slar::import_model(read_file(model_path));
    const auto prop = slar::parse_property(property_text);
    const auto pu = slar::unsafe_probability(doc.chain, prop, doc.predicates);
    const bool ok = pu <= prop.threshold;
    std::cout << "P_u = " << slar::detail::format_double(pu) << " (r = " << slar::detail::format_double(prop.threshold)
              << "): " << (ok ? "verified" : "violated") << '\n';
    return ok ? 0 : 1;
}

int cmd_slar(const CommonOptions& common, const std::string& train_path, const std::string& test_path,
             const std::string& log_path, double split_at, const std::string& property_text,
             const std::string& property_file, const std::string& report_path, const std::string& model_path,
             bool table) {
    const auto cfg = common.resolve();
    std::optional<slar::SystemLog> train, test;
    if (!log_path.empty()) {
        auto [a, b] = slar::split(load_log(log_path, cfg.schema), split_at);
        train.emplace(std::move(a));
        test.emplace(std::move(b));
    } else {
        if (train_path.empty() || test_path.empty()) throw slar::Error("slar needs --train and --test, or --log");
        train.emplace(load_log(train_path, cfg.schema));
        test.emplace(load_log(test_path, cfg.schema));
    }

    std::vector<slar::SafetyProperty> props;
    if (!property_text.empty()) props.push_back(slar::parse_property(property_text));
    if (!property_file.empty()) {
        std::istringstream in(read_file(property_file));
        const auto more = slar::parse_property_list(in);
        props.insert(props.end(), more.begin(), more.end());
    }
    if (props.empty()) throw slar::Error("slar needs --property or --properties");

    // Independent runs over shared immutable logs.
    std::vector<std::optional<slar::VerificationReport>> reports(props.size());
    std::vector<std::string> errors(props.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < props.size();) {
            try {
                reports[i] = slar::run_slar(*train, *test, props[i], cfg.slar);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const auto workers = std::max<std::size_t>(1, std::min<std::size_t>(props.size(), std::thread::hardware_concurrency()));
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    pool.clear();

    int code = 0;
    slar::json docs = slar::json::array();
    if (table) std::cout << slar::report_table_header() << '\n';
    for (std::size_t i = 0; i < props.size(); ++i) {
        if (!reports[i]) {
            std::cerr << slar::to_string(props[i]) << ": error: " << errors[i] << '\n';
            code = exit_error;
            continue;
        }
        const auto& rep = *reports[i];
        const auto doc = slar::report_to_json(rep);
        docs.push_back(doc);
        if (table)
            std::cout << slar::report_table_row(doc) << '\n';
        else
            std::cout << slar::to_string(props[i]) << ": " << slar::to_string(rep.outcome) << " (P_learn "
                      << slar::detail::format_double(rep.p_learn) << ", model " << rep.model_size << " states"
                      << (rep.confidence ? ", confidence " + slar::detail::format_double(*rep.confidence) : "")
                      << ")\n";
        code = std::max(code, exit_code(rep.outcome));
        if (!model_path.empty() && rep.chain && props.size() == 1)
            write_output(model_path, slar::export_model(*rep.chain, rep.predicates, slar::ModelFormat::json));
    }
    if (!report_path.empty()) write_output(report_path, (docs.size() == 1 ? docs[0] : docs).dump(2) + "\n");
    return code;
}

int cmd_synth(const std::string& spec_path, const std::string& out_path, const std::string& truth_path,
              const std::vector<std::string>& predicate_texts) {
    const auto spec = slar::synthetic_spec_from_json(slar::json::parse(read_file(spec_path)));
    const auto gen = slar::generate_synthetic_log(spec);
    std::ostringstream csv;
    slar::write_log_csv(csv, gen.log);
    write_output(out_path, csv.str());
    if (!truth_path.empty()) {
        slar::json truth{{"format_version", slar::format_version}, {"kind", "ground_truth"}, {"stationary", gen.stationary}};
        truth["predicates"] = slar::json::object();
        for (const auto& p : predicate_texts)
            truth["predicates"][p] = slar::ground_truth_probability(spec, gen.stationary, slar::parse_predicate(p));
        write_output(truth_path, truth.dump(2) + "\n");
    }
    return 0;
}

int cmd_report(const std::string& path, bool header) {
    const auto doc = slar::json::parse(read_file(path));
    if (header) std::cout << slar::report_table_header() << '\n';
    if (doc.is_array())
        for (const auto& d : doc) std::cout << slar::report_table_row(d) << '\n';
    else
        std::cout << slar::report_table_row(doc) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learn stationary Markov chains from system logs and verify steady-state safety properties"};
    app.require_subcommand(1);

    CommonOptions learn_common, slar_common;

    auto* learn = app.add_subcommand("learn", "learn a chain from a training log");
    std::string learn_train, learn_property, learn_format = "json", learn_out, learn_tree;
    std::vector<std::string> learn_predicates;
    learn->add_option("--train", learn_train, "training log")->required();
    learn->add_option("--property", learn_property, "property whose predicate seeds the abstraction");
    learn->add_option("-p,--predicate", learn_predicates, "abstraction predicate (repeatable)");
    learn->add_option("--format", learn_format, "json or dot")->check(CLI::IsMember({"json", "dot"}));
    learn->add_option("-o,--out", learn_out, "output file (default stdout)");
    learn->add_option("--tree-out", learn_tree, "also write the suffix tree as JSON");
    learn_common.attach(learn, true);

    auto* verify = app.add_subcommand("verify", "compute the steady-state unsafe probability of a model");
    std::string verify_model, verify_property;
    verify->add_option("--model", verify_model, "model JSON")->required();
    verify->add_option("--property", verify_property, "property, e.g. 'LIT101 > 1100 @ r=0.15'")->required();

    auto* run = app.add_subcommand("slar", "run the learn/verify/validate/refine loop");
    std::string slar_train, slar_test, slar_log, slar_property, slar_properties, slar_report, slar_model;
    double slar_split = 4.0 / 7.0;
    bool slar_table = false;
    run->add_option("--train", slar_train, "training log");
    run->add_option("--test", slar_test, "testing log");
    run->add_option("--log", slar_log, "single log to split into training and testing parts");
    run->add_option("--split", slar_split, "training fraction when --log is used (default 4/7)");
    run->add_option("--property", slar_property, "property to verify");
    run->add_option("--properties", slar_properties, "file with one property per line");
    run->add_option("--report-out", slar_report, "write the report JSON");
    run->add_option("--model-out", slar_model, "write the evidence model JSON (single property)");
    run->add_flag("--table", slar_table, "print results as table rows");
    slar_common.attach(run, true);

    auto* synth = app.add_subcommand("synth", "generate a synthetic log from a hidden Markov spec");
    std::string synth_spec, synth_out, synth_truth;
    std::vector<std::string> synth_predicates;
    synth->add_option("--spec", synth_spec, "synthetic spec JSON")->required();
    synth->add_option("-o,--out", synth_out, "output CSV (default stdout)");
    synth->add_option("--truth", synth_truth, "write ground-truth JSON");
    synth->add_option("-p,--predicate", synth_predicates, "predicate whose exact long-run probability to report");

    auto* report = app.add_subcommand("report", "render a report JSON as table rows");
    std::string report_path;
    bool report_header = false;
    report->add_option("report", report_path, "report JSON")->required();
    report->add_flag("--header", report_header, "print the column header");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_error;
    }

    try {
        if (*learn) return cmd_learn(learn_common, learn_train, learn_predicates, learn_property, learn_format, learn_out, learn_tree);
        if (*verify) return cmd_verify(verify_model, verify_property);
        if (*run)
            return cmd_slar(slar_common, slar_train, slar_test, slar_log, slar_split, slar_property, slar_properties,
                            slar_report, slar_model, slar_table);
        if (*synth) return cmd_synth(synth_spec, synth_out, synth_truth, synth_predicates);
        if (*report) return cmd_report(report_path, report_header);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_error;
    }
    return exit_error;
}
