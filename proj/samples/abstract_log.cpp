// Parses a short sensor log, abstracts it with one range predicate and learns a chain from it.
#include <fstream>
#include <iostream>
#include <iterator>

#include "slar/all.hpp"

int main(int argc, char** argv) {
    const std::string path = argc > 1 ? argv[1] : SLAR_SAMPLE_DATA "/swat_excerpt.csv";
    std::ifstream in(path);
    if (!in) {
        std::cerr << "cannot open " << path << '\n';
        return 1;
    }
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

    const auto log = slar::parse_log(text, slar::infer_schema(text, "Timestamp", 1.0));
    std::cout << log.size() << " observations over " << log.duration() << " s\n";

    slar::PredicateSet preds({slar::parse_predicate("LIT101 > 1100"), slar::parse_predicate("FIT101 > 2.45")});
    const auto trace = slar::abstract_trace(log, preds);
    std::cout << "symbols:";
    for (auto s : trace.symbols) std::cout << ' ' << s;
    std::cout << '\n';

    const slar::SuffixStats stats(trace, 3);
    const auto tree = slar::grow_pst(stats, slar::PstOptions::with_epsilon(0.01, 3));
    const auto chain = slar::pst_to_psa(tree, stats);
    std::cout << slar::chain_to_dot(chain);
}
