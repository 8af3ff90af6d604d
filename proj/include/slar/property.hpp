#pragma once

// `VAR (>|<) BOUND @ r=VALUE`

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "slar/abstraction.hpp"
#include "slar/detail/text.hpp"
#include "slar/error.hpp"
#include "slar/markov.hpp"

namespace slar {

inline SafetyProperty parse_property(std::string_view text) {
    detail::PredicateLexer lex(text);
    SafetyProperty prop;
    const auto var = lex.identifier();
    if (!var) throw SyntaxError(lex.pos(), "expected variable name");
    prop.variable = *var;

    lex.skip_ws();
    const auto at_cmp = lex.pos();
    const auto sense = lex.comparator();
    if (!sense) throw SyntaxError(lex.pos(), "expected '>' or '<'");
    if (*sense != Sense::greater && *sense != Sense::less)
        throw SyntaxError(at_cmp, "properties use strict comparators only");
    prop.sense = *sense;

    const auto bound = lex.signed_number();
    if (!bound) throw SyntaxError(lex.pos(), "expected numeric bound");
    prop.bound = *bound;

    if (!lex.consume('@')) throw SyntaxError(lex.pos(), "expected '@'");
    lex.skip_ws();
    const auto at_key = lex.pos();
    if (const auto key = lex.identifier(); !key || *key != "r") throw SyntaxError(at_key, "expected 'r='");
    if (!lex.consume('=')) throw SyntaxError(lex.pos(), "expected '='");
    lex.skip_ws();
    const auto at_r = lex.pos();
    const auto r = lex.signed_number();
    if (!r) throw SyntaxError(lex.pos(), "expected numeric threshold");
    if (!lex.at_end()) throw SyntaxError(lex.pos(), "unexpected trailing input");
    if (!(*r >= 0.0 && *r <= 1.0))
        throw RangeError("threshold r=" + detail::format_double(*r) + " at position " + std::to_string(at_r) +
                         " is outside [0,1]");
    prop.threshold = *r;
    return prop;
}

inline std::string to_string(const SafetyProperty& p) {
    return p.variable + " " + std::string(to_string(p.sense)) + " " + detail::format_double(p.bound) +
           " @ r=" + detail::format_double(p.threshold);
}

/// One property per line; blank lines and `#` comments are skipped.
inline std::vector<SafetyProperty> parse_property_list(std::istream& in) {
    std::vector<SafetyProperty> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (detail::trim(line).empty()) continue;
        out.push_back(parse_property(line));
    }
    return out;
}

}  // namespace slar
