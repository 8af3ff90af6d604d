#pragma once

// Predicate abstraction of concrete logs into bit-vector symbol sequences.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slar/detail/text.hpp"
#include "slar/error.hpp"
#include "slar/log_model.hpp"

namespace slar {

using Symbol = std::uint32_t;

enum class Sense { greater, less, greater_equal, less_equal };

inline std::string_view to_string(Sense s) {
    switch (s) {
        case Sense::greater: return ">";
        case Sense::less: return "<";
        case Sense::greater_equal: return ">=";
        case Sense::less_equal: return "<=";
    }
    return "?";
}

inline Sense flipped(Sense s) {
    switch (s) {
        case Sense::greater: return Sense::less;
        case Sense::less: return Sense::greater;
        case Sense::greater_equal: return Sense::less_equal;
        case Sense::less_equal: return Sense::greater_equal;
    }
    return s;
}

inline bool compare(double lhs, Sense s, double rhs) {
    switch (s) {
        case Sense::greater: return lhs > rhs;
        case Sense::less: return lhs < rhs;
        case Sense::greater_equal: return lhs >= rhs;
        case Sense::less_equal: return lhs <= rhs;
    }
    return false;
}

/// Linear inequality `sum(coeff * var) sense offset`.
class Predicate {
public:
    Predicate(std::map<std::string, double> coefficients, Sense sense, double offset)
        : coefficients_(std::move(coefficients)), sense_(sense), offset_(offset) {
        std::erase_if(coefficients_, [](const auto& kv) { return kv.second == 0.0; });
        if (coefficients_.empty()) throw InvalidPredicate("predicate needs a nonzero coefficient");
        for (const auto& [name, c] : coefficients_)
            if (!std::isfinite(c)) throw InvalidPredicate("non-finite coefficient on " + name);
        if (!std::isfinite(offset_)) throw InvalidPredicate("non-finite offset");
    }

    /// `var sense bound`.
    static Predicate threshold(std::string var, Sense sense, double bound) {
        return Predicate({{std::move(var), 1.0}}, sense, bound);
    }

    const std::map<std::string, double>& coefficients() const noexcept { return coefficients_; }
    Sense sense() const noexcept { return sense_; }
    double offset() const noexcept { return offset_; }

    /// Equivalent predicate with the largest-magnitude coefficient scaled to +1.
    Predicate normalized() const {
        auto lead = coefficients_.begin();
        for (auto it = coefficients_.begin(); it != coefficients_.end(); ++it)
            if (std::abs(it->second) > std::abs(lead->second)) lead = it;
        const double scale = lead->second;
        std::map<std::string, double> c;
        for (const auto& [name, v] : coefficients_) c[name] = v / scale;
        c[lead->first] = 1.0;
        return Predicate(std::move(c), scale < 0 ? flipped(sense_) : sense_, offset_ / scale);
    }

    /// Same normalized form up to a relative tolerance.
    bool equivalent(const Predicate& other, double tol = 1e-9) const {
        const auto a = normalized();
        const auto b = other.normalized();
        if (a.sense_ != b.sense_ || a.coefficients_.size() != b.coefficients_.size()) return false;
        const auto close = [tol](double x, double y) {
            return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)});
        };
        for (auto ia = a.coefficients_.begin(), ib = b.coefficients_.begin(); ia != a.coefficients_.end();
             ++ia, ++ib)
            if (ia->first != ib->first || !close(ia->second, ib->second)) return false;
        return close(a.offset_, b.offset_);
    }

    bool operator==(const Predicate&) const = default;

private:
    std::map<std::string, double> coefficients_;
    Sense sense_;
    double offset_;
};

/// Predicate bound to schema column indices.
class BoundPredicate {
public:
    BoundPredicate(const Predicate& p, const ObservationSchema& schema) : sense_(p.sense()), offset_(p.offset()) {
        for (const auto& [name, c] : p.coefficients()) {
            const auto idx = schema.index_of(name);
            if (!idx) throw UnknownVariable(name);
            terms_.emplace_back(*idx, c);
        }
    }

    double lhs(const Observation& o) const {
        double sum = 0.0;
        for (const auto& [idx, c] : terms_) sum += c * o.values[idx];
        return sum;
    }
    bool operator()(const Observation& o) const { return compare(lhs(o), sense_, offset_); }

private:
    std::vector<std::pair<std::size_t, double>> terms_;
    Sense sense_;
    double offset_;
};

inline bool evaluate_predicate(const Predicate& p, const Observation& o, const ObservationSchema& schema) {
    return BoundPredicate(p, schema)(o);
}

/// Ordered predicates; position i is bit i of every abstract symbol.
class PredicateSet {
public:
    static constexpr std::size_t max_size = 31;

    PredicateSet() = default;
    explicit PredicateSet(std::vector<Predicate> predicates) {
        for (auto& p : predicates)
            if (!add(std::move(p))) throw InvalidPredicate("duplicate predicate in set");
    }

    /// Appends unless an equivalent predicate is already present.
    bool add(Predicate p) {
        if (contains(p)) return false;
        if (predicates_.size() == max_size) throw InvalidPredicate("too many predicates for symbol width");
        predicates_.push_back(std::move(p));
        return true;
    }

    bool contains(const Predicate& p) const { return index_of(p).has_value(); }

    std::optional<std::size_t> index_of(const Predicate& p) const {
        for (std::size_t i = 0; i < predicates_.size(); ++i)
            if (predicates_[i].equivalent(p)) return i;
        return std::nullopt;
    }

    const std::vector<Predicate>& predicates() const noexcept { return predicates_; }
    std::size_t size() const noexcept { return predicates_.size(); }
    bool empty() const noexcept { return predicates_.empty(); }
    const Predicate& operator[](std::size_t i) const { return predicates_[i]; }

    bool operator==(const PredicateSet&) const = default;

private:
    std::vector<Predicate> predicates_;
};

struct AbstractTrace {
    std::size_t arity = 0;
    std::vector<Symbol> symbols;

    std::size_t size() const noexcept { return symbols.size(); }
    bool operator==(const AbstractTrace&) const = default;
};

inline AbstractTrace abstract_trace(const SystemLog& log, const PredicateSet& predicates) {
    if (predicates.empty()) throw InvalidPredicate("abstraction needs at least one predicate");
    std::vector<BoundPredicate> bound;
    bound.reserve(predicates.size());
    for (const auto& p : predicates.predicates()) bound.emplace_back(p, log.schema());
    AbstractTrace trace{predicates.size(), {}};
    trace.symbols.reserve(log.size());
    for (const auto& o : log.observations()) {
        Symbol s = 0;
        for (std::size_t i = 0; i < bound.size(); ++i)
            if (bound[i](o)) s |= Symbol{1} << i;
        trace.symbols.push_back(s);
    }
    return trace;
}

/// Keeps the low `arity` bits of every symbol.
inline AbstractTrace mask_trace(const AbstractTrace& trace, std::size_t arity) {
    AbstractTrace out{arity, trace.symbols};
    const Symbol mask = (Symbol{1} << arity) - 1;
    for (auto& s : out.symbols) s &= mask;
    return out;
}

// Text syntax: `c1*VAR1 [+|- c2*VAR2 ...] (>|<|>=|<=) constant`.

namespace detail {

class PredicateLexer {
public:
    explicit PredicateLexer(std::string_view text) : text_(text) {}

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool at_end() {
        skip_ws();
        return pos_ == text_.size();
    }
    std::size_t pos() const { return pos_; }
    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }
    bool consume(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    std::optional<std::string> identifier() {
        skip_ws();
        const auto start = pos_;
        if (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' || text_[pos_] == '.'))
                ++pos_;
            return std::string(text_.substr(start, pos_ - start));
        }
        return std::nullopt;
    }

    /// Unsigned decimal literal with optional exponent.
    std::optional<double> number() {
        skip_ws();
        const auto start = pos_;
        auto digits = [&] {
            const auto s = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            return pos_ > s;
        };
        bool any = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            any = digits() || any;
        }
        if (!any) {
            pos_ = start;
            return std::nullopt;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            const auto save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (!digits()) pos_ = save;
        }
        return parse_double(text_.substr(start, pos_ - start));
    }

    /// Signed constant, allowing an explicit leading sign.
    std::optional<double> signed_number() {
        double sign = 1.0;
        if (consume('-'))
            sign = -1.0;
        else
            consume('+');
        const auto v = number();
        if (!v) return std::nullopt;
        return sign * *v;
    }

    std::optional<Sense> comparator() {
        skip_ws();
        const auto rest = text_.substr(pos_);
        if (rest.starts_with(">=")) return pos_ += 2, Sense::greater_equal;
        if (rest.starts_with("<=")) return pos_ += 2, Sense::less_equal;
        if (rest.starts_with(">")) return pos_ += 1, Sense::greater;
        if (rest.starts_with("<")) return pos_ += 1, Sense::less;
        return std::nullopt;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

inline std::map<std::string, double> parse_linear_combination(PredicateLexer& lex) {
    std::map<std::string, double> coeffs;
    bool first = true;
    for (;;) {
        double sign = 1.0;
        if (lex.consume('-'))
            sign = -1.0;
        else if (!lex.consume('+') && !first)
            break;
        first = false;
        double coeff = 1.0;
        if (const auto c = lex.number()) {
            coeff = *c;
            if (!lex.consume('*')) throw SyntaxError(lex.pos(), "expected '*' after coefficient");
        }
        const auto name = lex.identifier();
        if (!name) throw SyntaxError(lex.pos(), "expected variable name");
        coeffs[*name] += sign * coeff;
    }
    return coeffs;
}

}  // namespace detail

inline Predicate parse_predicate(std::string_view text) {
    detail::PredicateLexer lex(text);
    auto coeffs = detail::parse_linear_combination(lex);
    const auto sense = lex.comparator();
    if (!sense) throw SyntaxError(lex.pos(), "expected comparator (>, <, >=, <=)");
    const auto bound = lex.signed_number();
    if (!bound) throw SyntaxError(lex.pos(), "expected numeric constant");
    if (!lex.at_end()) throw SyntaxError(lex.pos(), "unexpected trailing input");
    std::erase_if(coeffs, [](const auto& kv) { return kv.second == 0.0; });
    if (coeffs.empty()) throw InvalidPredicate("predicate has no nonzero coefficient");
    return Predicate(std::move(coeffs), *sense, *bound);
}

inline std::string to_string(const Predicate& p) {
    std::string out;
    bool first = true;
    for (const auto& [name, c] : p.coefficients()) {
        const double mag = std::abs(c);
        if (first)
            out += c < 0 ? "-" : "";
        else
            out += c < 0 ? " - " : " + ";
        if (mag != 1.0) out += detail::format_double(mag) + "*";
        out += name;
        first = false;
    }
    out += " ";
    out += to_string(p.sense());
    out += " ";
    out += detail::format_double(p.offset());
    return out;
}

}  // namespace slar
