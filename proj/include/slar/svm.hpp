#pragma once

// Soft-margin linear SVM used to synthesize refinement predicates.
//
// Training solves the L1-loss dual by coordinate descent over standardized features with
// an appended constant feature for the bias.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "slar/abstraction.hpp"
#include "slar/error.hpp"
#include "slar/validation.hpp"

namespace slar {

/// w . x + b >= 0 classifies as positive.
struct Hyperplane {
    std::vector<std::string> features;
    std::vector<double> weights;  // raw feature units
    double bias = 0.0;
    double margin = 0.0;          // geometric margin in standardized units
    std::size_t iterations = 0;   // epochs used

    double decision(const std::vector<double>& x) const {
        double s = bias;
        for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * x[i];
        return s;
    }
};

struct SvmOptions {
    double c = 1000.0;
    std::size_t max_epochs = 2000;
    double tolerance = 1e-4;
    std::uint64_t seed = 0;
};

struct TrainedSeparator {
    std::optional<Hyperplane> hyperplane;
    std::string failure;  // set when no zero-error separator was found

    explicit operator bool() const noexcept { return hyperplane.has_value(); }
};

inline TrainedSeparator train_linear_separator(const LabeledDataset& data, const SvmOptions& opt = {}) {
    const std::size_t d = data.features.size();
    if (d == 0) throw DimensionMismatch("dataset has no features");
    for (const auto* set : {&data.positives, &data.negatives})
        for (const auto& x : *set)
            if (x.size() != d) throw DimensionMismatch("instance arity differs from feature count");
    if (data.positives.empty() || data.negatives.empty()) return {std::nullopt, "a category is empty"};

    const std::size_t n = data.size();
    std::vector<const std::vector<double>*> rows;
    std::vector<double> label;
    rows.reserve(n);
    for (const auto& x : data.positives) rows.push_back(&x), label.push_back(1.0);
    for (const auto& x : data.negatives) rows.push_back(&x), label.push_back(-1.0);

    std::vector<double> mean(d, 0.0), scale(d, 0.0);
    for (const auto* x : rows)
        for (std::size_t k = 0; k < d; ++k) mean[k] += (*x)[k];
    for (auto& m : mean) m /= static_cast<double>(n);
    for (const auto* x : rows)
        for (std::size_t k = 0; k < d; ++k) scale[k] += ((*x)[k] - mean[k]) * ((*x)[k] - mean[k]);
    for (auto& s : scale) s = std::sqrt(s / static_cast<double>(n));

    // Standardized design with a trailing bias column.
    const std::size_t dim = d + 1;
    std::vector<double> z(n * dim);
    std::vector<double> qii(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double v = scale[k] > 0.0 ? ((*rows[i])[k] - mean[k]) / scale[k] : 0.0;
            z[i * dim + k] = v;
            sq += v * v;
        }
        z[i * dim + d] = 1.0;
        qii[i] = sq + 1.0;
    }

    std::vector<double> alpha(n, 0.0), w(dim, 0.0);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(opt.seed);
    std::size_t epoch = 0;
    for (; epoch < opt.max_epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
        double pg_max = -std::numeric_limits<double>::infinity();
        double pg_min = std::numeric_limits<double>::infinity();
        for (auto i : order) {
            const double* zi = &z[i * dim];
            double dot = 0.0;
            for (std::size_t k = 0; k < dim; ++k) dot += w[k] * zi[k];
            const double g = label[i] * dot - 1.0;
            double pg = g;
            if (alpha[i] <= 0.0)
                pg = std::min(g, 0.0);
            else if (alpha[i] >= opt.c)
                pg = std::max(g, 0.0);
            pg_max = std::max(pg_max, pg);
            pg_min = std::min(pg_min, pg);
            if (std::abs(pg) < 1e-12) continue;
            const double next = std::clamp(alpha[i] - g / qii[i], 0.0, opt.c);
            const double delta = (next - alpha[i]) * label[i];
            alpha[i] = next;
            for (std::size_t k = 0; k < dim; ++k) w[k] += delta * zi[k];
        }
        if (pg_max - pg_min < opt.tolerance) {
            ++epoch;
            break;
        }
    }

    Hyperplane h;
    h.features = data.features;
    h.weights.assign(d, 0.0);
    h.bias = w[d];
    double norm2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        norm2 += w[k] * w[k];
        if (scale[k] > 0.0) {
            h.weights[k] = w[k] / scale[k];
            h.bias -= w[k] * mean[k] / scale[k];
        }
    }
    h.margin = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
    h.iterations = epoch;

    if (std::all_of(h.weights.begin(), h.weights.end(), [](double v) { return v == 0.0; }))
        return {std::nullopt, "no informative feature"};
    for (std::size_t i = 0; i < n; ++i) {
        const double f = h.decision(*rows[i]);
        if (label[i] > 0 ? !(f >= 0.0) : !(f < 0.0))
            return {std::nullopt, "training error is not zero after " + std::to_string(epoch) + " epochs"};
    }
    return {std::move(h), {}};
}

/// `sum w_i * x_i >= -b`, scaled so the largest coefficient is +1 (the sense flips when it was negative).
inline Predicate hyperplane_to_predicate(const Hyperplane& h) {
    double largest = 0.0;
    for (double v : h.weights) largest = std::max(largest, std::abs(v));
    if (!(largest > 0.0) || !std::isfinite(largest)) throw DegenerateHyperplane();
    std::map<std::string, double> coeffs;
    for (std::size_t i = 0; i < h.weights.size(); ++i)
        if (std::abs(h.weights[i]) > 1e-12 * largest) coeffs[h.features[i]] = h.weights[i];
    return Predicate(std::move(coeffs), Sense::greater_equal, -h.bias).normalized();
}

}  // namespace slar
