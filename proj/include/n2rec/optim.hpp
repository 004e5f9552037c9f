#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "n2rec/rng.hpp"

namespace n2rec {

using Vec = std::vector<double>;

struct EmbeddingMatrix {
    int64_t rows = 0;
    int64_t dim = 0;
    std::vector<double> values;

    EmbeddingMatrix() = default;
    EmbeddingMatrix(int64_t r, int64_t d) : rows(r), dim(d), values(r * d, 0.0) {}

    double* row(int64_t i) { return values.data() + i * dim; }
    const double* row(int64_t i) const { return values.data() + i * dim; }

    Vec row_copy(int64_t i) const { return Vec(row(i), row(i) + dim); }

    bool operator==(const EmbeddingMatrix&) const = default;
};

// uniform in (-1/(2d), +1/(2d))
void init_embeddings(EmbeddingMatrix& m, Rng& rng);

// Gradients keyed by row; accumulation order fixed by insertion site.
using SparseGrads = std::map<int64_t, Vec>;

inline void add_grad(SparseGrads& g, int64_t row, const double* grad, int64_t dim,
                     double scale = 1.0) {
    auto [it, fresh] = g.try_emplace(row, dim, 0.0);
    for (int64_t i = 0; i < dim; ++i) it->second[i] += scale * grad[i];
}

struct AdamState {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t t = 0;
    std::vector<double> m;  // first moment, shaped like the target matrix
    std::vector<double> v;  // second moment

    explicit AdamState(const EmbeddingMatrix& target, double learning_rate = 0.001)
        : lr(learning_rate), m(target.values.size(), 0.0), v(target.values.size(), 0.0) {}
};

// One bias-corrected Adam step on the touched rows only; increments t once.
void adam_step(EmbeddingMatrix& params, const SparseGrads& grads, AdamState& state);

struct DropoutSpec {
    double p = 0.0;  // drop probability
    bool training = false;
};

// Inverted dropout: zero with probability p, scale survivors by 1/(1-p).
// The mask is returned so backward passes can reuse it.
struct DropoutResult {
    Vec value;
    Vec mask;
};
DropoutResult apply_dropout(const Vec& row, const DropoutSpec& spec, Rng& rng);

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

// -log(sigmoid(x)) = softplus(-x), computed without overflow
inline double log1p_exp(double t) {
    return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}
inline double neg_log_sigmoid(double x) { return log1p_exp(-x); }

// Max relative error between an analytic gradient and central finite differences.
double finite_diff_check(const std::function<double(const Vec&)>& f, const Vec& analytic_grad,
                         const Vec& point, double h = 1e-4);

}  // namespace n2rec
