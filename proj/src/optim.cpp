#include "n2rec/optim.hpp"

#include <stdexcept>
#include <string>

namespace n2rec {

void init_embeddings(EmbeddingMatrix& m, Rng& rng) {
    double half = 1.0 / (2.0 * static_cast<double>(m.dim));
    for (double& v : m.values) v = rng.uniform(-half, half);
}

void adam_step(EmbeddingMatrix& params, const SparseGrads& grads, AdamState& state) {
    if (grads.empty()) return;
    ++state.t;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (const auto& [row, g] : grads) {
        if (row < 0 || row >= params.rows)
            throw std::runtime_error("adam_step: row " + std::to_string(row) + " out of range");
        double* p = params.row(row);
        double* m = state.m.data() + row * params.dim;
        double* v = state.v.data() + row * params.dim;
        for (int64_t i = 0; i < params.dim; ++i) {
            if (!std::isfinite(g[i]))
                throw std::runtime_error("adam_step: non-finite gradient at row " +
                                         std::to_string(row));
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            p[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

DropoutResult apply_dropout(const Vec& row, const DropoutSpec& spec, Rng& rng) {
    DropoutResult res;
    res.value = row;
    res.mask.assign(row.size(), 1.0);
    if (!spec.training || spec.p == 0.0) return res;
    if (spec.p < 0.0 || spec.p >= 1.0) throw std::invalid_argument("dropout p must be in [0,1)");
    double keep_scale = 1.0 / (1.0 - spec.p);
    for (size_t i = 0; i < row.size(); ++i) {
        if (rng.uniform01() < spec.p) {
            res.mask[i] = 0.0;
            res.value[i] = 0.0;
        } else {
            res.mask[i] = keep_scale;
            res.value[i] = row[i] * keep_scale;
        }
    }
    return res;
}

double finite_diff_check(const std::function<double(const Vec&)>& f, const Vec& analytic_grad,
                         const Vec& point, double h) {
    double max_rel = 0.0;
    Vec x = point;
    for (size_t i = 0; i < point.size(); ++i) {
        double orig = x[i];
        x[i] = orig + h;
        double fp = f(x);
        x[i] = orig - h;
        double fm = f(x);
        x[i] = orig;
        double numeric = (fp - fm) / (2.0 * h);
        double a = analytic_grad[i];
        double rel = std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + 1e-12);
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace n2rec
