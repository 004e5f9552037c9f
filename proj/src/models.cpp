#include "n2rec/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace n2rec {

namespace {

double dot_rows(const double* a, const double* b, int64_t d) {
    double s = 0.0;
    for (int64_t i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
}

// y = W x, W stored row-major (rows x dim)
void matvec(const EmbeddingMatrix& w, const double* x, double* y) {
    for (int64_t i = 0; i < w.rows; ++i) y[i] = dot_rows(w.row(i), x, w.dim);
}

// y += W^T g
void matvec_t_add(const EmbeddingMatrix& w, const double* g, double* y) {
    for (int64_t i = 0; i < w.rows; ++i) {
        const double* row = w.row(i);
        for (int64_t j = 0; j < w.dim; ++j) y[j] += row[j] * g[i];
    }
}

// W += outer(g, x)
void outer_add(EmbeddingMatrix& w, const double* g, const double* x) {
    for (int64_t i = 0; i < w.rows; ++i) {
        double* row = w.row(i);
        for (int64_t j = 0; j < w.dim; ++j) row[j] += g[i] * x[j];
    }
}

// softmax cross-entropy over raw scores; returns loss, writes p - onehot into grad
double softmax_ce(const Vec& scores, size_t target, Vec& grad) {
    double mx = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    grad.resize(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) {
        grad[i] = std::exp(scores[i] - mx);
        sum += grad[i];
    }
    for (double& g : grad) g /= sum;
    double loss = -(scores[target] - mx - std::log(sum));
    grad[target] -= 1.0;
    return loss;
}

struct GruStep {
    Vec z, r, hc, h;  // gate activations and hidden state after the step
};

// forward over a POI sequence; steps[t] holds state after consuming seq[t]
std::vector<GruStep> gru_forward(const GruGates& g, const SharedParams& params,
                                 const std::vector<PoiId>& seq) {
    int64_t d = params.w_poi.dim;
    std::vector<GruStep> steps(seq.size());
    Vec h_prev(d, 0.0), az(d), ar(d), ah(d), rh(d), tmp(d);
    for (size_t t = 0; t < seq.size(); ++t) {
        const double* x = params.w_poi.row(seq[t]);
        GruStep& st = steps[t];
        st.z.resize(d);
        st.r.resize(d);
        st.hc.resize(d);
        st.h.resize(d);
        matvec(g.w_z, x, az.data());
        matvec(g.u_z, h_prev.data(), tmp.data());
        for (int64_t i = 0; i < d; ++i) st.z[i] = sigmoid(az[i] + tmp[i] + g.b_z.values[i]);
        matvec(g.w_r, x, ar.data());
        matvec(g.u_r, h_prev.data(), tmp.data());
        for (int64_t i = 0; i < d; ++i) st.r[i] = sigmoid(ar[i] + tmp[i] + g.b_r.values[i]);
        for (int64_t i = 0; i < d; ++i) rh[i] = st.r[i] * h_prev[i];
        matvec(g.w_h, x, ah.data());
        matvec(g.u_h, rh.data(), tmp.data());
        for (int64_t i = 0; i < d; ++i) st.hc[i] = std::tanh(ah[i] + tmp[i] + g.b_h.values[i]);
        for (int64_t i = 0; i < d; ++i)
            st.h[i] = (1.0 - st.z[i]) * h_prev[i] + st.z[i] * st.hc[i];
        h_prev = st.h;
    }
    return steps;
}

GruGates make_gates(int64_t d) {
    GruGates g;
    for (EmbeddingMatrix* m : {&g.w_z, &g.u_z, &g.w_r, &g.u_r, &g.w_h, &g.u_h})
        *m = EmbeddingMatrix(d, d);
    for (EmbeddingMatrix* m : {&g.b_z, &g.b_r, &g.b_h}) *m = EmbeddingMatrix(1, d);
    return g;
}

std::vector<EmbeddingMatrix*> gate_list(GruGates& g) {
    return {&g.w_z, &g.u_z, &g.b_z, &g.w_r, &g.u_r, &g.b_r, &g.w_h, &g.u_h, &g.b_h};
}
std::vector<const EmbeddingMatrix*> gate_list(const GruGates& g) {
    return {&g.w_z, &g.u_z, &g.b_z, &g.w_r, &g.u_r, &g.b_r, &g.w_h, &g.u_h, &g.b_h};
}

SparseGrads dense_grads(const EmbeddingMatrix& m) {
    SparseGrads g;
    for (int64_t i = 0; i < m.rows; ++i) g.emplace(i, Vec(m.row(i), m.row(i) + m.dim));
    return g;
}

}  // namespace

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "top") return ModelKind::Top;
    if (s == "utop") return ModelKind::UTop;
    if (s == "mf") return ModelKind::Mf;
    if (s == "seqrec") return ModelKind::SeqRec;
    if (s == "gru") return ModelKind::Gru;
    throw std::invalid_argument("unknown model kind: " + s);
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Top: return "top";
        case ModelKind::UTop: return "utop";
        case ModelKind::Mf: return "mf";
        case ModelKind::SeqRec: return "seqrec";
        case ModelKind::Gru: return "gru";
    }
    return "?";
}

Model make_model(ModelKind kind, int32_t num_users, int32_t num_pois, int64_t dim, Rng& rng) {
    Model m;
    m.kind = kind;
    m.dim = dim;
    switch (kind) {
        case ModelKind::Top:
            m.top_freq.assign(num_pois, 0);
            break;
        case ModelKind::UTop:
            m.utop_freq.resize(num_users);
            break;
        case ModelKind::Mf:
            break;
        case ModelKind::SeqRec:
            m.transition = EmbeddingMatrix(num_pois, dim);
            init_embeddings(m.transition, rng);
            break;
        case ModelKind::Gru:
            m.gru = make_gates(dim);
            for (EmbeddingMatrix* w : {&m.gru.w_z, &m.gru.u_z, &m.gru.w_r, &m.gru.u_r,
                                       &m.gru.w_h, &m.gru.u_h})
                init_embeddings(*w, rng);
            break;
    }
    return m;
}

std::vector<double> score_candidates(const Model& model, const SharedParams& params,
                                     const Query& query, const std::vector<PoiId>& candidates) {
    std::vector<double> scores(candidates.size());
    switch (model.kind) {
        case ModelKind::Top:
            for (size_t i = 0; i < candidates.size(); ++i)
                scores[i] = static_cast<double>(model.top_freq[candidates[i]]);
            break;
        case ModelKind::UTop: {
            const auto& freq = model.utop_freq[query.user];
            for (size_t i = 0; i < candidates.size(); ++i) {
                auto it = std::lower_bound(freq.begin(), freq.end(), candidates[i],
                                           [](const auto& a, PoiId p) { return a.first < p; });
                scores[i] = (it != freq.end() && it->first == candidates[i])
                                ? static_cast<double>(it->second)
                                : kAbstainScore;
            }
            break;
        }
        case ModelKind::Mf: {
            const double* u = params.w_user.row(query.user);
            for (size_t i = 0; i < candidates.size(); ++i)
                scores[i] = dot_rows(u, params.w_poi.row(candidates[i]), params.w_poi.dim);
            break;
        }
        case ModelKind::SeqRec: {
            if (query.history.empty())
                throw std::runtime_error("seqrec scoring requires a nonempty history");
            int64_t d = params.w_poi.dim;
            Vec x(d);
            const double* u = params.w_user.row(query.user);
            const double* t = model.transition.row(query.history.back());
            for (int64_t i = 0; i < d; ++i) x[i] = u[i] + t[i];
            for (size_t i = 0; i < candidates.size(); ++i)
                scores[i] = dot_rows(x.data(), params.w_poi.row(candidates[i]), d);
            break;
        }
        case ModelKind::Gru: {
            if (query.history.empty())
                throw std::runtime_error("gru scoring requires a nonempty history");
            std::vector<PoiId> hist(query.history.begin(), query.history.end());
            auto steps = gru_forward(model.gru, params, hist);
            int64_t d = params.w_poi.dim;
            Vec x(d);
            const double* u = params.w_user.row(query.user);
            const Vec& h = steps.back().h;
            for (int64_t i = 0; i < d; ++i) x[i] = h[i] + u[i];
            for (size_t i = 0; i < candidates.size(); ++i)
                scores[i] = dot_rows(x.data(), params.w_poi.row(candidates[i]), d);
            break;
        }
    }
    return scores;
}

TrainContext build_train_context(const Dataset& dataset, bool tuple_multiplicity) {
    TrainContext ctx{build_train_tuples(dataset, tuple_multiplicity),
                     build_visitor_index(dataset),
                     {},
                     {}};
    ctx.visited.resize(dataset.num_users);
    ctx.train_seqs.resize(dataset.num_users);
    for (UserId u = 0; u < dataset.num_users; ++u) {
        auto train = dataset.train_of(u);
        auto& vis = ctx.visited[u];
        auto& seq = ctx.train_seqs[u];
        seq.reserve(train.size());
        for (const auto& c : train) {
            vis.push_back(c.poi);
            seq.push_back(c.poi);
        }
        std::sort(vis.begin(), vis.end());
        vis.erase(std::unique(vis.begin(), vis.end()), vis.end());
    }
    return ctx;
}

ModelAdam make_model_adam(const Model& model, const SharedParams& params, double lr) {
    ModelAdam a{AdamState(params.w_user, lr), AdamState(params.w_poi, lr), {}};
    if (model.kind == ModelKind::SeqRec) {
        a.own.emplace_back(model.transition, lr);
    } else if (model.kind == ModelKind::Gru) {
        for (const EmbeddingMatrix* g : gate_list(model.gru)) a.own.emplace_back(*g, lr);
    }
    return a;
}

double gru_sequence_loss(const Model& model, const SharedParams& params, UserId user,
                         const std::vector<PoiId>& seq) {
    if (seq.size() < 2) return 0.0;
    auto steps = gru_forward(model.gru, params, seq);
    int64_t d = params.w_poi.dim;
    int64_t q = params.w_poi.rows;
    const double* u = params.w_user.row(user);
    double loss = 0.0;
    Vec out(d), scores(q), grad;
    for (size_t t = 0; t + 1 < seq.size(); ++t) {
        for (int64_t i = 0; i < d; ++i) out[i] = steps[t].h[i] + u[i];
        for (int64_t l = 0; l < q; ++l) scores[l] = dot_rows(out.data(), params.w_poi.row(l), d);
        loss += softmax_ce(scores, static_cast<size_t>(seq[t + 1]), grad);
    }
    return loss;
}

GruSeqGrads gru_sequence_grads(const Model& model, const SharedParams& params, UserId user,
                               const std::vector<PoiId>& seq) {
    int64_t d = params.w_poi.dim;
    int64_t q = params.w_poi.rows;
    GruSeqGrads out;
    out.d_gates = make_gates(d);
    out.d_user.assign(d, 0.0);
    if (seq.size() < 2) return out;

    auto steps = gru_forward(model.gru, params, seq);
    const double* u = params.w_user.row(user);
    const GruGates& g = model.gru;

    // output-layer gradients per step, accumulated into dh[t]
    std::vector<Vec> dh(seq.size(), Vec(d, 0.0));
    Vec ovec(d), scores(q), sgrad;
    for (size_t t = 0; t + 1 < seq.size(); ++t) {
        for (int64_t i = 0; i < d; ++i) ovec[i] = steps[t].h[i] + u[i];
        for (int64_t l = 0; l < q; ++l) scores[l] = dot_rows(ovec.data(), params.w_poi.row(l), d);
        out.loss += softmax_ce(scores, static_cast<size_t>(seq[t + 1]), sgrad);
        for (int64_t l = 0; l < q; ++l) {
            if (sgrad[l] == 0.0) continue;
            const double* wp = params.w_poi.row(l);
            for (int64_t i = 0; i < d; ++i) dh[t][i] += sgrad[l] * wp[i];
            add_grad(out.d_poi, l, ovec.data(), d, sgrad[l]);
        }
        for (int64_t i = 0; i < d; ++i) out.d_user[i] += dh[t][i];
    }

    // backprop through time
    Vec dhc(d), dz(d), dr(d), da_h(d), da_z(d), da_r(d), drh(d), dx(d), dh_prev(d);
    for (size_t t = seq.size(); t-- > 0;) {
        const GruStep& st = steps[t];
        const Vec h_prev = (t == 0) ? Vec(d, 0.0) : steps[t - 1].h;
        Vec& dht = dh[t];
        std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
        std::fill(dx.begin(), dx.end(), 0.0);
        std::fill(drh.begin(), drh.end(), 0.0);

        for (int64_t i = 0; i < d; ++i) {
            dhc[i] = dht[i] * st.z[i];
            dz[i] = dht[i] * (st.hc[i] - h_prev[i]);
            dh_prev[i] = dht[i] * (1.0 - st.z[i]);
            da_h[i] = dhc[i] * (1.0 - st.hc[i] * st.hc[i]);
            da_z[i] = dz[i] * st.z[i] * (1.0 - st.z[i]);
        }
        matvec_t_add(g.u_h, da_h.data(), drh.data());
        for (int64_t i = 0; i < d; ++i) {
            dr[i] = drh[i] * h_prev[i];
            dh_prev[i] += drh[i] * st.r[i];
            da_r[i] = dr[i] * st.r[i] * (1.0 - st.r[i]);
        }

        const double* x = params.w_poi.row(seq[t]);
        Vec rh(d);
        for (int64_t i = 0; i < d; ++i) rh[i] = st.r[i] * h_prev[i];
        outer_add(out.d_gates.w_z, da_z.data(), x);
        outer_add(out.d_gates.u_z, da_z.data(), h_prev.data());
        outer_add(out.d_gates.w_r, da_r.data(), x);
        outer_add(out.d_gates.u_r, da_r.data(), h_prev.data());
        outer_add(out.d_gates.w_h, da_h.data(), x);
        outer_add(out.d_gates.u_h, da_h.data(), rh.data());
        for (int64_t i = 0; i < d; ++i) {
            out.d_gates.b_z.values[i] += da_z[i];
            out.d_gates.b_r.values[i] += da_r[i];
            out.d_gates.b_h.values[i] += da_h[i];
        }
        matvec_t_add(g.u_z, da_z.data(), dh_prev.data());
        matvec_t_add(g.u_r, da_r.data(), dh_prev.data());
        matvec_t_add(g.w_z, da_z.data(), dx.data());
        matvec_t_add(g.w_r, da_r.data(), dx.data());
        matvec_t_add(g.w_h, da_h.data(), dx.data());
        add_grad(out.d_poi, seq[t], dx.data(), d);

        if (t > 0)
            for (int64_t i = 0; i < d; ++i) dh[t - 1][i] += dh_prev[i];
    }
    return out;
}

namespace {

double mf_pass(Model&, SharedParams& params, const TrainContext& ctx,
               const BaseTrainConfig& cfg, ModelAdam& adam, Rng& rng) {
    int64_t d = params.w_poi.dim;
    int64_t q = params.w_poi.rows;
    std::vector<size_t> order(ctx.tuples.size());
    std::iota(order.begin(), order.end(), size_t{0});
    rng.shuffle(order);

    double total = 0.0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
        size_t end = std::min(start + cfg.batch_size, order.size());
        SparseGrads ug, pg;
        for (size_t idx = start; idx < end; ++idx) {
            const TrainTuple& t = ctx.tuples[order[idx]];
            const auto& vis = ctx.visited[t.user];
            const double* urow = params.w_user.row(t.user);
            const double* prow = params.w_poi.row(t.poi);
            double s = sigmoid(dot_rows(urow, prow, d));
            total += neg_log_sigmoid(dot_rows(urow, prow, d));
            Vec du(d), dp(d);
            for (int64_t i = 0; i < d; ++i) {
                du[i] = -(1.0 - s) * prow[i];
                dp[i] = -(1.0 - s) * urow[i];
            }
            add_grad(pg, t.poi, dp.data(), d);
            if (static_cast<int64_t>(vis.size()) < q) {
                for (size_t n = 0; n < cfg.negatives; ++n) {
                    PoiId neg;
                    do {
                        neg = static_cast<PoiId>(rng.uniform_index(q));
                    } while (std::binary_search(vis.begin(), vis.end(), neg));
                    const double* nrow = params.w_poi.row(neg);
                    double sn = sigmoid(dot_rows(urow, nrow, d));
                    total += neg_log_sigmoid(-dot_rows(urow, nrow, d));
                    Vec dn(d);
                    for (int64_t i = 0; i < d; ++i) {
                        du[i] += sn * nrow[i];
                        dn[i] = sn * urow[i];
                    }
                    add_grad(pg, neg, dn.data(), d);
                }
            }
            add_grad(ug, t.user, du.data(), d);
        }
        adam_step(params.w_user, ug, adam.shared_user);
        adam_step(params.w_poi, pg, adam.shared_poi);
    }
    if (!std::isfinite(total)) throw std::runtime_error("mf training: non-finite loss");
    return ctx.tuples.empty() ? 0.0 : total / static_cast<double>(ctx.tuples.size());
}

double seqrec_pass(Model& model, SharedParams& params, const TrainContext& ctx,
                   const BaseTrainConfig& cfg, ModelAdam& adam, Rng& rng) {
    int64_t d = params.w_poi.dim;
    int64_t q = params.w_poi.rows;

    struct Transition {
        UserId user;
        PoiId prev, next;
    };
    std::vector<Transition> trans;
    for (UserId u = 0; u < static_cast<UserId>(ctx.train_seqs.size()); ++u) {
        const auto& s = ctx.train_seqs[u];
        for (size_t i = 0; i + 1 < s.size(); ++i) trans.push_back({u, s[i], s[i + 1]});
    }
    rng.shuffle(trans);

    double total = 0.0;
    size_t count = 0;
    Vec x(d), scores(q), sgrad, dx(d);
    for (size_t start = 0; start < trans.size(); start += cfg.batch_size) {
        size_t end = std::min(start + cfg.batch_size, trans.size());
        SparseGrads ug, pg, tg;
        for (size_t idx = start; idx < end; ++idx) {
            const Transition& tr = trans[idx];
            const double* urow = params.w_user.row(tr.user);
            const double* trow = model.transition.row(tr.prev);
            for (int64_t i = 0; i < d; ++i) x[i] = urow[i] + trow[i];
            for (int64_t l = 0; l < q; ++l)
                scores[l] = dot_rows(x.data(), params.w_poi.row(l), d);
            total += softmax_ce(scores, static_cast<size_t>(tr.next), sgrad);
            ++count;
            std::fill(dx.begin(), dx.end(), 0.0);
            for (int64_t l = 0; l < q; ++l) {
                const double* wp = params.w_poi.row(l);
                for (int64_t i = 0; i < d; ++i) dx[i] += sgrad[l] * wp[i];
                add_grad(pg, l, x.data(), d, sgrad[l]);
            }
            add_grad(ug, tr.user, dx.data(), d);
            add_grad(tg, tr.prev, dx.data(), d);
        }
        adam_step(params.w_user, ug, adam.shared_user);
        adam_step(params.w_poi, pg, adam.shared_poi);
        adam_step(model.transition, tg, adam.own[0]);
    }
    if (!std::isfinite(total)) throw std::runtime_error("seqrec training: non-finite loss");
    return count == 0 ? 0.0 : total / static_cast<double>(count);
}

double gru_pass(Model& model, SharedParams& params, const TrainContext& ctx, ModelAdam& adam,
                Rng& rng) {
    std::vector<UserId> users(ctx.train_seqs.size());
    std::iota(users.begin(), users.end(), UserId{0});
    rng.shuffle(users);

    double total = 0.0;
    size_t count = 0;
    for (UserId u : users) {
        const auto& seq = ctx.train_seqs[u];
        if (seq.size() < 2) continue;
        GruSeqGrads gs = gru_sequence_grads(model, params, u, seq);
        total += gs.loss;
        count += seq.size() - 1;

        auto gates = gate_list(model.gru);
        auto ggrads = gate_list(gs.d_gates);
        for (size_t i = 0; i < gates.size(); ++i)
            adam_step(*gates[i], dense_grads(*ggrads[i]), adam.own[i]);
        SparseGrads ug;
        ug.emplace(u, std::move(gs.d_user));
        adam_step(params.w_user, ug, adam.shared_user);
        adam_step(params.w_poi, gs.d_poi, adam.shared_poi);
    }
    if (!std::isfinite(total)) throw std::runtime_error("gru training: non-finite loss");
    return count == 0 ? 0.0 : total / static_cast<double>(count);
}

}  // namespace

double train_epoch(Model& model, SharedParams& params, const TrainContext& ctx,
                   const BaseTrainConfig& config, ModelAdam& adam, Rng& rng) {
    switch (model.kind) {
        case ModelKind::Top: {
            std::fill(model.top_freq.begin(), model.top_freq.end(), int64_t{0});
            for (const auto& s : ctx.train_seqs)
                for (PoiId p : s) ++model.top_freq[p];
            return 0.0;
        }
        case ModelKind::UTop: {
            for (size_t u = 0; u < ctx.train_seqs.size(); ++u) {
                std::vector<PoiId> pois = ctx.train_seqs[u];
                std::sort(pois.begin(), pois.end());
                auto& freq = model.utop_freq[u];
                freq.clear();
                for (size_t i = 0; i < pois.size();) {
                    size_t j = i;
                    while (j < pois.size() && pois[j] == pois[i]) ++j;
                    freq.emplace_back(pois[i], static_cast<int64_t>(j - i));
                    i = j;
                }
            }
            return 0.0;
        }
        case ModelKind::Mf:
            return mf_pass(model, params, ctx, config, adam, rng);
        case ModelKind::SeqRec:
            return seqrec_pass(model, params, ctx, config, adam, rng);
        case ModelKind::Gru:
            return gru_pass(model, params, ctx, adam, rng);
    }
    return 0.0;
}

namespace {

void write_matrix(std::ostream& out, const std::string& name, const EmbeddingMatrix& m) {
    out << "matrix " << name << " " << m.rows << " " << m.dim << "\n";
    char buf[64];
    for (int64_t i = 0; i < m.rows; ++i) {
        const double* row = m.row(i);
        std::string line;
        for (int64_t j = 0; j < m.dim; ++j) {
            std::snprintf(buf, sizeof(buf), "%a", row[j]);
            if (j) line += '\t';
            line += buf;
        }
        out << line << "\n";
    }
}

EmbeddingMatrix read_matrix(std::istream& in, const std::string& expect_name) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("snapshot truncated");
    std::istringstream hdr(line);
    std::string tag, name;
    int64_t rows, dim;
    if (!(hdr >> tag >> name >> rows >> dim) || tag != "matrix" || name != expect_name)
        throw std::runtime_error("snapshot: expected matrix " + expect_name + ", got: " + line);
    EmbeddingMatrix m(rows, dim);
    for (int64_t i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("snapshot truncated");
        const char* p = line.c_str();
        char* endp = nullptr;
        for (int64_t j = 0; j < dim; ++j) {
            m.row(i)[j] = std::strtod(p, &endp);
            if (endp == p) throw std::runtime_error("snapshot: bad matrix row");
            p = endp;
        }
    }
    return m;
}

}  // namespace

void save_model(const Model& model, const SharedParams& params, const SnapshotMeta& meta,
                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open snapshot for writing: " + path);
    std::string ds = meta.dataset.empty() ? "-" : meta.dataset;
    std::replace(ds.begin(), ds.end(), ' ', '_');
    out << "#n2rec-model-v1 kind=" << to_string(model.kind) << " d=" << model.dim
        << " M=" << params.w_user.rows << " Q=" << params.w_poi.rows << " dataset=" << ds
        << " jtll=" << (meta.jtll ? 1 : 0) << " seed=" << meta.seed << "\n";
    write_matrix(out, "w_user", params.w_user);
    write_matrix(out, "w_poi", params.w_poi);
    switch (model.kind) {
        case ModelKind::Top: {
            out << "freq " << model.top_freq.size() << "\n";
            for (size_t i = 0; i < model.top_freq.size(); ++i)
                out << (i ? "\t" : "") << model.top_freq[i];
            out << "\n";
            break;
        }
        case ModelKind::UTop: {
            out << "utop " << model.utop_freq.size() << "\n";
            for (const auto& freq : model.utop_freq) {
                out << freq.size();
                for (const auto& [p, c] : freq) out << "\t" << p << "\t" << c;
                out << "\n";
            }
            break;
        }
        case ModelKind::Mf:
            break;
        case ModelKind::SeqRec:
            write_matrix(out, "transition", model.transition);
            break;
        case ModelKind::Gru: {
            const char* names[] = {"w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_h", "u_h", "b_h"};
            auto gates = gate_list(model.gru);
            for (size_t i = 0; i < gates.size(); ++i) write_matrix(out, names[i], *gates[i]);
            break;
        }
    }
    if (!out) throw std::runtime_error("snapshot write failed: " + path);
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty snapshot: " + path);
    char kind_buf[32], ds_buf[256];
    long long d, m, q, jtll;
    unsigned long long seed;
    if (std::sscanf(line.c_str(),
                    "#n2rec-model-v1 kind=%31s d=%lld M=%lld Q=%lld dataset=%255s jtll=%lld seed=%llu",
                    kind_buf, &d, &m, &q, ds_buf, &jtll, &seed) != 7)
        throw std::runtime_error("bad or unsupported snapshot header: " + line);

    LoadedModel lm;
    lm.meta.dataset = ds_buf;
    lm.meta.jtll = jtll != 0;
    lm.meta.seed = seed;
    lm.model.kind = model_kind_from_string(kind_buf);
    lm.model.dim = d;
    lm.params.w_user = read_matrix(in, "w_user");
    lm.params.w_poi = read_matrix(in, "w_poi");
    if (lm.params.w_user.rows != m || lm.params.w_poi.rows != q)
        throw std::runtime_error("snapshot matrix shapes disagree with header");
    switch (lm.model.kind) {
        case ModelKind::Top: {
            size_t n;
            std::string tag;
            in >> tag >> n;
            if (tag != "freq") throw std::runtime_error("snapshot: expected freq section");
            lm.model.top_freq.resize(n);
            for (auto& v : lm.model.top_freq) in >> v;
            break;
        }
        case ModelKind::UTop: {
            size_t n;
            std::string tag;
            in >> tag >> n;
            if (tag != "utop") throw std::runtime_error("snapshot: expected utop section");
            lm.model.utop_freq.resize(n);
            for (auto& freq : lm.model.utop_freq) {
                size_t cnt;
                in >> cnt;
                freq.resize(cnt);
                for (auto& [p, c] : freq) in >> p >> c;
            }
            break;
        }
        case ModelKind::Mf:
            break;
        case ModelKind::SeqRec:
            lm.model.transition = read_matrix(in, "transition");
            break;
        case ModelKind::Gru: {
            const char* names[] = {"w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_h", "u_h", "b_h"};
            lm.model.gru = make_gates(d);
            auto gates = gate_list(lm.model.gru);
            for (size_t i = 0; i < gates.size(); ++i) *gates[i] = read_matrix(in, names[i]);
            break;
        }
    }
    if (!in) throw std::runtime_error("snapshot truncated or corrupt: " + path);
    return lm;
}

}  // namespace n2rec
