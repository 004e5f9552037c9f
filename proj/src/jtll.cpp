#include "n2rec/jtll.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace n2rec {

namespace {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void check_dims(const Vec& pos_user, const Vec& anchor_poi, const std::vector<Vec>& neg_users) {
    if (pos_user.size() != anchor_poi.size())
        throw std::invalid_argument("jtll: embedding dimension mismatch");
    for (const auto& n : neg_users)
        if (n.size() != anchor_poi.size())
            throw std::invalid_argument("jtll: embedding dimension mismatch");
}

}  // namespace

double jtll_loss(const Vec& pos_user, const Vec& anchor_poi, const std::vector<Vec>& neg_users) {
    check_dims(pos_user, anchor_poi, neg_users);
    double loss = neg_log_sigmoid(dot(pos_user, anchor_poi));
    for (const auto& n : neg_users) loss += neg_log_sigmoid(-dot(n, anchor_poi));
    return loss;
}

JtllGrads jtll_grads(const Vec& pos_user, const Vec& anchor_poi,
                     const std::vector<Vec>& neg_users) {
    check_dims(pos_user, anchor_poi, neg_users);
    size_t d = anchor_poi.size();
    JtllGrads g;
    g.d_pos_user.assign(d, 0.0);
    g.d_anchor_poi.assign(d, 0.0);
    g.d_neg_users.resize(neg_users.size());

    double pos_coef = -(1.0 - sigmoid(dot(pos_user, anchor_poi)));
    for (size_t i = 0; i < d; ++i) {
        g.d_pos_user[i] = pos_coef * anchor_poi[i];
        g.d_anchor_poi[i] = pos_coef * pos_user[i];
    }
    for (size_t n = 0; n < neg_users.size(); ++n) {
        double neg_coef = sigmoid(dot(neg_users[n], anchor_poi));
        g.d_neg_users[n].assign(d, 0.0);
        for (size_t i = 0; i < d; ++i) {
            g.d_neg_users[n][i] = neg_coef * anchor_poi[i];
            g.d_anchor_poi[i] += neg_coef * neg_users[n][i];
        }
    }
    return g;
}

double jtll_epoch(SharedParams& params, const std::vector<TrainTuple>& tuples,
                  const VisitorIndex& index, const JtllConfig& config, AdamState& adam_user,
                  AdamState& adam_poi, Rng& rng, NegativeCache* cache) {
    if (tuples.empty()) return 0.0;
    int64_t d = params.w_poi.dim;

    bool use_cache = config.fixed_negatives && cache != nullptr;
    if (use_cache && cache->empty()) {
        cache->reserve(tuples.size());
        for (const auto& t : tuples)
            cache->push_back(sample_negatives(index, t.poi, config.negatives, rng));
    }

    std::vector<size_t> order(tuples.size());
    std::iota(order.begin(), order.end(), size_t{0});
    rng.shuffle(order);

    double total_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
        size_t end = std::min(start + config.batch_size, order.size());
        SparseGrads user_grads, poi_grads;
        for (size_t idx = start; idx < end; ++idx) {
            const TrainTuple& t = tuples[order[idx]];
            std::vector<UserId> negs = use_cache
                ? (*cache)[order[idx]]
                : sample_negatives(index, t.poi, config.negatives, rng);

            auto pos = apply_dropout(params.w_user.row_copy(t.user), config.dropout, rng);
            auto anchor = apply_dropout(params.w_poi.row_copy(t.poi), config.dropout, rng);
            std::vector<Vec> neg_rows, neg_masks;
            neg_rows.reserve(negs.size());
            for (UserId n : negs) {
                auto dn = apply_dropout(params.w_user.row_copy(n), config.dropout, rng);
                neg_rows.push_back(std::move(dn.value));
                neg_masks.push_back(std::move(dn.mask));
            }

            total_loss += jtll_loss(pos.value, anchor.value, neg_rows);
            JtllGrads g = jtll_grads(pos.value, anchor.value, neg_rows);

            // gradients flow through the same dropout masks as the forward pass
            for (int64_t i = 0; i < d; ++i) {
                g.d_pos_user[i] *= pos.mask[i];
                g.d_anchor_poi[i] *= anchor.mask[i];
            }
            for (size_t n = 0; n < neg_rows.size(); ++n)
                for (int64_t i = 0; i < d; ++i) g.d_neg_users[n][i] *= neg_masks[n][i];

            add_grad(user_grads, t.user, g.d_pos_user.data(), d);
            add_grad(poi_grads, t.poi, g.d_anchor_poi.data(), d);
            for (size_t n = 0; n < negs.size(); ++n)
                add_grad(user_grads, negs[n], g.d_neg_users[n].data(), d);
        }
        if (!std::isfinite(total_loss))
            throw std::runtime_error("jtll_epoch: non-finite loss in batch starting at tuple " +
                                     std::to_string(start));
        adam_step(params.w_user, user_grads, adam_user);
        adam_step(params.w_poi, poi_grads, adam_poi);
    }
    return total_loss / static_cast<double>(tuples.size());
}

}  // namespace n2rec
