#pragma once

#include <optional>
#include <vector>

#include "n2rec/optim.hpp"
#include "n2rec/sampling.hpp"

namespace n2rec {

struct SharedParams {
    EmbeddingMatrix w_user;  // M x d
    EmbeddingMatrix w_poi;   // Q x d

    bool operator==(const SharedParams&) const = default;
};

// -log s(u_h . l_b) - sum_n log s(-u_n . l_b)
double jtll_loss(const Vec& pos_user, const Vec& anchor_poi, const std::vector<Vec>& neg_users);

struct JtllGrads {
    Vec d_pos_user;
    Vec d_anchor_poi;
    std::vector<Vec> d_neg_users;
};
JtllGrads jtll_grads(const Vec& pos_user, const Vec& anchor_poi, const std::vector<Vec>& neg_users);

struct JtllConfig {
    size_t batch_size = 64;
    size_t negatives = 5;
    DropoutSpec dropout;
    bool fixed_negatives = false;
};

// Negatives drawn once and reused across epochs when fixed_negatives is set.
using NegativeCache = std::vector<std::vector<UserId>>;

// One pass over l_train: shuffle, batch, sample negatives, accumulate summed
// gradients per batch, one Adam step per batch. Returns mean per-tuple loss.
double jtll_epoch(SharedParams& params, const std::vector<TrainTuple>& tuples,
                  const VisitorIndex& index, const JtllConfig& config, AdamState& adam_user,
                  AdamState& adam_poi, Rng& rng, NegativeCache* cache = nullptr);

}  // namespace n2rec
