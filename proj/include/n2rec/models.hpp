#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "n2rec/jtll.hpp"

namespace n2rec {

enum class ModelKind { Top, UTop, Mf, SeqRec, Gru };

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind kind);

inline constexpr double kAbstainScore = -std::numeric_limits<double>::infinity();

struct GruGates {
    // update (z), reset (r), candidate (h) gates; W_* act on the input,
    // U_* on the previous hidden state
    EmbeddingMatrix w_z, u_z, b_z;
    EmbeddingMatrix w_r, u_r, b_r;
    EmbeddingMatrix w_h, u_h, b_h;

    bool operator==(const GruGates&) const = default;
};

struct Model {
    ModelKind kind = ModelKind::Top;
    int64_t dim = 0;

    std::vector<int64_t> top_freq;                                  // TOP: global train counts
    std::vector<std::vector<std::pair<PoiId, int64_t>>> utop_freq;  // U-TOP: per-user counts
    EmbeddingMatrix transition;                                     // SEQREC: Q x d
    GruGates gru;                                                   // GRU gate parameters

    bool operator==(const Model&) const = default;
};

Model make_model(ModelKind kind, int32_t num_users, int32_t num_pois, int64_t dim, Rng& rng);

struct Query {
    UserId user;
    std::span<const PoiId> history;  // chronological POI visits
};

std::vector<double> score_candidates(const Model& model, const SharedParams& params,
                                     const Query& query, const std::vector<PoiId>& candidates);

// Precomputed training-side views of the dataset, shared across epochs.
struct TrainContext {
    std::vector<TrainTuple> tuples;                    // l_train
    VisitorIndex index;                                // visitors per POI
    std::vector<std::vector<PoiId>> visited;           // sorted train-visited POIs per user
    std::vector<std::vector<PoiId>> train_seqs;        // train partition as POI id lists
};
TrainContext build_train_context(const Dataset& dataset, bool tuple_multiplicity = false);

struct BaseTrainConfig {
    size_t batch_size = 64;
    size_t negatives = 5;  // MF: sampled unvisited-POI negatives per positive
};

struct ModelAdam {
    AdamState shared_user;
    AdamState shared_poi;
    std::vector<AdamState> own;  // model-specific parameter states
};
ModelAdam make_model_adam(const Model& model, const SharedParams& params, double lr);

// One epoch of the base model's own objective; returns mean loss (0 for the
// counting models). Gradients of shared rows flow into params.
double train_epoch(Model& model, SharedParams& params, const TrainContext& ctx,
                   const BaseTrainConfig& config, ModelAdam& adam, Rng& rng);

// Total softmax cross-entropy of a GRU pass over one sequence (all transitions),
// with gradients for every parameter it touches. Exposed for gradient checking.
struct GruSeqGrads {
    double loss = 0.0;
    GruGates d_gates;
    Vec d_user;                    // gradient of W_user[user]
    SparseGrads d_poi;             // gradients of touched W_poi rows
};
double gru_sequence_loss(const Model& model, const SharedParams& params, UserId user,
                         const std::vector<PoiId>& seq);
GruSeqGrads gru_sequence_grads(const Model& model, const SharedParams& params, UserId user,
                               const std::vector<PoiId>& seq);

struct SnapshotMeta {
    std::string dataset;
    bool jtll = false;
    uint64_t seed = 0;
};
void save_model(const Model& model, const SharedParams& params, const SnapshotMeta& meta,
                const std::string& path);
struct LoadedModel {
    Model model;
    SharedParams params;
    SnapshotMeta meta;
};
LoadedModel load_model(const std::string& path);

}  // namespace n2rec
