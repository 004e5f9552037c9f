#pragma once

#include <optional>
#include <string>
#include <vector>

#include "n2rec/models.hpp"

namespace n2rec {

struct JointConfig {
    ModelKind model = ModelKind::Gru;
    int64_t dim = 64;
    int epochs = 20;
    double lr = 0.001;
    std::optional<double> model_lr;  // base-model override; defaults to lr
    size_t batch_size = 64;
    size_t negatives = 5;
    double dropout = 0.8;
    bool jtll_enabled = true;
    uint64_t seed = 0;
    bool tuple_multiplicity = false;
    bool fixed_negatives = false;
};

struct EpochLog {
    int epoch;
    double jtll_loss;
    double model_loss;
};

struct JointResult {
    Model model;
    SharedParams params;
    std::vector<EpochLog> log;
};

// Per epoch: one JTLL pass over l_train (when enabled), then the base model's
// own pass; both update the shared embedding matrices. Independent RNG
// substreams keep the base model's randomness unaffected by the JTLL toggle.
JointResult joint_train(const Dataset& dataset, const JointConfig& config);

JointConfig load_joint_config(const std::string& path, JointConfig base = {});

}  // namespace n2rec
