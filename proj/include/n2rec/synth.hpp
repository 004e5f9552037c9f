#pragma once

#include "n2rec/dataset.hpp"

namespace n2rec {

struct SynthConfig {
    int32_t num_users = 500;
    int32_t num_pois = 200;
    int32_t num_groups = 10;
    double epsilon = 0.2;  // out-of-group visit probability
    int min_len = 20;
    int max_len = 50;
    uint64_t seed = 0;
};

// Planted-group check-in generator: users and POIs are assigned to groups
// round-robin; each visit stays in the user's group with probability 1-epsilon.
Dataset generate(const SynthConfig& config);

}  // namespace n2rec
