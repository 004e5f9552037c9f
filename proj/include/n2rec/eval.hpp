#pragma once

#include <map>
#include <string>
#include <vector>

#include "n2rec/models.hpp"

namespace n2rec {

struct EvalReport {
    std::map<int, double> acc_at;  // K -> N2-Acc@K
    double mrr = 0.0;
    size_t num_samples = 0;

    bool operator==(const EvalReport&) const = default;
};

// L minus the user's train-visited POIs; fixed across all test steps
std::vector<PoiId> candidate_set(const Dataset& dataset, UserId user);

// descending score, ties by ascending PoiId, abstain sentinels last
std::vector<PoiId> rank_candidates(const std::vector<double>& scores,
                                   const std::vector<PoiId>& candidates);

EvalReport evaluate(const Model& model, const SharedParams& params, const Dataset& dataset,
                    const std::vector<int>& ks = {1, 5, 10, 20});

std::string format_report_table(const EvalReport& report);
std::string format_report_line(const EvalReport& report, const std::string& dataset,
                               const std::string& model, bool jtll, uint64_t seed);

}  // namespace n2rec
