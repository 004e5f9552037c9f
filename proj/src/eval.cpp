#include "n2rec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace n2rec {

std::vector<PoiId> candidate_set(const Dataset& dataset, UserId user) {
    std::vector<bool> visited(dataset.num_pois, false);
    for (const auto& c : dataset.train_of(user)) visited[c.poi] = true;
    std::vector<PoiId> out;
    for (PoiId p = 0; p < dataset.num_pois; ++p)
        if (!visited[p]) out.push_back(p);
    return out;
}

std::vector<PoiId> rank_candidates(const std::vector<double>& scores,
                                   const std::vector<PoiId>& candidates) {
    if (scores.size() != candidates.size())
        throw std::invalid_argument("rank_candidates: scores/candidates size mismatch");
    for (double s : scores)
        if (std::isnan(s)) throw std::runtime_error("rank_candidates: NaN score");
    std::vector<size_t> order(candidates.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return candidates[a] < candidates[b];
    });
    std::vector<PoiId> out(order.size());
    for (size_t i = 0; i < order.size(); ++i) out[i] = candidates[order[i]];
    return out;
}

EvalReport evaluate(const Model& model, const SharedParams& params, const Dataset& dataset,
                    const std::vector<int>& ks) {
    if (!dataset.is_split()) throw std::runtime_error("evaluate requires a split dataset");
    EvalReport report;
    for (int k : ks) report.acc_at[k] = 0.0;
    double rr_sum = 0.0;
    std::map<int, size_t> hits;
    for (int k : ks) hits[k] = 0;

    for (UserId u = 0; u < dataset.num_users; ++u) {
        std::vector<PoiId> candidates = candidate_set(dataset, u);
        std::vector<bool> in_candidates(dataset.num_pois, false);
        for (PoiId p : candidates) in_candidates[p] = true;

        // history grows with earlier test visits; candidate mask stays fixed
        std::vector<PoiId> history;
        for (const auto& c : dataset.train_of(u)) history.push_back(c.poi);

        for (const auto& c : dataset.test_of(u)) {
            if (in_candidates[c.poi] && !candidates.empty()) {
                Query query{u, history};
                std::vector<double> scores = score_candidates(model, params, query, candidates);
                for (double s : scores)
                    if (std::isnan(s)) throw std::runtime_error("evaluate: NaN score");

                // rank of the ground truth = 1 + #better + #equal-with-smaller-id
                size_t gt_idx = 0;
                for (size_t i = 0; i < candidates.size(); ++i)
                    if (candidates[i] == c.poi) gt_idx = i;
                double gt_score = scores[gt_idx];
                if (gt_score == kAbstainScore) {
                    // abstained: unranked miss, reciprocal rank 0
                } else {
                    size_t rank = 1;
                    for (size_t i = 0; i < candidates.size(); ++i) {
                        if (i == gt_idx) continue;
                        if (scores[i] > gt_score ||
                            (scores[i] == gt_score && candidates[i] < c.poi))
                            ++rank;
                    }
                    rr_sum += 1.0 / static_cast<double>(rank);
                    for (int k : ks)
                        if (rank <= static_cast<size_t>(k)) ++hits[k];
                }
                ++report.num_samples;
            }
            history.push_back(c.poi);
        }
    }

    if (report.num_samples == 0)
        throw std::runtime_error("evaluate: no qualifying test samples (every test POI was train-visited)");
    for (int k : ks)
        report.acc_at[k] = static_cast<double>(hits[k]) / static_cast<double>(report.num_samples);
    report.mrr = rr_sum / static_cast<double>(report.num_samples);
    return report;
}

std::string format_report_table(const EvalReport& report) {
    std::string out = "metric        value\n";
    char buf[64];
    for (const auto& [k, v] : report.acc_at) {
        std::snprintf(buf, sizeof(buf), "N2-Acc@%-5d %.6f\n", k, v);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "N2-MRR       %.6f\n", report.mrr);
    out += buf;
    std::snprintf(buf, sizeof(buf), "samples      %zu\n", report.num_samples);
    out += buf;
    return out;
}

std::string format_report_line(const EvalReport& report, const std::string& dataset,
                               const std::string& model, bool jtll, uint64_t seed) {
    char buf[512];
    auto acc = [&](int k) { return report.acc_at.count(k) ? report.acc_at.at(k) : 0.0; };
    std::snprintf(buf, sizeof(buf),
                  "dataset=%s model=%s jtll=%s seed=%llu acc@1=%.6f acc@5=%.6f acc@10=%.6f "
                  "acc@20=%.6f mrr=%.6f n_samples=%zu",
                  dataset.c_str(), model.c_str(), jtll ? "on" : "off",
                  static_cast<unsigned long long>(seed), acc(1), acc(5), acc(10), acc(20),
                  report.mrr, report.num_samples);
    return buf;
}

}  // namespace n2rec
