#include "n2rec/sampling.hpp"

#include <algorithm>
#include <stdexcept>

namespace n2rec {

bool VisitorIndex::visited(UserId user, PoiId poi) const {
    const auto& v = visitors_[poi];
    return std::binary_search(v.begin(), v.end(), user);
}

std::vector<TrainTuple> build_train_tuples(const Dataset& dataset, bool multiplicity) {
    if (!dataset.is_split()) throw std::runtime_error("build_train_tuples requires a split dataset");
    std::vector<TrainTuple> out;
    for (UserId u = 0; u < dataset.num_users; ++u) {
        auto train = dataset.train_of(u);
        if (multiplicity) {
            std::vector<PoiId> pois;
            pois.reserve(train.size());
            for (const auto& c : train) pois.push_back(c.poi);
            std::sort(pois.begin(), pois.end());
            for (PoiId p : pois) out.push_back({u, p});
        } else {
            std::vector<PoiId> pois;
            pois.reserve(train.size());
            for (const auto& c : train) pois.push_back(c.poi);
            std::sort(pois.begin(), pois.end());
            pois.erase(std::unique(pois.begin(), pois.end()), pois.end());
            for (PoiId p : pois) out.push_back({u, p});
        }
    }
    return out;
}

VisitorIndex build_visitor_index(const Dataset& dataset) {
    if (!dataset.is_split()) throw std::runtime_error("build_visitor_index requires a split dataset");
    std::vector<std::vector<UserId>> per_poi(dataset.num_pois);
    for (UserId u = 0; u < dataset.num_users; ++u)
        for (const auto& c : dataset.train_of(u)) per_poi[c.poi].push_back(u);
    VisitorIndex idx(dataset.num_users, dataset.num_pois);
    for (PoiId p = 0; p < dataset.num_pois; ++p) {
        auto& v = per_poi[p];
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        idx.add_sorted(p, std::move(v));
    }
    return idx;
}

std::vector<UserId> sample_negatives(const VisitorIndex& index, PoiId poi, size_t k, Rng& rng) {
    size_t comp = index.complement_size(poi);
    size_t want = std::min(k, comp);
    std::vector<UserId> out;
    if (want == 0) return out;
    out.reserve(want);

    size_t m = static_cast<size_t>(index.num_users());
    const auto& vis = index.visitors(poi);

    if (vis.size() * 2 > m) {
        // dense POI: materialize the complement and partially shuffle it
        std::vector<UserId> comp_users;
        comp_users.reserve(comp);
        size_t vi = 0;
        for (UserId u = 0; u < index.num_users(); ++u) {
            if (vi < vis.size() && vis[vi] == u) {
                ++vi;
            } else {
                comp_users.push_back(u);
            }
        }
        for (size_t i = 0; i < want; ++i) {
            size_t j = i + rng.uniform_index(comp_users.size() - i);
            std::swap(comp_users[i], comp_users[j]);
            out.push_back(comp_users[i]);
        }
        return out;
    }

    // rejection sampling in index space
    while (out.size() < want) {
        UserId u = static_cast<UserId>(rng.uniform_index(m));
        if (index.visited(u, poi)) continue;
        if (std::find(out.begin(), out.end(), u) != out.end()) continue;
        out.push_back(u);
    }
    return out;
}

}  // namespace n2rec
