#pragma once

#include <vector>

#include "n2rec/dataset.hpp"
#include "n2rec/rng.hpp"

namespace n2rec {

struct TrainTuple {
    UserId user;  // positive user
    PoiId poi;    // anchor POI

    bool operator==(const TrainTuple&) const = default;
};

// Per-POI sorted visitor sets over the train partitions; immutable once built.
class VisitorIndex {
public:
    VisitorIndex(int32_t num_users, int32_t num_pois)
        : num_users_(num_users), visitors_(num_pois) {}

    int32_t num_users() const { return num_users_; }
    int32_t num_pois() const { return static_cast<int32_t>(visitors_.size()); }

    const std::vector<UserId>& visitors(PoiId poi) const { return visitors_[poi]; }
    size_t complement_size(PoiId poi) const { return num_users_ - visitors_[poi].size(); }
    bool visited(UserId user, PoiId poi) const;

    void add_sorted(PoiId poi, std::vector<UserId> users) { visitors_[poi] = std::move(users); }

private:
    int32_t num_users_;
    std::vector<std::vector<UserId>> visitors_;
};

// One tuple per distinct (user, poi) train pair by default; with multiplicity,
// one tuple per train check-in event.
std::vector<TrainTuple> build_train_tuples(const Dataset& dataset, bool multiplicity = false);

VisitorIndex build_visitor_index(const Dataset& dataset);

// k distinct users that never visited poi in train, uniform without replacement
std::vector<UserId> sample_negatives(const VisitorIndex& index, PoiId poi, size_t k, Rng& rng);

}  // namespace n2rec
