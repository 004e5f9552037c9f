#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace n2rec {

using UserId = int32_t;
using PoiId = int32_t;

struct RawCheckIn {
    std::string user_key;
    std::string poi_key;
    double lat = 0.0;
    double lon = 0.0;
    int64_t timestamp = 0;
};

struct CheckIn {
    UserId user = 0;
    PoiId poi = 0;
    double lat = 0.0;
    double lon = 0.0;
    int64_t timestamp = 0;

    bool operator==(const CheckIn&) const = default;
};

struct Dataset {
    int32_t num_users = 0;  // M
    int32_t num_pois = 0;   // Q
    std::vector<std::vector<CheckIn>> sequences;           // per user, chronological
    std::optional<std::vector<size_t>> split_points;       // train/test boundary per user
    std::vector<std::string> user_keys;                    // dense id -> original key
    std::vector<std::string> poi_keys;
    std::unordered_map<std::string, UserId> user_index;
    std::unordered_map<std::string, PoiId> poi_index;

    bool is_split() const { return split_points.has_value(); }

    std::span<const CheckIn> train_of(UserId u) const {
        const auto& s = sequences[u];
        size_t sp = split_points ? (*split_points)[u] : s.size();
        return {s.data(), sp};
    }
    std::span<const CheckIn> test_of(UserId u) const {
        const auto& s = sequences[u];
        size_t sp = split_points ? (*split_points)[u] : s.size();
        return {s.data() + sp, s.size() - sp};
    }

    size_t total_visits() const {
        size_t n = 0;
        for (const auto& s : sequences) n += s.size();
        return n;
    }

    bool operator==(const Dataset& o) const {
        return num_users == o.num_users && num_pois == o.num_pois &&
               sequences == o.sequences && split_points == o.split_points &&
               user_keys == o.user_keys && poi_keys == o.poi_keys;
    }
};

struct ColumnMapping {
    int user_col = 0;
    int poi_col = 1;
    int lat_col = 2;
    int lon_col = 3;
    int time_col = 4;
    std::string time_format = "unix";  // "unix" or "iso8601"
};

struct ParseResult {
    std::vector<RawCheckIn> records;
    size_t skipped = 0;
};

// "YYYY-MM-DDTHH:MM:SSZ" -> unix seconds; throws on malformed input
int64_t parse_iso8601(const std::string& s);

ColumnMapping load_mapping(const std::string& path);

ParseResult parse_raw(const std::string& path, const ColumnMapping& mapping);

Dataset preprocess(const std::vector<RawCheckIn>& raw, int min_visits = 20,
                   int max_visits = 50, int min_users_per_poi = 10);

void split(Dataset& dataset, double train_fraction = 0.8);

void save_canonical(const Dataset& dataset, const std::string& path);
Dataset load_canonical(const std::string& path);

}  // namespace n2rec
