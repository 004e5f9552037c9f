#include "n2rec/synth.hpp"

#include <stdexcept>
#include <vector>

#include "n2rec/rng.hpp"

namespace n2rec {

Dataset generate(const SynthConfig& config) {
    if (config.num_groups < 2) throw std::invalid_argument("synth: need at least 2 groups");
    if (config.num_pois < config.num_groups || config.num_users < config.num_groups)
        throw std::invalid_argument("synth: need at least one user and POI per group");
    if (config.epsilon < 0.0 || config.epsilon > 1.0)
        throw std::invalid_argument("synth: epsilon must be in [0,1]");
    if (config.min_len < 1 || config.min_len > config.max_len)
        throw std::invalid_argument("synth: bad sequence length range");

    int32_t g = config.num_groups;
    std::vector<std::vector<PoiId>> group_pois(g);
    for (PoiId p = 0; p < config.num_pois; ++p) group_pois[p % g].push_back(p);

    Dataset d;
    d.num_users = config.num_users;
    d.num_pois = config.num_pois;
    d.sequences.resize(config.num_users);
    for (UserId u = 0; u < config.num_users; ++u) {
        d.user_keys.push_back("u" + std::to_string(u));
        d.user_index.emplace(d.user_keys.back(), u);
    }
    for (PoiId p = 0; p < config.num_pois; ++p) {
        d.poi_keys.push_back("p" + std::to_string(p));
        d.poi_index.emplace(d.poi_keys.back(), p);
    }

    for (UserId u = 0; u < config.num_users; ++u) {
        Rng rng(derive_seed(config.seed, 0x5d4e ^ static_cast<uint64_t>(u)));
        int group = u % g;
        int len = static_cast<int>(rng.uniform_int(config.min_len, config.max_len));
        auto& seq = d.sequences[u];
        seq.reserve(len);
        for (int i = 0; i < len; ++i) {
            PoiId p;
            if (rng.uniform01() < 1.0 - config.epsilon) {
                const auto& pool = group_pois[group];
                p = pool[rng.uniform_index(pool.size())];
            } else {
                p = static_cast<PoiId>(rng.uniform_index(config.num_pois));
            }
            int poi_group = p % g;
            CheckIn c;
            c.user = u;
            c.poi = p;
            c.lat = static_cast<double>(poi_group) + rng.uniform(-0.01, 0.01);
            c.lon = static_cast<double>(poi_group) + rng.uniform(-0.01, 0.01);
            c.timestamp = i + 1;
            seq.push_back(c);
        }
    }
    return d;
}

}  // namespace n2rec
