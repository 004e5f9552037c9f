#include "n2rec/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace n2rec {

namespace {

// days since 1970-01-01 for a civil date (Gregorian, proleptic)
int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    int64_t era = (y >= 0 ? y : y - 399) / 400;
    int yoe = static_cast<int>(y - era * 400);
    int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == '\t' || c == ' ') {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

double parse_double_strict(const std::string& s) {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument("bad number: " + s);
    return v;
}

int64_t parse_i64_strict(const std::string& s) {
    int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("bad integer: " + s);
    return v;
}

void format_row(std::string& out, UserId u, const CheckIn& c, int is_test) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d\t%d\t%.17g\t%.17g\t%lld\t%d\n", u, c.poi, c.lat, c.lon,
                  static_cast<long long>(c.timestamp), is_test);
    out += buf;
}

}  // namespace

int64_t parse_iso8601(const std::string& s) {
    int y, mo, d, h, mi, se;
    char tail = 0;
    int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &se, &tail);
    if (n < 6 || (n == 7 && tail != 'Z'))
        throw std::invalid_argument("bad ISO-8601 timestamp: " + s);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60)
        throw std::invalid_argument("bad ISO-8601 timestamp: " + s);
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
}

ColumnMapping load_mapping(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mapping file: " + path);
    ColumnMapping m;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        if (key == "user_col") m.user_col = static_cast<int>(parse_i64_strict(val));
        else if (key == "poi_col") m.poi_col = static_cast<int>(parse_i64_strict(val));
        else if (key == "lat_col") m.lat_col = static_cast<int>(parse_i64_strict(val));
        else if (key == "lon_col") m.lon_col = static_cast<int>(parse_i64_strict(val));
        else if (key == "time_col") m.time_col = static_cast<int>(parse_i64_strict(val));
        else if (key == "time_format") m.time_format = val;
        else throw std::runtime_error("unknown mapping key: " + key);
    }
    if (m.time_format != "unix" && m.time_format != "iso8601")
        throw std::runtime_error("time_format must be unix or iso8601");
    return m;
}

ParseResult parse_raw(const std::string& path, const ColumnMapping& mapping) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    ParseResult res;
    size_t total = 0;
    int max_col = std::max({mapping.user_col, mapping.poi_col, mapping.lat_col, mapping.lon_col,
                            mapping.time_col});
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++total;
        try {
            auto fields = split_fields(line);
            if (static_cast<int>(fields.size()) <= max_col)
                throw std::invalid_argument("too few columns");
            RawCheckIn r;
            r.user_key = fields[mapping.user_col];
            r.poi_key = fields[mapping.poi_col];
            r.lat = parse_double_strict(fields[mapping.lat_col]);
            r.lon = parse_double_strict(fields[mapping.lon_col]);
            if (r.lat < -90.0 || r.lat > 90.0 || r.lon < -180.0 || r.lon > 180.0)
                throw std::invalid_argument("coordinates out of range");
            if (mapping.time_format == "iso8601")
                r.timestamp = parse_iso8601(fields[mapping.time_col]);
            else
                r.timestamp = parse_i64_strict(fields[mapping.time_col]);
            if (r.timestamp < 0) throw std::invalid_argument("negative timestamp");
            res.records.push_back(std::move(r));
        } catch (const std::exception&) {
            ++res.skipped;
        }
    }
    if (total > 0 && res.skipped * 2 > total)
        throw std::runtime_error("more than 50% of lines unparsable; check column mapping");
    return res;
}

Dataset preprocess(const std::vector<RawCheckIn>& raw, int min_visits, int max_visits,
                   int min_users_per_poi) {
    if (min_visits <= 0 || max_visits <= 0 || min_users_per_poi <= 0)
        throw std::invalid_argument("preprocess thresholds must be positive");
    if (min_visits > max_visits)
        throw std::invalid_argument("min_visits must not exceed max_visits");

    // step 1: keep users with total visit count inside the band
    std::unordered_map<std::string, int> user_count;
    for (const auto& r : raw) ++user_count[r.user_key];

    auto user_ok = [&](const std::string& k) {
        int c = user_count.at(k);
        return c >= min_visits && c <= max_visits;
    };

    // step 2: distinct surviving visitors per POI
    std::unordered_map<std::string, std::unordered_map<std::string, bool>> poi_visitors;
    for (const auto& r : raw)
        if (user_ok(r.user_key)) poi_visitors[r.poi_key][r.user_key] = true;

    Dataset d;
    std::vector<std::vector<CheckIn>>& seqs = d.sequences;
    for (const auto& r : raw) {
        if (!user_ok(r.user_key)) continue;
        auto it = poi_visitors.find(r.poi_key);
        if (it == poi_visitors.end() ||
            static_cast<int>(it->second.size()) < min_users_per_poi)
            continue;
        UserId u;
        auto uit = d.user_index.find(r.user_key);
        if (uit == d.user_index.end()) {
            u = static_cast<UserId>(d.user_keys.size());
            d.user_index.emplace(r.user_key, u);
            d.user_keys.push_back(r.user_key);
            seqs.emplace_back();
        } else {
            u = uit->second;
        }
        PoiId p;
        auto pit = d.poi_index.find(r.poi_key);
        if (pit == d.poi_index.end()) {
            p = static_cast<PoiId>(d.poi_keys.size());
            d.poi_index.emplace(r.poi_key, p);
            d.poi_keys.push_back(r.poi_key);
        } else {
            p = pit->second;
        }
        seqs[u].push_back(CheckIn{u, p, r.lat, r.lon, r.timestamp});
    }

    d.num_users = static_cast<int32_t>(d.user_keys.size());
    d.num_pois = static_cast<int32_t>(d.poi_keys.size());
    if (d.num_users == 0 || d.num_pois == 0)
        throw std::runtime_error("preprocessing produced an empty dataset");

    for (auto& s : seqs)
        std::stable_sort(s.begin(), s.end(),
                         [](const CheckIn& a, const CheckIn& b) { return a.timestamp < b.timestamp; });
    return d;
}

void split(Dataset& dataset, double train_fraction) {
    std::vector<size_t> sp(dataset.num_users);
    for (int32_t u = 0; u < dataset.num_users; ++u) {
        size_t len = dataset.sequences[u].size();
        if (len < 2)
            throw std::runtime_error("cannot split: user " + std::to_string(u) +
                                     " has a sequence of length " + std::to_string(len));
        size_t k = static_cast<size_t>(std::floor(train_fraction * static_cast<double>(len)));
        sp[u] = std::clamp(k, size_t{1}, len - 1);
    }
    dataset.split_points = std::move(sp);
}

void save_canonical(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    std::string buf;
    buf += "#n2rec-v1 M=" + std::to_string(dataset.num_users) +
           " Q=" + std::to_string(dataset.num_pois) + "\n";
    for (size_t i = 0; i < dataset.user_keys.size(); ++i)
        buf += "#user\t" + std::to_string(i) + "\t" + dataset.user_keys[i] + "\n";
    for (size_t i = 0; i < dataset.poi_keys.size(); ++i)
        buf += "#poi\t" + std::to_string(i) + "\t" + dataset.poi_keys[i] + "\n";
    for (int32_t u = 0; u < dataset.num_users; ++u) {
        const auto& s = dataset.sequences[u];
        size_t sp = dataset.split_points ? (*dataset.split_points)[u] : s.size();
        for (size_t i = 0; i < s.size(); ++i)
            format_row(buf, u, s[i], i >= sp ? 1 : 0);
    }
    out << buf;
    if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset load_canonical(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);
    int32_t m = -1, q = -1;
    if (std::sscanf(line.c_str(), "#n2rec-v1 M=%d Q=%d", &m, &q) != 2 || m < 0 || q < 0)
        throw std::runtime_error("bad or unsupported dataset header: " + line);

    Dataset d;
    d.num_users = m;
    d.num_pois = q;
    d.sequences.resize(m);
    d.user_keys.resize(m);
    d.poi_keys.resize(q);
    std::vector<bool> user_key_seen(m, false), poi_key_seen(q, false);
    std::vector<size_t> sp(m, 0);
    bool any_test = false;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto f = split_fields(line);
            if (f.size() == 3 && (f[0] == "#user" || f[0] == "#poi")) {
                size_t idx = static_cast<size_t>(parse_i64_strict(f[1]));
                if (f[0] == "#user") {
                    if (idx >= static_cast<size_t>(m)) throw std::runtime_error("user key index out of range");
                    d.user_keys[idx] = f[2];
                    user_key_seen[idx] = true;
                } else {
                    if (idx >= static_cast<size_t>(q)) throw std::runtime_error("poi key index out of range");
                    d.poi_keys[idx] = f[2];
                    poi_key_seen[idx] = true;
                }
            }
            continue;
        }
        auto f = split_fields(line);
        if (f.size() != 6) throw std::runtime_error("bad dataset row: " + line);
        CheckIn c;
        c.user = static_cast<UserId>(parse_i64_strict(f[0]));
        c.poi = static_cast<PoiId>(parse_i64_strict(f[1]));
        c.lat = parse_double_strict(f[2]);
        c.lon = parse_double_strict(f[3]);
        c.timestamp = parse_i64_strict(f[4]);
        int is_test = static_cast<int>(parse_i64_strict(f[5]));
        if (c.user < 0 || c.user >= m || c.poi < 0 || c.poi >= q)
            throw std::runtime_error("dataset row indices out of declared range (corrupt file)");
        auto& seq = d.sequences[c.user];
        if (!seq.empty() && seq.back().timestamp > c.timestamp)
            throw std::runtime_error("dataset rows not sorted by timestamp (corrupt file)");
        if (is_test == 0) {
            if (sp[c.user] != seq.size())
                throw std::runtime_error("train row after test row for user " + std::to_string(c.user));
            sp[c.user] = seq.size() + 1;
        } else {
            any_test = true;
        }
        seq.push_back(c);
    }

    for (int32_t u = 0; u < m; ++u) {
        if (d.sequences[u].empty())
            throw std::runtime_error("declared user count does not match rows (corrupt file)");
        if (!user_key_seen[u]) d.user_keys[u] = std::to_string(u);
    }
    for (int32_t p = 0; p < q; ++p)
        if (!poi_key_seen[p]) d.poi_keys[p] = std::to_string(p);
    for (UserId u = 0; u < m; ++u) d.user_index.emplace(d.user_keys[u], u);
    for (PoiId p = 0; p < q; ++p) d.poi_index.emplace(d.poi_keys[p], p);

    if (any_test) {
        for (int32_t u = 0; u < m; ++u)
            if (sp[u] == 0 || sp[u] == d.sequences[u].size())
                throw std::runtime_error("split dataset must have train and test rows for every user");
        d.split_points = std::move(sp);
    }
    return d;
}

}  // namespace n2rec
