// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
// Criteria that need the raw Gowalla dump are skipped unless N2REC_GOWALLA_RAW
// points at it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "n2rec/eval.hpp"
#include "n2rec/joint.hpp"
#include "n2rec/synth.hpp"

using namespace n2rec;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name,
                detail.c_str());
    if (!pass) ++failures;
}

void report_skip(int id, const char* name, const std::string& why) {
    std::printf("[SKIP] criterion %d: %s (%s)\n", id, name, why.c_str());
}

Vec random_row(Rng& rng, int64_t d) {
    Vec v(d);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

// ---- criterion 1: triplet-loss gradients vs finite differences ----
void criterion_1() {
    auto t0 = Clock::now();
    Rng rng(123);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int64_t d = std::vector<int64_t>{2, 8, 32}[rng.uniform_index(3)];
        size_t k = rng.uniform_index(9);
        Vec pos = random_row(rng, d), anchor = random_row(rng, d);
        std::vector<Vec> negs;
        for (size_t i = 0; i < k; ++i) negs.push_back(random_row(rng, d));

        Vec flat;
        for (double v : pos) flat.push_back(v);
        for (double v : anchor) flat.push_back(v);
        for (const auto& n : negs)
            for (double v : n) flat.push_back(v);
        auto f = [&](const Vec& x) {
            Vec p(x.begin(), x.begin() + d), a(x.begin() + d, x.begin() + 2 * d);
            std::vector<Vec> ns;
            for (size_t i = 0; i < k; ++i)
                ns.emplace_back(x.begin() + (2 + i) * d, x.begin() + (3 + i) * d);
            return jtll_loss(p, a, ns);
        };
        JtllGrads g = jtll_grads(pos, anchor, negs);
        Vec fg;
        for (double v : g.d_pos_user) fg.push_back(v);
        for (double v : g.d_anchor_poi) fg.push_back(v);
        for (const auto& n : g.d_neg_users)
            for (double v : n) fg.push_back(v);
        worst = std::max(worst, finite_diff_check(f, fg, flat));
    }
    double secs = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max rel err %.2e, %.2fs", worst, secs);
    report(1, "triplet-loss gradient correctness", worst < 1e-5 && secs < 1.0, buf);
}

// ---- criterion 2: GRU/BPTT gradients ----
void criterion_2() {
    auto t0 = Clock::now();
    Rng rng(45);
    SharedParams params;
    params.w_user = EmbeddingMatrix(2, 4);
    params.w_poi = EmbeddingMatrix(5, 4);
    init_embeddings(params.w_user, rng);
    init_embeddings(params.w_poi, rng);
    Model gru = make_model(ModelKind::Gru, 2, 5, 4, rng);
    // O(1) parameter point: the tiny default init drives some gate gradients
    // down to roundoff scale where central differences are meaningless
    for (auto* mat : {&params.w_user, &params.w_poi, &gru.gru.w_z, &gru.gru.u_z, &gru.gru.b_z,
                      &gru.gru.w_r, &gru.gru.u_r, &gru.gru.b_r, &gru.gru.w_h, &gru.gru.u_h,
                      &gru.gru.b_h})
        for (auto& v : mat->values) v = rng.uniform(-1.0, 1.0);
    std::vector<PoiId> seq{0, 2, 4};
    UserId user = 1;

    GruSeqGrads gs = gru_sequence_grads(gru, params, user, seq);
    double worst = 0.0;
    auto check = [&](double* loc, double analytic) {
        double h = 1e-4, orig = *loc;
        *loc = orig + h;
        double fp = gru_sequence_loss(gru, params, user, seq);
        *loc = orig - h;
        double fm = gru_sequence_loss(gru, params, user, seq);
        *loc = orig;
        double num = (fp - fm) / (2 * h);
        worst = std::max(worst,
                         std::abs(analytic - num) / (std::abs(analytic) + std::abs(num) + 1e-12));
    };
    EmbeddingMatrix* gates[] = {&gru.gru.w_z, &gru.gru.u_z, &gru.gru.b_z,
                                &gru.gru.w_r, &gru.gru.u_r, &gru.gru.b_r,
                                &gru.gru.w_h, &gru.gru.u_h, &gru.gru.b_h};
    const EmbeddingMatrix* grads[] = {&gs.d_gates.w_z, &gs.d_gates.u_z, &gs.d_gates.b_z,
                                      &gs.d_gates.w_r, &gs.d_gates.u_r, &gs.d_gates.b_r,
                                      &gs.d_gates.w_h, &gs.d_gates.u_h, &gs.d_gates.b_h};
    for (size_t g = 0; g < 9; ++g)
        for (size_t i = 0; i < gates[g]->values.size(); ++i)
            check(&gates[g]->values[i], grads[g]->values[i]);
    for (int64_t i = 0; i < 4; ++i) check(params.w_user.row(user) + i, gs.d_user[i]);
    for (const auto& [row, grad] : gs.d_poi)
        for (int64_t i = 0; i < 4; ++i) check(params.w_poi.row(row) + i, grad[i]);

    double secs = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max rel err %.2e, %.2fs", worst, secs);
    report(2, "GRU/BPTT gradient correctness", worst < 1e-4 && secs < 1.0, buf);
}

// ---- criterion 3: evaluation vs brute-force oracle ----
EvalReport brute_force_evaluate(const Model& model, const SharedParams& params,
                                const Dataset& dataset) {
    std::vector<int> ks{1, 5, 10, 20};
    EvalReport rep;
    std::map<int, size_t> hits;
    for (int k : ks) hits[k] = 0;
    double rr = 0.0;
    for (UserId u = 0; u < dataset.num_users; ++u) {
        std::set<PoiId> visited;
        for (const auto& c : dataset.train_of(u)) visited.insert(c.poi);
        std::vector<PoiId> cands;
        for (PoiId p = 0; p < dataset.num_pois; ++p)
            if (!visited.count(p)) cands.push_back(p);
        std::vector<PoiId> hist;
        for (const auto& c : dataset.train_of(u)) hist.push_back(c.poi);
        for (const auto& c : dataset.test_of(u)) {
            if (!visited.count(c.poi)) {
                auto scores = score_candidates(model, params, Query{u, hist}, cands);
                std::vector<std::pair<double, PoiId>> order;
                for (size_t i = 0; i < cands.size(); ++i) order.emplace_back(scores[i], cands[i]);
                std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
                    if (a.first != b.first) return a.first > b.first;
                    return a.second < b.second;
                });
                for (size_t i = 0; i < order.size(); ++i)
                    if (order[i].second == c.poi) {
                        if (order[i].first != kAbstainScore) {
                            rr += 1.0 / static_cast<double>(i + 1);
                            for (int k : ks)
                                if (i + 1 <= static_cast<size_t>(k)) ++hits[k];
                        }
                        break;
                    }
                ++rep.num_samples;
            }
            hist.push_back(c.poi);
        }
    }
    for (int k : ks)
        rep.acc_at[k] = static_cast<double>(hits[k]) / static_cast<double>(rep.num_samples);
    rep.mrr = rr / static_cast<double>(rep.num_samples);
    return rep;
}

void criterion_3() {
    auto t0 = Clock::now();
    Rng meta(777);
    bool ok = true;
    for (int trial = 0; trial < 50 && ok; ++trial) {
        SynthConfig cfg;
        cfg.num_users = 5 + static_cast<int>(meta.uniform_index(16));  // M <= 20
        cfg.num_pois = 6 + static_cast<int>(meta.uniform_index(25));   // Q <= 30
        cfg.num_groups = 2;
        cfg.epsilon = 0.7;
        cfg.seed = meta.next_u64();
        Dataset d = generate(cfg);
        split(d, 0.8);

        Rng prng(meta.next_u64());
        SharedParams params;
        params.w_user = EmbeddingMatrix(d.num_users, 8);
        params.w_poi = EmbeddingMatrix(d.num_pois, 8);
        init_embeddings(params.w_user, prng);
        init_embeddings(params.w_poi, prng);
        Model mf = make_model(ModelKind::Mf, d.num_users, d.num_pois, 8, prng);

        EvalReport expect = brute_force_evaluate(mf, params, d);
        if (expect.num_samples == 0) {
            // degenerate draw: every test POI was train-visited; the library
            // must refuse it the same way, then move on to a fresh instance
            bool threw = false;
            try {
                evaluate(mf, params, d);
            } catch (const std::runtime_error&) {
                threw = true;
            }
            ok = ok && threw;
            --trial;
            continue;
        }
        EvalReport got = evaluate(mf, params, d);
        ok = ok && got.num_samples == expect.num_samples;
        for (const auto& [k, v] : expect.acc_at)
            ok = ok && std::abs(got.acc_at.at(k) - v) <= 1e-12;
        ok = ok && std::abs(got.mrr - expect.mrr) <= 1e-12;
    }
    double secs = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "50 instances, %.2fs", secs);
    report(3, "metric oracle equivalence", ok && secs < 5.0, buf);
}

// ---- criterion 4: closed-form loss values ----
void criterion_4() {
    bool ok = sigmoid(0.0) == 0.5;
    for (size_t k = 0; k <= 8; ++k) {
        Vec zero(16, 0.0);
        std::vector<Vec> negs(k, zero);
        double expect = (1.0 + static_cast<double>(k)) * std::log(2.0);
        ok = ok && std::abs(jtll_loss(zero, zero, negs) - expect) <= 1e-12;
    }
    report(4, "closed-form loss values", ok, "(1+k)*ln2 within 1e-12, sigmoid(0)=0.5");
}

// ---- criterion 5: U-TOP evaluates to exactly zero ----
void criterion_5() {
    auto t0 = Clock::now();
    SynthConfig cfg;
    cfg.num_users = 300;
    cfg.num_pois = 100;
    cfg.num_groups = 5;
    cfg.epsilon = 0.3;
    cfg.seed = 21;
    Dataset d = generate(cfg);
    split(d, 0.8);
    TrainContext ctx = build_train_context(d);
    Rng rng(1);
    Model m = make_model(ModelKind::UTop, d.num_users, d.num_pois, 2, rng);
    SharedParams params;
    params.w_user = EmbeddingMatrix(d.num_users, 2);
    params.w_poi = EmbeddingMatrix(d.num_pois, 2);
    ModelAdam adam = make_model_adam(m, params, 0.001);
    train_epoch(m, params, ctx, {}, adam, rng);
    EvalReport rep = evaluate(m, params, d);
    bool ok = rep.num_samples > 0 && rep.mrr == 0.0;
    for (const auto& [k, v] : rep.acc_at) ok = ok && v == 0.0;
    double secs = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu samples all zero, %.2fs", rep.num_samples, secs);
    report(5, "U-TOP zero reproduction", ok && secs < 10.0, buf);
}

// ---- criteria 6 and 10: Gowalla reproduction (conditional on the raw dump) ----
void criterion_6_and_10() {
    const char* raw_path = std::getenv("N2REC_GOWALLA_RAW");
    if (raw_path == nullptr || raw_path[0] == '\0') {
        report_skip(6, "TOP Gowalla reproduction",
                    "raw dump not available; set N2REC_GOWALLA_RAW to run");
        report_skip(10, "GRU Gowalla diagnostic (non-binding)",
                    "raw dump not available; set N2REC_GOWALLA_RAW to run");
        return;
    }
    auto t0 = Clock::now();
    ColumnMapping mapping;
    mapping.user_col = 0;
    mapping.time_col = 1;
    mapping.lat_col = 2;
    mapping.lon_col = 3;
    mapping.poi_col = 4;
    mapping.time_format = "iso8601";
    ParseResult parsed = parse_raw(raw_path, mapping);
    Dataset d = preprocess(parsed.records, 20, 50, 10);
    bool stats_ok = d.num_users == 11864 && d.num_pois == 3359 && d.total_visits() == 86670;
    split(d, 0.8);

    TrainContext ctx = build_train_context(d);
    Rng rng(1);
    Model top = make_model(ModelKind::Top, d.num_users, d.num_pois, 2, rng);
    SharedParams params;
    params.w_user = EmbeddingMatrix(d.num_users, 2);
    params.w_poi = EmbeddingMatrix(d.num_pois, 2);
    ModelAdam adam = make_model_adam(top, params, 0.001);
    train_epoch(top, params, ctx, {}, adam, rng);
    EvalReport rep = evaluate(top, params, d);

    const std::pair<int, double> expect_acc[] = {{1, 0.0068}, {5, 0.0281}, {10, 0.0574},
                                                 {20, 0.0874}};
    bool top_ok = true;
    for (const auto& [k, v] : expect_acc) top_ok = top_ok && std::abs(rep.acc_at.at(k) - v) <= 0.002;
    top_ok = top_ok && std::abs(rep.mrr - 0.0227) <= 0.002;

    double secs = seconds_since(t0);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "users=%d pois=%d visits=%zu acc@1=%.4f acc@5=%.4f acc@10=%.4f acc@20=%.4f "
                  "mrr=%.4f, %.1fs",
                  d.num_users, d.num_pois, d.total_visits(), rep.acc_at.at(1), rep.acc_at.at(5),
                  rep.acc_at.at(10), rep.acc_at.at(20), rep.mrr, secs);
    report(6, "TOP Gowalla reproduction", stats_ok && top_ok && secs < 120.0, buf);

    // criterion 10 is diagnostic only; report but never count as failure
    JointConfig jc;
    jc.model = ModelKind::Gru;
    jc.jtll_enabled = false;
    jc.dim = 64;
    jc.epochs = 20;
    jc.dropout = 0.0;
    jc.seed = 1;
    JointResult r = joint_train(d, jc);
    EvalReport grep = evaluate(r.model, r.params, d);
    std::snprintf(buf, sizeof(buf), "acc@1=%.4f vs published 0.0367 (non-binding)",
                  grep.acc_at.at(1));
    std::printf("[INFO] criterion 10: GRU Gowalla diagnostic %s\n", buf);
}

// ---- criterion 7: synthetic JTLL uplift ----
void criterion_7() {
    auto t0 = Clock::now();
    int wins = 0;
    double mean_uplift = 0.0;
    for (uint64_t seed = 1; seed <= 5; ++seed) {
        SynthConfig sc;
        sc.num_users = 500;
        sc.num_pois = 200;
        sc.num_groups = 10;
        sc.epsilon = 0.2;
        sc.seed = seed;
        Dataset d = generate(sc);
        split(d, 0.8);

        JointConfig jc;
        jc.model = ModelKind::SeqRec;
        jc.dim = 32;
        jc.epochs = 20;
        jc.negatives = 5;
        jc.dropout = 0.0;
        jc.seed = seed;
        // gentler base pass: at the default 1e-3 the base model saturates on
        // this small benchmark and the shared-embedding signal drowns in noise
        jc.lr = 0.001;
        jc.model_lr = 0.0005;

        jc.jtll_enabled = true;
        JointResult with = joint_train(d, jc);
        jc.jtll_enabled = false;
        JointResult without = joint_train(d, jc);

        double a_with = evaluate(with.model, with.params, d).acc_at.at(5);
        double a_without = evaluate(without.model, without.params, d).acc_at.at(5);
        if (a_with >= a_without) ++wins;
        mean_uplift += (a_with - a_without) / 5.0;
    }
    double secs = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "wins %d/5, mean uplift %+.4f, %.1fs", wins, mean_uplift,
                  secs);
    report(7, "synthetic JTLL uplift", wins >= 4 && mean_uplift > 0.0 && secs < 120.0, buf);
}

// ---- criterion 8: joint-framework identity and liveness ----
void criterion_8() {
    auto t0 = Clock::now();
    SynthConfig sc;
    sc.num_users = 60;
    sc.num_pois = 30;
    sc.num_groups = 5;
    sc.epsilon = 0.3;
    sc.seed = 8;
    Dataset d = generate(sc);
    split(d, 0.8);

    JointConfig jc;
    jc.model = ModelKind::Mf;
    jc.dim = 16;
    jc.epochs = 4;
    jc.dropout = 0.0;
    jc.seed = 9;
    jc.jtll_enabled = false;

    // identity: jtll off == hand-rolled base-only loop
    JointResult joint = joint_train(d, jc);
    Rng init(derive_seed(jc.seed, 1));
    Rng model_rng(derive_seed(jc.seed, 3));
    SharedParams params;
    params.w_user = EmbeddingMatrix(d.num_users, jc.dim);
    params.w_poi = EmbeddingMatrix(d.num_pois, jc.dim);
    init_embeddings(params.w_user, init);
    init_embeddings(params.w_poi, init);
    Model model = make_model(jc.model, d.num_users, d.num_pois, jc.dim, init);
    TrainContext ctx = build_train_context(d);
    ModelAdam adam = make_model_adam(model, params, jc.lr);
    for (int e = 0; e < jc.epochs; ++e)
        train_epoch(model, params, ctx, {jc.batch_size, jc.negatives}, adam, model_rng);
    bool identity_ok = joint.params == params && joint.model == model;

    // liveness: jtll on with frozen base lr changes the evaluation output
    jc.jtll_enabled = true;
    jc.model_lr = 0.0;
    JointResult live = joint_train(d, jc);
    jc.epochs = 0;
    JointResult init_only = joint_train(d, jc);
    bool live_ok = !(evaluate(live.model, live.params, d) ==
                     evaluate(init_only.model, init_only.params, d));

    double secs = seconds_since(t0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "identity %s, liveness %s, %.1fs",
                  identity_ok ? "ok" : "BROKEN", live_ok ? "ok" : "BROKEN", secs);
    report(8, "joint-framework identity and shared-parameter liveness",
           identity_ok && live_ok && secs < 30.0, buf);
}

// ---- criterion 9: end-to-end determinism ----
void criterion_9() {
    SynthConfig sc;
    sc.num_users = 50;
    sc.num_pois = 24;
    sc.num_groups = 4;
    sc.epsilon = 0.3;
    sc.seed = 31;
    Dataset d = generate(sc);
    split(d, 0.8);

    JointConfig jc;
    jc.model = ModelKind::Gru;
    jc.dim = 8;
    jc.epochs = 2;
    jc.dropout = 0.8;
    jc.seed = 17;

    auto run = [&] {
        JointResult r = joint_train(d, jc);
        std::string snap = "acceptance_snap.tsv";
        save_model(r.model, r.params, {"synth", jc.jtll_enabled, jc.seed}, snap);
        std::string line = format_report_line(evaluate(r.model, r.params, d), "synth", "gru",
                                              jc.jtll_enabled, jc.seed);
        std::FILE* f = std::fopen(snap.c_str(), "rb");
        std::string bytes;
        char buf[4096];
        size_t n;
        while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) bytes.append(buf, n);
        std::fclose(f);
        std::remove(snap.c_str());
        return std::pair{bytes, line};
    };
    auto a = run();
    auto b = run();
    bool ok = a.first == b.first && a.second == b.second;
    report(9, "determinism of train+evaluate", ok,
           ok ? "snapshots and reports bit-identical" : "outputs differ");
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6_and_10();
    criterion_7();
    criterion_8();
    criterion_9();
    if (failures == 0) {
        std::printf("acceptance: all runnable criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", failures);
    return 1;
}
