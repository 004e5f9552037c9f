#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <tuple>

#include <CLI11.hpp>

#include "n2rec/dataset.hpp"
#include "n2rec/eval.hpp"
#include "n2rec/joint.hpp"
#include "n2rec/synth.hpp"

namespace {

using namespace n2rec;

std::string basename_of(const std::string& path) {
    auto pos = path.find_last_of('/');
    std::string base = pos == std::string::npos ? path : path.substr(pos + 1);
    auto dot = base.find_last_of('.');
    if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
    return base.empty() ? "-" : base;
}

void print_joint_config(const JointConfig& c) {
    std::printf(
        "config: model=%s dim=%lld epochs=%d lr=%g model_lr=%g batch=%zu negatives=%zu "
        "dropout=%g jtll=%s seed=%llu tuple_multiplicity=%d fixed_negatives=%d\n",
        to_string(c.model).c_str(), static_cast<long long>(c.dim), c.epochs, c.lr,
        c.model_lr.value_or(c.lr), c.batch_size, c.negatives, c.dropout,
        c.jtll_enabled ? "on" : "off", static_cast<unsigned long long>(c.seed),
        c.tuple_multiplicity ? 1 : 0, c.fixed_negatives ? 1 : 0);
}

int cmd_preprocess(const std::string& in, const std::string& mapping_path,
                   const std::string& out, int min_visits, int max_visits, int min_users,
                   double train_fraction, bool do_split) {
    ColumnMapping mapping = mapping_path.empty() ? ColumnMapping{} : load_mapping(mapping_path);
    std::printf("config: in=%s mapping=%s out=%s min_visits=%d max_visits=%d "
                "min_users_per_poi=%d train_fraction=%g split=%d\n",
                in.c_str(), mapping_path.c_str(), out.c_str(), min_visits, max_visits,
                min_users, train_fraction, do_split ? 1 : 0);
    ParseResult parsed = parse_raw(in, mapping);
    std::printf("parsed=%zu skipped=%zu\n", parsed.records.size(), parsed.skipped);
    Dataset d = preprocess(parsed.records, min_visits, max_visits, min_users);
    if (do_split) split(d, train_fraction);
    save_canonical(d, out);
    std::printf("users=%d pois=%d visits=%zu\n", d.num_users, d.num_pois, d.total_visits());
    return 0;
}

int cmd_synth(const SynthConfig& cfg, const std::string& out, double train_fraction,
              bool do_split) {
    std::printf("config: users=%d pois=%d groups=%d epsilon=%g min_len=%d max_len=%d "
                "seed=%llu out=%s split=%d\n",
                cfg.num_users, cfg.num_pois, cfg.num_groups, cfg.epsilon, cfg.min_len,
                cfg.max_len, static_cast<unsigned long long>(cfg.seed), out.c_str(),
                do_split ? 1 : 0);
    Dataset d = generate(cfg);
    if (do_split) split(d, train_fraction);
    save_canonical(d, out);
    std::printf("users=%d pois=%d visits=%zu\n", d.num_users, d.num_pois, d.total_visits());
    return 0;
}

int cmd_train(const std::string& in, const std::string& out, const std::string& log_path,
              const JointConfig& cfg) {
    print_joint_config(cfg);
    Dataset d = load_canonical(in);
    if (!d.is_split()) split(d);
    JointResult res = joint_train(d, cfg);

    std::ofstream log_file;
    std::ostream* log = &std::cout;
    if (!log_path.empty()) {
        log_file.open(log_path);
        if (!log_file) throw std::runtime_error("cannot open log file: " + log_path);
        log = &log_file;
    }
    for (const auto& e : res.log)
        *log << e.epoch << "\t" << e.jtll_loss << "\t" << e.model_loss << "\n";

    SnapshotMeta meta{basename_of(in), cfg.jtll_enabled, cfg.seed};
    save_model(res.model, res.params, meta, out);
    std::printf("snapshot written to %s\n", out.c_str());
    return 0;
}

int cmd_evaluate(const std::string& in, const std::string& snapshot,
                 const std::vector<int>& ks) {
    std::printf("config: in=%s snapshot=%s\n", in.c_str(), snapshot.c_str());
    Dataset d = load_canonical(in);
    if (!d.is_split()) split(d);
    LoadedModel lm = load_model(snapshot);
    if (lm.params.w_user.rows != d.num_users || lm.params.w_poi.rows != d.num_pois)
        throw std::runtime_error(
            "snapshot was trained on a different dataset shape: snapshot M=" +
            std::to_string(lm.params.w_user.rows) + " Q=" + std::to_string(lm.params.w_poi.rows) +
            ", dataset M=" + std::to_string(d.num_users) + " Q=" + std::to_string(d.num_pois));
    EvalReport report = evaluate(lm.model, lm.params, d, ks);
    std::fputs(format_report_table(report).c_str(), stdout);
    std::printf("%s\n", format_report_line(report, lm.meta.dataset, to_string(lm.model.kind),
                                           lm.meta.jtll, lm.meta.seed).c_str());
    return 0;
}

int cmd_gradcheck(uint64_t seed) {
    std::printf("config: seed=%llu\n", static_cast<unsigned long long>(seed));
    Rng rng(seed);

    // triplet loss gradients vs central differences on random instances
    double max_rel = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int64_t d = std::vector<int64_t>{2, 8, 32}[rng.uniform_index(3)];
        size_t num_negs = rng.uniform_index(9);
        auto draw_row = [&] {
            Vec v(d);
            for (auto& x : v) x = rng.uniform(-1.0, 1.0);
            return v;
        };
        Vec pos = draw_row(), anchor = draw_row();
        std::vector<Vec> negs;
        for (size_t i = 0; i < num_negs; ++i) negs.push_back(draw_row());

        Vec flat;
        for (double v : pos) flat.push_back(v);
        for (double v : anchor) flat.push_back(v);
        for (const auto& n : negs)
            for (double v : n) flat.push_back(v);
        auto unflatten = [&](const Vec& x) {
            Vec p(x.begin(), x.begin() + d);
            Vec a(x.begin() + d, x.begin() + 2 * d);
            std::vector<Vec> ns;
            for (size_t i = 0; i < num_negs; ++i)
                ns.emplace_back(x.begin() + (2 + i) * d, x.begin() + (3 + i) * d);
            return std::tuple{p, a, ns};
        };
        auto f = [&](const Vec& x) {
            auto [p, a, ns] = unflatten(x);
            return jtll_loss(p, a, ns);
        };
        JtllGrads g = jtll_grads(pos, anchor, negs);
        Vec flat_grad;
        for (double v : g.d_pos_user) flat_grad.push_back(v);
        for (double v : g.d_anchor_poi) flat_grad.push_back(v);
        for (const auto& n : g.d_neg_users)
            for (double v : n) flat_grad.push_back(v);
        max_rel = std::max(max_rel, finite_diff_check(f, flat_grad, flat));
    }
    std::printf("triplet loss gradcheck: max rel err = %.3e\n", max_rel);

    // GRU/BPTT gradients through the full softmax loss
    int64_t d = 4;
    int32_t q = 5;
    Rng init_rng(derive_seed(seed, 77));
    SharedParams params;
    params.w_user = EmbeddingMatrix(2, d);
    params.w_poi = EmbeddingMatrix(q, d);
    init_embeddings(params.w_user, init_rng);
    init_embeddings(params.w_poi, init_rng);
    Model model = make_model(ModelKind::Gru, 2, q, d, init_rng);
    // check at an O(1) parameter point so no gradient sits at roundoff scale
    for (auto* mat : {&params.w_user, &params.w_poi, &model.gru.w_z, &model.gru.u_z,
                      &model.gru.b_z, &model.gru.w_r, &model.gru.u_r, &model.gru.b_r,
                      &model.gru.w_h, &model.gru.u_h, &model.gru.b_h})
        for (auto& v : mat->values) v = init_rng.uniform(-1.0, 1.0);
    std::vector<PoiId> seq{0, 2, 4};
    UserId user = 1;

    GruSeqGrads gs = gru_sequence_grads(model, params, user, seq);
    double gru_max = 0.0;
    auto check_scalar = [&](double* loc, double analytic) {
        double h = 1e-4;
        double orig = *loc;
        *loc = orig + h;
        double fp = gru_sequence_loss(model, params, user, seq);
        *loc = orig - h;
        double fm = gru_sequence_loss(model, params, user, seq);
        *loc = orig;
        double numeric = (fp - fm) / (2.0 * h);
        double rel = std::abs(analytic - numeric) / (std::abs(analytic) + std::abs(numeric) + 1e-12);
        gru_max = std::max(gru_max, rel);
    };
    {
        const EmbeddingMatrix* grads[] = {&gs.d_gates.w_z, &gs.d_gates.u_z, &gs.d_gates.b_z,
                                          &gs.d_gates.w_r, &gs.d_gates.u_r, &gs.d_gates.b_r,
                                          &gs.d_gates.w_h, &gs.d_gates.u_h, &gs.d_gates.b_h};
        EmbeddingMatrix* gates[] = {&model.gru.w_z, &model.gru.u_z, &model.gru.b_z,
                                    &model.gru.w_r, &model.gru.u_r, &model.gru.b_r,
                                    &model.gru.w_h, &model.gru.u_h, &model.gru.b_h};
        for (size_t gi = 0; gi < 9; ++gi)
            for (size_t i = 0; i < gates[gi]->values.size(); ++i)
                check_scalar(&gates[gi]->values[i], grads[gi]->values[i]);
    }
    for (int64_t i = 0; i < d; ++i)
        check_scalar(params.w_user.row(user) + i, gs.d_user[i]);
    for (const auto& [row, grad] : gs.d_poi)
        for (int64_t i = 0; i < d; ++i) check_scalar(params.w_poi.row(row) + i, grad[i]);
    std::printf("gru bptt gradcheck: max rel err = %.3e\n", gru_max);

    bool ok = max_rel < 1e-5 && gru_max < 1e-4;
    std::printf("%s\n", ok ? "gradcheck passed" : "gradcheck FAILED");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"N2 POI recommendation toolkit"};
    app.require_subcommand(1);

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "parse and filter a raw check-in file");
    std::string pre_in, pre_map, pre_out;
    int min_visits = 20, max_visits = 50, min_users = 10;
    double pre_frac = 0.8;
    bool pre_split = false;
    pre->add_option("--in", pre_in, "raw check-in file")->required();
    pre->add_option("--mapping", pre_map, "column-mapping config file");
    pre->add_option("--out", pre_out, "canonical dataset output path")->required();
    pre->add_option("--min-visits", min_visits, "min visit count per user");
    pre->add_option("--max-visits", max_visits, "max visit count per user");
    pre->add_option("--min-users-per-poi", min_users, "min distinct visitors per POI");
    pre->add_flag("--split", pre_split, "also set the chronological split");
    pre->add_option("--train-fraction", pre_frac, "train fraction for --split");

    // synth
    auto* syn = app.add_subcommand("synth", "generate a planted-group synthetic dataset");
    SynthConfig syn_cfg;
    std::string syn_out;
    double syn_frac = 0.8;
    bool syn_split = false;
    syn->add_option("--users", syn_cfg.num_users, "number of users");
    syn->add_option("--pois", syn_cfg.num_pois, "number of POIs");
    syn->add_option("--groups", syn_cfg.num_groups, "number of groups");
    syn->add_option("--epsilon", syn_cfg.epsilon, "out-of-group visit probability");
    syn->add_option("--seed", syn_cfg.seed, "generator seed");
    syn->add_option("--out", syn_out, "canonical dataset output path")->required();
    syn->add_flag("--split", syn_split, "also set the chronological split");
    syn->add_option("--train-fraction", syn_frac, "train fraction for --split");

    // train
    auto* tr = app.add_subcommand("train", "joint-train a base model on a dataset");
    std::string tr_in, tr_out, tr_log, tr_config, tr_model = "gru", tr_jtll = "on";
    JointConfig jc;
    double tr_model_lr = -1.0;
    tr->add_option("--in", tr_in, "canonical dataset file")->required();
    tr->add_option("--out", tr_out, "model snapshot output path")->required();
    tr->add_option("--log", tr_log, "epoch-loss TSV output path (default stdout)");
    tr->add_option("--config", tr_config, "key=value config file");
    auto* o_model = tr->add_option("--model", tr_model, "top|utop|mf|seqrec|gru");
    auto* o_jtll = tr->add_option("--jtll", tr_jtll, "on|off");
    auto* o_dim = tr->add_option("--dim", jc.dim, "embedding dimension");
    auto* o_epochs = tr->add_option("--epochs", jc.epochs, "training epochs");
    auto* o_lr = tr->add_option("--lr", jc.lr, "learning rate");
    auto* o_mlr = tr->add_option("--model-lr", tr_model_lr, "base-model learning rate override");
    auto* o_batch = tr->add_option("--batch", jc.batch_size, "batch size in tuples");
    auto* o_drop = tr->add_option("--dropout", jc.dropout, "embedding drop probability");
    auto* o_negs = tr->add_option("--negatives", jc.negatives, "negative users per tuple");
    auto* o_seed = tr->add_option("--seed", jc.seed, "master seed");
    auto* o_mult = tr->add_flag("--tuple-multiplicity", "one tuple per check-in event");
    auto* o_fixed = tr->add_flag("--fixed-negatives", "sample negatives once, not per epoch");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "evaluate a snapshot on a dataset");
    std::string ev_in, ev_snap;
    std::vector<int> ev_ks{1, 5, 10, 20};
    ev->add_option("--in", ev_in, "canonical dataset file")->required();
    ev->add_option("--snapshot", ev_snap, "model snapshot file")->required();
    ev->add_option("--k-list", ev_ks, "cutoffs for Acc@K");

    // gradcheck
    auto* gc = app.add_subcommand("gradcheck", "run the finite-difference gradient suites");
    uint64_t gc_seed = 7;
    gc->add_option("--seed", gc_seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (pre->parsed())
            return cmd_preprocess(pre_in, pre_map, pre_out, min_visits, max_visits, min_users,
                                  pre_frac, pre_split);
        if (syn->parsed()) return cmd_synth(syn_cfg, syn_out, syn_frac, syn_split);
        if (tr->parsed()) {
            JointConfig cfg;
            if (!tr_config.empty()) cfg = load_joint_config(tr_config);
            if (o_model->count() || tr_config.empty()) cfg.model = model_kind_from_string(tr_model);
            if (o_jtll->count() || tr_config.empty()) cfg.jtll_enabled = (tr_jtll == "on");
            if (o_dim->count()) cfg.dim = jc.dim;
            if (o_epochs->count()) cfg.epochs = jc.epochs;
            if (o_lr->count()) cfg.lr = jc.lr;
            if (o_mlr->count()) cfg.model_lr = tr_model_lr;
            if (o_batch->count()) cfg.batch_size = jc.batch_size;
            if (o_drop->count()) cfg.dropout = jc.dropout;
            if (o_negs->count()) cfg.negatives = jc.negatives;
            if (o_seed->count()) cfg.seed = jc.seed;
            if (o_mult->count()) cfg.tuple_multiplicity = true;
            if (o_fixed->count()) cfg.fixed_negatives = true;
            return cmd_train(tr_in, tr_out, tr_log, cfg);
        }
        if (ev->parsed()) return cmd_evaluate(ev_in, ev_snap, ev_ks);
        if (gc->parsed()) return cmd_gradcheck(gc_seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
