#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "n2rec/eval.hpp"
#include "n2rec/joint.hpp"
#include "n2rec/synth.hpp"

using namespace n2rec;

namespace {

Dataset small_dataset(uint64_t seed = 1) {
    SynthConfig cfg;
    cfg.num_users = 40;
    cfg.num_pois = 20;
    cfg.num_groups = 4;
    cfg.epsilon = 0.3;
    cfg.seed = seed;
    Dataset d = generate(cfg);
    split(d, 0.8);
    return d;
}

JointConfig quick_config(ModelKind kind, bool jtll, uint64_t seed = 3) {
    JointConfig c;
    c.model = kind;
    c.dim = 8;
    c.epochs = 3;
    c.dropout = 0.0;
    c.jtll_enabled = jtll;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("zero epochs leaves the seeded initialization untouched") {
    Dataset d = small_dataset();
    JointConfig c = quick_config(ModelKind::Mf, true);
    c.epochs = 0;
    JointResult r = joint_train(d, c);
    CHECK(r.log.empty());

    // same init as an independent derivation of the init stream
    Rng init(derive_seed(c.seed, 1));
    EmbeddingMatrix wu(d.num_users, c.dim), wp(d.num_pois, c.dim);
    init_embeddings(wu, init);
    init_embeddings(wp, init);
    CHECK(r.params.w_user == wu);
    CHECK(r.params.w_poi == wp);
}

TEST_CASE("log length equals the epoch count") {
    Dataset d = small_dataset();
    JointConfig c = quick_config(ModelKind::SeqRec, true);
    c.epochs = 5;
    JointResult r = joint_train(d, c);
    REQUIRE(r.log.size() == 5);
    for (int e = 0; e < 5; ++e) {
        CHECK(r.log[e].epoch == e + 1);
        CHECK(r.log[e].jtll_loss > 0.0);
        CHECK(r.log[e].model_loss > 0.0);
    }
}

TEST_CASE("jtll off is bit-identical to base-only training") {
    Dataset d = small_dataset(5);
    JointConfig c = quick_config(ModelKind::Mf, false);
    JointResult joint = joint_train(d, c);

    // base-only loop written out by hand with the same substreams
    Rng init(derive_seed(c.seed, 1));
    Rng model_rng(derive_seed(c.seed, 3));
    SharedParams params;
    params.w_user = EmbeddingMatrix(d.num_users, c.dim);
    params.w_poi = EmbeddingMatrix(d.num_pois, c.dim);
    init_embeddings(params.w_user, init);
    init_embeddings(params.w_poi, init);
    Model model = make_model(c.model, d.num_users, d.num_pois, c.dim, init);
    TrainContext ctx = build_train_context(d);
    ModelAdam adam = make_model_adam(model, params, c.lr);
    for (int e = 0; e < c.epochs; ++e)
        train_epoch(model, params, ctx, {c.batch_size, c.negatives}, adam, model_rng);

    CHECK(joint.params == params);
    CHECK(joint.model == model);
}

TEST_CASE("parameter sharing is live: jtll alone moves the base model's scores") {
    Dataset d = small_dataset(6);
    JointConfig c = quick_config(ModelKind::Mf, true);
    c.model_lr = 0.0;  // freeze the base model's own updates
    JointResult r = joint_train(d, c);

    JointConfig frozen = c;
    frozen.jtll_enabled = false;
    JointResult baseline = joint_train(d, frozen);

    // with lr 0 and no jtll, params stay at initialization; with jtll they move
    CHECK(baseline.params == joint_train(d, [&] {
              JointConfig cc = frozen;
              cc.epochs = 0;
              return cc;
          }()).params);
    CHECK(!(r.params == baseline.params));
    CHECK(!(evaluate(r.model, r.params, d) == evaluate(baseline.model, baseline.params, d)));
}

TEST_CASE("identical config and seed reproduce results bit for bit") {
    Dataset d = small_dataset(7);
    for (ModelKind kind : {ModelKind::Mf, ModelKind::SeqRec, ModelKind::Gru}) {
        JointConfig c = quick_config(kind, true, 11);
        c.epochs = 2;
        c.dropout = 0.5;
        JointResult a = joint_train(d, c);
        JointResult b = joint_train(d, c);
        CHECK(a.params == b.params);
        CHECK(a.model == b.model);
        for (size_t i = 0; i < a.log.size(); ++i) {
            CHECK(a.log[i].jtll_loss == b.log[i].jtll_loss);
            CHECK(a.log[i].model_loss == b.log[i].model_loss);
        }
    }
}

TEST_CASE("config file loading and precedence") {
    std::string path = "test_joint_cfg.txt";
    {
        std::ofstream out(path);
        out << "model=seqrec\nepochs=7\nlr=0.01\njtll=off\ndim=16\n";
    }
    JointConfig c = load_joint_config(path);
    CHECK(c.model == ModelKind::SeqRec);
    CHECK(c.epochs == 7);
    CHECK(c.lr == 0.01);
    CHECK(!c.jtll_enabled);
    CHECK(c.dim == 16);
    CHECK(c.dropout == 0.8);  // untouched default
    std::remove(path.c_str());

    std::string bad = "test_joint_cfg_bad.txt";
    {
        std::ofstream out(bad);
        out << "nonsense=1\n";
    }
    CHECK_THROWS(load_joint_config(bad));
    std::remove(bad.c_str());
}

TEST_CASE("invalid joint configs are rejected") {
    Dataset d = small_dataset(8);
    JointConfig c = quick_config(ModelKind::Mf, true);
    c.dropout = 1.0;
    CHECK_THROWS(joint_train(d, c));
    c = quick_config(ModelKind::Mf, true);
    c.dim = 0;
    CHECK_THROWS(joint_train(d, c));
    Dataset unsplit = d;
    unsplit.split_points.reset();
    CHECK_THROWS(joint_train(unsplit, quick_config(ModelKind::Mf, true)));
}
