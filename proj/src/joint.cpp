#include "n2rec/joint.hpp"

#include <fstream>
#include <stdexcept>

namespace n2rec {

namespace {
constexpr uint64_t kInitStream = 1;
constexpr uint64_t kJtllStream = 2;
constexpr uint64_t kModelStream = 3;
}  // namespace

JointResult joint_train(const Dataset& dataset, const JointConfig& config) {
    if (!dataset.is_split()) throw std::runtime_error("joint_train requires a split dataset");
    if (config.epochs < 0 || config.dim < 1 || config.dropout < 0.0 || config.dropout >= 1.0)
        throw std::invalid_argument("joint_train: invalid config");

    Rng init_rng(derive_seed(config.seed, kInitStream));
    Rng jtll_rng(derive_seed(config.seed, kJtllStream));
    Rng model_rng(derive_seed(config.seed, kModelStream));

    JointResult res;
    res.params.w_user = EmbeddingMatrix(dataset.num_users, config.dim);
    res.params.w_poi = EmbeddingMatrix(dataset.num_pois, config.dim);
    init_embeddings(res.params.w_user, init_rng);
    init_embeddings(res.params.w_poi, init_rng);
    res.model = make_model(config.model, dataset.num_users, dataset.num_pois, config.dim, init_rng);

    TrainContext ctx = build_train_context(dataset, config.tuple_multiplicity);

    JtllConfig jtll_cfg;
    jtll_cfg.batch_size = config.batch_size;
    jtll_cfg.negatives = config.negatives;
    jtll_cfg.dropout = DropoutSpec{config.dropout, true};
    jtll_cfg.fixed_negatives = config.fixed_negatives;
    NegativeCache neg_cache;

    // JTLL keeps its own optimizer state over the shared matrices
    AdamState jtll_adam_user(res.params.w_user, config.lr);
    AdamState jtll_adam_poi(res.params.w_poi, config.lr);
    ModelAdam model_adam = make_model_adam(res.model, res.params,
                                           config.model_lr.value_or(config.lr));
    BaseTrainConfig base_cfg{config.batch_size, config.negatives};

    for (int e = 1; e <= config.epochs; ++e) {
        double jl = 0.0;
        if (config.jtll_enabled)
            jl = jtll_epoch(res.params, ctx.tuples, ctx.index, jtll_cfg, jtll_adam_user,
                            jtll_adam_poi, jtll_rng, &neg_cache);
        double ml = train_epoch(res.model, res.params, ctx, base_cfg, model_adam, model_rng);
        res.log.push_back({e, jl, ml});
    }
    return res;
}

JointConfig load_joint_config(const std::string& path, JointConfig base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad config line (expected key=value): " + line);
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        if (key == "model") base.model = model_kind_from_string(val);
        else if (key == "dim") base.dim = std::stoll(val);
        else if (key == "epochs") base.epochs = std::stoi(val);
        else if (key == "lr") base.lr = std::stod(val);
        else if (key == "model_lr") base.model_lr = std::stod(val);
        else if (key == "batch") base.batch_size = std::stoull(val);
        else if (key == "negatives") base.negatives = std::stoull(val);
        else if (key == "dropout") base.dropout = std::stod(val);
        else if (key == "jtll") base.jtll_enabled = (val == "on" || val == "1" || val == "true");
        else if (key == "seed") base.seed = std::stoull(val);
        else if (key == "tuple_multiplicity") base.tuple_multiplicity = (val == "1" || val == "true");
        else if (key == "fixed_negatives") base.fixed_negatives = (val == "1" || val == "true");
        else throw std::runtime_error("unknown config key: " + key);
    }
    return base;
}

}  // namespace n2rec
