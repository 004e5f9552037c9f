#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "n2rec/eval.hpp"
#include "n2rec/joint.hpp"
#include "n2rec/synth.hpp"

namespace py = pybind11;
using namespace n2rec;

namespace {

struct Trained {
    Model model;
    SharedParams params;
    std::vector<EpochLog> log;
};

JointConfig config_from_kwargs(const std::string& model, int64_t dim, int epochs, double lr,
                               size_t batch, size_t negatives, double dropout, bool jtll,
                               uint64_t seed) {
    JointConfig c;
    c.model = model_kind_from_string(model);
    c.dim = dim;
    c.epochs = epochs;
    c.lr = lr;
    c.batch_size = batch;
    c.negatives = negatives;
    c.dropout = dropout;
    c.jtll_enabled = jtll;
    c.seed = seed;
    return c;
}

py::dict report_to_dict(const EvalReport& r) {
    py::dict d;
    py::dict acc;
    for (const auto& [k, v] : r.acc_at) acc[py::int_(k)] = v;
    d["acc_at"] = acc;
    d["mrr"] = r.mrr;
    d["num_samples"] = r.num_samples;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "next-new POI recommendation toolkit core";

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("num_users", &Dataset::num_users)
        .def_readonly("num_pois", &Dataset::num_pois)
        .def_property_readonly("num_visits", &Dataset::total_visits)
        .def_property_readonly("is_split", &Dataset::is_split);

    py::class_<Trained>(m, "TrainedModel")
        .def_property_readonly("epoch_log",
                               [](const Trained& t) {
                                   py::list log;
                                   for (const auto& e : t.log)
                                       log.append(py::make_tuple(e.epoch, e.jtll_loss,
                                                                 e.model_loss));
                                   return log;
                               })
        .def("evaluate",
             [](const Trained& t, const Dataset& d) {
                 return report_to_dict(evaluate(t.model, t.params, d));
             })
        .def("save",
             [](const Trained& t, const std::string& path) {
                 save_model(t.model, t.params, {}, path);
             });

    m.def("sigmoid", [](double x) { return sigmoid(x); });

    m.def("jtll_loss", &jtll_loss, py::arg("pos_user"), py::arg("anchor_poi"),
          py::arg("neg_users"));

    m.def("jtll_grads",
          [](const Vec& pos, const Vec& anchor, const std::vector<Vec>& negs) {
              JtllGrads g = jtll_grads(pos, anchor, negs);
              return py::make_tuple(g.d_pos_user, g.d_anchor_poi, g.d_neg_users);
          },
          py::arg("pos_user"), py::arg("anchor_poi"), py::arg("neg_users"));

    m.def("generate_synth",
          [](int32_t users, int32_t pois, int32_t groups, double epsilon, uint64_t seed) {
              return generate({users, pois, groups, epsilon, 20, 50, seed});
          },
          py::arg("users") = 500, py::arg("pois") = 200, py::arg("groups") = 10,
          py::arg("epsilon") = 0.2, py::arg("seed") = 0);

    m.def("split", &split, py::arg("dataset"), py::arg("train_fraction") = 0.8);

    m.def("load_dataset", &load_canonical, py::arg("path"));
    m.def("save_dataset", &save_canonical, py::arg("dataset"), py::arg("path"));

    m.def("joint_train",
          [](const Dataset& d, const std::string& model, int64_t dim, int epochs, double lr,
             size_t batch, size_t negatives, double dropout, bool jtll, uint64_t seed) {
              JointResult r = joint_train(d, config_from_kwargs(model, dim, epochs, lr, batch,
                                                                negatives, dropout, jtll, seed));
              return Trained{std::move(r.model), std::move(r.params), std::move(r.log)};
          },
          py::arg("dataset"), py::arg("model") = "gru", py::arg("dim") = 64,
          py::arg("epochs") = 20, py::arg("lr") = 0.001, py::arg("batch") = 64,
          py::arg("negatives") = 5, py::arg("dropout") = 0.8, py::arg("jtll") = true,
          py::arg("seed") = 0);
}
