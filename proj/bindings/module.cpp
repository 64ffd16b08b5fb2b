// Python bindings for the core operations: output spaces, joint features,
// losses, argmax primitives, k-NN index, training, prediction, and the
// evaluation protocol.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sslsop/evaluation.hpp"
#include "sslsop/inference.hpp"
#include "sslsop/io.hpp"

namespace py = pybind11;
using namespace sslsop;

namespace {

std::string output_repr(const StructuredOutput& y) {
    std::string s = "StructuredOutput([";
    for (std::size_t i = 0; i < y.payload.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(y.payload[i]);
    }
    return s + "])";
}

}  // namespace

PYBIND11_MODULE(_sslsop, m) {
    m.doc() = "semi-supervised local structured output predictors";

    py::register_exception<SpaceTooLarge>(m, "SpaceTooLargeError");
    py::register_exception<TrainingDiverged>(m, "TrainingDivergedError");

    py::enum_<OutputFamily>(m, "OutputFamily")
        .value("Multiclass", OutputFamily::Multiclass)
        .value("TreeLeaf", OutputFamily::TreeLeaf)
        .value("TagSequence", OutputFamily::TagSequence);

    py::enum_<LossKind>(m, "LossKind")
        .value("ZeroOne", LossKind::ZeroOne)
        .value("TreeAncestorHeight", LossKind::TreeAncestorHeight)
        .value("Hamming", LossKind::Hamming);

    py::enum_<InitPolicy>(m, "InitPolicy")
        .value("NearestLabeled", InitPolicy::NearestLabeled)
        .value("FirstCandidate", InitPolicy::FirstCandidate);

    py::enum_<SweepParam>(m, "SweepParam")
        .value("K", SweepParam::K)
        .value("C", SweepParam::C);

    py::class_<StructuredOutput>(m, "StructuredOutput")
        .def(py::init([](std::vector<int> payload) {
                 return StructuredOutput{std::move(payload)};
             }),
             py::arg("payload"))
        .def_static("multiclass", &StructuredOutput::multiclass, py::arg("class_index"))
        .def_static("leaf", &StructuredOutput::leaf, py::arg("node_id"))
        .def_static(
            "tags", [](std::vector<int> t) { return StructuredOutput::tags(std::move(t)); },
            py::arg("tags"))
        .def_readwrite("payload", &StructuredOutput::payload)
        .def("__eq__", [](const StructuredOutput& a, const StructuredOutput& b) { return a == b; })
        .def("__hash__",
             [](const StructuredOutput& y) {
                 std::size_t h = y.payload.size();
                 for (int v : y.payload) h = h * 1000003 + static_cast<std::size_t>(v) + 7;
                 return h;
             })
        .def("__repr__", &output_repr);

    py::class_<OutputDescriptor>(m, "OutputDescriptor")
        .def_static("multiclass", &OutputDescriptor::multiclass, py::arg("num_classes"),
                    py::arg("enumeration_cap") = OutputDescriptor::kDefaultEnumerationCap)
        .def_static("tree_leaf", &OutputDescriptor::tree_leaf, py::arg("parent"),
                    py::arg("leaves"),
                    py::arg("enumeration_cap") = OutputDescriptor::kDefaultEnumerationCap)
        .def_static("tag_sequence", &OutputDescriptor::tag_sequence, py::arg("num_tags"),
                    py::arg("length"),
                    py::arg("enumeration_cap") = OutputDescriptor::kDefaultEnumerationCap)
        .def_property_readonly("family", &OutputDescriptor::family)
        .def_property_readonly("space_size", &OutputDescriptor::space_size)
        .def("joint_dim", &OutputDescriptor::joint_dim, py::arg("d"))
        .def("valid_output", &OutputDescriptor::valid_output, py::arg("y"))
        .def("same_space", &OutputDescriptor::same_space, py::arg("other"))
        .def("__eq__", [](const OutputDescriptor& a, const OutputDescriptor& b) { return a == b; });

    py::class_<NeighborhoodIndex>(m, "NeighborhoodIndex")
        .def_readonly("members", &NeighborhoodIndex::members)
        .def_readonly("inverted", &NeighborhoodIndex::inverted)
        .def_readonly("k", &NeighborhoodIndex::k)
        .def_readonly("n", &NeighborhoodIndex::n);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("k", &TrainConfig::k)
        .def_readwrite("C", &TrainConfig::C)
        .def_readwrite("eta", &TrainConfig::eta)
        .def_readwrite("iterations", &TrainConfig::iterations)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("init_policy", &TrainConfig::init_policy)
        .def_readwrite("threads", &TrainConfig::threads)
        .def("validate", &TrainConfig::validate);

    py::class_<DatasetSplit>(m, "DatasetSplit")
        .def(py::init([](std::vector<FeatureVector> X, std::map<int, StructuredOutput> labeled,
                         OutputDescriptor desc, LossKind kind) {
                 return DatasetSplit{std::move(X), std::move(labeled), std::move(desc), kind};
             }),
             py::arg("X"), py::arg("labeled"), py::arg("desc"), py::arg("kind"))
        .def_readwrite("X", &DatasetSplit::X)
        .def_readwrite("labeled", &DatasetSplit::labeled)
        .def_readwrite("desc", &DatasetSplit::desc)
        .def_readwrite("kind", &DatasetSplit::kind)
        .def_property_readonly("n", &DatasetSplit::n)
        .def_property_readonly("dim", &DatasetSplit::dim);

    py::class_<ModelParams>(m, "ModelParams")
        .def_readwrite("w", &ModelParams::w)
        .def_readwrite("desc", &ModelParams::desc)
        .def_readwrite("kind", &ModelParams::kind)
        .def_readwrite("k", &ModelParams::k)
        .def_property_readonly("n", &ModelParams::n)
        .def_property_readonly("m", &ModelParams::m);

    py::class_<IterationRecord>(m, "IterationRecord")
        .def_readonly("iteration", &IterationRecord::iteration)
        .def_readonly("objective", &IterationRecord::objective)
        .def_readonly("outputs_changed", &IterationRecord::outputs_changed);

    py::class_<TrainState>(m, "TrainState")
        .def_readonly("y", &TrainState::y)
        .def_readonly("labeled_mask", &TrainState::labeled_mask)
        .def_readonly("objective_trace", &TrainState::objective_trace)
        .def_readonly("log", &TrainState::log);

    py::class_<ScoredCandidate>(m, "ScoredCandidate")
        .def_readonly("candidate", &ScoredCandidate::candidate)
        .def_readonly("s", &ScoredCandidate::s);

    py::class_<Protocol>(m, "Protocol")
        .def(py::init([](int folds, double labeled_fraction, std::uint64_t seed) {
                 return Protocol{folds, labeled_fraction, seed};
             }),
             py::arg("folds") = 10, py::arg("labeled_fraction") = 0.3, py::arg("seed") = 0)
        .def_readwrite("folds", &Protocol::folds)
        .def_readwrite("labeled_fraction", &Protocol::labeled_fraction)
        .def_readwrite("seed", &Protocol::seed);

    py::class_<ExperimentReport>(m, "ExperimentReport")
        .def_readonly("per_fold_loss", &ExperimentReport::per_fold_loss)
        .def_readonly("per_fold_train_seconds", &ExperimentReport::per_fold_train_seconds)
        .def_readonly("mean_loss", &ExperimentReport::mean_loss);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("param_value", &SweepRow::param_value)
        .def_readonly("mean_loss", &SweepRow::mean_loss)
        .def_readonly("std_loss", &SweepRow::std_loss);

    py::class_<SynthSpec>(m, "SynthSpec")
        .def(py::init<>())
        .def_readwrite("family", &SynthSpec::family)
        .def_readwrite("n", &SynthSpec::n)
        .def_readwrite("d", &SynthSpec::d)
        .def_readwrite("classes", &SynthSpec::classes)
        .def_readwrite("modes", &SynthSpec::modes)
        .def_readwrite("noise", &SynthSpec::noise)
        .def_readwrite("seed", &SynthSpec::seed);

    m.def("enumerate_outputs", &enumerate_outputs, py::arg("desc"));
    m.def("encode_output", &encode_output, py::arg("desc"), py::arg("y"));
    m.def("joint_feature", &joint_feature, py::arg("desc"), py::arg("x"), py::arg("y"));
    m.def("loss", &loss, py::arg("kind"), py::arg("desc"), py::arg("y"), py::arg("y2"));
    m.def(
        "score",
        [](const std::vector<double>& w, const std::vector<double>& phi) {
            return score(w, phi);
        },
        py::arg("w"), py::arg("phi"));
    m.def("argmax_output", &argmax_output, py::arg("w"), py::arg("desc"), py::arg("x"));
    m.def(
        "loss_aug_argmax",
        [](const std::vector<double>& w, const OutputDescriptor& desc, LossKind kind,
           const FeatureVector& x, const StructuredOutput& y) {
            const auto res = loss_aug_argmax(w, desc, kind, x, y);
            return py::make_tuple(res.z, res.bound);
        },
        py::arg("w"), py::arg("desc"), py::arg("kind"), py::arg("x"), py::arg("y"));

    m.def("build_index", &build_index, py::arg("X"), py::arg("k"));
    m.def("neighbors_of_query", &neighbors_of_query, py::arg("X"), py::arg("q"), py::arg("k"));

    m.def("train", &train, py::arg("data"), py::arg("cfg"),
          py::call_guard<py::gil_scoped_release>());
    m.def("predict", &predict, py::arg("model"), py::arg("X_train"), py::arg("x"));
    m.def("predict_batch", &predict_batch, py::arg("model"), py::arg("X_train"),
          py::arg("queries"), py::arg("threads") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("scored_candidates", &scored_candidates, py::arg("model"), py::arg("X_train"),
          py::arg("x"));

    m.def("make_cv_plan",
          [](int n, int folds, std::uint64_t seed) { return make_cv_plan(n, folds, seed).fold_of; },
          py::arg("n"), py::arg("folds"), py::arg("seed"));
    m.def("mask_labels", &mask_labels, py::arg("train_indices"), py::arg("fraction"),
          py::arg("seed"));
    m.def("average_loss", &average_loss, py::arg("truths"), py::arg("preds"), py::arg("kind"),
          py::arg("desc"));
    m.def("run_experiment", &run_experiment, py::arg("data"), py::arg("cfg"), py::arg("protocol"),
          py::call_guard<py::gil_scoped_release>());
    m.def("run_global_baseline", &run_global_baseline, py::arg("data"), py::arg("cfg"),
          py::arg("protocol"), py::call_guard<py::gil_scoped_release>());
    m.def("sweep", &sweep, py::arg("data"), py::arg("cfg"), py::arg("protocol"), py::arg("param"),
          py::arg("values"), py::call_guard<py::gil_scoped_release>());
    m.def("generate_synthetic", &generate_synthetic, py::arg("spec"));

    m.def(
        "save_model",
        [](const ModelParams& params, const std::vector<FeatureVector>& train_X,
           const std::string& path) { save_model({params, train_X, nullptr}, path); },
        py::arg("params"), py::arg("train_X"), py::arg("path"));
    m.def(
        "load_model",
        [](const std::string& path) {
            auto file = load_model(path);
            return py::make_tuple(std::move(file.params), std::move(file.train_X));
        },
        py::arg("path"));
    m.def(
        "load_dataset",
        [](const std::string& path) { return to_split(load_dataset(path)); },
        py::arg("path"));
    m.def(
        "save_dataset",
        [](const DatasetSplit& split, const std::string& path) {
            DatasetFile file;
            file.d = static_cast<int>(split.dim());
            file.desc = split.desc;
            file.kind = split.kind;
            for (int i = 0; i < split.n(); ++i) {
                DatasetRecord rec;
                rec.id = std::to_string(i);
                rec.features = split.X[i];
                const auto it = split.labeled.find(i);
                if (it != split.labeled.end()) rec.output = it->second;
                file.records.push_back(std::move(rec));
            }
            save_dataset(file, path);
        },
        py::arg("data"), py::arg("path"));

#ifdef SSLSOP_VERSION
    m.attr("__version__") = SSLSOP_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
