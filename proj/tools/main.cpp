// sslsop command line: synthetic data generation, training, prediction, and
// the cross-validated evaluation / parameter-sweep protocol.
//
// Exit codes: 0 ok, 2 usage, 3 I/O failure, 4 data validation, 5 numeric
// failure (training divergence).

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sslsop/evaluation.hpp"
#include "sslsop/inference.hpp"
#include "sslsop/io.hpp"

using nlohmann::json;
using namespace sslsop;

namespace {

// shortest round-trip decimal form
std::string fmt(double v) { return json(v).dump(); }

std::string fold_label(std::size_t fold) { return std::to_string(fold); }

struct TrainFlags {
    int k = 5;
    double C = 0.1;
    double eta = 0.05;
    int iterations = 50;
    std::uint64_t seed = 0;
    std::string init = "nearest_labeled";
    int threads = 1;

    TrainConfig to_config() const {
        TrainConfig cfg;
        cfg.k = k;
        cfg.C = C;
        cfg.eta = eta;
        cfg.iterations = iterations;
        cfg.seed = seed;
        cfg.init_policy = init == "first_candidate" ? InitPolicy::FirstCandidate
                                                    : InitPolicy::NearestLabeled;
        cfg.threads = threads;
        cfg.validate();
        return cfg;
    }

    json echo() const {
        return {{"k", k},       {"C", C},       {"eta", eta},     {"iterations", iterations},
                {"seed", seed}, {"init", init}, {"threads", threads}};
    }
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
    cmd->add_option("--k", flags.k, "neighborhood size")->capture_default_str();
    cmd->add_option("--C", flags.C, "tradeoff weight (eta*C must stay < 1)")
        ->capture_default_str();
    cmd->add_option("--eta", flags.eta, "learning rate")->capture_default_str();
    cmd->add_option("--iterations,--T", flags.iterations, "training iterations")
        ->capture_default_str();
    cmd->add_option("--seed", flags.seed, "random seed")->capture_default_str();
    cmd->add_option("--init", flags.init, "unlabeled output init policy")
        ->check(CLI::IsMember({"nearest_labeled", "first_candidate"}))
        ->capture_default_str();
    cmd->add_option("--threads", flags.threads, "worker threads for the parallel phases")
        ->capture_default_str();
}

DatasetFile load_dataset_checked(const std::string& path) {
    DatasetFile file = load_dataset(path);
    if (file.records.empty()) return file;
    return file;
}

void write_report_csv(std::ostringstream& out, const std::string& method,
                      const ExperimentReport& report) {
    double mean_seconds = 0.0;
    for (std::size_t f = 0; f < report.per_fold_loss.size(); ++f) {
        out << method << ',' << fold_label(f) << ',' << fmt(report.per_fold_loss[f]) << ','
            << fmt(report.per_fold_train_seconds[f]) << '\n';
        mean_seconds += report.per_fold_train_seconds[f];
    }
    mean_seconds /= static_cast<double>(report.per_fold_train_seconds.size());
    out << method << ",mean," << fmt(report.mean_loss) << ',' << fmt(mean_seconds) << '\n';
}

// --- synth ------------------------------------------------------------------

struct SynthFlags {
    std::string family = "multiclass";
    int n = 100;
    int d = 2;
    int classes = 2;
    int modes = 1;
    double noise = 0.1;
    std::uint64_t seed = 0;
    std::string out;
};

int run_synth(const SynthFlags& f) {
    SynthSpec spec;
    spec.family = f.family == "multiclass" ? OutputFamily::Multiclass
                  : f.family == "tree"     ? OutputFamily::TreeLeaf
                                           : OutputFamily::TagSequence;
    spec.n = f.n;
    spec.d = f.d;
    spec.classes = f.classes;
    spec.modes = f.modes;
    spec.noise = f.noise;
    spec.seed = f.seed;
    const auto data = generate_synthetic(spec);

    DatasetFile file;
    file.d = static_cast<int>(data.dim());
    file.desc = data.desc;
    file.kind = data.kind;
    file.config = {{"command", "synth"}, {"family", f.family},   {"n", f.n},
                   {"d", f.d},           {"classes", f.classes}, {"modes", f.modes},
                   {"noise", f.noise},   {"seed", f.seed}};
    for (int i = 0; i < data.n(); ++i)
        file.records.push_back({std::to_string(i), data.X[i], data.labeled.at(i)});
    save_dataset(file, f.out);
    std::cout << "wrote " << data.n() << " points to " << f.out << '\n';
    return 0;
}

// --- train -----------------------------------------------------------------

struct TrainCmdFlags {
    std::string data_path;
    std::string model_out;
    std::string log_path;
    double labeled_fraction = -1.0;   // < 0: use the file's labels as-is
    TrainFlags train;
};

int run_train(const TrainCmdFlags& f) {
    const auto file = load_dataset_checked(f.data_path);
    auto split = to_split(file);

    if (f.labeled_fraction >= 0.0) {
        std::vector<int> labeled_indices;
        for (const auto& [i, y] : split.labeled) labeled_indices.push_back(i);
        const auto keep = mask_labels(labeled_indices, f.labeled_fraction, f.train.seed);
        std::map<int, StructuredOutput> masked;
        for (int i : keep) masked.emplace(i, split.labeled.at(i));
        split.labeled = std::move(masked);
    }

    const TrainConfig cfg = f.train.to_config();
    auto [params, state] = train(split, cfg);

    json config = f.train.echo();
    config["command"] = "train";
    config["data"] = f.data_path;
    if (f.labeled_fraction >= 0.0) config["labeled_fraction"] = f.labeled_fraction;

    save_model({params, split.X, config}, f.model_out);

    if (!f.log_path.empty()) {
        std::ostringstream log;
        log << "# config " << config.dump() << '\n';
        log << "iteration,objective,outputs_changed\n";
        for (const auto& rec : state.log)
            log << rec.iteration << ',' << fmt(rec.objective) << ',' << rec.outputs_changed
                << '\n';
        write_file_atomic(f.log_path, log.str());
    }

    std::cout << "trained " << params.n() << " local predictors (m = " << params.m() << ", "
              << split.labeled.size() << " labeled); model written to " << f.model_out << '\n';
    return 0;
}

// --- predict ----------------------------------------------------------------

struct PredictFlags {
    std::string model_path;
    std::string data_path;
    std::string out;
    std::string scores_out;
    int threads = 1;
};

int run_predict(const PredictFlags& f) {
    const auto model = load_model(f.model_path);
    const auto file = load_dataset_checked(f.data_path);

    const int model_d = model.train_X.empty() ? 0 : static_cast<int>(model.train_X[0].size());
    if (model_d != file.d)
        throw ValidationError(0, "model expects d = " + std::to_string(model_d) +
                                     " but dataset declares d = " + std::to_string(file.d));
    if (!model.params.desc.same_space(file.desc))
        throw ValidationError(0, "model task descriptor does not match the dataset's");

    std::vector<FeatureVector> queries;
    queries.reserve(file.records.size());
    for (const auto& rec : file.records) queries.push_back(rec.features);
    const auto preds = predict_batch(model.params, model.train_X, queries, f.threads);

    json config = {{"command", "predict"}, {"model", f.model_path}, {"data", f.data_path}};
    std::ostringstream out;
    out << json{{"schema", 1}, {"config", config}}.dump() << '\n';
    for (std::size_t q = 0; q < preds.size(); ++q) {
        out << json{{"id", file.records[q].id},
                    {"output", output_to_json(model.params.desc, preds[q])}}
                   .dump()
            << '\n';
    }
    write_file_atomic(f.out, out.str());

    if (!f.scores_out.empty()) {
        std::ostringstream sout;
        sout << json{{"schema", 1}, {"config", config}}.dump() << '\n';
        for (std::size_t q = 0; q < queries.size(); ++q) {
            json scores = json::array();
            for (const auto& sc : scored_candidates(model.params, model.train_X, queries[q]))
                scores.push_back({{"output", output_to_json(model.params.desc, sc.candidate)},
                                  {"s", sc.s}});
            sout << json{{"id", file.records[q].id}, {"scores", scores}}.dump() << '\n';
        }
        write_file_atomic(f.scores_out, sout.str());
    }

    std::cout << "predicted " << preds.size() << " outputs to " << f.out << '\n';
    return 0;
}

// --- eval -------------------------------------------------------------------

struct EvalFlags {
    std::string data_path;
    std::string out;
    int folds = 10;
    double labeled_fraction = 0.3;
    bool baseline = false;
    TrainFlags train;
};

int run_eval(const EvalFlags& f) {
    const auto file = load_dataset_checked(f.data_path);
    for (std::size_t i = 0; i < file.records.size(); ++i)
        if (!file.records[i].output)
            throw ValidationError(static_cast<int>(i) + 2,
                                  "record \"" + file.records[i].id +
                                      "\" lacks an output; evaluation needs ground truth");
    const auto split = to_split(file);

    const TrainConfig cfg = f.train.to_config();
    const Protocol protocol{f.folds, f.labeled_fraction, f.train.seed};

    json config = f.train.echo();
    config["command"] = "eval";
    config["data"] = f.data_path;
    config["folds"] = f.folds;
    config["labeled_fraction"] = f.labeled_fraction;
    config["baseline"] = f.baseline;

    std::ostringstream out;
    out << "# config " << config.dump() << '\n';
    out << "method,fold_id,loss,seconds\n";

    const auto report = run_experiment(split, cfg, protocol);
    write_report_csv(out, "sslsop", report);
    std::cout << "sslsop mean_loss " << fmt(report.mean_loss) << '\n';

    if (f.baseline) {
        const auto global = run_global_baseline(split, cfg, protocol);
        write_report_csv(out, "global", global);
        std::cout << "global mean_loss " << fmt(global.mean_loss) << '\n';
    }
    write_file_atomic(f.out, out.str());
    return 0;
}

// --- sweep ------------------------------------------------------------------

struct SweepFlags {
    std::string data_path;
    std::string out;
    std::string param;
    std::vector<double> values;
    int folds = 10;
    double labeled_fraction = 0.3;
    TrainFlags train;
};

int run_sweep(const SweepFlags& f) {
    const auto file = load_dataset_checked(f.data_path);
    for (std::size_t i = 0; i < file.records.size(); ++i)
        if (!file.records[i].output)
            throw ValidationError(static_cast<int>(i) + 2,
                                  "record \"" + file.records[i].id +
                                      "\" lacks an output; evaluation needs ground truth");
    const auto split = to_split(file);

    const TrainConfig cfg = f.train.to_config();
    const Protocol protocol{f.folds, f.labeled_fraction, f.train.seed};
    const SweepParam param = f.param == "k" ? SweepParam::K : SweepParam::C;

    const auto rows = sweep(split, cfg, protocol, param, f.values);

    json config = f.train.echo();
    config["command"] = "sweep";
    config["data"] = f.data_path;
    config["param"] = f.param;
    config["values"] = f.values;
    config["folds"] = f.folds;
    config["labeled_fraction"] = f.labeled_fraction;

    std::ostringstream out;
    out << "# config " << config.dump() << '\n';
    out << "param_value,mean_loss,std_loss\n";
    for (const auto& row : rows)
        out << fmt(row.param_value) << ',' << fmt(row.mean_loss) << ',' << fmt(row.std_loss)
            << '\n';
    write_file_atomic(f.out, out.str());

    std::cout << "swept " << f.param << " over " << rows.size() << " values; table written to "
              << f.out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semi-supervised local structured output prediction"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read defaults from a TOML/INI file");

    SynthFlags synth_flags;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset file");
    synth->add_option("--family", synth_flags.family, "output family")
        ->check(CLI::IsMember({"multiclass", "tree", "sequence"}))
        ->capture_default_str();
    synth->add_option("--n", synth_flags.n, "number of points")->capture_default_str();
    synth->add_option("--d", synth_flags.d, "feature dimension")->capture_default_str();
    synth->add_option("--classes", synth_flags.classes, "classes (multiclass)")
        ->capture_default_str();
    synth->add_option("--modes", synth_flags.modes, "clusters per class (multiclass)")
        ->capture_default_str();
    synth->add_option("--noise", synth_flags.noise, "cluster noise")->capture_default_str();
    synth->add_option("--seed", synth_flags.seed, "random seed")->capture_default_str();
    synth->add_option("--out", synth_flags.out, "output dataset path")->required();
    synth->callback([&] { run_synth(synth_flags); });

    TrainCmdFlags train_flags;
    auto* train_cmd = app.add_subcommand("train", "train local predictors on a dataset file");
    train_cmd->add_option("--data", train_flags.data_path, "dataset path")->required();
    train_cmd->add_option("--model-out", train_flags.model_out, "model output path")->required();
    train_cmd->add_option("--log", train_flags.log_path, "iteration log CSV path");
    train_cmd
        ->add_option("--labeled-fraction", train_flags.labeled_fraction,
                     "mask the file's labels down to this fraction")
        ->check(CLI::Range(0.0, 1.0));
    add_train_flags(train_cmd, train_flags.train);
    train_cmd->callback([&] { run_train(train_flags); });

    PredictFlags predict_flags;
    auto* predict_cmd = app.add_subcommand("predict", "predict outputs for a query file");
    predict_cmd->add_option("--model", predict_flags.model_path, "model path")->required();
    predict_cmd->add_option("--data", predict_flags.data_path, "query dataset path")->required();
    predict_cmd->add_option("--out", predict_flags.out, "predictions output path")->required();
    predict_cmd->add_option("--scores-out", predict_flags.scores_out,
                            "optional per-candidate score dump");
    predict_cmd->add_option("--threads", predict_flags.threads, "worker threads")
        ->capture_default_str();
    predict_cmd->callback([&] { run_predict(predict_flags); });

    EvalFlags eval_flags;
    auto* eval_cmd = app.add_subcommand("eval", "cross-validated evaluation");
    eval_cmd->add_option("--data", eval_flags.data_path, "fully labeled dataset path")->required();
    eval_cmd->add_option("--out", eval_flags.out, "report CSV path")->required();
    eval_cmd->add_option("--folds", eval_flags.folds, "cross-validation folds")
        ->capture_default_str();
    eval_cmd
        ->add_option("--labeled-fraction", eval_flags.labeled_fraction,
                     "labeled fraction inside each training split")
        ->capture_default_str();
    eval_cmd->add_flag("--baseline", eval_flags.baseline,
                       "also run the k = n global baseline");
    add_train_flags(eval_cmd, eval_flags.train);
    eval_cmd->callback([&] { run_eval(eval_flags); });

    SweepFlags sweep_flags;
    auto* sweep_cmd = app.add_subcommand("sweep", "parameter sensitivity sweep");
    sweep_cmd->add_option("--data", sweep_flags.data_path, "fully labeled dataset path")
        ->required();
    sweep_cmd->add_option("--out", sweep_flags.out, "curve CSV path")->required();
    sweep_cmd->add_option("--param", sweep_flags.param, "parameter to sweep")
        ->check(CLI::IsMember({"k", "C"}))
        ->required();
    sweep_cmd->add_option("--values", sweep_flags.values, "comma-separated sweep values")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--folds", sweep_flags.folds, "cross-validation folds")
        ->capture_default_str();
    sweep_cmd
        ->add_option("--labeled-fraction", sweep_flags.labeled_fraction,
                     "labeled fraction inside each training split")
        ->capture_default_str();
    add_train_flags(sweep_cmd, sweep_flags.train);
    sweep_cmd->callback([&] { run_sweep(sweep_flags); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const SpaceTooLarge& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 5;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
