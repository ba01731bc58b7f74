#include "osl/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "osl/metrics.hpp"
#include "json.hpp"

namespace osl {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct MetricsRow {
    std::string method;
    int K = 0;
    int m = 0;
    int n = 0;
    std::uint64_t seed = 0;
    int domain_id = 0;
    double sub_err = 0.0;
    double mod_err = 0.0;
    double global_error = 0.0;
};

std::string run_tag(const std::string& method, int K, int m, int n, std::uint64_t seed) {
    std::ostringstream ss;
    ss << method << "_K" << K << "_m" << m << "_n" << n << "_seed" << seed;
    return ss.str();
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path.string());
    return out;
}

void write_report_csv(const fs::path& path, const TrainReport& report, int K) {
    auto out = open_out(path);
    out << "epoch,global_error";
    for (int k = 0; k < K; ++k) out << ",alloc_" << k;
    out << '\n';
    for (std::size_t e = 0; e < report.epochs.size(); ++e) {
        out << e << ',' << format_number(report.epochs[e].global_error);
        for (int c : report.epochs[e].allocation_counts) out << ',' << c;
        out << '\n';
    }
}

void write_curves_csv(const fs::path& path, const HypothesisSet& H, const DomainSet& ds,
                      const std::vector<Vec>& grid) {
    auto out = open_out(path);
    out << "x";
    for (int k = 0; k < H.size(); ++k) out << ",member_" << k;
    for (const auto& d : ds.domains) out << ",target_" << d.id;
    out << '\n';
    for (const Vec& x : grid) {
        out << format_number(x[0]);
        for (const auto& member : H.members) out << ',' << format_number(forward(member, x)[0]);
        for (const auto& d : ds.domains) out << ',' << format_number(d.target(x)[0]);
        out << '\n';
    }
}

void write_metrics_csv(const fs::path& path, const std::vector<MetricsRow>& rows) {
    auto out = open_out(path);
    out << "method,K,m,n,seed,domain_id,sub_err,mod_err,global_error\n";
    for (const auto& r : rows) {
        out << r.method << ',' << r.K << ',' << r.m << ',' << r.n << ',' << r.seed << ','
            << r.domain_id << ',' << format_number(r.sub_err) << ',' << format_number(r.mod_err)
            << ',' << format_number(r.global_error) << '\n';
    }
}

std::vector<Vec> classification_test_inputs(const Domain& d, int count, Rng& rng) {
    std::vector<Vec> inputs;
    inputs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) inputs.push_back(d.input_sampler(rng));
    return inputs;
}

/// Evaluates one trained hypothesis set over every domain and appends
/// metrics rows. Regression uses the fixed midpoint grid; classification
/// draws fresh inputs from each domain.
json evaluate_domains(const HypothesisSet& H, const DomainSet& ds, const EvalSettings& eval,
                      std::uint64_t run_seed, const MetricsRow& base,
                      std::vector<MetricsRow>& rows) {
    Rng eval_rng(mix_seed(run_seed, kEvalStream));
    const auto grid = regression_grid(eval.grid_points);
    json out = json::array();
    for (const auto& d : ds.domains) {
        MetricsRow row = base;
        row.domain_id = d.id;
        if (d.task_kind == TaskKind::Regression) {
            row.mod_err = mod_err(H, d, grid);
        } else {
            const auto inputs = classification_test_inputs(d, eval.grid_points, eval_rng);
            row.mod_err = mod_err(H, d, inputs);
        }
        row.sub_err = sub_err(H, d, eval.n_d, eval.decision_batch_size, eval_rng);
        rows.push_back(row);
        out.push_back({{"domain_id", d.id}, {"sub_err", row.sub_err}, {"mod_err", row.mod_err}});
    }
    return out;
}

std::vector<LayerShape> default_regression_shapes() {
    const std::array<int, 6> dims = {1, 32, 32, 32, 32, 1};
    return dense_shapes(dims);
}

std::vector<LayerShape> default_toy_shapes(const ToySettings& toy) {
    const std::array<int, 4> dims = {toy.num_shapes + toy.num_colors, 32, 32,
                                     std::max(toy.num_shapes, toy.num_colors)};
    return dense_shapes(dims);
}

json shapes_to_json(const std::vector<LayerShape>& shapes) {
    json arr = json::array();
    for (const auto& s : shapes)
        arr.push_back({{"in", s.in_dim}, {"out", s.out_dim}, {"activation", to_string(s.activation)}});
    return arr;
}

std::vector<LayerShape> shapes_from_json(const json& arr) {
    std::vector<LayerShape> shapes;
    for (const auto& s : arr)
        shapes.push_back({s.at("in").get<int>(), s.at("out").get<int>(),
                          activation_from_string(s.at("activation").get<std::string>())});
    return shapes;
}

struct RunRecord {
    json summary;
    bool diverged = false;
};

/// One training run plus evaluation and file emission. Divergence is caught
/// and recorded; other errors propagate.
template <typename TrainFn>
RunRecord execute_run(const std::string& method, TrainConfig cfg, const DomainSet& ds,
                      const EvalSettings& eval, const fs::path& out_dir,
                      std::vector<MetricsRow>& rows, bool curves, TrainFn&& train_fn) {
    const std::string tag = run_tag(method, cfg.K, cfg.m, cfg.n, cfg.seed);
    RunRecord rec;
    rec.summary["method"] = method;
    rec.summary["K"] = cfg.K;
    rec.summary["m"] = cfg.m;
    rec.summary["n"] = cfg.n;
    rec.summary["seed"] = cfg.seed;
    try {
        TrainResult result = train_fn(cfg);
        const fs::path report_csv = out_dir / ("report_" + tag + ".csv");
        const fs::path ckpt = out_dir / ("checkpoint_" + tag + ".json");
        write_report_csv(report_csv, result.report, cfg.K);
        save_hypothesis_set(result.hypotheses, ckpt.string());
        result.report.checkpoint = ckpt.string();

        MetricsRow base;
        base.method = method;
        base.K = cfg.K;
        base.m = cfg.m;
        base.n = cfg.n;
        base.seed = cfg.seed;
        base.global_error = result.report.final_global_error();
        rec.summary["status"] = "ok";
        rec.summary["final_global_error"] = base.global_error;
        rec.summary["final_allocations"] = result.report.epochs.back().allocation_counts;
        rec.summary["eval_seed"] = cfg.seed;
        rec.summary["report_csv"] = report_csv.string();
        rec.summary["checkpoint"] = ckpt.string();
        rec.summary["domains"] = evaluate_domains(result.hypotheses, ds, eval, cfg.seed, base, rows);
        if (curves) {
            const fs::path curves_csv = out_dir / ("curves_" + tag + ".csv");
            write_curves_csv(curves_csv, result.hypotheses, ds, regression_grid(eval.grid_points));
            rec.summary["curves_csv"] = curves_csv.string();
        }
    } catch (const TrainingDiverged& e) {
        rec.diverged = true;
        rec.summary["status"] = "diverged";
        rec.summary["error"] = e.what();
    }
    return rec;
}

int run_regression_main(const ExperimentConfig& cfg, const fs::path& out_dir, json& summary) {
    const DomainSet suite = regression_suite();
    std::vector<MetricsRow> rows;
    auto& runs = summary["runs"] = json::array();
    for (std::uint64_t seed : cfg.seeds) {
        for (int K : cfg.k_values) {
            TrainConfig tc = cfg.train;
            tc.K = K;
            tc.seed = seed;
            runs.push_back(execute_run("osl", tc, suite, cfg.eval, out_dir, rows, true,
                                       [&](const TrainConfig& c) { return osl_train(suite, c); })
                               .summary);
        }
        TrainConfig vc = cfg.train;
        vc.K = 1;
        vc.seed = seed;
        runs.push_back(execute_run("vanilla", vc, suite, cfg.eval, out_dir, rows, true,
                                   [&](const TrainConfig& c) { return osl_train(suite, c); })
                           .summary);
    }
    write_metrics_csv(out_dir / "metrics.csv", rows);
    return 0;
}

int run_regression_ablation(const ExperimentConfig& cfg, const fs::path& out_dir, json& summary) {
    const DomainSet suite = regression_suite();
    std::vector<MetricsRow> rows;
    auto& runs = summary["runs"] = json::array();
    for (std::uint64_t seed : cfg.seeds) {
        for (const auto& [m, n] : cfg.ablations) {
            TrainConfig tc = cfg.train;
            tc.m = m;
            tc.n = n;
            tc.seed = seed;
            runs.push_back(execute_run("osl", tc, suite, cfg.eval, out_dir, rows, false,
                                       [&](const TrainConfig& c) { return osl_train(suite, c); })
                               .summary);
        }
    }
    write_metrics_csv(out_dir / "metrics.csv", rows);
    return 0;
}

int run_toy_classification(const ExperimentConfig& cfg, const fs::path& out_dir, json& summary) {
    const DomainSet suite =
        toy_classification_suite(cfg.toy.num_shapes, cfg.toy.num_colors, cfg.toy.noise_std);
    std::vector<MetricsRow> rows;
    auto& runs = summary["runs"] = json::array();
    const auto identity = [](int domain_id) { return domain_id; };
    for (std::uint64_t seed : cfg.seeds) {
        TrainConfig tc = cfg.train;
        tc.seed = seed;
        runs.push_back(execute_run("osl", tc, suite, cfg.eval, out_dir, rows, false,
                                   [&](const TrainConfig& c) { return osl_train(suite, c); })
                           .summary);
        runs.push_back(execute_run("oracle", tc, suite, cfg.eval, out_dir, rows, false,
                                   [&](const TrainConfig& c) {
                                       return oracle_mtl_train(suite, c, identity);
                                   })
                           .summary);
    }
    write_metrics_csv(out_dir / "metrics.csv", rows);
    return 0;
}

int run_rank_analysis(const ExperimentConfig& cfg, const fs::path& out_dir, json& summary) {
    if (cfg.dataset_path.empty()) {
        std::cerr << "rank analysis requires a dataset path\n";
        return 2;
    }
    const OpenDataset data = read_jsonl_file(cfg.dataset_path);
    std::vector<Sample> flat;
    for (const auto& ep : data.episodes)
        flat.insert(flat.end(), ep.samples.begin(), ep.samples.end());
    const int rank = mapping_rank(flat);
    const auto profile = conflict_profile(flat);
    summary["mapping_rank"] = rank;
    auto& pj = summary["conflict_profile"] = json::array();
    for (const auto& e : profile)
        pj.push_back({{"input", e.input}, {"distinct_outputs", e.distinct_outputs}});
    std::cout << "mapping_rank " << rank << '\n';
    for (const auto& e : profile) {
        std::cout << "input [";
        for (std::size_t i = 0; i < e.input.size(); ++i)
            std::cout << (i ? " " : "") << format_number(e.input[i]);
        std::cout << "] distinct_outputs " << e.distinct_outputs << '\n';
    }
    (void)out_dir;
    return 0;
}

int run_bound_sweep(const ExperimentConfig& cfg, const fs::path& out_dir, json& summary) {
    auto out = open_out(out_dir / "bound_sweep.csv");
    out << "m,n,domain_term,instance_term,subjective_term,total\n";
    for (long long m : cfg.bound.m_values) {
        for (long long n : cfg.bound.n_values) {
            BoundInputs b;
            b.vc_s = cfg.bound.vc_s;
            b.vc_sbar = cfg.bound.vc_sbar;
            b.delta = cfg.bound.delta;
            b.m = m;
            b.n = n;
            b.num_domains = 1;
            b.m_counts = {m};
            const BoundBreakdown bb = total_bound(cfg.bound.empirical_error, b);
            out << m << ',' << n << ',' << format_number(bb.domain_term) << ','
                << format_number(bb.instance_term) << ',' << format_number(bb.subjective_term)
                << ',' << format_number(bb.total) << '\n';
        }
    }
    summary["bound_sweep_csv"] = (out_dir / "bound_sweep.csv").string();
    return 0;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::RegressionMain: return "regression_main";
        case ExperimentKind::RegressionAblation: return "regression_ablation";
        case ExperimentKind::ToyClassification: return "toy_classification";
        case ExperimentKind::RankAnalysis: return "rank_analysis";
        case ExperimentKind::BoundSweep: return "bound_sweep";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "regression_main") return ExperimentKind::RegressionMain;
    if (s == "regression_ablation") return ExperimentKind::RegressionAblation;
    if (s == "toy_classification") return ExperimentKind::ToyClassification;
    if (s == "rank_analysis") return ExperimentKind::RankAnalysis;
    if (s == "bound_sweep") return ExperimentKind::BoundSweep;
    throw std::invalid_argument("unknown experiment: " + s);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.experiment = experiment_kind_from_string(j.at("experiment").get<std::string>());
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty()) throw std::invalid_argument("seeds must be non-empty");

    if (j.contains("toy")) {
        const auto& t = j["toy"];
        if (t.contains("num_shapes")) cfg.toy.num_shapes = t["num_shapes"].get<int>();
        if (t.contains("num_colors")) cfg.toy.num_colors = t["num_colors"].get<int>();
        if (t.contains("noise_std")) cfg.toy.noise_std = t["noise_std"].get<double>();
    }

    // Task-dependent training defaults, overridable field by field.
    const bool toy = cfg.experiment == ExperimentKind::ToyClassification;
    cfg.train.epochs = toy ? 50 : 400;
    cfg.train.loss = toy ? LossKind::CrossEntropy : LossKind::SquaredError;
    cfg.train.K = toy ? 2 : 3;
    cfg.train.shapes = toy ? default_toy_shapes(cfg.toy) : default_regression_shapes();
    if (j.contains("train")) {
        const auto& t = j["train"];
        if (t.contains("K")) cfg.train.K = t["K"].get<int>();
        if (t.contains("m")) cfg.train.m = t["m"].get<int>();
        if (t.contains("n")) cfg.train.n = t["n"].get<int>();
        if (t.contains("epochs")) cfg.train.epochs = t["epochs"].get<int>();
        if (t.contains("loss")) cfg.train.loss = loss_from_string(t["loss"].get<std::string>());
        if (t.contains("resample_each_epoch"))
            cfg.train.resample_each_epoch = t["resample_each_epoch"].get<bool>();
        if (t.contains("divergence_limit"))
            cfg.train.divergence_limit = t["divergence_limit"].get<double>();
        if (t.contains("shapes")) cfg.train.shapes = shapes_from_json(t["shapes"]);
        if (t.contains("sgd")) {
            const auto& s = t["sgd"];
            if (s.contains("step_size")) cfg.train.sgd.step_size = s["step_size"].get<double>();
            if (s.contains("momentum")) cfg.train.sgd.momentum = s["momentum"].get<double>();
            if (s.contains("weight_decay"))
                cfg.train.sgd.weight_decay = s["weight_decay"].get<double>();
        }
    }
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        if (e.contains("grid_points")) cfg.eval.grid_points = e["grid_points"].get<int>();
        if (e.contains("n_d")) cfg.eval.n_d = e["n_d"].get<int>();
        if (e.contains("decision_batch_size"))
            cfg.eval.decision_batch_size = e["decision_batch_size"].get<int>();
    }
    if (j.contains("k_values")) cfg.k_values = j["k_values"].get<std::vector<int>>();
    if (j.contains("ablations")) {
        cfg.ablations.clear();
        for (const auto& p : j["ablations"])
            cfg.ablations.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    }
    if (j.contains("dataset")) cfg.dataset_path = j["dataset"].get<std::string>();
    if (j.contains("bound")) {
        const auto& b = j["bound"];
        if (b.contains("vc_s")) cfg.bound.vc_s = b["vc_s"].get<double>();
        if (b.contains("vc_sbar")) cfg.bound.vc_sbar = b["vc_sbar"].get<double>();
        if (b.contains("delta")) cfg.bound.delta = b["delta"].get<double>();
        if (b.contains("empirical_error"))
            cfg.bound.empirical_error = b["empirical_error"].get<double>();
        if (b.contains("m_values")) cfg.bound.m_values = b["m_values"].get<std::vector<long long>>();
        if (b.contains("n_values")) cfg.bound.n_values = b["n_values"].get<std::vector<long long>>();
    }
    return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = to_string(cfg.experiment);
    j["output_dir"] = cfg.output_dir;
    j["seeds"] = cfg.seeds;
    j["train"] = {{"K", cfg.train.K},
                  {"m", cfg.train.m},
                  {"n", cfg.train.n},
                  {"epochs", cfg.train.epochs},
                  {"loss", to_string(cfg.train.loss)},
                  {"resample_each_epoch", cfg.train.resample_each_epoch},
                  {"divergence_limit", cfg.train.divergence_limit},
                  {"shapes", shapes_to_json(cfg.train.shapes)},
                  {"sgd",
                   {{"step_size", cfg.train.sgd.step_size},
                    {"momentum", cfg.train.sgd.momentum},
                    {"weight_decay", cfg.train.sgd.weight_decay}}}};
    j["eval"] = {{"grid_points", cfg.eval.grid_points},
                 {"n_d", cfg.eval.n_d},
                 {"decision_batch_size", cfg.eval.decision_batch_size}};
    j["k_values"] = cfg.k_values;
    json ab = json::array();
    for (const auto& [m, n] : cfg.ablations) ab.push_back({m, n});
    j["ablations"] = ab;
    j["toy"] = {{"num_shapes", cfg.toy.num_shapes},
                {"num_colors", cfg.toy.num_colors},
                {"noise_std", cfg.toy.noise_std}};
    if (!cfg.dataset_path.empty()) j["dataset"] = cfg.dataset_path;
    j["bound"] = {{"vc_s", cfg.bound.vc_s},       {"vc_sbar", cfg.bound.vc_sbar},
                  {"delta", cfg.bound.delta},     {"empirical_error", cfg.bound.empirical_error},
                  {"m_values", cfg.bound.m_values}, {"n_values", cfg.bound.n_values}};
    return j.dump(2);
}

int run_experiment(const ExperimentConfig& cfg) {
    try {
        if (cfg.seeds.empty()) throw std::invalid_argument("seeds must be non-empty");
        const fs::path out_dir(cfg.output_dir);
        fs::create_directories(out_dir);

        json summary;
        summary["config"] = json::parse(experiment_config_to_json(cfg));
        int rc = 0;
        switch (cfg.experiment) {
            case ExperimentKind::RegressionMain:
                rc = run_regression_main(cfg, out_dir, summary);
                break;
            case ExperimentKind::RegressionAblation:
                rc = run_regression_ablation(cfg, out_dir, summary);
                break;
            case ExperimentKind::ToyClassification:
                rc = run_toy_classification(cfg, out_dir, summary);
                break;
            case ExperimentKind::RankAnalysis:
                rc = run_rank_analysis(cfg, out_dir, summary);
                break;
            case ExperimentKind::BoundSweep:
                rc = run_bound_sweep(cfg, out_dir, summary);
                break;
        }
        if (rc != 0) return rc;
        auto out = open_out(out_dir / "summary.json");
        out << summary.dump(2) << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "experiment failed: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace osl
