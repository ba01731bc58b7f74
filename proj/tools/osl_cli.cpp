// Command-line front end: experiment orchestration plus small utilities for
// dataset generation, training, evaluation, rank analysis and the
// generalization-bound evaluator.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "osl/bounds.hpp"
#include "osl/experiment.hpp"
#include "osl/metrics.hpp"
#include "osl/training.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for read: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

osl::DomainSet suite_by_name(const std::string& name, int shapes, int colors, double noise) {
    if (name == "regression") return osl::regression_suite();
    if (name == "toy") return osl::toy_classification_suite(shapes, colors, noise);
    throw std::runtime_error("unknown suite: " + name);
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            const std::vector<std::uint64_t>& seed_override) {
    osl::ExperimentConfig cfg = osl::experiment_config_from_json(slurp(config_path));
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (!seed_override.empty()) cfg.seeds = seed_override;
    return osl::run_experiment(cfg);
}

int cmd_gen_data(const std::string& suite, int m, int n, std::uint64_t seed,
                 const std::string& out, int shapes, int colors, double noise) {
    const osl::DomainSet ds = suite_by_name(suite, shapes, colors, noise);
    osl::Rng rng(seed);
    const osl::OpenDataset data = osl::sample_dataset(ds, m, n, rng);
    osl::write_jsonl(data, out);
    std::cout << "wrote " << m << " episodes (" << data.sample_count() << " samples) to " << out
              << '\n';
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_dir, std::uint64_t seed) {
    // The train config is the "train" section of an experiment config.
    json wrapper = {{"experiment", "regression_main"},
                    {"train", json::parse(slurp(config_path))}};
    osl::ExperimentConfig cfg = osl::experiment_config_from_json(wrapper.dump());
    osl::TrainConfig tc = cfg.train;
    tc.seed = seed;

    const osl::OpenDataset data = osl::read_jsonl_file(data_path);
    const osl::TrainResult result = osl::osl_train_dataset(data, tc);

    fs::create_directories(out_dir);
    const fs::path ckpt = fs::path(out_dir) / "checkpoint.json";
    osl::save_hypothesis_set(result.hypotheses, ckpt.string());

    std::ofstream report(fs::path(out_dir) / "report.csv");
    report << "epoch,global_error";
    for (int k = 0; k < tc.K; ++k) report << ",alloc_" << k;
    report << '\n';
    for (std::size_t e = 0; e < result.report.epochs.size(); ++e) {
        report << e << ',' << osl::format_number(result.report.epochs[e].global_error);
        for (int c : result.report.epochs[e].allocation_counts) report << ',' << c;
        report << '\n';
    }

    json summary;
    summary["checkpoint"] = ckpt.string();
    summary["seed"] = seed;
    summary["final_global_error"] = result.report.final_global_error();
    summary["epochs"] = result.report.epochs.size();
    std::ofstream(fs::path(out_dir) / "train_summary.json") << summary.dump(2) << '\n';
    std::cout << "final_global_error " << osl::format_number(result.report.final_global_error())
              << '\n';
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& suite, int n_d, int dbs,
             int grid_points, std::uint64_t seed, const std::string& out, int shapes, int colors,
             double noise) {
    const osl::HypothesisSet H = osl::load_hypothesis_set(ckpt_path);
    const osl::DomainSet ds = suite_by_name(suite, shapes, colors, noise);
    osl::Rng rng(osl::mix_seed(seed, osl::kEvalStream));
    const auto grid = osl::regression_grid(grid_points);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        if (!file) throw std::runtime_error("cannot open for write: " + out);
        os = &file;
    }
    *os << "domain_id,sub_err,mod_err,n_d\n";
    for (const auto& d : ds.domains) {
        double mod = 0.0;
        if (d.task_kind == osl::TaskKind::Regression) {
            mod = osl::mod_err(H, d, grid);
        } else {
            std::vector<osl::Vec> inputs;
            for (int i = 0; i < grid_points; ++i) inputs.push_back(d.input_sampler(rng));
            mod = osl::mod_err(H, d, inputs);
        }
        const double sub = osl::sub_err(H, d, n_d, dbs, rng);
        *os << d.id << ',' << osl::format_number(sub) << ',' << osl::format_number(mod) << ','
            << n_d << '\n';
    }
    return 0;
}

int cmd_rank(const std::string& data_path, bool profile) {
    const osl::OpenDataset data = osl::read_jsonl_file(data_path);
    std::vector<osl::Sample> flat;
    for (const auto& ep : data.episodes)
        flat.insert(flat.end(), ep.samples.begin(), ep.samples.end());
    std::cout << osl::mapping_rank(flat) << '\n';
    if (profile) {
        for (const auto& e : osl::conflict_profile(flat)) {
            json row = {{"input", e.input}, {"distinct_outputs", e.distinct_outputs}};
            std::cout << row.dump() << '\n';
        }
    }
    return 0;
}

int cmd_bound(const std::string& inputs_path) {
    const json j = json::parse(slurp(inputs_path));
    osl::BoundInputs b;
    b.vc_s = j.at("vc_s").get<double>();
    b.vc_sbar = j.at("vc_sbar").get<double>();
    b.m = j.at("m").get<long long>();
    b.n = j.at("n").get<long long>();
    if (j.contains("N")) b.num_domains = j["N"].get<long long>();
    if (j.contains("m_counts")) b.m_counts = j["m_counts"].get<std::vector<long long>>();
    b.delta = j.at("delta").get<double>();
    const double emp = j.contains("empirical_error") ? j["empirical_error"].get<double>() : 0.0;

    const osl::BoundBreakdown bb = osl::total_bound(emp, b);
    json out = {{"empirical_error", emp},
                {"domain_term", bb.domain_term},
                {"instance_term", bb.instance_term},
                {"subjective_term", bb.subjective_term},
                {"total", bb.total}};
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Open-ended supervised learning toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, data_path, ckpt_path, suite = "regression", inputs_path;
    std::vector<std::uint64_t> seeds;
    std::uint64_t seed = 1;
    int m = 250, n = 2, n_d = 300, dbs = 2, grid_points = 200;
    int shapes = 8, colors = 8;
    double noise = 0.05;
    bool profile = false;

    auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--out", out_path, "override output directory");
    run->add_option("--seed", seeds, "override seed list");

    auto* gen = app.add_subcommand("gen-data", "sample episodes and write a JSONL dataset");
    gen->add_option("--suite", suite, "regression|toy")->capture_default_str();
    gen->add_option("--m", m, "episodes")->capture_default_str();
    gen->add_option("--n", n, "samples per episode")->capture_default_str();
    gen->add_option("--seed", seed, "sampling seed")->capture_default_str();
    gen->add_option("--out", out_path, "output JSONL path")->required();
    gen->add_option("--shapes", shapes, "toy suite shape count")->capture_default_str();
    gen->add_option("--colors", colors, "toy suite color count")->capture_default_str();
    gen->add_option("--noise", noise, "toy suite input noise std")->capture_default_str();

    auto* train = app.add_subcommand("train", "train on a JSONL dataset");
    train->add_option("--config", config_path, "train config JSON")->required();
    train->add_option("--data", data_path, "JSONL dataset")->required();
    train->add_option("--out", out_path, "output directory")->required();
    train->add_option("--seed", seed, "run seed")->capture_default_str();

    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint against a suite");
    ev->add_option("--checkpoint", ckpt_path, "hypothesis-set checkpoint")->required();
    ev->add_option("--suite", suite, "regression|toy")->capture_default_str();
    ev->add_option("--n-d", n_d, "decision units per domain")->capture_default_str();
    ev->add_option("--dbs", dbs, "decision batch size")->capture_default_str();
    ev->add_option("--grid", grid_points, "test inputs per domain")->capture_default_str();
    ev->add_option("--seed", seed, "eval seed")->capture_default_str();
    ev->add_option("--out", out_path, "output CSV (default stdout)");
    ev->add_option("--shapes", shapes, "toy suite shape count")->capture_default_str();
    ev->add_option("--colors", colors, "toy suite color count")->capture_default_str();
    ev->add_option("--noise", noise, "toy suite input noise std")->capture_default_str();

    auto* rank = app.add_subcommand("rank", "mapping rank of a JSONL dataset");
    rank->add_option("--data", data_path, "JSONL dataset")->required();
    rank->add_flag("--profile", profile, "also print the per-input conflict profile");

    auto* bound = app.add_subcommand("bound", "evaluate the generalization bound terms");
    bound->add_option("--inputs", inputs_path, "bound inputs JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_path, seeds);
        if (gen->parsed()) return cmd_gen_data(suite, m, n, seed, out_path, shapes, colors, noise);
        if (train->parsed()) return cmd_train(config_path, data_path, out_path, seed);
        if (ev->parsed())
            return cmd_eval(ckpt_path, suite, n_d, dbs, grid_points, seed, out_path, shapes,
                            colors, noise);
        if (rank->parsed()) return cmd_rank(data_path, profile);
        if (bound->parsed()) return cmd_bound(inputs_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
