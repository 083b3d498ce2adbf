#include "feplab/experiment.hpp"
#include "feplab/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> source;
    std::vector<std::string> overrides;
};

feplab::ExperimentConfig resolve(const Options& opt) {
    nlohmann::json doc = nlohmann::json::object();
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw feplab::ConfigError("cannot open config " + opt.config_path);
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw feplab::ConfigError(opt.config_path + ": " + e.what());
        }
    }
    for (const auto& o : opt.overrides) feplab::apply_override(doc, o);
    if (opt.seed) doc["seed"] = *opt.seed;
    if (opt.out_dir) doc["out_dir"] = *opt.out_dir;
    if (opt.source) doc["source"] = *opt.source;
    return feplab::config_from_json(doc);
}

void print_points(const feplab::EvaluationResult& r) {
    for (const auto& p : r.points) {
        std::printf("snr %6.2f dB  rmse eesm %.4f nn %.4f  tput eesm %.2f nn %.2f genie %.2f\n", p.avg_snr_db,
                    p.rmse_eesm, p.rmse_nn, p.tput_eesm, p.tput_nn, p.tput_genie);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frame error probability prediction lab: datasets, AWGN curves, EESM and neural predictors"};
    app.require_subcommand(1);
    Options opt;
    auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON experiment config")->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "top-level seed");
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--source", opt.source, "event source: link or oracle");
        sub->add_option("--set", opt.overrides, "override a config key, e.g. experiment.snr_points=5");
    };
    auto* gen = app.add_subcommand("generate", "draw training and per-SNR test datasets");
    auto* curves = app.add_subcommand("curves", "build AWGN reference curves");
    auto* cal = app.add_subcommand("calibrate", "fit one EESM beta per configuration");
    auto* trn = app.add_subcommand("train", "train the neural FEP predictor");
    auto* eval = app.add_subcommand("evaluate", "RMSE and throughput sweep");
    auto* rep = app.add_subcommand("report", "pretty-print result CSVs");
    auto* dump = app.add_subcommand("config", "print the resolved configuration as JSON");
    for (auto* sub : {gen, curves, cal, trn, eval, rep, dump}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const auto config = resolve(opt);
        if (gen->parsed()) {
            feplab::cmd_generate(config);
            std::cout << "wrote datasets to " << config.out_dir.string() << '\n';
        } else if (curves->parsed()) {
            const auto c = feplab::cmd_curves(config);
            std::cout << "wrote " << c.size() << " AWGN curves\n";
        } else if (cal->parsed()) {
            const auto betas = feplab::cmd_calibrate(config);
            for (std::size_t k = 0; k < betas.size(); ++k) std::cout << "k=" << k + 1 << " beta=" << betas[k] << '\n';
        } else if (trn->parsed()) {
            const auto r = feplab::cmd_train(config);
            std::cout << "best epoch " << r.best_epoch << " validation CE " << r.best_validation_ce << '\n';
        } else if (eval->parsed()) {
            print_points(feplab::cmd_evaluate(config));
        } else if (rep->parsed()) {
            feplab::cmd_report(config, std::cout);
        } else if (dump->parsed()) {
            std::cout << feplab::to_json(config).dump(2) << '\n';
        }
    } catch (const feplab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const feplab::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const feplab::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
