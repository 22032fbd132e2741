#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "rffi/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"LoRa radio fingerprint pipeline: simulate, train, evaluate, report"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::uint64_t seed = 0;
    std::string strategy = "online";
    std::string snr_list = "40,30,20,10,0", sf_list = "", npkt_list = "1";

    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* c = sub->add_option("--config", config_path, "key=value config file");
        if (need_config) c->required();
        sub->add_option("--seed", seed, "RNG seed");
        sub->add_option("--out", out_dir, "output directory (must exist)");
    };

    auto* gen = app.add_subcommand("gen", "synthesize train/test datasets");
    add_common(gen, true);

    auto* train = app.add_subcommand("train", "train a classifier checkpoint");
    add_common(train, true);
    train->add_option("--strategy", strategy, "noise augmentation: none|offline|online");

    auto* eval = app.add_subcommand("eval", "sweep accuracy over (snr, sf, n_pkt) cells");
    add_common(eval, true);
    eval->add_option("--snr", snr_list, "comma-separated test SNRs in dB");
    eval->add_option("--sf", sf_list, "comma-separated spreading factors (default: all present)");
    eval->add_option("--npkt", npkt_list, "comma-separated fusion window sizes");

    auto* report = app.add_subcommand("report", "render metrics CSVs as SVG plots");
    add_common(report, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const auto cfg = rffi::cli::load_config(config_path);
        if (gen->parsed()) return rffi::cli::cmd_gen(cfg, seed, out_dir);
        if (train->parsed()) return rffi::cli::cmd_train(cfg, strategy, seed, out_dir);
        if (eval->parsed())
            return rffi::cli::cmd_eval(cfg, snr_list, sf_list, npkt_list, seed, out_dir);
        return rffi::cli::cmd_report(cfg, out_dir);
    } catch (const rffi::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
