#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "rffi/dataset_io.hpp"
#include "rffi/errors.hpp"
#include "rffi/evaluate.hpp"
#include "rffi/impairments.hpp"
#include "rffi/model.hpp"
#include "svg_plot.hpp"

namespace fs = std::filesystem;

namespace rffi::cli {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
    return out;
}

std::string get_str(const Config& c, const std::string& key, const std::string& dflt) {
    auto it = c.find(key);
    return it == c.end() ? dflt : it->second;
}

std::string require_str(const Config& c, const std::string& key) {
    auto it = c.find(key);
    if (it == c.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

double get_double(const Config& c, const std::string& key, double dflt) {
    auto it = c.find(key);
    if (it == c.end()) return dflt;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not a number: " + it->second);
    }
}

int get_int(const Config& c, const std::string& key, int dflt) {
    const double v = get_double(c, key, dflt);
    if (v != std::floor(v)) throw ConfigError("config key '" + key + "' is not an integer");
    return static_cast<int>(v);
}

void require_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) throw ConfigError("output directory does not exist: " + dir);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void print_config(const std::string& cmd, const std::vector<std::pair<std::string, std::string>>& kv) {
    for (const auto& [k, v] : kv) std::cout << "[" << cmd << "] " << k << " = " << v << "\n";
}

LoraConfig make_lora_cfg(int sf, double fs, double bw, int n_preamble) {
    LoraConfig cfg;
    cfg.sf = sf;
    cfg.sample_rate_hz = fs;
    cfg.bandwidth_hz = bw;
    cfg.n_preamble = n_preamble;
    cfg.validate();
    return cfg;
}

// Rows of a metrics CSV (schema: snr_db,sf,n_pkt,accuracy,n_samples).
struct MetricsRow {
    double snr_db;
    int sf;
    int n_pkt;
    double accuracy;
    int n_samples;
};

std::vector<MetricsRow> load_metrics(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open metrics CSV: " + path);
    std::string line;
    if (!std::getline(f, line) || trim(line) != "snr_db,sf,n_pkt,accuracy,n_samples")
        throw ConfigError("malformed metrics CSV header: " + path);
    std::vector<MetricsRow> rows;
    while (std::getline(f, line)) {
        if (trim(line).empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != 5) throw ConfigError("malformed metrics CSV row: " + path);
        try {
            rows.push_back({std::stod(cols[0]), std::stoi(cols[1]), std::stoi(cols[2]),
                            std::stod(cols[3]), std::stoi(cols[4])});
        } catch (const std::exception&) {
            throw ConfigError("malformed metrics CSV row: " + path);
        }
    }
    if (rows.empty()) throw ConfigError("metrics CSV has no data rows: " + path);
    return rows;
}

// Accuracy per x value for rows matching a predicate, weighted by sample count.
template <typename Pred, typename Key>
Series aggregate(const std::vector<MetricsRow>& rows, const std::string& label, Pred pred, Key key) {
    std::map<double, std::pair<double, double>> acc; // x -> (correct, total)
    for (const auto& r : rows) {
        if (!pred(r)) continue;
        auto& [c, t] = acc[key(r)];
        c += r.accuracy * r.n_samples;
        t += r.n_samples;
    }
    Series s{label, {}, {}};
    for (const auto& [x, ct] : acc) {
        s.x.push_back(x);
        s.y.push_back(ct.second > 0 ? ct.first / ct.second : 0.0);
    }
    return s;
}

} // namespace

Config load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        cfg[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& tok : split(s, ',')) {
        if (tok.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stoi(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("bad integer in list: " + tok);
        }
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& tok : split(s, ',')) {
        if (tok.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("bad number in list: " + tok);
        }
    }
    return out;
}

int cmd_gen(const Config& cfg, std::uint64_t seed, const std::string& out_dir) {
    require_dir(out_dir);
    const int devices = get_int(cfg, "devices", 10);
    const auto sfs = parse_int_list(get_str(cfg, "sfs", "7,8,9"));
    const int train_per_cell = get_int(cfg, "train_per_cell", 200);
    const int test_per_cell = get_int(cfg, "test_per_cell", 50);
    const double fs = get_double(cfg, "sample_rate_hz", 250e3);
    const double bw = get_double(cfg, "bandwidth_hz", 125e3);
    const int n_preamble = get_int(cfg, "n_preamble", 8);
    if (devices < 1) throw ConfigError("devices must be >= 1");
    if (sfs.empty()) throw ConfigError("sfs list is empty");
    if (train_per_cell < 1 || test_per_cell < 1)
        throw ConfigError("per-cell packet counts must be >= 1");

    std::string sfs_str = get_str(cfg, "sfs", "7,8,9");
    print_config("gen", {{"devices", std::to_string(devices)},
                         {"sfs", sfs_str},
                         {"train_per_cell", std::to_string(train_per_cell)},
                         {"test_per_cell", std::to_string(test_per_cell)},
                         {"sample_rate_hz", fmt(fs)},
                         {"bandwidth_hz", fmt(bw)},
                         {"n_preamble", std::to_string(n_preamble)},
                         {"seed", std::to_string(seed)},
                         {"out", out_dir}});

    std::vector<LoraConfig> lora_cfgs;
    for (int sf : sfs) lora_cfgs.push_back(make_lora_cfg(sf, fs, bw, n_preamble));

    const auto bank = make_device_bank(devices, seed);
    const Rng root = Rng::seeded(seed);
    // Both splits are clean captures; noise is injected at train/eval time.
    Dataset train{fs, devices,
                  gen_dataset(bank, lora_cfgs, train_per_cell, kCleanSnr, root.child(1).bits())};
    Dataset test{fs, devices,
                 gen_dataset(bank, lora_cfgs, test_per_cell, kCleanSnr, root.child(2).bits())};

    const std::string train_path = (fs::path(out_dir) / "train.rffd").string();
    const std::string test_path = (fs::path(out_dir) / "test.rffd").string();
    save_dataset(train, train_path);
    save_dataset(test, test_path);

    for (int d = 0; d < devices; ++d)
        for (int sf : sfs)
            std::cout << "device " << d << " sf " << sf << ": " << train_per_cell << " train, "
                      << test_per_cell << " test\n";
    std::cout << "wrote " << train.records.size() << " records to " << train_path << "\n"
              << "wrote " << test.records.size() << " records to " << test_path << "\n";
    return 0;
}

int cmd_train(const Config& cfg, const std::string& strategy, std::uint64_t seed,
              const std::string& out_dir) {
    require_dir(out_dir);
    const std::string dataset_path = require_str(cfg, "dataset");
    if (!fs::exists(dataset_path)) throw ConfigError("dataset not found: " + dataset_path);

    TrainConfig tc;
    tc.batch_size = get_int(cfg, "batch_size", tc.batch_size);
    tc.lr_init = get_double(cfg, "lr_init", tc.lr_init);
    tc.lr_factor = get_double(cfg, "lr_factor", tc.lr_factor);
    tc.lr_patience = get_int(cfg, "lr_patience", tc.lr_patience);
    tc.stop_patience = get_int(cfg, "stop_patience", tc.stop_patience);
    tc.val_fraction = get_double(cfg, "val_fraction", tc.val_fraction);
    tc.snr_lo_db = get_double(cfg, "snr_lo_db", tc.snr_lo_db);
    tc.snr_hi_db = get_double(cfg, "snr_hi_db", tc.snr_hi_db);
    tc.max_epochs = get_int(cfg, "max_epochs", tc.max_epochs);
    tc.bandwidth_hz = get_double(cfg, "bandwidth_hz", tc.bandwidth_hz);
    tc.n_preamble = get_int(cfg, "n_preamble", tc.n_preamble);
    tc.augmentation = parse_augmentation(strategy);
    tc.seed = seed;
    tc.validate();

    print_config("train", {{"dataset", dataset_path},
                           {"strategy", to_string(tc.augmentation)},
                           {"batch_size", std::to_string(tc.batch_size)},
                           {"lr_init", fmt(tc.lr_init)},
                           {"lr_factor", fmt(tc.lr_factor)},
                           {"lr_patience", std::to_string(tc.lr_patience)},
                           {"stop_patience", std::to_string(tc.stop_patience)},
                           {"val_fraction", fmt(tc.val_fraction)},
                           {"snr_lo_db", fmt(tc.snr_lo_db)},
                           {"snr_hi_db", fmt(tc.snr_hi_db)},
                           {"max_epochs", std::to_string(tc.max_epochs)},
                           {"bandwidth_hz", fmt(tc.bandwidth_hz)},
                           {"n_preamble", std::to_string(tc.n_preamble)},
                           {"seed", std::to_string(seed)},
                           {"out", out_dir}});

    const Dataset ds = load_dataset(dataset_path);
    ModelConfig mc;
    mc.n_classes = ds.n_classes;
    const Checkpoint ckpt = rffi::train(ds, mc, tc);

    const std::string model_path = (fs::path(out_dir) / "model.rffc").string();
    save_checkpoint(ckpt, model_path);

    const std::string hist_path = (fs::path(out_dir) / "history.csv").string();
    std::ofstream hf(hist_path, std::ios::binary);
    if (!hf) throw ConfigError("cannot write history CSV: " + hist_path);
    hf << "epoch,train_loss,val_loss,lr\n";
    for (std::size_t e = 0; e < ckpt.history.size(); ++e) {
        const auto& st = ckpt.history[e];
        hf << (e + 1) << "," << fmt(st.train_loss) << "," << fmt(st.val_loss) << ","
           << fmt(st.lr) << "\n";
    }
    std::cout << "trained " << ckpt.history.size() << " epochs, best epoch " << (ckpt.best_epoch + 1)
              << ", best val loss " << fmt(ckpt.history[ckpt.best_epoch].val_loss) << "\n"
              << "wrote " << model_path << " and " << hist_path << "\n";
    return 0;
}

int cmd_eval(const Config& cfg, const std::string& snr_list, const std::string& sf_list,
             const std::string& npkt_list, std::uint64_t seed, const std::string& out_dir) {
    require_dir(out_dir);
    const std::string ckpt_path = require_str(cfg, "checkpoint");
    const std::string dataset_path = require_str(cfg, "dataset");
    if (!fs::exists(ckpt_path)) throw ConfigError("checkpoint not found: " + ckpt_path);
    if (!fs::exists(dataset_path)) throw ConfigError("dataset not found: " + dataset_path);
    const double bw = get_double(cfg, "bandwidth_hz", 125e3);
    const int n_preamble = get_int(cfg, "n_preamble", 8);

    const auto snrs = parse_double_list(snr_list);
    auto sfs = parse_int_list(sf_list);
    const auto npkts = parse_int_list(npkt_list);
    if (snrs.empty()) throw ConfigError("empty SNR list");
    if (npkts.empty()) throw ConfigError("empty n_pkt list");

    const Dataset ds = load_dataset(dataset_path);
    if (sfs.empty()) { // default: every SF present in the dataset
        std::set<int> present;
        for (const auto& r : ds.records) present.insert(r.sf);
        sfs.assign(present.begin(), present.end());
    }

    print_config("eval", {{"checkpoint", ckpt_path},
                          {"dataset", dataset_path},
                          {"snr", snr_list},
                          {"sf", [&] {
                               std::string s;
                               for (int v : sfs) s += (s.empty() ? "" : ",") + std::to_string(v);
                               return s;
                           }()},
                          {"npkt", npkt_list},
                          {"bandwidth_hz", fmt(bw)},
                          {"n_preamble", std::to_string(n_preamble)},
                          {"seed", std::to_string(seed)},
                          {"out", out_dir}});

    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const auto cells = evaluate(ckpt.model, ds, bw, n_preamble, snrs, sfs, npkts, seed);

    const std::string metrics_path = (fs::path(out_dir) / "metrics.csv").string();
    std::ofstream mf(metrics_path, std::ios::binary);
    if (!mf) throw ConfigError("cannot write metrics CSV: " + metrics_path);
    mf << "snr_db,sf,n_pkt,accuracy,n_samples\n";
    for (const auto& c : cells) {
        mf << fmt(c.snr_db) << "," << c.sf << "," << c.n_pkt << "," << fmt(c.accuracy) << ","
           << c.n_samples << "\n";

        char name[96];
        std::snprintf(name, sizeof(name), "confusion_snr%g_sf%d_npkt%d.csv", c.snr_db, c.sf,
                      c.n_pkt);
        std::ofstream cf(fs::path(out_dir) / name, std::ios::binary);
        for (int r = 0; r < c.confusion.rows(); ++r) {
            for (int col = 0; col < c.confusion.cols(); ++col)
                cf << (col ? "," : "") << c.confusion(r, col);
            cf << "\n";
        }
        std::cout << "snr " << fmt(c.snr_db) << " sf " << c.sf << " npkt " << c.n_pkt
                  << ": accuracy " << fmt(c.accuracy) << " (" << c.n_samples << " packets)\n";
    }
    std::cout << "wrote " << metrics_path << " and " << cells.size() << " confusion matrices\n";
    return 0;
}

int cmd_report(const Config& cfg, const std::string& out_dir) {
    require_dir(out_dir);
    std::vector<std::pair<std::string, std::string>> strategy_csvs;
    for (const std::string name : {"none", "offline", "online"})
        if (cfg.count(name)) strategy_csvs.emplace_back(name, cfg.at(name));
    if (strategy_csvs.empty())
        throw ConfigError("config must name at least one metrics CSV (keys: none/offline/online)");

    print_config("report", [&] {
        auto kv = strategy_csvs;
        kv.emplace_back("out", out_dir);
        return kv;
    }());

    // The richest available sweep drives the per-SF and per-window plots.
    const auto primary = load_metrics(strategy_csvs.back().second);
    const int min_npkt = std::min_element(primary.begin(), primary.end(),
                                          [](const MetricsRow& a, const MetricsRow& b) {
                                              return a.n_pkt < b.n_pkt;
                                          })
                             ->n_pkt;

    std::set<int> sfs;
    std::set<double> snrs;
    for (const auto& r : primary) {
        sfs.insert(r.sf);
        snrs.insert(r.snr_db);
    }

    std::vector<Series> by_sf;
    for (int sf : sfs)
        by_sf.push_back(aggregate(
            primary, "SF " + std::to_string(sf),
            [&](const MetricsRow& r) { return r.sf == sf && r.n_pkt == min_npkt; },
            [](const MetricsRow& r) { return r.snr_db; }));
    write_line_plot((fs::path(out_dir) / "acc_vs_snr_by_sf.svg").string(),
                    "Accuracy vs SNR by spreading factor", "SNR (dB)", "Accuracy", by_sf);

    std::vector<Series> by_strategy;
    for (const auto& [name, path] : strategy_csvs) {
        const auto rows = load_metrics(path);
        const int mn = std::min_element(rows.begin(), rows.end(),
                                        [](const MetricsRow& a, const MetricsRow& b) {
                                            return a.n_pkt < b.n_pkt;
                                        })
                           ->n_pkt;
        by_strategy.push_back(aggregate(
            rows, name, [&](const MetricsRow& r) { return r.n_pkt == mn; },
            [](const MetricsRow& r) { return r.snr_db; }));
    }
    write_line_plot((fs::path(out_dir) / "acc_vs_snr_by_strategy.svg").string(),
                    "Accuracy vs SNR by augmentation strategy", "SNR (dB)", "Accuracy",
                    by_strategy);

    std::vector<Series> by_snr;
    for (double snr : snrs)
        by_snr.push_back(aggregate(
            primary, fmt(snr) + " dB", [&](const MetricsRow& r) { return r.snr_db == snr; },
            [](const MetricsRow& r) { return static_cast<double>(r.n_pkt); }));
    write_line_plot((fs::path(out_dir) / "acc_vs_npkt_by_snr.svg").string(),
                    "Accuracy vs fusion window by SNR", "Packets merged", "Accuracy", by_snr);

    std::cout << "wrote 3 plots to " << out_dir << "\n";
    return 0;
}

} // namespace rffi::cli
