#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rffi::cli {

// Flat key=value config file ('#' starts a comment, blank lines ignored).
using Config = std::map<std::string, std::string>;

Config load_config(const std::string& path);

std::vector<int> parse_int_list(const std::string& s);
std::vector<double> parse_double_list(const std::string& s);

int cmd_gen(const Config& cfg, std::uint64_t seed, const std::string& out_dir);
int cmd_train(const Config& cfg, const std::string& strategy, std::uint64_t seed,
              const std::string& out_dir);
int cmd_eval(const Config& cfg, const std::string& snr_list, const std::string& sf_list,
             const std::string& npkt_list, std::uint64_t seed, const std::string& out_dir);
int cmd_report(const Config& cfg, const std::string& out_dir);

} // namespace rffi::cli
