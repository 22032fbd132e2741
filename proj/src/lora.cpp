#include "rffi/lora.hpp"

#include <cmath>

namespace rffi {

double IqSignal::power() const {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& s : samples) acc += std::norm(s);
    return acc / static_cast<double>(samples.size());
}

double IqSignal::rms() const { return std::sqrt(power()); }

double LoraConfig::symbol_duration_s() const {
    return static_cast<double>(1 << sf) / bandwidth_hz;
}

int LoraConfig::samples_per_symbol() const {
    return static_cast<int>(std::llround(static_cast<double>(1 << sf) * sample_rate_hz / bandwidth_hz));
}

void LoraConfig::validate() const {
    if (sf < 7 || sf > 12) throw ConfigError("spreading factor must be in [7, 12]");
    if (bandwidth_hz <= 0.0) throw ConfigError("bandwidth must be positive");
    if (sample_rate_hz < bandwidth_hz) throw ConfigError("sample rate must be >= bandwidth");
    if (n_preamble < 1) throw ConfigError("preamble must contain at least one up-chirp");
    if (samples_per_symbol() < 1) throw ConfigError("samples per symbol must be positive");
}

IqSignal gen_upchirp(const LoraConfig& cfg, double amplitude) {
    cfg.validate();
    if (amplitude <= 0.0) throw ConfigError("amplitude must be positive");

    const int sps = cfg.samples_per_symbol();
    const double fs = cfg.sample_rate_hz;
    const double bw = cfg.bandwidth_hz;
    const double t_sym = cfg.symbol_duration_s();

    IqSignal out;
    out.sample_rate_hz = fs;
    out.samples.resize(static_cast<std::size_t>(sps));
    for (int n = 0; n < sps; ++n) {
        const double t = static_cast<double>(n) / fs;
        const double phase = -M_PI * bw * t + M_PI * (bw / t_sym) * t * t;
        out.samples[static_cast<std::size_t>(n)] = std::polar(amplitude, phase);
    }
    return out;
}

IqSignal gen_preamble(const LoraConfig& cfg, double amplitude) {
    const IqSignal chirp = gen_upchirp(cfg, amplitude);
    IqSignal out;
    out.sample_rate_hz = cfg.sample_rate_hz;
    out.samples.reserve(static_cast<std::size_t>(cfg.preamble_length()));
    for (int i = 0; i < cfg.n_preamble; ++i) {
        out.samples.insert(out.samples.end(), chirp.samples.begin(), chirp.samples.end());
    }
    return out;
}

} // namespace rffi
