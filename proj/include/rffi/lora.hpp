#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "rffi/errors.hpp"

namespace rffi {

// Complex baseband sample sequence alongside its sample rate.
struct IqSignal {
    std::vector<std::complex<double>> samples;
    double sample_rate_hz = 0.0;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }

    // Mean |s[n]|^2.
    double power() const;
    double rms() const;
};

// LoRa chirp parameters. Defaults follow the common 125 kHz / 250 kHz
// bandwidth/sampling setup with an 8-symbol preamble.
struct LoraConfig {
    int sf = 7;
    double bandwidth_hz = 125e3;
    double sample_rate_hz = 250e3;
    int n_preamble = 8;

    // 2^sf / B seconds.
    double symbol_duration_s() const;
    // round(2^sf * fs / B) samples.
    int samples_per_symbol() const;
    int preamble_length() const { return n_preamble * samples_per_symbol(); }

    // Throws ConfigError when any invariant is violated.
    void validate() const;
};

// One up-chirp: s[n] = A * exp(j(-pi*B*t + pi*(B/T)*t^2)), t = n/fs,
// sweeping instantaneous frequency from -B/2 to +B/2 over one symbol.
IqSignal gen_upchirp(const LoraConfig& cfg, double amplitude = 1.0);

// n_preamble identical up-chirps back to back.
IqSignal gen_preamble(const LoraConfig& cfg, double amplitude = 1.0);

} // namespace rffi
