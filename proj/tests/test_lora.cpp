#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rffi/lora.hpp"

using namespace rffi;

namespace {

LoraConfig default_cfg(int sf) {
    LoraConfig cfg;
    cfg.sf = sf;
    return cfg;
}

// Unwrapped phase sequence of a complex signal.
std::vector<double> unwrap_phase(const IqSignal& sig) {
    std::vector<double> out(sig.size());
    double prev = std::arg(sig.samples[0]);
    double offset = 0.0;
    out[0] = prev;
    for (std::size_t n = 1; n < sig.size(); ++n) {
        const double raw = std::arg(sig.samples[n]);
        double d = raw - prev;
        while (d > M_PI) d -= 2.0 * M_PI;
        while (d < -M_PI) d += 2.0 * M_PI;
        offset += d;
        out[n] = out[0] + offset;
        prev = raw;
    }
    return out;
}

} // namespace

TEST_CASE("upchirp length and modulus") {
    const IqSignal s = gen_upchirp(default_cfg(7), 1.0);
    CHECK(s.size() == 256); // 2^7 * 250e3 / 125e3
    for (const auto& x : s.samples) {
        CHECK(std::abs(x) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("upchirp starts at A + 0j") {
    for (int sf : {7, 9, 12}) {
        const IqSignal s = gen_upchirp(default_cfg(sf), 2.5);
        CHECK(s.samples[0].real() == doctest::Approx(2.5));
        CHECK(s.samples[0].imag() == doctest::Approx(0.0));
    }
}

TEST_CASE("instantaneous frequency sweeps -B/2 to +B/2") {
    // f(t) = -B/2 + (B/T) t, measured via phase differences.
    const LoraConfig cfg = default_cfg(7);
    const IqSignal s = gen_upchirp(cfg, 1.0);
    const auto phase = unwrap_phase(s);
    const double fs = cfg.sample_rate_hz;

    const double f_start = (phase[1] - phase[0]) * fs / (2.0 * M_PI);
    const double f_end = (phase.back() - phase[phase.size() - 2]) * fs / (2.0 * M_PI);
    // The first difference approximates f at the midpoint of the step.
    const double bin = cfg.bandwidth_hz / cfg.symbol_duration_s() / fs; // sweep per sample
    CHECK(f_start == doctest::Approx(-62500.0 + bin / 2).epsilon(1e-6));
    CHECK(f_end == doctest::Approx(62500.0 - 3.0 * bin / 2).epsilon(1e-4));
}

TEST_CASE("unwrapped phase is quadratic: constant second difference") {
    const LoraConfig cfg = default_cfg(8);
    const IqSignal s = gen_upchirp(cfg, 1.0);
    const auto phase = unwrap_phase(s);
    const double fs = cfg.sample_rate_hz;
    const double expected = 2.0 * M_PI * (cfg.bandwidth_hz / cfg.symbol_duration_s()) / (fs * fs);
    for (std::size_t n = 2; n < phase.size(); ++n) {
        const double dd = phase[n] - 2.0 * phase[n - 1] + phase[n - 2];
        CHECK(std::abs(dd - expected) < 1e-9);
    }
}

TEST_CASE("preamble is n_preamble concatenated chirps") {
    const LoraConfig cfg = default_cfg(7);
    const IqSignal pre = gen_preamble(cfg);
    const IqSignal chirp = gen_upchirp(cfg);
    CHECK(pre.size() == 2048); // 8 * 256
    for (int i = 0; i < cfg.n_preamble; ++i) {
        for (int n = 0; n < cfg.samples_per_symbol(); ++n) {
            CHECK(pre.samples[static_cast<std::size_t>(i * 256 + n)] ==
                  chirp.samples[static_cast<std::size_t>(n)]);
        }
    }
}

TEST_CASE("SF9 preamble is 4x the SF7 length") {
    CHECK(gen_preamble(default_cfg(9)).size() == 8192);
    CHECK(gen_preamble(default_cfg(9)).size() == 4 * gen_preamble(default_cfg(7)).size());
}

TEST_CASE("constant magnitude across symbol boundaries") {
    const IqSignal pre = gen_preamble(default_cfg(7), 0.7);
    for (const auto& x : pre.samples) {
        CHECK(std::abs(x) == doctest::Approx(0.7).epsilon(1e-12));
    }
}

TEST_CASE("invalid configs are rejected") {
    LoraConfig cfg;
    cfg.sf = 6;
    CHECK_THROWS_AS(gen_upchirp(cfg), ConfigError);
    cfg = LoraConfig{};
    cfg.sample_rate_hz = 100e3; // below bandwidth
    CHECK_THROWS_AS(gen_upchirp(cfg), ConfigError);
    cfg = LoraConfig{};
    cfg.n_preamble = 0;
    CHECK_THROWS_AS(gen_preamble(cfg), ConfigError);
    CHECK_THROWS_AS(gen_upchirp(LoraConfig{}, -1.0), ConfigError);
}
