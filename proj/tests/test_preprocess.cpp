#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rffi/errors.hpp"
#include "rffi/impairments.hpp"
#include "rffi/preprocess.hpp"

using namespace rffi;

namespace {

IqSignal embed(const IqSignal& sig, std::size_t offset, std::size_t total) {
    IqSignal out;
    out.sample_rate_hz = sig.sample_rate_hz;
    out.samples.assign(total, {0.0, 0.0});
    for (std::size_t n = 0; n < sig.size(); ++n) out.samples[offset + n] = sig.samples[n];
    return out;
}

} // namespace

TEST_CASE("detect_sync finds embedded preambles") {
    for (int sf : {7, 8, 9}) {
        LoraConfig cfg;
        cfg.sf = sf;
        const IqSignal pre = gen_preamble(cfg);
        CHECK(detect_sync(pre, cfg) == 0);
        const IqSignal rx = embed(pre, 1000, pre.size() + 1500);
        CHECK(detect_sync(rx, cfg) == 1000);
    }
}

TEST_CASE("detect_sync rejects pure noise") {
    LoraConfig cfg;
    Rng rng = Rng::seeded(4);
    IqSignal noise;
    noise.sample_rate_hz = cfg.sample_rate_hz;
    noise.samples.resize(static_cast<std::size_t>(cfg.preamble_length()) + 512);
    for (auto& s : noise.samples) s = rng.cnormal(1.0);
    CHECK_THROWS_AS(detect_sync(noise, cfg), NoPacketError);

    IqSignal tiny;
    tiny.sample_rate_hz = cfg.sample_rate_hz;
    tiny.samples.assign(10, {1.0, 0.0});
    CHECK_THROWS_AS(detect_sync(tiny, cfg), InsufficientDataError);
}

TEST_CASE("cfo estimation on a noiseless grid") {
    LoraConfig cfg;
    const IqSignal pre = gen_preamble(cfg);
    for (double df : {-400.0, -200.0, 0.0, 200.0, 400.0}) {
        const double est = estimate_cfo(apply_cfo(pre, df), cfg);
        CHECK(std::abs(est - df) < 0.1);
    }
    CHECK(std::abs(estimate_cfo(pre, cfg)) < 1e-6);
}

TEST_CASE("cfo unambiguous range arithmetic") {
    LoraConfig cfg; // sf=7, fs=250 kHz -> L=256
    CHECK(cfg.samples_per_symbol() == 256);
    const double half_range = cfg.sample_rate_hz / (2.0 * cfg.samples_per_symbol());
    CHECK(half_range == doctest::Approx(488.28125));
    // Just inside the range still resolves.
    const IqSignal pre = gen_preamble(cfg);
    CHECK(std::abs(estimate_cfo(apply_cfo(pre, 480.0), cfg) - 480.0) < 0.1);
}

TEST_CASE("estimate_cfo input validation") {
    LoraConfig cfg;
    IqSignal short_sig = gen_upchirp(cfg); // one symbol only
    CHECK_THROWS_AS(estimate_cfo(short_sig, cfg), InsufficientDataError);
}

TEST_CASE("compensate_cfo inverts apply_cfo") {
    LoraConfig cfg;
    const IqSignal pre = gen_preamble(cfg);
    const IqSignal rt = compensate_cfo(apply_cfo(pre, 321.0), 321.0);
    for (std::size_t n = 0; n < pre.size(); ++n) {
        CHECK(std::abs(rt.samples[n] - pre.samples[n]) < 1e-10);
    }
    const IqSignal same = compensate_cfo(pre, 0.0);
    CHECK(same.samples == pre.samples);
}

TEST_CASE("estimate + compensate leaves < 0.1 Hz residual") {
    LoraConfig cfg;
    const IqSignal pre = gen_preamble(cfg);
    const IqSignal shifted = apply_cfo(pre, 200.0);
    const double est = estimate_cfo(shifted, cfg);
    const IqSignal fixed = compensate_cfo(shifted, est);
    CHECK(std::abs(estimate_cfo(fixed, cfg)) < 0.1);
}

TEST_CASE("normalize_rms") {
    LoraConfig cfg;
    IqSignal sig = gen_preamble(cfg, 3.7);
    const IqSignal unit = normalize_rms(sig);
    CHECK(unit.rms() == doctest::Approx(1.0).epsilon(1e-12));

    // Scale invariance.
    IqSignal scaled = sig;
    for (auto& s : scaled.samples) s *= 42.0;
    const IqSignal unit2 = normalize_rms(scaled);
    for (std::size_t n = 0; n < unit.size(); ++n) {
        CHECK(std::abs(unit.samples[n] - unit2.samples[n]) < 1e-12);
    }

    IqSignal zero;
    zero.sample_rate_hz = cfg.sample_rate_hz;
    zero.samples.assign(64, {0.0, 0.0});
    CHECK_THROWS_AS(normalize_rms(zero), DegenerateSignalError);

    // Idempotent.
    const IqSignal twice = normalize_rms(unit);
    for (std::size_t n = 0; n < unit.size(); ++n) {
        CHECK(std::abs(twice.samples[n] - unit.samples[n]) < 1e-12);
    }
}

TEST_CASE("preprocess_packet full chain") {
    LoraConfig cfg;
    const auto bank = make_device_bank(3, 6);
    const PacketRecord rec = synth_packet(bank[0], cfg, kCleanSnr, 17);

    const IqSignal out = preprocess_packet(rec.signal, cfg);
    CHECK(out.size() == static_cast<std::size_t>(cfg.preamble_length()));
    CHECK(out.rms() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(estimate_cfo(out, cfg)) < 1.0);

    // Determinism.
    const IqSignal out2 = preprocess_packet(rec.signal, cfg);
    CHECK(out.samples == out2.samples);

    // Offset input resolves to the same preamble. A CFO skews the chirp
    // correlation peak in time, so use a CFO-free profile here.
    DeviceProfile no_cfo = bank[0];
    no_cfo.cfo_mean_hz = 0.0;
    no_cfo.cfo_std_hz = 0.0;
    const PacketRecord rec2 = synth_packet(no_cfo, cfg, kCleanSnr, 17);
    const IqSignal ref = preprocess_packet(rec2.signal, cfg);
    const IqSignal rx = embed(rec2.signal, 500, rec2.signal.size() + 800);
    const IqSignal out3 = preprocess_packet(rx, cfg);
    for (std::size_t n = 0; n < ref.size(); ++n) {
        CHECK(std::abs(out3.samples[n] - ref.samples[n]) < 1e-9);
    }
}
