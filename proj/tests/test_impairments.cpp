#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "rffi/errors.hpp"
#include "rffi/impairments.hpp"

using namespace rffi;

namespace {

IqSignal tone(std::size_t len, double freq_hz, double fs = 250e3, double amp = 1.0) {
    IqSignal s;
    s.sample_rate_hz = fs;
    s.samples.resize(len);
    for (std::size_t n = 0; n < len; ++n) {
        s.samples[n] = std::polar(amp, 2.0 * M_PI * freq_hz * static_cast<double>(n) / fs);
    }
    return s;
}

// Power at a DFT bin of the full signal (oracle: direct evaluation).
double bin_power(const IqSignal& s, double freq_hz) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t n = 0; n < s.size(); ++n) {
        acc += s.samples[n] *
               std::polar(1.0, -2.0 * M_PI * freq_hz * static_cast<double>(n) / s.sample_rate_hz);
    }
    return std::norm(acc) / static_cast<double>(s.size() * s.size());
}

} // namespace

TEST_CASE("iq imbalance identity at g=1, phi=0") {
    const IqSignal s = tone(512, 10e3);
    const IqSignal y = apply_iq_imbalance(s, 1.0, 0.0);
    for (std::size_t n = 0; n < s.size(); ++n) {
        CHECK(std::abs(y.samples[n] - s.samples[n]) < 1e-15);
    }
}

TEST_CASE("iq imbalance image rejection ratio matches mu/nu arithmetic") {
    const double g = 1.05, phi = 0.035;
    const std::complex<double> ge = std::polar(g, phi);
    const std::complex<double> mu = (1.0 + ge) * 0.5;
    const std::complex<double> nu = (1.0 - ge) * 0.5;
    const double irr_expected = std::norm(nu) / std::norm(mu);

    // Oracle: tone at +f produces an image at -f with relative power |nu|^2/|mu|^2.
    const double f = 31250.0; // exact bin of the 512-point grid
    const IqSignal y = apply_iq_imbalance(tone(512, f), g, phi);
    const double main_p = bin_power(y, f);
    const double image_p = bin_power(y, -f);
    CHECK(image_p / main_p == doctest::Approx(irr_expected).epsilon(1e-9));
    CHECK(main_p == doctest::Approx(std::norm(mu)).epsilon(1e-9));
}

TEST_CASE("pa nonlinearity degenerate cases") {
    const IqSignal s = tone(256, 5e3, 250e3, 1.0);
    SUBCASE("a3=a5=0 is pure scaling") {
        const IqSignal y = apply_pa_nonlinearity(s, 1.7, {0, 0}, {0, 0});
        for (std::size_t n = 0; n < s.size(); ++n) {
            CHECK(std::abs(y.samples[n] - 1.7 * s.samples[n]) < 1e-14);
        }
    }
    SUBCASE("unit modulus input collapses the polynomial") {
        const std::complex<double> a3{0.03, 0.01}, a5{0.003, 0.001};
        const IqSignal y = apply_pa_nonlinearity(s, 1.0, a3, a5);
        const double expected = std::abs(1.0 + a3 + a5);
        for (const auto& x : y.samples) {
            CHECK(std::abs(x) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("pa nonlinearity produces third-order intermodulation") {
    // Two tones at f1, f2 -> IMD3 at 2f1-f2 and 2f2-f1.
    const double fs = 250e3;
    const double f1 = 19 * fs / 512, f2 = 25 * fs / 512;
    IqSignal s = tone(512, f1, fs, 0.5);
    const IqSignal t2 = tone(512, f2, fs, 0.5);
    for (std::size_t n = 0; n < s.size(); ++n) s.samples[n] += t2.samples[n];

    const IqSignal y = apply_pa_nonlinearity(s, 1.0, {0.1, 0.0}, {0, 0});
    const double imd_lo = bin_power(y, 2 * f1 - f2);
    const double imd_hi = bin_power(y, 2 * f2 - f1);
    const IqSignal lin = apply_pa_nonlinearity(s, 1.0, {0, 0}, {0, 0});
    CHECK(bin_power(lin, 2 * f1 - f2) < 1e-20);
    CHECK(imd_lo > 1e-5);
    CHECK(imd_hi > 1e-5);
}

TEST_CASE("cfo rotation properties") {
    const IqSignal s = tone(1024, 3e3);
    SUBCASE("zero offset is identity") {
        const IqSignal y = apply_cfo(s, 0.0);
        for (std::size_t n = 0; n < s.size(); ++n) CHECK(y.samples[n] == s.samples[n]);
    }
    SUBCASE("magnitude preserved") {
        const IqSignal y = apply_cfo(s, 1234.5);
        for (std::size_t n = 0; n < s.size(); ++n) {
            CHECK(std::abs(std::abs(y.samples[n]) - std::abs(s.samples[n])) < 1e-13);
        }
    }
    SUBCASE("offsets compose additively") {
        const IqSignal a = apply_cfo(apply_cfo(s, 700.0), -250.0);
        const IqSignal b = apply_cfo(s, 450.0);
        for (std::size_t n = 0; n < s.size(); ++n) {
            CHECK(std::abs(a.samples[n] - b.samples[n]) < 1e-12);
        }
    }
}

TEST_CASE("awgn hits the target noise variance") {
    const IqSignal s = tone(100000, 5e3);
    Rng rng = Rng::seeded(77);
    const double snr_db = 10.0;
    const IqSignal y = apply_awgn(s, snr_db, rng);

    double noise_p = 0.0, re_var = 0.0, im_var = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) {
        const std::complex<double> d = y.samples[n] - s.samples[n];
        noise_p += std::norm(d);
        re_var += d.real() * d.real();
        im_var += d.imag() * d.imag();
    }
    noise_p /= static_cast<double>(s.size());
    re_var /= static_cast<double>(s.size());
    im_var /= static_cast<double>(s.size());

    const double sigma2 = 0.1; // P_s = 1, SNR = 10 dB
    const double measured_snr = 10.0 * std::log10(s.power() / noise_p);
    CHECK(std::abs(measured_snr - snr_db) < 0.5);
    CHECK(std::abs(re_var - sigma2 / 2) / (sigma2 / 2) < 0.05);
    CHECK(std::abs(im_var - sigma2 / 2) / (sigma2 / 2) < 0.05);
}

TEST_CASE("awgn edge cases") {
    Rng rng = Rng::seeded(1);
    const IqSignal s = tone(64, 1e3);
    const IqSignal y = apply_awgn(s, kCleanSnr, rng);
    for (std::size_t n = 0; n < s.size(); ++n) CHECK(y.samples[n] == s.samples[n]);

    IqSignal z;
    z.sample_rate_hz = 250e3;
    z.samples.assign(16, {0.0, 0.0});
    CHECK_THROWS_AS(apply_awgn(z, 10.0, rng), DegenerateSignalError);
}

TEST_CASE("multipath basics") {
    const IqSignal s = tone(128, 2e3);
    SUBCASE("unit tap is identity") {
        const IqSignal y = apply_multipath(s, MultipathTaps{{{1.0, 0.0}}});
        for (std::size_t n = 0; n < s.size(); ++n) CHECK(std::abs(y.samples[n] - s.samples[n]) < 1e-15);
    }
    SUBCASE("single tap scales globally") {
        const std::complex<double> c{0.3, -0.9};
        const IqSignal y = apply_multipath(s, MultipathTaps{{c}});
        for (std::size_t n = 0; n < s.size(); ++n) CHECK(std::abs(y.samples[n] - c * s.samples[n]) < 1e-15);
    }
    SUBCASE("length preserved") {
        const IqSignal y = apply_multipath(s, MultipathTaps{{{1.0, 0.0}, {0.2, 0.0}, {0.1, 0.0}}});
        CHECK(y.size() == s.size());
    }
    CHECK_THROWS_AS(apply_multipath(s, MultipathTaps{{}}), ConfigError);
}

TEST_CASE("device bank determinism and stratification") {
    const auto a = make_device_bank(10, 1);
    const auto b = make_device_bank(10, 1);
    REQUIRE(a.size() == 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].device_id == static_cast<int>(i));
        CHECK(a[i].iq_gain == b[i].iq_gain);
        CHECK(a[i].iq_phase_rad == b[i].iq_phase_rad);
        CHECK(a[i].pa_a3 == b[i].pa_a3);
        CHECK(a[i].cfo_mean_hz == b[i].cfo_mean_hz);
        CHECK(a[i].iq_gain >= 0.95);
        CHECK(a[i].iq_gain <= 1.05);
        CHECK(std::abs(a[i].iq_phase_rad) <= 0.05);
        CHECK(std::abs(a[i].pa_a3) < a[i].pa_a1);
        CHECK(std::abs(a[i].pa_a5) < std::abs(a[i].pa_a3));
        CHECK(std::abs(a[i].cfo_mean_hz) <= 2000.0);
    }
    // Pairwise-distinct fingerprints.
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const double d = std::hypot(a[i].iq_gain - a[j].iq_gain,
                                        a[i].iq_phase_rad - a[j].iq_phase_rad);
            CHECK(d > 0.0);
        }
    }
    const auto two = make_device_bank(2, 7);
    CHECK(two[0].device_id == 0);
    CHECK(two[1].device_id == 1);
    CHECK_THROWS_AS(make_device_bank(1, 0), ConfigError);
}

TEST_CASE("synth_packet composition and determinism") {
    LoraConfig cfg;
    SUBCASE("all-identity profile yields scaled ideal preamble") {
        DeviceProfile p;
        p.pa_a1 = 1.3;
        const PacketRecord rec = synth_packet(p, cfg, kCleanSnr, 5);
        const IqSignal ideal = gen_preamble(cfg);
        REQUIRE(rec.signal.size() == ideal.size());
        for (std::size_t n = 0; n < ideal.size(); ++n) {
            CHECK(std::abs(rec.signal.samples[n] - 1.3 * ideal.samples[n]) < 1e-12);
        }
    }
    SUBCASE("deterministic given seed_tag") {
        const auto bank = make_device_bank(3, 9);
        const PacketRecord a = synth_packet(bank[2], cfg, 15.0, 1234);
        const PacketRecord b = synth_packet(bank[2], cfg, 15.0, 1234);
        CHECK(a.applied_cfo_hz == b.applied_cfo_hz);
        REQUIRE(a.signal.size() == b.signal.size());
        for (std::size_t n = 0; n < a.signal.size(); ++n) {
            CHECK(a.signal.samples[n] == b.signal.samples[n]);
        }
    }
    SUBCASE("sf9 signal length") {
        LoraConfig c9;
        c9.sf = 9;
        const PacketRecord rec = synth_packet(make_device_bank(2, 1)[0], c9, kCleanSnr, 1);
        CHECK(rec.signal.size() == 8192);
    }
}

TEST_CASE("gen_dataset counts, partition and determinism") {
    const auto bank = make_device_bank(4, 3);
    std::vector<LoraConfig> cfgs(2);
    cfgs[0].sf = 7;
    cfgs[1].sf = 8;
    const auto ds = gen_dataset(bank, cfgs, 5, kCleanSnr, 21);
    CHECK(ds.size() == 40);

    std::vector<int> counts(4, 0);
    for (const auto& rec : ds) counts[static_cast<std::size_t>(rec.label)]++;
    for (int c : counts) CHECK(c == 10);

    const auto ds2 = gen_dataset(bank, cfgs, 5, kCleanSnr, 21);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(ds[i].seed_tag == ds2[i].seed_tag);
        CHECK(ds[i].signal.samples == ds2[i].signal.samples);
    }

    // Impairment chain preserves length.
    for (const auto& rec : ds) {
        LoraConfig cfg;
        cfg.sf = rec.sf;
        CHECK(rec.signal.size() == static_cast<std::size_t>(cfg.preamble_length()));
    }
}

TEST_CASE("dataset records re-synthesize exactly from seed tags") {
    const auto bank = make_device_bank(3, 8);
    std::vector<LoraConfig> cfgs(1);
    const auto ds = gen_dataset(bank, cfgs, 4, 25.0, 99);
    for (const auto& rec : ds) {
        const PacketRecord again =
            synth_packet(bank[static_cast<std::size_t>(rec.label)], cfgs[0], 25.0, rec.seed_tag);
        CHECK(again.signal.samples == rec.signal.samples);
    }
}
