#include "rffi/impairments.hpp"

#include <algorithm>
#include <numeric>

#include "rffi/errors.hpp"

namespace rffi {

IqSignal apply_iq_imbalance(const IqSignal& sig, double g, double phi) {
    const std::complex<double> ge = std::polar(g, phi);
    const std::complex<double> mu = (1.0 + ge) * 0.5;
    const std::complex<double> nu = (1.0 - ge) * 0.5;

    IqSignal out;
    out.sample_rate_hz = sig.sample_rate_hz;
    out.samples.resize(sig.size());
    for (std::size_t n = 0; n < sig.size(); ++n) {
        out.samples[n] = mu * sig.samples[n] + nu * std::conj(sig.samples[n]);
    }
    return out;
}

IqSignal apply_pa_nonlinearity(const IqSignal& sig, double a1,
                               std::complex<double> a3, std::complex<double> a5) {
    IqSignal out;
    out.sample_rate_hz = sig.sample_rate_hz;
    out.samples.resize(sig.size());
    for (std::size_t n = 0; n < sig.size(); ++n) {
        const std::complex<double> s = sig.samples[n];
        const double p = std::norm(s);
        out.samples[n] = a1 * s + a3 * s * p + a5 * s * p * p;
    }
    return out;
}

IqSignal apply_cfo(const IqSignal& sig, double delta_f_hz) {
    const double w = 2.0 * M_PI * delta_f_hz / sig.sample_rate_hz;
    IqSignal out;
    out.sample_rate_hz = sig.sample_rate_hz;
    out.samples.resize(sig.size());
    for (std::size_t n = 0; n < sig.size(); ++n) {
        out.samples[n] = sig.samples[n] * std::polar(1.0, w * static_cast<double>(n));
    }
    return out;
}

IqSignal apply_awgn(const IqSignal& sig, double snr_db, Rng& rng) {
    if (is_clean_snr(snr_db)) return sig;
    const double p_sig = sig.power();
    if (p_sig <= 0.0) throw DegenerateSignalError("cannot set SNR on a zero-power signal");
    const double sigma2 = p_sig * std::pow(10.0, -snr_db / 10.0);

    IqSignal out;
    out.sample_rate_hz = sig.sample_rate_hz;
    out.samples.resize(sig.size());
    for (std::size_t n = 0; n < sig.size(); ++n) {
        out.samples[n] = sig.samples[n] + rng.cnormal(sigma2);
    }
    return out;
}

IqSignal apply_multipath(const IqSignal& sig, const MultipathTaps& taps) {
    if (taps.taps.empty() || taps.taps.front() == std::complex<double>(0.0, 0.0)) {
        throw ConfigError("multipath taps must be non-empty with a nonzero first tap");
    }
    IqSignal out;
    out.sample_rate_hz = sig.sample_rate_hz;
    out.samples.assign(sig.size(), {0.0, 0.0});
    for (std::size_t n = 0; n < sig.size(); ++n) {
        std::complex<double> acc(0.0, 0.0);
        const std::size_t kmax = std::min(taps.taps.size() - 1, n);
        for (std::size_t k = 0; k <= kmax; ++k) {
            acc += taps.taps[k] * sig.samples[n - k];
        }
        out.samples[n] = acc;
    }
    return out;
}

std::vector<DeviceProfile> make_device_bank(int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("device bank needs at least two devices");
    Rng rng = Rng::seeded(seed);

    auto grid = [k](double lo, double hi, int i) {
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
    };
    // Shuffle grid assignments independently so fingerprint dimensions are
    // not correlated across the bank.
    std::vector<int> phase_order(static_cast<std::size_t>(k));
    std::vector<int> a3_order(static_cast<std::size_t>(k));
    std::iota(phase_order.begin(), phase_order.end(), 0);
    std::iota(a3_order.begin(), a3_order.end(), 0);
    rng.shuffle(phase_order);
    rng.shuffle(a3_order);

    std::vector<DeviceProfile> bank(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        DeviceProfile& p = bank[static_cast<std::size_t>(i)];
        p.device_id = i;
        p.iq_gain = grid(0.95, 1.05, i);
        p.iq_phase_rad = grid(-0.05, 0.05, phase_order[static_cast<std::size_t>(i)]);
        p.pa_a1 = 1.0;
        const double a3_mag = grid(0.01, 0.05, a3_order[static_cast<std::size_t>(i)]);
        const double a3_phase = rng.uniform(0.0, 2.0 * M_PI);
        p.pa_a3 = std::polar(a3_mag, a3_phase);
        p.pa_a5 = 0.1 * p.pa_a3;
        p.cfo_mean_hz = rng.uniform(-2000.0, 2000.0);
        p.cfo_std_hz = 50.0;
    }
    return bank;
}

PacketRecord synth_packet(const DeviceProfile& profile, const LoraConfig& cfg,
                          double snr_db, std::uint64_t seed_tag) {
    cfg.validate();
    Rng rng = Rng::seeded(seed_tag);

    IqSignal sig = gen_preamble(cfg);
    sig = apply_iq_imbalance(sig, profile.iq_gain, profile.iq_phase_rad);
    sig = apply_pa_nonlinearity(sig, profile.pa_a1, profile.pa_a3, profile.pa_a5);
    const double cfo = profile.cfo_mean_hz + profile.cfo_std_hz * rng.normal();
    sig = apply_cfo(sig, cfo);
    sig = apply_awgn(sig, snr_db, rng);

    PacketRecord rec;
    rec.signal = std::move(sig);
    rec.label = profile.device_id;
    rec.sf = cfg.sf;
    rec.applied_cfo_hz = cfo;
    rec.applied_snr_db = snr_db;
    rec.seed_tag = seed_tag;
    return rec;
}

std::vector<PacketRecord> gen_dataset(const std::vector<DeviceProfile>& bank,
                                      const std::vector<LoraConfig>& cfgs,
                                      int packets_per_cell, double snr_db,
                                      std::uint64_t seed) {
    if (bank.empty()) throw ConfigError("device bank is empty");
    if (cfgs.empty()) throw ConfigError("no LoRa configurations given");
    if (packets_per_cell < 1) throw ConfigError("packets per cell must be >= 1");

    const Rng master = Rng::seeded(seed);
    std::vector<PacketRecord> out;
    out.reserve(bank.size() * cfgs.size() * static_cast<std::size_t>(packets_per_cell));
    for (const DeviceProfile& dev : bank) {
        for (const LoraConfig& cfg : cfgs) {
            for (int i = 0; i < packets_per_cell; ++i) {
                const std::uint64_t tag =
                    master.child(static_cast<std::uint64_t>(dev.device_id),
                                 static_cast<std::uint64_t>(cfg.sf),
                                 static_cast<std::uint64_t>(i))
                        .bits();
                out.push_back(synth_packet(dev, cfg, snr_db, tag));
            }
        }
    }
    return out;
}

} // namespace rffi
