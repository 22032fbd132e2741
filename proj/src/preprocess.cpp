#include "rffi/preprocess.hpp"

#include <cmath>
#include <complex>

#include "rffi/errors.hpp"
#include "rffi/impairments.hpp"

namespace rffi {

std::size_t detect_sync(const IqSignal& rx, const LoraConfig& cfg) {
    cfg.validate();
    const IqSignal tmpl = gen_preamble(cfg);
    const std::size_t len = static_cast<std::size_t>(cfg.preamble_length());
    if (rx.size() < len) throw InsufficientDataError("received signal shorter than the preamble");

    // Correlation is accumulated non-coherently over short sub-blocks so an
    // uncompensated CFO (which rotates the phase across the preamble) does not
    // null the coherent sum. Within one 32-sample block at fs = 250 kHz even a
    // 2 kHz offset rotates by only ~0.26 cycles.
    constexpr std::size_t kBlock = 32;

    double tmpl_energy = 0.0;
    for (const auto& s : tmpl.samples) tmpl_energy += std::norm(s);

    double best_corr = -1.0;
    std::size_t best_off = 0;
    for (std::size_t off = 0; off + len <= rx.size(); ++off) {
        double block_sum = 0.0;
        double seg_energy = 0.0;
        for (std::size_t b = 0; b < len; b += kBlock) {
            const std::size_t b_end = std::min(b + kBlock, len);
            std::complex<double> dot(0.0, 0.0);
            for (std::size_t n = b; n < b_end; ++n) {
                const std::complex<double> r = rx.samples[off + n];
                dot += r * std::conj(tmpl.samples[n]);
                seg_energy += std::norm(r);
            }
            block_sum += std::abs(dot);
        }
        if (seg_energy <= 0.0) continue;
        const double corr = block_sum / std::sqrt(seg_energy * tmpl_energy);
        if (corr > best_corr) {
            best_corr = corr;
            best_off = off;
        }
    }
    if (best_corr < kDetectThreshold) throw NoPacketError("no preamble found above correlation threshold");
    return best_off;
}

double estimate_cfo(const IqSignal& preamble, const LoraConfig& cfg) {
    cfg.validate();
    const std::size_t lag = static_cast<std::size_t>(cfg.samples_per_symbol());
    if (preamble.size() < 2 * lag) {
        throw InsufficientDataError("CFO estimation needs at least two symbols");
    }
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t n = 0; n + lag < preamble.size(); ++n) {
        acc += preamble.samples[n + lag] * std::conj(preamble.samples[n]);
    }
    return std::arg(acc) * preamble.sample_rate_hz / (2.0 * M_PI * static_cast<double>(lag));
}

IqSignal compensate_cfo(const IqSignal& sig, double delta_f_hz) {
    return apply_cfo(sig, -delta_f_hz);
}

IqSignal normalize_rms(const IqSignal& sig) {
    const double rms = sig.rms();
    if (rms <= 0.0) throw DegenerateSignalError("cannot normalize a zero signal");
    IqSignal out;
    out.sample_rate_hz = sig.sample_rate_hz;
    out.samples.resize(sig.size());
    const double inv = 1.0 / rms;
    for (std::size_t n = 0; n < sig.size(); ++n) out.samples[n] = sig.samples[n] * inv;
    return out;
}

IqSignal preprocess_packet(const IqSignal& rx, const LoraConfig& cfg) {
    const std::size_t off = detect_sync(rx, cfg);
    const std::size_t len = static_cast<std::size_t>(cfg.preamble_length());

    IqSignal preamble;
    preamble.sample_rate_hz = rx.sample_rate_hz;
    preamble.samples.assign(rx.samples.begin() + static_cast<std::ptrdiff_t>(off),
                            rx.samples.begin() + static_cast<std::ptrdiff_t>(off + len));

    const double cfo = estimate_cfo(preamble, cfg);
    return normalize_rms(compensate_cfo(preamble, cfo));
}

} // namespace rffi
