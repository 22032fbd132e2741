#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "rffi/lora.hpp"
#include "rffi/rng.hpp"

namespace rffi {

// Sentinel SNR for noiseless records.
inline constexpr double kCleanSnr = std::numeric_limits<double>::quiet_NaN();
inline bool is_clean_snr(double snr_db) { return std::isnan(snr_db); }

// Per-device hardware impairment parameters, the simulated fingerprint.
struct DeviceProfile {
    int device_id = 0;
    double iq_gain = 1.0;      // amplitude imbalance g
    double iq_phase_rad = 0.0; // quadrature skew phi
    double pa_a1 = 1.0;
    std::complex<double> pa_a3{0.0, 0.0};
    std::complex<double> pa_a5{0.0, 0.0};
    double cfo_mean_hz = 0.0;
    double cfo_std_hz = 0.0;
};

// One labeled transmission.
struct PacketRecord {
    IqSignal signal;
    int label = 0;
    int sf = 7;
    double applied_cfo_hz = 0.0;
    double applied_snr_db = kCleanSnr; // NaN = clean
    std::uint64_t seed_tag = 0;
};

struct MultipathTaps {
    std::vector<std::complex<double>> taps;
};

// y[n] = mu*s[n] + nu*conj(s[n]), mu = (1 + g e^{j phi})/2, nu = (1 - g e^{j phi})/2.
IqSignal apply_iq_imbalance(const IqSignal& sig, double g, double phi);

// Memoryless polynomial: y = a1*s + a3*s|s|^2 + a5*s|s|^4.
IqSignal apply_pa_nonlinearity(const IqSignal& sig, double a1,
                               std::complex<double> a3, std::complex<double> a5);

// y[n] = s[n] * e^{j 2 pi df n / fs}.
IqSignal apply_cfo(const IqSignal& sig, double delta_f_hz);

// Adds circular complex Gaussian noise at the given SNR relative to the mean
// signal power. A clean sentinel SNR returns the input unchanged.
IqSignal apply_awgn(const IqSignal& sig, double snr_db, Rng& rng);

// Linear convolution truncated to the input length.
IqSignal apply_multipath(const IqSignal& sig, const MultipathTaps& taps);

// K profiles on stratified fingerprint grids; same seed -> identical bank.
std::vector<DeviceProfile> make_device_bank(int k, std::uint64_t seed);

// Full transmit chain: preamble -> IQ imbalance -> PA nonlinearity -> CFO
// (-> AWGN unless clean). Fully determined by (profile, cfg, snr, seed_tag).
PacketRecord synth_packet(const DeviceProfile& profile, const LoraConfig& cfg,
                          double snr_db, std::uint64_t seed_tag);

// packets_per_cell records for every device x SF cell.
std::vector<PacketRecord> gen_dataset(const std::vector<DeviceProfile>& bank,
                                      const std::vector<LoraConfig>& cfgs,
                                      int packets_per_cell, double snr_db,
                                      std::uint64_t seed);

} // namespace rffi
