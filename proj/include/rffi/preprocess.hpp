#pragma once

#include "rffi/lora.hpp"

namespace rffi {

// Detection threshold on the normalized cross-correlation peak.
inline constexpr double kDetectThreshold = 0.3;

// Sample offset of the preamble inside rx, located by normalized
// cross-correlation against the ideal preamble template.
std::size_t detect_sync(const IqSignal& rx, const LoraConfig& cfg);

// Lag-L autocorrelation CFO estimate, L = samples_per_symbol. Unambiguous
// for |df| < fs / (2L).
double estimate_cfo(const IqSignal& preamble, const LoraConfig& cfg);

// Multiplies by e^{-j 2 pi df n / fs}.
IqSignal compensate_cfo(const IqSignal& sig, double delta_f_hz);

// Scales so the output RMS is 1.
IqSignal normalize_rms(const IqSignal& sig);

// detect_sync -> slice preamble -> estimate_cfo -> compensate_cfo -> normalize_rms.
IqSignal preprocess_packet(const IqSignal& rx, const LoraConfig& cfg);

} // namespace rffi
