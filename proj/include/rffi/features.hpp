#pragma once

#include <Eigen/Dense>

#include "rffi/lora.hpp"

namespace rffi {

// Channel-independent spectrogram: per-bin dB ratio of adjacent STFT frames,
// clipped to +/- kSpecClipDb and scaled into [-1, 1].
struct Spectrogram {
    Eigen::MatrixXd values; // n_fft rows x (M-1) columns
    int n_fft = 64;
    int hop = 32;

    int height() const { return static_cast<int>(values.rows()); }
    int width() const { return static_cast<int>(values.cols()); }
};

inline constexpr int kSpecNfft = 64;
inline constexpr int kSpecHop = 32;
inline constexpr double kSpecClipDb = 40.0;
inline constexpr double kSpecFloor = 1e-12; // floor on |X|^2 before the ratio

// floor((len - n_fft) / hop) + 1; partial trailing frames are dropped.
int frame_count(std::size_t len, int n_fft = kSpecNfft, int hop = kSpecHop);

// Rectangular-window STFT; column m is the DFT of s[m*hop .. m*hop+n_fft-1].
Eigen::MatrixXcd stft(const IqSignal& sig, int n_fft = kSpecNfft, int hop = kSpecHop);

// Pre-clipping dB matrix: S(k, m-1) = 10*log10(max(|X(k,m)|^2, floor) /
// max(|X(k,m-1)|^2, floor)).
Eigen::MatrixXd channel_ind_spectrogram_db(const IqSignal& sig,
                                           int n_fft = kSpecNfft, int hop = kSpecHop);

// Clipped and scaled model input.
Spectrogram channel_ind_spectrogram(const IqSignal& sig);

} // namespace rffi
