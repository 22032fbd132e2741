#include "rffi/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "rffi/errors.hpp"

namespace rffi {
namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT (forward, e^{-j2pi kn/N}).
void fft_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

} // namespace

int frame_count(std::size_t len, int n_fft, int hop) {
    if (static_cast<long long>(len) < n_fft) {
        throw InsufficientDataError("signal shorter than one STFT frame");
    }
    return static_cast<int>((len - static_cast<std::size_t>(n_fft)) / static_cast<std::size_t>(hop)) + 1;
}

Eigen::MatrixXcd stft(const IqSignal& sig, int n_fft, int hop) {
    if (!is_pow2(n_fft)) throw ConfigError("n_fft must be a power of two");
    if (hop < 1) throw ConfigError("hop must be positive");
    const int m_frames = frame_count(sig.size(), n_fft, hop);

    Eigen::MatrixXcd out(n_fft, m_frames);
    std::vector<std::complex<double>> frame(static_cast<std::size_t>(n_fft));
    for (int m = 0; m < m_frames; ++m) {
        const std::size_t start = static_cast<std::size_t>(m) * static_cast<std::size_t>(hop);
        std::copy_n(sig.samples.begin() + static_cast<std::ptrdiff_t>(start),
                    n_fft, frame.begin());
        fft_pow2(frame);
        for (int k = 0; k < n_fft; ++k) out(k, m) = frame[static_cast<std::size_t>(k)];
    }
    return out;
}

Eigen::MatrixXd channel_ind_spectrogram_db(const IqSignal& sig, int n_fft, int hop) {
    const Eigen::MatrixXcd x = stft(sig, n_fft, hop);
    const int m_frames = static_cast<int>(x.cols());
    if (m_frames < 2) throw InsufficientDataError("need at least two STFT frames");

    Eigen::MatrixXd out(n_fft, m_frames - 1);
    for (int m = 1; m < m_frames; ++m) {
        for (int k = 0; k < n_fft; ++k) {
            const double num = std::max(std::norm(x(k, m)), kSpecFloor);
            const double den = std::max(std::norm(x(k, m - 1)), kSpecFloor);
            out(k, m - 1) = 10.0 * std::log10(num / den);
        }
    }
    return out;
}

Spectrogram channel_ind_spectrogram(const IqSignal& sig) {
    Spectrogram spec;
    spec.n_fft = kSpecNfft;
    spec.hop = kSpecHop;
    spec.values = channel_ind_spectrogram_db(sig, kSpecNfft, kSpecHop)
                      .cwiseMax(-kSpecClipDb)
                      .cwiseMin(kSpecClipDb) /
                  kSpecClipDb;
    return spec;
}

} // namespace rffi
