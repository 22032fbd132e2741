#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rffi/inference.hpp"

namespace rffi {

struct EvalCell {
    double snr_db = 0.0;
    int sf = 0;
    int n_pkt = 1;
    double accuracy = 0.0;
    int n_samples = 0;
    int n_failed = 0; // packets the detector could not find at this SNR
    Eigen::MatrixXi confusion; // rows: true label, cols: predicted
};

// Sweeps the (snr, sf, n_pkt) grid over a clean test set. For each cell the
// clean records are corrupted at the target SNR (seeded per cell) and each
// device's packets are streamed consecutively through a fresh fusion window.
std::vector<EvalCell> evaluate(const nn::Model<float>& model, const Dataset& test_set,
                               double bandwidth_hz, int n_preamble,
                               const std::vector<double>& snr_list,
                               const std::vector<int>& sf_list,
                               const std::vector<int>& n_pkt_list, std::uint64_t seed);

} // namespace rffi
