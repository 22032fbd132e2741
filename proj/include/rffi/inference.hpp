#pragma once

#include <deque>
#include <map>

#include "rffi/features.hpp"
#include "rffi/model.hpp"

namespace rffi {

// K probabilities summing to 1; the softmax head output and the unit merged
// by multi-packet inference.
using ProbVector = Eigen::VectorXd;

// Single-spectrogram forward pass. The softmax is evaluated in double so the
// output sums to 1 at double precision.
ProbVector predict(const nn::Model<float>& model, const Spectrogram& spec);

// Element-wise arithmetic mean of the predictions.
ProbVector merge_predictions(const std::vector<ProbVector>& history);

// Argmax with ties broken toward the lowest index.
int classify(const ProbVector& p);

struct InferResult {
    int label = 0;
    ProbVector merged;
    ProbVector single; // this packet's own prediction
};

// Holds a loaded model plus a bounded per-source FIFO of historical
// predictions for multi-packet fusion. Model is read-only and shareable;
// each source's FIFO has a single-writer contract.
class InferenceEngine {
public:
    InferenceEngine(nn::Model<float> model, LoraConfig base_cfg, int n_pkt);

    // preprocess -> spectrogram -> predict -> fuse with up to (n_pkt - 1)
    // retained predictions for this source.
    InferResult infer_packet(int source_id, const IqSignal& rx, int sf);
    InferResult infer_packet(int source_id, const IqSignal& rx, const LoraConfig& cfg);

    int n_pkt() const { return n_pkt_; }
    const nn::Model<float>& model() const { return model_; }

    // Total retained floats across all source FIFOs.
    std::size_t stored_floats() const;
    std::size_t history_depth(int source_id) const;
    void reset_history() { history_.clear(); }

private:
    nn::Model<float> model_;
    LoraConfig base_cfg_;
    int n_pkt_;
    std::map<int, std::deque<ProbVector>> history_;
};

} // namespace rffi
