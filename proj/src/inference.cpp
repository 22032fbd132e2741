#include "rffi/inference.hpp"

#include "rffi/preprocess.hpp"

namespace rffi {

ProbVector predict(const nn::Model<float>& model, const Spectrogram& spec) {
    if (spec.height() != model.cfg.d_model) {
        throw DimensionError("spectrogram height does not match model feature size");
    }
    nn::Model<float>::Cache cache;
    const nn::Mat<float> x = spec.values.transpose().cast<float>();
    const nn::Vec<float> z = const_cast<nn::Model<float>&>(model).logits(x, cache);
    return nn::softmax<double>(z.cast<double>().eval());
}

ProbVector merge_predictions(const std::vector<ProbVector>& history) {
    if (history.empty()) throw InsufficientDataError("cannot merge an empty prediction history");
    const Eigen::Index k = history.front().size();
    ProbVector acc = ProbVector::Zero(k);
    for (const ProbVector& p : history) {
        if (p.size() != k) throw DimensionError("mixed class counts in prediction history");
        acc += p;
    }
    return acc / static_cast<double>(history.size());
}

int classify(const ProbVector& p) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(p.size()); ++i) {
        if (p(i) > p(best)) best = i;
    }
    return best;
}

InferenceEngine::InferenceEngine(nn::Model<float> model, LoraConfig base_cfg, int n_pkt)
    : model_(std::move(model)), base_cfg_(base_cfg), n_pkt_(n_pkt) {
    if (n_pkt_ < 1) throw ConfigError("fusion window must be >= 1");
}

InferResult InferenceEngine::infer_packet(int source_id, const IqSignal& rx, int sf) {
    LoraConfig cfg = base_cfg_;
    cfg.sf = sf;
    return infer_packet(source_id, rx, cfg);
}

InferResult InferenceEngine::infer_packet(int source_id, const IqSignal& rx,
                                          const LoraConfig& cfg) {
    const IqSignal clean = preprocess_packet(rx, cfg);
    const Spectrogram spec = channel_ind_spectrogram(clean);
    ProbVector p = predict(model_, spec);

    std::deque<ProbVector>& fifo = history_[source_id];
    std::vector<ProbVector> window(fifo.begin(), fifo.end());
    window.push_back(p);

    InferResult res;
    res.single = p;
    res.merged = merge_predictions(window);
    res.label = classify(res.merged);

    fifo.push_back(std::move(p));
    while (static_cast<int>(fifo.size()) > n_pkt_ - 1) fifo.pop_front();
    return res;
}

std::size_t InferenceEngine::stored_floats() const {
    std::size_t n = 0;
    for (const auto& [id, fifo] : history_) {
        for (const ProbVector& p : fifo) n += static_cast<std::size_t>(p.size());
    }
    return n;
}

std::size_t InferenceEngine::history_depth(int source_id) const {
    auto it = history_.find(source_id);
    return it == history_.end() ? 0 : it->second.size();
}

} // namespace rffi
