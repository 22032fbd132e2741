#include "rffi/evaluate.hpp"

#include <algorithm>
#include <map>

#include "rffi/errors.hpp"

namespace rffi {

std::vector<EvalCell> evaluate(const nn::Model<float>& model, const Dataset& test_set,
                               double bandwidth_hz, int n_preamble,
                               const std::vector<double>& snr_list,
                               const std::vector<int>& sf_list,
                               const std::vector<int>& n_pkt_list, std::uint64_t seed) {
    if (snr_list.empty() || sf_list.empty() || n_pkt_list.empty()) {
        throw ConfigError("evaluation grid must be non-empty");
    }

    // Per SF: record indices grouped by device, preserving dataset order.
    std::map<int, std::map<int, std::vector<std::size_t>>> by_sf_dev;
    for (std::size_t i = 0; i < test_set.records.size(); ++i) {
        const PacketRecord& r = test_set.records[i];
        by_sf_dev[r.sf][r.label].push_back(i);
    }
    for (int sf : sf_list) {
        if (!by_sf_dev.count(sf)) {
            throw ConfigError("SF " + std::to_string(sf) + " absent from test dataset");
        }
    }

    LoraConfig base_cfg;
    base_cfg.bandwidth_hz = bandwidth_hz;
    base_cfg.sample_rate_hz = test_set.sample_rate_hz;
    base_cfg.n_preamble = n_preamble;

    const Rng master = Rng::seeded(seed);
    const int k = test_set.n_classes;

    std::vector<EvalCell> cells;
    std::size_t cell_idx = 0;
    for (double snr : snr_list) {
        for (int sf : sf_list) {
            for (int n_pkt : n_pkt_list) {
                EvalCell cell;
                cell.snr_db = snr;
                cell.sf = sf;
                cell.n_pkt = n_pkt;
                cell.confusion = Eigen::MatrixXi::Zero(k, k);

                InferenceEngine engine(model, base_cfg, n_pkt);
                int correct = 0;
                int total = 0;
                for (const auto& [dev, indices] : by_sf_dev.at(sf)) {
                    Rng rng = master.child(cell_idx, static_cast<std::uint64_t>(dev));
                    for (std::size_t idx : indices) {
                        const PacketRecord& rec = test_set.records[idx];
                        const IqSignal noisy = apply_awgn(rec.signal, snr, rng);
                        try {
                            const InferResult res = engine.infer_packet(dev, noisy, sf);
                            cell.confusion(rec.label, res.label) += 1;
                            correct += (res.label == rec.label) ? 1 : 0;
                        } catch (const NoPacketError&) {
                            // Undetectable at this SNR: counted as an error,
                            // attributed to no predicted class.
                            ++cell.n_failed;
                        }
                        ++total;
                    }
                }
                cell.n_samples = total;
                cell.accuracy = total > 0 ? static_cast<double>(correct) / total : 0.0;
                cells.push_back(std::move(cell));
                ++cell_idx;
            }
        }
    }
    return cells;
}

} // namespace rffi
