#include "rffi/model.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "rffi/features.hpp"
#include "rffi/preprocess.hpp"

namespace rffi {

Augmentation parse_augmentation(const std::string& s) {
    if (s == "none") return Augmentation::kNone;
    if (s == "offline") return Augmentation::kOffline;
    if (s == "online") return Augmentation::kOnline;
    throw ConfigError("unknown augmentation strategy: " + s);
}

std::string to_string(Augmentation a) {
    switch (a) {
        case Augmentation::kNone: return "none";
        case Augmentation::kOffline: return "offline";
        case Augmentation::kOnline: return "online";
    }
    return "?";
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (lr_init <= 0.0 || lr_factor <= 0.0 || lr_factor >= 1.0) {
        throw ConfigError("invalid learning rate settings");
    }
    if (lr_patience < 1 || stop_patience < 1 || max_epochs < 1) {
        throw ConfigError("invalid patience/epoch settings");
    }
    if (val_fraction <= 0.0 || val_fraction >= 1.0) {
        throw ConfigError("validation fraction must be in (0, 1)");
    }
    if (snr_lo_db > snr_hi_db) throw ConfigError("SNR range low must be <= high");
}

std::vector<PacketRecord> augment_offline(const std::vector<PacketRecord>& records,
                                          double snr_lo_db, double snr_hi_db,
                                          std::uint64_t seed) {
    Rng rng = Rng::seeded(seed);
    std::vector<PacketRecord> out;
    out.reserve(records.size());
    for (const PacketRecord& rec : records) {
        PacketRecord noisy = rec;
        const double snr = rng.uniform(snr_lo_db, snr_hi_db);
        noisy.signal = apply_awgn(rec.signal, snr, rng);
        noisy.applied_snr_db = snr;
        out.push_back(std::move(noisy));
    }
    return out;
}

std::vector<PacketRecord> augment_online(const std::vector<PacketRecord>& batch,
                                         double snr_lo_db, double snr_hi_db, Rng& rng) {
    if (std::isinf(snr_lo_db) && std::isinf(snr_hi_db)) return batch;
    std::vector<PacketRecord> out;
    out.reserve(batch.size());
    for (const PacketRecord& rec : batch) {
        PacketRecord noisy = rec;
        const double snr = rng.uniform(snr_lo_db, snr_hi_db);
        noisy.signal = apply_awgn(rec.signal, snr, rng);
        noisy.applied_snr_db = snr;
        out.push_back(std::move(noisy));
    }
    return out;
}

nn::Mat<float> record_to_input(const PacketRecord& rec, const LoraConfig& cfg) {
    const IqSignal clean = preprocess_packet(rec.signal, cfg);
    const Spectrogram spec = channel_ind_spectrogram(clean);
    // Columns (frames) become time steps, bins become features.
    return spec.values.transpose().cast<float>();
}

namespace {

LoraConfig cfg_for_sf(const Dataset& ds, const TrainConfig& tc, int sf) {
    LoraConfig cfg;
    cfg.sf = sf;
    cfg.bandwidth_hz = tc.bandwidth_hz;
    cfg.sample_rate_hz = ds.sample_rate_hz;
    cfg.n_preamble = tc.n_preamble;
    cfg.validate();
    return cfg;
}

double eval_loss(nn::Model<float>& model, const std::vector<nn::Sample<float>>& samples,
                 int batch_size) {
    double total = 0.0;
    std::size_t i = 0;
    while (i < samples.size()) {
        const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(batch_size),
                                                    samples.size() - i);
        std::vector<nn::Sample<float>> batch(samples.begin() + static_cast<std::ptrdiff_t>(i),
                                             samples.begin() + static_cast<std::ptrdiff_t>(i + n));
        total += static_cast<double>(nn::batch_loss<float>(model, batch, false)) *
                 static_cast<double>(n);
        i += n;
    }
    return total / static_cast<double>(samples.size());
}

} // namespace

Checkpoint train(const Dataset& dataset, const ModelConfig& model_cfg,
                 const TrainConfig& train_cfg) {
    model_cfg.validate();
    train_cfg.validate();
    const std::vector<PacketRecord>& records = dataset.records;
    if (records.empty()) throw ConfigError("empty training dataset");

    // Every class must be present.
    std::vector<int> class_counts(static_cast<std::size_t>(model_cfg.n_classes), 0);
    for (const PacketRecord& r : records) {
        if (r.label < 0 || r.label >= model_cfg.n_classes) {
            throw ConfigError("record label outside [0, K-1]");
        }
        ++class_counts[static_cast<std::size_t>(r.label)];
    }
    for (int c = 0; c < model_cfg.n_classes; ++c) {
        if (class_counts[static_cast<std::size_t>(c)] == 0) {
            throw ConfigError("class " + std::to_string(c) + " missing from training data");
        }
    }

    Rng rng = Rng::seeded(train_cfg.seed);

    // Stratified validation split.
    std::vector<std::size_t> train_idx, val_idx;
    {
        std::map<int, std::vector<std::size_t>> by_class;
        for (std::size_t i = 0; i < records.size(); ++i) by_class[records[i].label].push_back(i);
        Rng split_rng = rng.child(1);
        for (auto& [label, idx] : by_class) {
            split_rng.shuffle(idx);
            const std::size_t n_val = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(train_cfg.val_fraction *
                                                         static_cast<double>(idx.size()))));
            for (std::size_t i = 0; i < idx.size(); ++i) {
                (i < n_val ? val_idx : train_idx).push_back(idx[i]);
            }
        }
        std::sort(train_idx.begin(), train_idx.end());
        std::sort(val_idx.begin(), val_idx.end());
    }

    // Materialize the working copies of both splits.
    auto pick = [&records](const std::vector<std::size_t>& idx) {
        std::vector<PacketRecord> out;
        out.reserve(idx.size());
        for (std::size_t i : idx) out.push_back(records[i]);
        return out;
    };
    std::vector<PacketRecord> train_recs = pick(train_idx);
    std::vector<PacketRecord> val_recs = pick(val_idx);

    const bool offline = train_cfg.augmentation == Augmentation::kOffline;
    const bool online = train_cfg.augmentation == Augmentation::kOnline;
    if (offline) {
        train_recs = augment_offline(train_recs, train_cfg.snr_lo_db, train_cfg.snr_hi_db,
                                     rng.child(2).bits());
    }
    // Validation noise is frozen once so the plateau logic sees a stable metric.
    if (offline || online) {
        val_recs = augment_offline(val_recs, train_cfg.snr_lo_db, train_cfg.snr_hi_db,
                                   rng.child(3).bits());
    }

    std::map<int, LoraConfig> cfgs;
    for (const PacketRecord& r : records) {
        if (!cfgs.count(r.sf)) cfgs[r.sf] = cfg_for_sf(dataset, train_cfg, r.sf);
    }

    std::vector<nn::Sample<float>> val_samples(val_recs.size());
    for (std::size_t i = 0; i < val_recs.size(); ++i) {
        val_samples[i].x = record_to_input(val_recs[i], cfgs.at(val_recs[i].sf));
        val_samples[i].label = val_recs[i].label;
    }

    // For none/offline the inputs are static; cache them.
    std::vector<nn::Sample<float>> static_inputs;
    if (!online) {
        static_inputs.resize(train_recs.size());
        for (std::size_t i = 0; i < train_recs.size(); ++i) {
            static_inputs[i].x = record_to_input(train_recs[i], cfgs.at(train_recs[i].sf));
            static_inputs[i].label = train_recs[i].label;
        }
    }

    // SF buckets over train_recs indices.
    std::map<int, std::vector<std::size_t>> sf_buckets;
    for (std::size_t i = 0; i < train_recs.size(); ++i) sf_buckets[train_recs[i].sf].push_back(i);

    nn::Model<float> model = nn::build_model<float>(model_cfg, rng.child(4).bits());
    nn::RmsPropState<float> opt = nn::RmsPropState<float>::make(model);

    Checkpoint best;
    best.model = model;
    double best_val = std::numeric_limits<double>::infinity();
    int epochs_since_improvement = 0;
    int epochs_since_lr_change = 0;
    double lr = train_cfg.lr_init;
    std::vector<EpochStats> history;

    for (int epoch = 0; epoch < train_cfg.max_epochs; ++epoch) {
        // Batches have uniform SF (uniform width); batch order is shuffled.
        Rng epoch_rng = rng.child(5, static_cast<std::uint64_t>(epoch));
        std::vector<std::vector<std::size_t>> batches;
        for (auto& [sf, idx] : sf_buckets) {
            epoch_rng.shuffle(idx);
            for (std::size_t i = 0; i < idx.size(); i += static_cast<std::size_t>(train_cfg.batch_size)) {
                const std::size_t n = std::min<std::size_t>(
                    static_cast<std::size_t>(train_cfg.batch_size), idx.size() - i);
                batches.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(i),
                                     idx.begin() + static_cast<std::ptrdiff_t>(i + n));
            }
        }
        epoch_rng.shuffle(batches);

        double train_loss_acc = 0.0;
        std::size_t seen = 0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            std::vector<nn::Sample<float>> batch;
            batch.reserve(batches[b].size());
            if (online) {
                Rng noise_rng = rng.child(6, static_cast<std::uint64_t>(epoch), b);
                std::vector<PacketRecord> raw;
                raw.reserve(batches[b].size());
                for (std::size_t i : batches[b]) raw.push_back(train_recs[i]);
                for (const PacketRecord& rec :
                     augment_online(raw, train_cfg.snr_lo_db, train_cfg.snr_hi_db, noise_rng)) {
                    batch.push_back({record_to_input(rec, cfgs.at(rec.sf)), rec.label});
                }
            } else {
                for (std::size_t i : batches[b]) batch.push_back(static_inputs[i]);
            }
            const float loss = nn::batch_loss<float>(model, batch, true);
            nn::rmsprop_step<float>(model, opt, static_cast<float>(lr));
            train_loss_acc += static_cast<double>(loss) * static_cast<double>(batch.size());
            seen += batch.size();
        }

        EpochStats st;
        st.train_loss = train_loss_acc / static_cast<double>(seen);
        st.val_loss = eval_loss(model, val_samples, train_cfg.batch_size);
        st.lr = lr;
        history.push_back(st);

        if (st.val_loss < best_val) {
            best_val = st.val_loss;
            best.model = model;
            best.best_epoch = epoch;
            epochs_since_improvement = 0;
            epochs_since_lr_change = 0;
        } else {
            ++epochs_since_improvement;
            ++epochs_since_lr_change;
            if (epochs_since_improvement >= train_cfg.stop_patience) break;
            if (epochs_since_lr_change >= train_cfg.lr_patience) {
                lr *= train_cfg.lr_factor;
                epochs_since_lr_change = 0;
            }
        }
    }

    best.history = std::move(history);
    return best;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O ("RFFC")
// ---------------------------------------------------------------------------

namespace {

constexpr char kCkptMagic[4] = {'R', 'F', 'F', 'C'};
constexpr std::uint16_t kCkptVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw FormatError("checkpoint file truncated");
    return v;
}

} // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open checkpoint file for writing: " + path);

    os.write(kCkptMagic, 4);
    put<std::uint16_t>(os, kCkptVersion);
    const ModelConfig& mc = c.model.cfg;
    put<std::uint16_t>(os, static_cast<std::uint16_t>(mc.d_model));
    put<std::uint16_t>(os, static_cast<std::uint16_t>(mc.n_heads));
    put<std::uint16_t>(os, static_cast<std::uint16_t>(mc.d_ff));
    put<std::uint16_t>(os, static_cast<std::uint16_t>(mc.n_blocks));
    put<std::uint16_t>(os, static_cast<std::uint16_t>(mc.n_classes));

    std::vector<const nn::Param<float>*> params;
    const_cast<nn::Model<float>&>(c.model).visit_params(
        [&params](nn::Param<float>& p) { params.push_back(&p); });
    put<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
    for (const nn::Param<float>* p : params) {
        put<std::uint16_t>(os, static_cast<std::uint16_t>(p->name.size()));
        os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        put<std::uint8_t>(os, 2); // rank
        put<std::uint32_t>(os, static_cast<std::uint32_t>(p->value.rows()));
        put<std::uint32_t>(os, static_cast<std::uint32_t>(p->value.cols()));
        for (Eigen::Index j = 0; j < p->value.cols(); ++j) {
            for (Eigen::Index i = 0; i < p->value.rows(); ++i) {
                put<float>(os, p->value(i, j));
            }
        }
    }

    put<std::int32_t>(os, c.best_epoch);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(c.history.size()));
    for (const EpochStats& st : c.history) {
        put<float>(os, static_cast<float>(st.train_loss));
        put<float>(os, static_cast<float>(st.val_loss));
        put<float>(os, static_cast<float>(st.lr));
    }
    if (!os) throw FormatError("failed writing checkpoint file: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open checkpoint file: " + path);

    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kCkptMagic, 4) != 0) throw FormatError("bad checkpoint magic");
    if (get<std::uint16_t>(is) != kCkptVersion) throw FormatError("unsupported checkpoint version");

    ModelConfig mc;
    mc.d_model = get<std::uint16_t>(is);
    mc.n_heads = get<std::uint16_t>(is);
    mc.d_ff = get<std::uint16_t>(is);
    mc.n_blocks = get<std::uint16_t>(is);
    mc.n_classes = get<std::uint16_t>(is);

    Checkpoint c;
    c.model.cfg = mc;
    nn::Model<float>::build_params(c.model);

    std::map<std::string, nn::Param<float>*> by_name;
    c.model.visit_params([&by_name](nn::Param<float>& p) { by_name[p.name] = &p; });

    const std::uint32_t n_params = get<std::uint32_t>(is);
    if (n_params != by_name.size()) throw FormatError("checkpoint parameter count mismatch");
    for (std::uint32_t t = 0; t < n_params; ++t) {
        const std::uint16_t name_len = get<std::uint16_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        if (!is) throw FormatError("checkpoint file truncated");
        if (get<std::uint8_t>(is) != 2) throw FormatError("unexpected tensor rank");
        const std::uint32_t rows = get<std::uint32_t>(is);
        const std::uint32_t cols = get<std::uint32_t>(is);
        auto it = by_name.find(name);
        if (it == by_name.end()) throw FormatError("unknown tensor in checkpoint: " + name);
        nn::Param<float>& p = *it->second;
        if (rows != static_cast<std::uint32_t>(p.value.rows()) ||
            cols != static_cast<std::uint32_t>(p.value.cols())) {
            throw FormatError("tensor shape mismatch in checkpoint: " + name);
        }
        for (std::uint32_t j = 0; j < cols; ++j) {
            for (std::uint32_t i = 0; i < rows; ++i) {
                p.value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = get<float>(is);
            }
        }
    }

    c.best_epoch = get<std::int32_t>(is);
    const std::uint32_t n_epochs = get<std::uint32_t>(is);
    c.history.resize(n_epochs);
    for (EpochStats& st : c.history) {
        st.train_loss = get<float>(is);
        st.val_loss = get<float>(is);
        st.lr = get<float>(is);
    }
    return c;
}

} // namespace rffi
