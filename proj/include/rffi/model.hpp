#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rffi/dataset_io.hpp"
#include "rffi/nn.hpp"

namespace rffi {

using nn::ModelConfig;

enum class Augmentation { kNone, kOffline, kOnline };

Augmentation parse_augmentation(const std::string& s);
std::string to_string(Augmentation a);

struct TrainConfig {
    int batch_size = 32;
    double lr_init = 0.001;
    double lr_factor = 0.2;
    int lr_patience = 10;   // epochs without val improvement before reducing lr
    int stop_patience = 20; // epochs without val improvement before stopping
    double val_fraction = 0.1;
    Augmentation augmentation = Augmentation::kOnline;
    double snr_lo_db = 0.0;
    double snr_hi_db = 40.0;
    std::uint64_t seed = 0;
    int max_epochs = 500;

    // Needed to rebuild per-SF LoraConfigs for preprocessing; the dataset
    // header only carries the sample rate.
    double bandwidth_hz = 125e3;
    int n_preamble = 8;

    void validate() const;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;
};

struct Checkpoint {
    nn::Model<float> model;
    std::vector<EpochStats> history;
    int best_epoch = -1;
};

// One AWGN-corrupted copy per record, SNR ~ Uniform(snr range). Size preserving.
std::vector<PacketRecord> augment_offline(const std::vector<PacketRecord>& records,
                                          double snr_lo_db, double snr_hi_db,
                                          std::uint64_t seed);

// Fresh noise per record per call; clean range [inf, inf] degenerates to identity.
std::vector<PacketRecord> augment_online(const std::vector<PacketRecord>& batch,
                                         double snr_lo_db, double snr_hi_db, Rng& rng);

// Record -> model input: AWGN aside, preprocess the packet and lay the
// channel-independent spectrogram out as (time steps x 64) features.
nn::Mat<float> record_to_input(const PacketRecord& rec, const LoraConfig& cfg);

// Full training loop: stratified validation split, SF-bucketed mini-batches,
// augmentation strategy, RMSprop with plateau LR schedule and early stopping.
// Returns the best-validation-loss checkpoint.
Checkpoint train(const Dataset& dataset, const ModelConfig& model_cfg,
                 const TrainConfig& train_cfg);

// Binary little-endian "RFFC" checkpoint container. Bit-exact round-trip.
void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace rffi
