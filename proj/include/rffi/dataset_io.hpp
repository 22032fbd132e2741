#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rffi/impairments.hpp"

namespace rffi {

// On-disk dataset: header carries the sample rate and class count shared by
// all records.
struct Dataset {
    double sample_rate_hz = 0.0;
    int n_classes = 0;
    std::vector<PacketRecord> records;
};

// Binary little-endian "RFFD" container. Bit-exact round-trip.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

} // namespace rffi
