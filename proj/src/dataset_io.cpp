#include "rffi/dataset_io.hpp"

#include <cstring>
#include <fstream>
#include <limits>

#include "rffi/errors.hpp"

namespace rffi {
namespace {

constexpr char kMagic[4] = {'R', 'F', 'F', 'D'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
    // Little-endian host assumed (x86/aarch64); static_assert guards the rest.
    static_assert(std::is_trivially_copyable_v<T>);
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw FormatError("dataset file truncated");
    return v;
}

} // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open dataset file for writing: " + path);

    os.write(kMagic, 4);
    put<std::uint16_t>(os, kVersion);
    put<double>(os, ds.sample_rate_hz);
    put<std::uint16_t>(os, static_cast<std::uint16_t>(ds.n_classes));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(ds.records.size()));

    for (const PacketRecord& rec : ds.records) {
        put<std::uint16_t>(os, static_cast<std::uint16_t>(rec.label));
        put<std::uint8_t>(os, static_cast<std::uint8_t>(rec.sf));
        put<float>(os, static_cast<float>(rec.applied_snr_db));
        put<float>(os, static_cast<float>(rec.applied_cfo_hz));
        put<std::uint64_t>(os, rec.seed_tag);
        put<std::uint32_t>(os, static_cast<std::uint32_t>(rec.signal.size()));
        for (const auto& s : rec.signal.samples) {
            put<float>(os, static_cast<float>(s.real()));
            put<float>(os, static_cast<float>(s.imag()));
        }
    }
    if (!os) throw FormatError("failed writing dataset file: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open dataset file: " + path);

    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad dataset magic");
    if (get<std::uint16_t>(is) != kVersion) throw FormatError("unsupported dataset version");

    Dataset ds;
    ds.sample_rate_hz = get<double>(is);
    ds.n_classes = get<std::uint16_t>(is);
    const std::uint32_t count = get<std::uint32_t>(is);

    ds.records.resize(count);
    for (PacketRecord& rec : ds.records) {
        rec.label = get<std::uint16_t>(is);
        rec.sf = get<std::uint8_t>(is);
        rec.applied_snr_db = get<float>(is);
        rec.applied_cfo_hz = get<float>(is);
        rec.seed_tag = get<std::uint64_t>(is);
        const std::uint32_t n = get<std::uint32_t>(is);
        rec.signal.sample_rate_hz = ds.sample_rate_hz;
        rec.signal.samples.resize(n);
        for (auto& s : rec.signal.samples) {
            const float re = get<float>(is);
            const float im = get<float>(is);
            s = {re, im};
        }
    }
    return ds;
}

} // namespace rffi
