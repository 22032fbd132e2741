#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rffi/dataset_io.hpp"
#include "rffi/evaluate.hpp"
#include "rffi/features.hpp"
#include "rffi/impairments.hpp"
#include "rffi/inference.hpp"
#include "rffi/lora.hpp"
#include "rffi/model.hpp"
#include "rffi/preprocess.hpp"

namespace py = pybind11;
using namespace rffi;

namespace {

py::array_t<std::complex<double>> to_numpy(const IqSignal& sig) {
    py::array_t<std::complex<double>> arr(static_cast<py::ssize_t>(sig.samples.size()));
    std::copy(sig.samples.begin(), sig.samples.end(), arr.mutable_data());
    return arr;
}

IqSignal from_numpy(const py::array_t<std::complex<double>>& arr, double sample_rate_hz) {
    IqSignal sig;
    sig.sample_rate_hz = sample_rate_hz;
    auto r = arr.unchecked<1>();
    sig.samples.assign(r.data(0), r.data(0) + r.shape(0));
    return sig;
}

} // namespace

PYBIND11_MODULE(_rffi, m) {
    m.doc() = "LoRa radio fingerprint pipeline: synthesis, features, model, fusion";

    py::register_exception<ConfigError>(m, "RffiConfigError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "RffiFormatError", PyExc_ValueError);
    py::register_exception<NoPacketError>(m, "RffiNoPacketError", PyExc_RuntimeError);

    py::class_<LoraConfig>(m, "LoraConfig")
        .def(py::init<>())
        .def_readwrite("sf", &LoraConfig::sf)
        .def_readwrite("bandwidth_hz", &LoraConfig::bandwidth_hz)
        .def_readwrite("sample_rate_hz", &LoraConfig::sample_rate_hz)
        .def_readwrite("n_preamble", &LoraConfig::n_preamble)
        .def("samples_per_symbol", &LoraConfig::samples_per_symbol)
        .def("preamble_length", &LoraConfig::preamble_length)
        .def("validate", &LoraConfig::validate);

    py::class_<IqSignal>(m, "IqSignal")
        .def(py::init([](const py::array_t<std::complex<double>>& samples, double fs) {
                 return from_numpy(samples, fs);
             }),
             py::arg("samples"), py::arg("sample_rate_hz"))
        .def_property_readonly("samples", &to_numpy)
        .def_readwrite("sample_rate_hz", &IqSignal::sample_rate_hz)
        .def("power", &IqSignal::power)
        .def("rms", &IqSignal::rms)
        .def("__len__", [](const IqSignal& s) { return s.samples.size(); });

    py::class_<DeviceProfile>(m, "DeviceProfile")
        .def_readonly("iq_gain", &DeviceProfile::iq_gain)
        .def_readonly("iq_phase_rad", &DeviceProfile::iq_phase_rad)
        .def_readonly("pa_a3", &DeviceProfile::pa_a3)
        .def_readonly("pa_a5", &DeviceProfile::pa_a5)
        .def_readonly("cfo_mean_hz", &DeviceProfile::cfo_mean_hz)
        .def_readonly("cfo_std_hz", &DeviceProfile::cfo_std_hz);

    py::class_<PacketRecord>(m, "PacketRecord")
        .def_readonly("signal", &PacketRecord::signal)
        .def_readonly("label", &PacketRecord::label)
        .def_readonly("sf", &PacketRecord::sf)
        .def_readonly("applied_cfo_hz", &PacketRecord::applied_cfo_hz)
        .def_readonly("applied_snr_db", &PacketRecord::applied_snr_db)
        .def_readonly("seed_tag", &PacketRecord::seed_tag);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init([](double fs, int n_classes, const std::vector<PacketRecord>& records) {
                 return Dataset{fs, n_classes, records};
             }),
             py::arg("sample_rate_hz"), py::arg("n_classes"), py::arg("records"))
        .def_readonly("sample_rate_hz", &Dataset::sample_rate_hz)
        .def_readonly("n_classes", &Dataset::n_classes)
        .def_readonly("records", &Dataset::records);

    m.def("gen_upchirp", &gen_upchirp, py::arg("cfg"), py::arg("amplitude") = 1.0);
    m.def("gen_preamble", &gen_preamble, py::arg("cfg"), py::arg("amplitude") = 1.0);
    m.def("make_device_bank", &make_device_bank, py::arg("k"), py::arg("seed"));
    m.def("synth_packet", &synth_packet, py::arg("profile"), py::arg("cfg"), py::arg("snr_db"),
          py::arg("seed_tag"));

    m.def("detect_sync", &detect_sync, py::arg("rx"), py::arg("cfg"));
    m.def("estimate_cfo", &estimate_cfo, py::arg("rx"), py::arg("cfg"));
    m.def("compensate_cfo", &compensate_cfo, py::arg("rx"), py::arg("cfo_hz"));
    m.def("preprocess_packet", &preprocess_packet, py::arg("rx"), py::arg("cfg"));

    m.def(
        "channel_ind_spectrogram",
        [](const IqSignal& sig) { return channel_ind_spectrogram(sig).values; }, py::arg("sig"),
          "Normalized log-ratio spectrogram, clipped to +/-40 dB and scaled to [-1, 1]");

    m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));
    m.def("load_dataset", &load_dataset, py::arg("path"));

    py::class_<nn::ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("d_model", &nn::ModelConfig::d_model)
        .def_readwrite("n_heads", &nn::ModelConfig::n_heads)
        .def_readwrite("d_ff", &nn::ModelConfig::d_ff)
        .def_readwrite("n_blocks", &nn::ModelConfig::n_blocks)
        .def_readwrite("n_classes", &nn::ModelConfig::n_classes);

    py::class_<nn::Model<float>>(m, "Model")
        .def_property_readonly("n_classes",
                               [](const nn::Model<float>& mdl) { return mdl.cfg.n_classes; })
        .def("parameter_count", &nn::Model<float>::parameter_count);

    py::class_<Checkpoint>(m, "Checkpoint")
        .def_readonly("model", &Checkpoint::model)
        .def_readonly("best_epoch", &Checkpoint::best_epoch);

    m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

    m.def(
        "predict",
        [](const nn::Model<float>& mdl, const Eigen::MatrixXd& spec) {
            return predict(mdl, Spectrogram{spec, kSpecNfft, kSpecHop});
        },
        py::arg("model"), py::arg("spectrogram"),
        "Class probabilities for one spectrogram (rows: 64 frequency bins, cols: frames)");
    m.def("merge_predictions", &merge_predictions, py::arg("predictions"));
    m.def("classify", &classify, py::arg("probabilities"));

    py::class_<InferenceEngine>(m, "InferenceEngine")
        .def(py::init<nn::Model<float>, LoraConfig, int>(), py::arg("model"), py::arg("base_cfg"),
             py::arg("n_pkt"))
        .def("infer_packet",
             [](InferenceEngine& e, int source_id, const IqSignal& rx, int sf) {
                 auto r = e.infer_packet(source_id, rx, sf);
                 return py::make_tuple(r.label, r.merged, r.single);
             },
             py::arg("source_id"), py::arg("rx"), py::arg("sf"))
        .def("stored_floats", &InferenceEngine::stored_floats)
        .def("reset_history", &InferenceEngine::reset_history);
}
