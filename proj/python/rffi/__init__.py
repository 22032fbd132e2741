"""Python surface of the LoRa radio fingerprint pipeline (thin wrapper over _rffi)."""

from _rffi import (  # noqa: F401
    Checkpoint,
    Dataset,
    DeviceProfile,
    InferenceEngine,
    IqSignal,
    LoraConfig,
    Model,
    ModelConfig,
    PacketRecord,
    RffiConfigError,
    RffiFormatError,
    RffiNoPacketError,
    channel_ind_spectrogram,
    classify,
    compensate_cfo,
    detect_sync,
    estimate_cfo,
    gen_preamble,
    gen_upchirp,
    load_checkpoint,
    load_dataset,
    make_device_bank,
    merge_predictions,
    predict,
    preprocess_packet,
    save_dataset,
    synth_packet,
)
