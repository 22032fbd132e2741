#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rffi/inference.hpp"
#include "rffi/preprocess.hpp"

using namespace rffi;

namespace {

ProbVector pv(std::initializer_list<double> vals) {
    ProbVector p(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double v : vals) p(i++) = v;
    return p;
}

nn::Model<float> tiny_model(int k = 2, std::uint64_t seed = 21) {
    ModelConfig mc;
    mc.n_classes = k;
    return nn::build_model<float>(mc, seed);
}

} // namespace

TEST_CASE("predict contract across widths") {
    const auto model = tiny_model(10);
    for (int sf : {7, 8, 9}) {
        LoraConfig cfg;
        cfg.sf = sf;
        const Spectrogram spec = channel_ind_spectrogram(gen_preamble(cfg));
        const ProbVector p = predict(model, spec);
        CHECK(p.size() == 10);
        CHECK(std::abs(p.sum() - 1.0) < 1e-9);
        for (int i = 0; i < 10; ++i) {
            CHECK(p(i) >= 0.0);
            CHECK(p(i) <= 1.0);
        }
        const ProbVector p2 = predict(model, spec);
        for (int i = 0; i < 10; ++i) CHECK(p(i) == p2(i));
    }

    Spectrogram bad;
    bad.values = Eigen::MatrixXd::Zero(32, 10);
    CHECK_THROWS_AS(predict(model, bad), DimensionError);
}

TEST_CASE("merge_predictions") {
    SUBCASE("single vector unchanged") {
        const ProbVector p = pv({0.2, 0.3, 0.5});
        const ProbVector m = merge_predictions({p});
        for (int i = 0; i < 3; ++i) CHECK(m(i) == p(i));
    }
    SUBCASE("mean of one-hot pair") {
        const ProbVector m = merge_predictions({pv({1.0, 0.0}), pv({0.0, 1.0})});
        CHECK(m(0) == doctest::Approx(0.5));
        CHECK(m(1) == doctest::Approx(0.5));
    }
    SUBCASE("permutation invariant, sums to one") {
        const std::vector<ProbVector> hist = {pv({0.7, 0.2, 0.1}), pv({0.1, 0.8, 0.1}),
                                              pv({0.3, 0.3, 0.4})};
        const std::vector<ProbVector> rev(hist.rbegin(), hist.rend());
        const ProbVector a = merge_predictions(hist);
        const ProbVector b = merge_predictions(rev);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(std::abs(a.sum() - 1.0) < 1e-9);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(merge_predictions({}), InsufficientDataError);
        CHECK_THROWS_AS(merge_predictions({pv({0.5, 0.5}), pv({0.3, 0.3, 0.4})}), DimensionError);
    }
}

TEST_CASE("classify argmax with lowest-index ties") {
    CHECK(classify(pv({0.1, 0.7, 0.2})) == 1);
    CHECK(classify(pv({0.5, 0.5})) == 0);
    CHECK(classify(pv({0.25, 0.25, 0.25, 0.25})) == 0);

    // argmax invariant under softmax logit shift.
    nn::Vec<double> z(4);
    z << 0.3, 1.9, -0.4, 1.2;
    const nn::Vec<double> shifted = (z.array() + 17.0).matrix();
    CHECK(classify(nn::softmax<double>(z)) == classify(nn::softmax<double>(shifted)));
}

TEST_CASE("fusion window warm-up, eviction and storage bound") {
    const auto model = tiny_model(2);
    LoraConfig cfg;
    const int n_pkt = 4;
    InferenceEngine engine(model, cfg, n_pkt);

    const auto bank = make_device_bank(2, 33);
    for (int i = 0; i < 10; ++i) {
        const PacketRecord rec =
            synth_packet(bank[0], cfg, 30.0, static_cast<std::uint64_t>(1000 + i));
        const InferResult res = engine.infer_packet(0, rec.signal, cfg);
        CHECK(std::abs(res.merged.sum() - 1.0) < 1e-9);
        // Warm-up: merge over min(i+1, n_pkt) vectors; FIFO holds one less.
        CHECK(engine.history_depth(0) == std::min<std::size_t>(static_cast<std::size_t>(i) + 1,
                                                               n_pkt - 1));
    }

    // Second source gets its own FIFO.
    const PacketRecord rec = synth_packet(bank[1], cfg, 30.0, 5000);
    engine.infer_packet(1, rec.signal, cfg);
    CHECK(engine.history_depth(1) == 1);
    CHECK(engine.stored_floats() == (n_pkt - 1) * 2 + 1 * 2);
}

TEST_CASE("n_pkt=1 equals single-packet classification") {
    const auto model = tiny_model(2);
    LoraConfig cfg;
    InferenceEngine engine(model, cfg, 1);
    const auto bank = make_device_bank(2, 3);

    for (int i = 0; i < 5; ++i) {
        const PacketRecord rec =
            synth_packet(bank[1], cfg, 20.0, static_cast<std::uint64_t>(i));
        const InferResult res = engine.infer_packet(7, rec.signal, cfg);
        const Spectrogram spec = channel_ind_spectrogram(preprocess_packet(rec.signal, cfg));
        const ProbVector direct = predict(model, spec);
        CHECK(res.label == classify(direct));
        for (int k = 0; k < 2; ++k) CHECK(res.merged(k) == direct(k));
        CHECK(engine.history_depth(7) == 0); // no history retained for n_pkt = 1
    }
}

TEST_CASE("warm-up merge uses exactly the vectors seen so far") {
    const auto model = tiny_model(2);
    LoraConfig cfg;
    InferenceEngine engine(model, cfg, 10);
    const auto bank = make_device_bank(2, 4);

    std::vector<ProbVector> singles;
    for (int i = 0; i < 3; ++i) {
        const PacketRecord rec =
            synth_packet(bank[0], cfg, 25.0, static_cast<std::uint64_t>(200 + i));
        const InferResult res = engine.infer_packet(0, rec.signal, cfg);
        singles.push_back(res.single);
        const ProbVector expect = merge_predictions(singles);
        CHECK((res.merged - expect).cwiseAbs().maxCoeff() < 1e-15);
    }
}
