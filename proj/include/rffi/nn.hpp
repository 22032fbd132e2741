#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rffi/errors.hpp"
#include "rffi/rng.hpp"

// Dense transformer building blocks with hand-derived backward passes.
// Everything is templated on the scalar type: float for training/inference,
// double for gradient verification.
namespace rffi::nn {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

inline constexpr double kLayerNormEps = 1e-6;
inline constexpr double kCrossEntropyFloor = 1e-12;

struct ModelConfig {
    int d_model = 64;
    int n_heads = 4;
    int d_ff = 128;
    int n_blocks = 2;
    int n_classes = 0;

    void validate() const {
        if (d_model < 2 || n_heads < 1 || d_ff < 1 || n_blocks < 1 || n_classes < 2) {
            throw ConfigError("invalid model configuration");
        }
        if (d_model % n_heads != 0) throw ConfigError("d_model must be divisible by n_heads");
    }
};

// Named parameter with a same-shape gradient slot.
template <typename T>
struct Param {
    std::string name;
    Mat<T> value;
    Mat<T> grad;

    void init(std::string n, int rows, int cols) {
        name = std::move(n);
        value = Mat<T>::Zero(rows, cols);
        grad = Mat<T>::Zero(rows, cols);
    }
};

// Sinusoidal position table; prefix-consistent in T.
template <typename T>
Mat<T> pos_embedding(int t_steps, int d) {
    if (t_steps < 1 || d < 1) throw ConfigError("position embedding needs positive dimensions");
    if (d % 2 != 0) throw ConfigError("position embedding dimension must be even");
    Mat<T> pe(t_steps, d);
    for (int t = 0; t < t_steps; ++t) {
        for (int i = 0; i < d / 2; ++i) {
            const double freq = std::pow(10000.0, -2.0 * i / static_cast<double>(d));
            const double a = static_cast<double>(t) * freq;
            pe(t, 2 * i) = static_cast<T>(std::sin(a));
            pe(t, 2 * i + 1) = static_cast<T>(std::cos(a));
        }
    }
    return pe;
}

template <typename T>
Vec<T> softmax(const Vec<T>& z) {
    const T m = z.maxCoeff();
    Vec<T> e = (z.array() - m).exp();
    return e / e.sum();
}

template <typename T>
T cross_entropy(const Vec<T>& p, int label) {
    if (label < 0 || label >= static_cast<int>(p.size())) {
        throw IndexError("cross-entropy label out of range");
    }
    const T floor = static_cast<T>(kCrossEntropyFloor);
    return -std::log(std::max(p(label), floor));
}

// ---------------------------------------------------------------------------
// Layers. forward() fills a cache; backward() accumulates parameter gradients
// and returns the gradient with respect to the layer input.
// ---------------------------------------------------------------------------

template <typename T>
struct AttentionLayer {
    int n_heads = 1;
    Param<T> wq, wk, wv, wo; // d x d
    Param<T> bq, bk, bv, bo; // d x 1

    struct Cache {
        Mat<T> x, q, k, v, concat;
        std::vector<Mat<T>> attn; // per head, T x T row-softmax weights
    };

    Mat<T> forward(const Mat<T>& x, Cache& c) const {
        const int d = static_cast<int>(wq.value.rows());
        if (x.cols() != d) throw DimensionError("attention input feature size mismatch");
        const int dh = d / n_heads;
        const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));

        c.x = x;
        c.q = (x * wq.value).rowwise() + bq.value.col(0).transpose();
        c.k = (x * wk.value).rowwise() + bk.value.col(0).transpose();
        c.v = (x * wv.value).rowwise() + bv.value.col(0).transpose();
        c.attn.assign(static_cast<std::size_t>(n_heads), Mat<T>());
        c.concat.resize(x.rows(), d);

        for (int h = 0; h < n_heads; ++h) {
            const auto qh = c.q.middleCols(h * dh, dh);
            const auto kh = c.k.middleCols(h * dh, dh);
            const auto vh = c.v.middleCols(h * dh, dh);
            Mat<T> scores = qh * kh.transpose() * scale;
            Mat<T>& a = c.attn[static_cast<std::size_t>(h)];
            a.resize(scores.rows(), scores.cols());
            for (Eigen::Index r = 0; r < scores.rows(); ++r) {
                const T m = scores.row(r).maxCoeff();
                Eigen::Array<T, 1, Eigen::Dynamic> e = (scores.row(r).array() - m).exp();
                a.row(r) = (e / e.sum()).matrix();
            }
            c.concat.middleCols(h * dh, dh) = a * vh;
        }
        return (c.concat * wo.value).rowwise() + bo.value.col(0).transpose();
    }

    Mat<T> backward(const Mat<T>& dy, const Cache& c) {
        const int d = static_cast<int>(wq.value.rows());
        const int dh = d / n_heads;
        const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));

        wo.grad.noalias() += c.concat.transpose() * dy;
        bo.grad.col(0).noalias() += dy.colwise().sum().transpose();
        Mat<T> dconcat = dy * wo.value.transpose();

        Mat<T> dq(c.q.rows(), d), dk(c.k.rows(), d), dv(c.v.rows(), d);
        for (int h = 0; h < n_heads; ++h) {
            const auto qh = c.q.middleCols(h * dh, dh);
            const auto kh = c.k.middleCols(h * dh, dh);
            const auto vh = c.v.middleCols(h * dh, dh);
            const Mat<T>& a = c.attn[static_cast<std::size_t>(h)];
            const auto dch = dconcat.middleCols(h * dh, dh);

            Mat<T> da = dch * vh.transpose();
            dv.middleCols(h * dh, dh).noalias() = a.transpose() * dch;

            // Row-wise softmax backward: ds = (da - (da . a)) * a, per row.
            Mat<T> ds(a.rows(), a.cols());
            for (Eigen::Index r = 0; r < a.rows(); ++r) {
                const T dot = da.row(r).dot(a.row(r));
                ds.row(r) = (da.row(r).array() - dot) * a.row(r).array();
            }
            dq.middleCols(h * dh, dh).noalias() = ds * kh * scale;
            dk.middleCols(h * dh, dh).noalias() = ds.transpose() * qh * scale;
        }

        wq.grad.noalias() += c.x.transpose() * dq;
        wk.grad.noalias() += c.x.transpose() * dk;
        wv.grad.noalias() += c.x.transpose() * dv;
        bq.grad.col(0).noalias() += dq.colwise().sum().transpose();
        bk.grad.col(0).noalias() += dk.colwise().sum().transpose();
        bv.grad.col(0).noalias() += dv.colwise().sum().transpose();

        Mat<T> dx = dq * wq.value.transpose();
        dx.noalias() += dk * wk.value.transpose();
        dx.noalias() += dv * wv.value.transpose();
        return dx;
    }
};

template <typename T>
struct FfnLayer {
    Param<T> w1, b1; // d x d_ff, d_ff x 1
    Param<T> w2, b2; // d_ff x d, d x 1

    struct Cache {
        Mat<T> x, h; // h after ReLU
    };

    Mat<T> forward(const Mat<T>& x, Cache& c) const {
        if (x.cols() != w1.value.rows()) throw DimensionError("ffn input feature size mismatch");
        c.x = x;
        c.h = ((x * w1.value).rowwise() + b1.value.col(0).transpose()).cwiseMax(T(0));
        return (c.h * w2.value).rowwise() + b2.value.col(0).transpose();
    }

    Mat<T> backward(const Mat<T>& dy, const Cache& c) {
        w2.grad.noalias() += c.h.transpose() * dy;
        b2.grad.col(0).noalias() += dy.colwise().sum().transpose();
        Mat<T> dh = dy * w2.value.transpose();
        dh = (c.h.array() > T(0)).select(dh, Mat<T>::Zero(dh.rows(), dh.cols()));
        w1.grad.noalias() += c.x.transpose() * dh;
        b1.grad.col(0).noalias() += dh.colwise().sum().transpose();
        return dh * w1.value.transpose();
    }
};

template <typename T>
struct LayerNormLayer {
    Param<T> gain, bias; // d x 1 each

    struct Cache {
        Mat<T> xhat;
        Vec<T> inv_std; // per row
    };

    Mat<T> forward(const Mat<T>& x, Cache& c) const {
        const Eigen::Index d = x.cols();
        c.xhat.resize(x.rows(), d);
        c.inv_std.resize(x.rows());
        Mat<T> y(x.rows(), d);
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const T mean = x.row(r).mean();
            const T var = (x.row(r).array() - mean).square().sum() / static_cast<T>(d);
            const T inv = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
            c.inv_std(r) = inv;
            c.xhat.row(r) = (x.row(r).array() - mean) * inv;
            y.row(r) = c.xhat.row(r).array() * gain.value.col(0).transpose().array() +
                       bias.value.col(0).transpose().array();
        }
        return y;
    }

    Mat<T> backward(const Mat<T>& dy, const Cache& c) {
        const Eigen::Index d = dy.cols();
        gain.grad.col(0).noalias() += (dy.array() * c.xhat.array()).colwise().sum().matrix().transpose();
        bias.grad.col(0).noalias() += dy.colwise().sum().transpose();

        Mat<T> dx(dy.rows(), d);
        for (Eigen::Index r = 0; r < dy.rows(); ++r) {
            // g = dL/dxhat for this row.
            Eigen::Array<T, 1, Eigen::Dynamic> g =
                dy.row(r).array() * gain.value.col(0).transpose().array();
            const T mean_g = g.mean();
            const T mean_gx = (g * c.xhat.row(r).array()).mean();
            dx.row(r) = ((g - mean_g - c.xhat.row(r).array() * mean_gx) * c.inv_std(r)).matrix();
        }
        return dx;
    }
};

template <typename T>
struct Block {
    AttentionLayer<T> att;
    LayerNormLayer<T> norm1;
    FfnLayer<T> ffn;
    LayerNormLayer<T> norm2;

    struct Cache {
        typename AttentionLayer<T>::Cache att;
        typename LayerNormLayer<T>::Cache norm1;
        typename FfnLayer<T>::Cache ffn;
        typename LayerNormLayer<T>::Cache norm2;
    };

    // Post-norm residual: y = LN(x + Sublayer(x)).
    Mat<T> forward(const Mat<T>& x, Cache& c) const {
        const Mat<T> a = norm1.forward(x + att.forward(x, c.att), c.norm1);
        return norm2.forward(a + ffn.forward(a, c.ffn), c.norm2);
    }

    Mat<T> backward(const Mat<T>& dy, const Cache& c) {
        Mat<T> da = norm2.backward(dy, c.norm2);
        da += ffn.backward(da, c.ffn);
        Mat<T> dx = norm1.backward(da, c.norm1);
        dx += att.backward(dx, c.att);
        return dx;
    }
};

template <typename T>
Vec<T> global_avg_pool(const Mat<T>& x) {
    if (x.rows() < 1) throw DimensionError("global average pooling needs at least one row");
    return x.colwise().mean().transpose();
}

// ---------------------------------------------------------------------------
// Full model: input (T x d) + position embedding -> n_blocks -> global
// average pooling -> dense -> softmax.
// ---------------------------------------------------------------------------

template <typename T>
struct Model {
    ModelConfig cfg;
    std::vector<Block<T>> blocks;
    Param<T> head_w; // d x K
    Param<T> head_b; // K x 1

    struct Cache {
        std::vector<typename Block<T>::Cache> blocks;
        Mat<T> last; // output of final block
        Vec<T> probs;
    };

    // Logits for one sample; any T >= 1.
    Vec<T> logits(const Mat<T>& x_in, Cache& c) const {
        if (x_in.cols() != cfg.d_model) throw DimensionError("model input feature size mismatch");
        Mat<T> x = x_in + pos_embedding<T>(static_cast<int>(x_in.rows()), cfg.d_model);
        c.blocks.resize(blocks.size());
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            x = blocks[b].forward(x, c.blocks[b]);
        }
        c.last = x;
        return head_w.value.transpose() * global_avg_pool<T>(x) + head_b.value.col(0);
    }

    Vec<T> forward(const Mat<T>& x_in, Cache& c) const {
        c.probs = softmax<T>(logits(x_in, c));
        return c.probs;
    }

    // dlogits -> parameter gradients (accumulated).
    void backward(const Vec<T>& dlogits, const Cache& c) {
        const Vec<T> pooled = global_avg_pool<T>(c.last);
        head_w.grad.noalias() += pooled * dlogits.transpose();
        head_b.grad.col(0) += dlogits;

        const Eigen::Index t_steps = c.last.rows();
        Mat<T> dx = ((head_w.value * dlogits) / static_cast<T>(t_steps))
                        .transpose()
                        .replicate(t_steps, 1);
        for (std::size_t b = blocks.size(); b-- > 0;) {
            dx = blocks[b].backward(dx, c.blocks[b]);
        }
    }

    template <typename F>
    void visit_params(F&& f) {
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            Block<T>& blk = blocks[b];
            for (Param<T>* p : {&blk.att.wq, &blk.att.bq, &blk.att.wk, &blk.att.bk,
                                &blk.att.wv, &blk.att.bv, &blk.att.wo, &blk.att.bo,
                                &blk.norm1.gain, &blk.norm1.bias,
                                &blk.ffn.w1, &blk.ffn.b1, &blk.ffn.w2, &blk.ffn.b2,
                                &blk.norm2.gain, &blk.norm2.bias}) {
                f(*p);
            }
        }
        f(head_w);
        f(head_b);
    }

    void zero_grads() {
        visit_params([](Param<T>& p) { p.grad.setZero(); });
    }

    std::size_t parameter_count() {
        std::size_t n = 0;
        visit_params([&n](Param<T>& p) { n += static_cast<std::size_t>(p.value.size()); });
        return n;
    }

    template <typename U>
    Model<U> cast() const {
        Model<U> out;
        out.cfg = cfg;
        out.blocks.resize(blocks.size());
        Model<T>& self = const_cast<Model<T>&>(*this);
        std::vector<Param<T>*> src;
        self.visit_params([&src](Param<T>& p) { src.push_back(&p); });
        std::vector<Param<U>*> dst;
        build_params(out);
        out.visit_params([&dst](Param<U>& p) { dst.push_back(&p); });
        for (std::size_t i = 0; i < src.size(); ++i) {
            dst[i]->value = src[i]->value.template cast<U>();
        }
        return out;
    }

    // Allocates all parameter/gradient tensors for m.cfg (values zero).
    template <typename U>
    static void build_params(Model<U>& m) {
        m.cfg.validate();
        const int d = m.cfg.d_model;
        const int dff = m.cfg.d_ff;
        const int k = m.cfg.n_classes;
        m.blocks.resize(static_cast<std::size_t>(m.cfg.n_blocks));
        for (int b = 0; b < m.cfg.n_blocks; ++b) {
            Block<U>& blk = m.blocks[static_cast<std::size_t>(b)];
            const std::string pre = "blocks." + std::to_string(b) + ".";
            blk.att.n_heads = m.cfg.n_heads;
            blk.att.wq.init(pre + "att.wq", d, d);
            blk.att.bq.init(pre + "att.bq", d, 1);
            blk.att.wk.init(pre + "att.wk", d, d);
            blk.att.bk.init(pre + "att.bk", d, 1);
            blk.att.wv.init(pre + "att.wv", d, d);
            blk.att.bv.init(pre + "att.bv", d, 1);
            blk.att.wo.init(pre + "att.wo", d, d);
            blk.att.bo.init(pre + "att.bo", d, 1);
            blk.norm1.gain.init(pre + "norm1.gain", d, 1);
            blk.norm1.bias.init(pre + "norm1.bias", d, 1);
            blk.ffn.w1.init(pre + "ffn.w1", d, dff);
            blk.ffn.b1.init(pre + "ffn.b1", dff, 1);
            blk.ffn.w2.init(pre + "ffn.w2", dff, d);
            blk.ffn.b2.init(pre + "ffn.b2", d, 1);
            blk.norm2.gain.init(pre + "norm2.gain", d, 1);
            blk.norm2.bias.init(pre + "norm2.bias", d, 1);
        }
        m.head_w.init("head.w", d, k);
        m.head_b.init("head.b", k, 1);
    }
};

// Glorot-uniform weights, zero biases, unit layer-norm gains.
template <typename T>
Model<T> build_model(const ModelConfig& cfg, std::uint64_t seed) {
    Model<T> m;
    m.cfg = cfg;
    Model<T>::build_params(m);
    Rng rng = Rng::seeded(seed);
    m.visit_params([&rng](Param<T>& p) {
        const bool is_weight = p.value.cols() > 1;
        if (is_weight) {
            const double limit =
                std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
            for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
                for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
                    p.value(i, j) = static_cast<T>(rng.uniform(-limit, limit));
                }
            }
        } else if (p.name.find("gain") != std::string::npos) {
            p.value.setOnes();
        } else {
            p.value.setZero();
        }
    });
    return m;
}

// One (input, label) pair.
template <typename T>
struct Sample {
    Mat<T> x;
    int label = 0;
};

// Mean cross-entropy over the batch; fills gradients when grads != nullptr.
template <typename T>
T batch_loss(Model<T>& m, const std::vector<Sample<T>>& batch, bool with_grads) {
    if (batch.empty()) throw InsufficientDataError("empty batch");
    if (with_grads) m.zero_grads();
    T loss = T(0);
    const T inv_n = T(1) / static_cast<T>(batch.size());
    typename Model<T>::Cache cache;
    for (const Sample<T>& s : batch) {
        const Vec<T> p = m.forward(s.x, cache);
        loss += cross_entropy<T>(p, s.label) * inv_n;
        if (with_grads) {
            Vec<T> dlogits = p;
            dlogits(s.label) -= T(1);
            m.backward(dlogits * inv_n, cache);
        }
    }
    return loss;
}

// ---------------------------------------------------------------------------
// RMSprop
// ---------------------------------------------------------------------------

template <typename T>
struct RmsPropState {
    std::vector<Mat<T>> v;

    static RmsPropState make(Model<T>& m) {
        RmsPropState s;
        m.visit_params([&s](Param<T>& p) { s.v.push_back(Mat<T>::Zero(p.value.rows(), p.value.cols())); });
        return s;
    }
};

// v <- rho v + (1 - rho) g^2; theta <- theta - lr g / (sqrt(v) + eps).
template <typename T>
void rmsprop_step(Model<T>& m, RmsPropState<T>& state, T lr, T rho = T(0.9),
                  T eps = T(1e-7)) {
    std::size_t i = 0;
    m.visit_params([&](Param<T>& p) {
        Mat<T>& v = state.v[i++];
        if (v.rows() != p.grad.rows() || v.cols() != p.grad.cols()) {
            throw DimensionError("rmsprop state shape mismatch");
        }
        v = rho * v + (T(1) - rho) * p.grad.cwiseProduct(p.grad);
        p.value.array() -= lr * p.grad.array() / (v.array().sqrt() + eps);
    });
}

// ---------------------------------------------------------------------------
// Gradient verification against central finite differences. Samples at least
// min_per_kind scalar parameters per layer kind (attention / ffn / norm /
// head). Returns the max relative error.
// ---------------------------------------------------------------------------

inline std::string param_kind(const std::string& name) {
    if (name.find(".att.") != std::string::npos) return "att";
    if (name.find(".ffn.") != std::string::npos) return "ffn";
    if (name.find("norm") != std::string::npos) return "norm";
    return "head";
}

inline double grad_check(Model<double>& m, const std::vector<Sample<double>>& batch,
                         double h = 1e-5, std::uint64_t seed = 0,
                         int min_per_kind = 200) {
    const double analytic_loss = batch_loss<double>(m, batch, true);
    (void)analytic_loss;

    std::vector<Param<double>*> params;
    m.visit_params([&params](Param<double>& p) { params.push_back(&p); });

    // Bucket scalar coordinates by layer kind.
    struct Coord {
        Param<double>* p;
        Eigen::Index i, j;
    };
    std::vector<std::string> kinds = {"att", "ffn", "norm", "head"};
    Rng rng = Rng::seeded(seed);
    double max_rel = 0.0;
    for (const std::string& kind : kinds) {
        std::vector<Coord> all;
        for (Param<double>* p : params) {
            if (param_kind(p->name) != kind) continue;
            for (Eigen::Index j = 0; j < p->value.cols(); ++j) {
                for (Eigen::Index i = 0; i < p->value.rows(); ++i) {
                    all.push_back({p, i, j});
                }
            }
        }
        if (all.empty()) continue;
        rng.shuffle(all);
        const std::size_t n_check = std::min<std::size_t>(all.size(),
                                                          static_cast<std::size_t>(min_per_kind));
        for (std::size_t c = 0; c < n_check; ++c) {
            const Coord& co = all[c];
            const double orig = co.p->value(co.i, co.j);
            const double analytic = co.p->grad(co.i, co.j);

            co.p->value(co.i, co.j) = orig + h;
            const double fp = batch_loss<double>(m, batch, false);
            co.p->value(co.i, co.j) = orig - h;
            const double fm = batch_loss<double>(m, batch, false);
            co.p->value(co.i, co.j) = orig;

            const double numeric = (fp - fm) / (2.0 * h);
            const double rel = std::abs(analytic - numeric) /
                               std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

} // namespace rffi::nn
