#pragma once

#include <cmath>
#include <memory>
#include <string>

#include "vts/nn/tensor.hpp"

namespace vts::nn {

template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& x, bool train) = 0;
    virtual Tensor<T> backward(const Tensor<T>& dy) = 0;
    virtual std::vector<Tensor<T>*> params() { return {}; }
    // persistent non-trainable state (batch-norm running stats)
    virtual std::vector<std::vector<T>*> buffers() { return {}; }
    virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Conv2d: dilated cross-correlation via im2col + GEMM. Batch samples are
// independent, so forward/backward parallelize over the batch with per-sample
// scratch and an ordered reduction for the weight gradient.
// ---------------------------------------------------------------------------

template <typename T>
class Conv2d : public Layer<T> {
public:
    Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, int dilation,
           bool bias, int jobs = 0)
        : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride),
          pad_(pad), dilation_(dilation), has_bias_(bias), jobs_(jobs),
          weight_({out_ch, in_ch, kernel, kernel}, true),
          bias_({out_ch}, true) {
        if (dilation < 1 || stride < 1 || kernel < 1)
            throw InvalidConfigError("Conv2d: bad geometry");
    }

    Tensor<T> forward(const Tensor<T>& x, bool) override {
        if (x.dim(1) != in_ch_)
            throw ShapeMismatchError("Conv2d: channel mismatch");
        input_ = x;
        ConvGeom g(in_ch_, x.dim(2), x.dim(3), kernel_, stride_, pad_, dilation_);
        const int n = x.dim(0);
        Tensor<T> out({n, out_ch_, g.oh, g.ow});

        const std::size_t in_stride = x.numel() / n;
        const std::size_t out_stride = out.numel() / n;
        parallel_for(static_cast<std::size_t>(n), jobs_, [&](std::size_t s) {
            std::vector<T> col(g.col_rows() * g.col_cols());
            im2col(x.data.data() + s * in_stride, g, col.data());
            T* dst = out.data.data() + s * out_stride;
            gemm(weight_.data.data(), col.data(), dst, out_ch_,
                 static_cast<int>(g.col_rows()), static_cast<int>(g.col_cols()));
            if (has_bias_) {
                for (int oc = 0; oc < out_ch_; ++oc) {
                    T b = bias_.data[oc];
                    T* row = dst + static_cast<std::size_t>(oc) * g.col_cols();
                    for (std::size_t j = 0; j < g.col_cols(); ++j) row[j] += b;
                }
            }
        });
        return out;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        const Tensor<T>& x = input_;
        ConvGeom g(in_ch_, x.dim(2), x.dim(3), kernel_, stride_, pad_, dilation_);
        const int n = x.dim(0);
        Tensor<T> dx({n, in_ch_, x.dim(2), x.dim(3)});

        const std::size_t in_stride = x.numel() / n;
        const std::size_t out_stride = dy.numel() / n;
        const std::size_t wsize = weight_.numel();

        // Per-sample weight-gradient buffers keep the final reduction in a
        // fixed sample order regardless of the job count.
        std::vector<std::vector<T>> dws(static_cast<std::size_t>(n));
        std::vector<std::vector<T>> dbs(static_cast<std::size_t>(n));

        parallel_for(static_cast<std::size_t>(n), jobs_, [&](std::size_t s) {
            std::vector<T> col(g.col_rows() * g.col_cols());
            im2col(x.data.data() + s * in_stride, g, col.data());
            const T* dout = dy.data.data() + s * out_stride;

            dws[s].assign(wsize, T(0));
            gemm_a_bt(dout, col.data(), dws[s].data(), out_ch_,
                      static_cast<int>(g.col_rows()),
                      static_cast<int>(g.col_cols()));

            if (has_bias_) {
                dbs[s].assign(static_cast<std::size_t>(out_ch_), T(0));
                for (int oc = 0; oc < out_ch_; ++oc) {
                    const T* row = dout + static_cast<std::size_t>(oc) * g.col_cols();
                    T acc = T(0);
                    for (std::size_t j = 0; j < g.col_cols(); ++j) acc += row[j];
                    dbs[s][oc] = acc;
                }
            }

            std::vector<T> dcol(g.col_rows() * g.col_cols(), T(0));
            gemm_at_b(weight_.data.data(), dout, dcol.data(), out_ch_,
                      static_cast<int>(g.col_rows()),
                      static_cast<int>(g.col_cols()));
            col2im(dcol.data(), g, dx.data.data() + s * in_stride);
        });

        for (int s = 0; s < n; ++s) {
            for (std::size_t i = 0; i < wsize; ++i)
                weight_.grad[i] += dws[static_cast<std::size_t>(s)][i];
            if (has_bias_)
                for (int oc = 0; oc < out_ch_; ++oc)
                    bias_.grad[oc] += dbs[static_cast<std::size_t>(s)][oc];
        }
        return dx;
    }

    std::vector<Tensor<T>*> params() override {
        if (has_bias_) return {&weight_, &bias_};
        return {&weight_};
    }
    std::string name() const override { return "conv2d"; }

    Tensor<T>& weight() { return weight_; }
    Tensor<T>& bias() { return bias_; }
    int fan_in() const { return in_ch_ * kernel_ * kernel_; }

private:
    int in_ch_, out_ch_, kernel_, stride_, pad_, dilation_;
    bool has_bias_;
    int jobs_;
    Tensor<T> weight_, bias_;
    Tensor<T> input_;
};

// ---------------------------------------------------------------------------
// BatchNorm2d: batch statistics in train mode (eps 1e-5, running momentum
// 0.1), running statistics in eval mode.
// ---------------------------------------------------------------------------

template <typename T>
class BatchNorm2d : public Layer<T> {
public:
    explicit BatchNorm2d(int channels)
        : channels_(channels), gamma_({channels}, true), beta_({channels}, true),
          running_mean_(static_cast<std::size_t>(channels), T(0)),
          running_var_(static_cast<std::size_t>(channels), T(1)) {
        std::fill(gamma_.data.begin(), gamma_.data.end(), T(1));
    }

    Tensor<T> forward(const Tensor<T>& x, bool train) override {
        if (x.dim(1) != channels_)
            throw ShapeMismatchError("BatchNorm2d: channel mismatch");
        const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
        if (train && n == 1)
            throw SingularBatchError("BatchNorm2d: train mode needs batch > 1");

        train_mode_ = train;
        input_ = x;
        Tensor<T> out(x.shape);
        const std::size_t plane = static_cast<std::size_t>(h) * w;
        const std::size_t count = static_cast<std::size_t>(n) * plane;

        mean_.assign(static_cast<std::size_t>(channels_), T(0));
        var_.assign(static_cast<std::size_t>(channels_), T(0));
        xhat_.assign(x.data.size(), T(0));

        for (int c = 0; c < channels_; ++c) {
            T mean, var;
            if (train) {
                T sum = T(0);
                for (int s = 0; s < n; ++s) {
                    const T* p = plane_ptr(x, s, c, plane);
                    for (std::size_t i = 0; i < plane; ++i) sum += p[i];
                }
                mean = sum / static_cast<T>(count);
                T sq = T(0);
                for (int s = 0; s < n; ++s) {
                    const T* p = plane_ptr(x, s, c, plane);
                    for (std::size_t i = 0; i < plane; ++i)
                        sq += (p[i] - mean) * (p[i] - mean);
                }
                var = sq / static_cast<T>(count);
                running_mean_[c] = (T(1) - momentum_) * running_mean_[c] +
                                   momentum_ * mean;
                running_var_[c] =
                    (T(1) - momentum_) * running_var_[c] + momentum_ * var;
            } else {
                mean = running_mean_[c];
                var = running_var_[c];
            }
            mean_[c] = mean;
            var_[c] = var;

            T inv_std = T(1) / std::sqrt(var + eps_);
            T g = gamma_.data[c], b = beta_.data[c];
            for (int s = 0; s < n; ++s) {
                const T* p = plane_ptr(x, s, c, plane);
                T* xh = xhat_.data() + plane_offset(s, c, plane);
                T* o = out.data.data() + plane_offset(s, c, plane);
                for (std::size_t i = 0; i < plane; ++i) {
                    xh[i] = (p[i] - mean) * inv_std;
                    o[i] = g * xh[i] + b;
                }
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        if (!train_mode_)
            throw InvalidConfigError("BatchNorm2d: backward after eval forward");
        const int n = dy.dim(0), h = dy.dim(2), w = dy.dim(3);
        const std::size_t plane = static_cast<std::size_t>(h) * w;
        const T count = static_cast<T>(static_cast<std::size_t>(n) * plane);

        Tensor<T> dx(dy.shape);
        for (int c = 0; c < channels_; ++c) {
            T inv_std = T(1) / std::sqrt(var_[c] + eps_);
            T g = gamma_.data[c];

            T sum_dy = T(0), sum_dy_xhat = T(0);
            for (int s = 0; s < n; ++s) {
                const T* d = dy.data.data() + plane_offset(s, c, plane);
                const T* xh = xhat_.data() + plane_offset(s, c, plane);
                for (std::size_t i = 0; i < plane; ++i) {
                    sum_dy += d[i];
                    sum_dy_xhat += d[i] * xh[i];
                }
            }
            gamma_.grad[c] += sum_dy_xhat;
            beta_.grad[c] += sum_dy;

            for (int s = 0; s < n; ++s) {
                const T* d = dy.data.data() + plane_offset(s, c, plane);
                const T* xh = xhat_.data() + plane_offset(s, c, plane);
                T* o = dx.data.data() + plane_offset(s, c, plane);
                for (std::size_t i = 0; i < plane; ++i)
                    o[i] = g * inv_std *
                           (d[i] - sum_dy / count - xh[i] * sum_dy_xhat / count);
            }
        }
        return dx;
    }

    std::vector<Tensor<T>*> params() override { return {&gamma_, &beta_}; }
    std::vector<std::vector<T>*> buffers() override {
        return {&running_mean_, &running_var_};
    }
    std::string name() const override { return "batch_norm"; }

    Tensor<T>& gamma() { return gamma_; }
    Tensor<T>& beta() { return beta_; }
    std::vector<T>& running_mean() { return running_mean_; }
    std::vector<T>& running_var() { return running_var_; }

private:
    std::size_t plane_offset(int s, int c, std::size_t plane) const {
        return (static_cast<std::size_t>(s) * channels_ + c) * plane;
    }
    const T* plane_ptr(const Tensor<T>& t, int s, int c, std::size_t plane) const {
        return t.data.data() + plane_offset(s, c, plane);
    }

    int channels_;
    Tensor<T> gamma_, beta_;
    std::vector<T> running_mean_, running_var_;
    std::vector<T> mean_, var_, xhat_;
    Tensor<T> input_;
    bool train_mode_ = false;
    static constexpr T eps_ = T(1e-5);
    static constexpr T momentum_ = T(0.1);
};

template <typename T>
class ReLU : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, bool) override {
        mask_.assign(x.data.size(), 0);
        Tensor<T> out(x.shape);
        for (std::size_t i = 0; i < x.data.size(); ++i) {
            bool pos = x.data[i] > T(0);
            mask_[i] = pos;
            out.data[i] = pos ? x.data[i] : T(0);
        }
        return out;
    }
    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx(dy.shape);
        for (std::size_t i = 0; i < dy.data.size(); ++i)
            dx.data[i] = mask_[i] ? dy.data[i] : T(0);
        return dx;
    }
    std::string name() const override { return "relu"; }

private:
    std::vector<char> mask_;
};

template <typename T>
class MaxPool2d : public Layer<T> {
public:
    explicit MaxPool2d(int kernel = 2, int stride = 2)
        : kernel_(kernel), stride_(stride) {}

    Tensor<T> forward(const Tensor<T>& x, bool) override {
        const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
        const int oh = (h - kernel_) / stride_ + 1;
        const int ow = (w - kernel_) / stride_ + 1;
        if (oh < 1 || ow < 1) throw ShapeMismatchError("MaxPool2d: too small");
        in_shape_ = x.shape;
        Tensor<T> out({n, c, oh, ow});
        argmax_.assign(out.numel(), 0);

        std::size_t o = 0;
        for (int s = 0; s < n; ++s)
            for (int ch = 0; ch < c; ++ch) {
                const T* plane = x.data.data() +
                                 (static_cast<std::size_t>(s) * c + ch) * h * w;
                for (int oy = 0; oy < oh; ++oy)
                    for (int ox = 0; ox < ow; ++ox, ++o) {
                        T best = plane[(oy * stride_) * w + ox * stride_];
                        std::size_t best_idx =
                            static_cast<std::size_t>(oy * stride_) * w +
                            ox * stride_;
                        for (int ky = 0; ky < kernel_; ++ky)
                            for (int kx = 0; kx < kernel_; ++kx) {
                                std::size_t idx =
                                    static_cast<std::size_t>(oy * stride_ + ky) *
                                        w +
                                    ox * stride_ + kx;
                                if (plane[idx] > best) {
                                    best = plane[idx];
                                    best_idx = idx;
                                }
                            }
                        out.data[o] = best;
                        argmax_[o] = (static_cast<std::size_t>(s) * c + ch) *
                                         static_cast<std::size_t>(h) * w +
                                     best_idx;
                    }
            }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx(in_shape_);
        for (std::size_t i = 0; i < dy.data.size(); ++i)
            dx.data[argmax_[i]] += dy.data[i];
        return dx;
    }
    std::string name() const override { return "max_pool"; }

private:
    int kernel_, stride_;
    std::vector<int> in_shape_;
    std::vector<std::size_t> argmax_;
};

template <typename T>
class GlobalAvgPool : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, bool) override {
        in_shape_ = x.shape;
        const int n = x.dim(0), c = x.dim(1);
        const std::size_t plane = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
        Tensor<T> out({n, c, 1, 1});
        for (int s = 0; s < n; ++s)
            for (int ch = 0; ch < c; ++ch) {
                const T* p =
                    x.data.data() + (static_cast<std::size_t>(s) * c + ch) * plane;
                T acc = T(0);
                for (std::size_t i = 0; i < plane; ++i) acc += p[i];
                out.data[static_cast<std::size_t>(s) * c + ch] =
                    acc / static_cast<T>(plane);
            }
        return out;
    }
    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx(in_shape_);
        const int n = in_shape_[0], c = in_shape_[1];
        const std::size_t plane =
            static_cast<std::size_t>(in_shape_[2]) * in_shape_[3];
        for (int s = 0; s < n; ++s)
            for (int ch = 0; ch < c; ++ch) {
                T g = dy.data[static_cast<std::size_t>(s) * c + ch] /
                      static_cast<T>(plane);
                T* p =
                    dx.data.data() + (static_cast<std::size_t>(s) * c + ch) * plane;
                for (std::size_t i = 0; i < plane; ++i) p[i] = g;
            }
        return dx;
    }
    std::string name() const override { return "global_avg_pool"; }

private:
    std::vector<int> in_shape_;
};

template <typename T>
class Flatten : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, bool) override {
        in_shape_ = x.shape;
        Tensor<T> out({x.dim(0), static_cast<int>(x.numel()) / x.dim(0), 1, 1});
        out.data = x.data;
        return out;
    }
    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dx(in_shape_);
        dx.data = dy.data;
        return dx;
    }
    std::string name() const override { return "flatten"; }

private:
    std::vector<int> in_shape_;
};

template <typename T>
class Linear : public Layer<T> {
public:
    Linear(int in_features, int out_features)
        : in_(in_features), out_(out_features),
          weight_({out_features, in_features}, true),
          bias_({out_features}, true) {}

    Tensor<T> forward(const Tensor<T>& x, bool) override {
        const int n = x.dim(0);
        if (static_cast<int>(x.numel()) / n != in_)
            throw ShapeMismatchError("Linear: feature mismatch");
        input_ = x;
        Tensor<T> out({n, out_, 1, 1});
        for (int s = 0; s < n; ++s) {
            const T* xin = x.data.data() + static_cast<std::size_t>(s) * in_;
            T* o = out.data.data() + static_cast<std::size_t>(s) * out_;
            for (int j = 0; j < out_; ++j) {
                const T* wrow = weight_.data.data() +
                                static_cast<std::size_t>(j) * in_;
                T acc = bias_.data[j];
                for (int i = 0; i < in_; ++i) acc += wrow[i] * xin[i];
                o[j] = acc;
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        const int n = dy.dim(0);
        Tensor<T> dx(input_.shape);
        for (int s = 0; s < n; ++s) {
            const T* d = dy.data.data() + static_cast<std::size_t>(s) * out_;
            const T* xin = input_.data.data() + static_cast<std::size_t>(s) * in_;
            T* dxs = dx.data.data() + static_cast<std::size_t>(s) * in_;
            for (int j = 0; j < out_; ++j) {
                T dj = d[j];
                bias_.grad[j] += dj;
                T* wg = weight_.grad.data() + static_cast<std::size_t>(j) * in_;
                const T* wrow =
                    weight_.data.data() + static_cast<std::size_t>(j) * in_;
                for (int i = 0; i < in_; ++i) {
                    wg[i] += dj * xin[i];
                    dxs[i] += dj * wrow[i];
                }
            }
        }
        return dx;
    }

    std::vector<Tensor<T>*> params() override { return {&weight_, &bias_}; }
    std::string name() const override { return "linear"; }

    Tensor<T>& weight() { return weight_; }
    Tensor<T>& bias() { return bias_; }
    int fan_in() const { return in_; }

private:
    int in_, out_;
    Tensor<T> weight_, bias_;
    Tensor<T> input_;
};

// ---------------------------------------------------------------------------
// Residual block: conv-bn-relu-conv-bn plus an identity or 1x1 projection
// shortcut, then relu. Dilation keeps spatial size via pad = dilation.
// ---------------------------------------------------------------------------

template <typename T>
class ResidualBlock : public Layer<T> {
public:
    ResidualBlock(int in_ch, int out_ch, int stride, int dilation, int jobs = 0)
        : conv1_(in_ch, out_ch, 3, stride, dilation, dilation, false, jobs),
          bn1_(out_ch),
          conv2_(out_ch, out_ch, 3, 1, dilation, dilation, false, jobs),
          bn2_(out_ch) {
        if (stride != 1 || in_ch != out_ch)
            projection_ = std::make_unique<Conv2d<T>>(in_ch, out_ch, 1, stride, 0,
                                                      1, false, jobs);
    }

    Tensor<T> forward(const Tensor<T>& x, bool train) override {
        Tensor<T> main = bn2_.forward(
            conv2_.forward(relu1_.forward(bn1_.forward(conv1_.forward(x, train),
                                                       train),
                                          train),
                           train),
            train);
        Tensor<T> shortcut = projection_ ? projection_->forward(x, train) : x;
        if (main.shape != shortcut.shape)
            throw ShapeMismatchError("ResidualBlock: branch shapes differ");
        Tensor<T> sum(main.shape);
        for (std::size_t i = 0; i < sum.data.size(); ++i)
            sum.data[i] = main.data[i] + shortcut.data[i];
        return relu_out_.forward(sum, train);
    }

    Tensor<T> backward(const Tensor<T>& dy) override {
        Tensor<T> dsum = relu_out_.backward(dy);
        Tensor<T> dmain = conv1_.backward(bn1_.backward(
            relu1_.backward(conv2_.backward(bn2_.backward(dsum)))));
        Tensor<T> dshort =
            projection_ ? projection_->backward(dsum) : dsum;
        Tensor<T> dx(dmain.shape);
        for (std::size_t i = 0; i < dx.data.size(); ++i)
            dx.data[i] = dmain.data[i] + dshort.data[i];
        return dx;
    }

    std::vector<Tensor<T>*> params() override {
        std::vector<Tensor<T>*> out;
        for (Layer<T>* l : sublayers())
            for (Tensor<T>* p : l->params()) out.push_back(p);
        return out;
    }
    std::vector<std::vector<T>*> buffers() override {
        std::vector<std::vector<T>*> out;
        for (Layer<T>* l : sublayers())
            for (auto* b : l->buffers()) out.push_back(b);
        return out;
    }
    std::string name() const override { return "residual_block"; }

    std::vector<Layer<T>*> sublayers() {
        std::vector<Layer<T>*> out = {&conv1_, &bn1_, &conv2_, &bn2_};
        if (projection_) out.push_back(projection_.get());
        return out;
    }

private:
    Conv2d<T> conv1_;
    BatchNorm2d<T> bn1_;
    ReLU<T> relu1_;
    Conv2d<T> conv2_;
    BatchNorm2d<T> bn2_;
    std::unique_ptr<Conv2d<T>> projection_;
    ReLU<T> relu_out_;
};

}  // namespace vts::nn
