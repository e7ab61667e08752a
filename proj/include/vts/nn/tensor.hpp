#pragma once

#include <numeric>
#include <vector>

#include "vts/common.hpp"

namespace vts::nn {

// Dense NCHW tensor over float (training) or double (gradient checks).
// The gradient buffer is allocated only for trainable parameters.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;
    std::vector<T> grad;  // empty, or same length as data

    Tensor() = default;
    explicit Tensor(std::vector<int> s, bool with_grad = false)
        : shape(std::move(s)) {
        data.assign(numel(), T(0));
        if (with_grad) grad.assign(numel(), T(0));
    }

    std::size_t numel() const {
        std::size_t n = 1;
        for (int d : shape) n *= static_cast<std::size_t>(d);
        return n;
    }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

    void zero_grad() {
        std::fill(grad.begin(), grad.end(), T(0));
    }
    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    }
};

// ---------------------------------------------------------------------------
// Row-major GEMM kernels. Plain loops ordered so the inner loop is contiguous
// and auto-vectorizes; all accumulation orders are fixed, so results do not
// depend on threading decisions made by callers.
// ---------------------------------------------------------------------------

// C(MxN) += A(MxK) * B(KxN)
template <typename T>
void gemm(const T* a, const T* b, T* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<std::size_t>(i) * k;
        T* crow = c + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            T av = arow[p];
            if (av == T(0)) continue;
            const T* brow = b + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C(KxN) += A(MxK)^T * B(MxN)
template <typename T>
void gemm_at_b(const T* a, const T* b, T* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<std::size_t>(i) * k;
        const T* brow = b + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            T av = arow[p];
            if (av == T(0)) continue;
            T* crow = c + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C(MxK) += A(MxN) * B(KxN)^T
template <typename T>
void gemm_a_bt(const T* a, const T* b, T* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<std::size_t>(i) * n;
        T* crow = c + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const T* brow = b + static_cast<std::size_t>(p) * n;
            T acc = T(0);
            for (int j = 0; j < n; ++j) acc += arow[j] * brow[j];
            crow[p] += acc;
        }
    }
}

// ---------------------------------------------------------------------------
// im2col / col2im with stride, padding and dilation (single sample, CHW).
// col is (in_ch * k * k) x (oh * ow), row-major.
// ---------------------------------------------------------------------------

struct ConvGeom {
    int in_ch, h, w;
    int kernel, stride, pad, dilation;
    int oh, ow;

    ConvGeom(int c, int h_, int w_, int k, int s, int p, int d)
        : in_ch(c), h(h_), w(w_), kernel(k), stride(s), pad(p), dilation(d) {
        oh = (h + 2 * pad - dilation * (kernel - 1) - 1) / stride + 1;
        ow = (w + 2 * pad - dilation * (kernel - 1) - 1) / stride + 1;
        if (oh < 1 || ow < 1)
            throw ShapeMismatchError("conv2d: output would be empty");
    }
    std::size_t col_rows() const {
        return static_cast<std::size_t>(in_ch) * kernel * kernel;
    }
    std::size_t col_cols() const { return static_cast<std::size_t>(oh) * ow; }
};

template <typename T>
void im2col(const T* input, const ConvGeom& g, T* col) {
    const int k = g.kernel;
    for (int ic = 0; ic < g.in_ch; ++ic) {
        const T* chan = input + static_cast<std::size_t>(ic) * g.h * g.w;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                T* row = col + ((static_cast<std::size_t>(ic) * k + ky) * k + kx) *
                                   g.col_cols();
                for (int oy = 0; oy < g.oh; ++oy) {
                    int iy = oy * g.stride - g.pad + ky * g.dilation;
                    T* out = row + static_cast<std::size_t>(oy) * g.ow;
                    if (iy < 0 || iy >= g.h) {
                        for (int ox = 0; ox < g.ow; ++ox) out[ox] = T(0);
                        continue;
                    }
                    const T* in_row = chan + static_cast<std::size_t>(iy) * g.w;
                    for (int ox = 0; ox < g.ow; ++ox) {
                        int ix = ox * g.stride - g.pad + kx * g.dilation;
                        out[ox] = (ix >= 0 && ix < g.w) ? in_row[ix] : T(0);
                    }
                }
            }
        }
    }
}

// Gather form: each input cell sums its incident col entries, so parallel
// callers can partition by input index without races.
template <typename T>
void col2im(const T* col, const ConvGeom& g, T* input) {
    const int k = g.kernel;
    for (int ic = 0; ic < g.in_ch; ++ic) {
        T* chan = input + static_cast<std::size_t>(ic) * g.h * g.w;
        for (int iy = 0; iy < g.h; ++iy) {
            for (int ix = 0; ix < g.w; ++ix) {
                T acc = T(0);
                for (int ky = 0; ky < k; ++ky) {
                    int ty = iy + g.pad - ky * g.dilation;
                    if (ty < 0 || ty % g.stride != 0) continue;
                    int oy = ty / g.stride;
                    if (oy >= g.oh) continue;
                    for (int kx = 0; kx < k; ++kx) {
                        int tx = ix + g.pad - kx * g.dilation;
                        if (tx < 0 || tx % g.stride != 0) continue;
                        int ox = tx / g.stride;
                        if (ox >= g.ow) continue;
                        acc += col[((static_cast<std::size_t>(ic) * k + ky) * k +
                                    kx) *
                                       g.col_cols() +
                                   static_cast<std::size_t>(oy) * g.ow + ox];
                    }
                }
                chan[static_cast<std::size_t>(iy) * g.w + ix] = acc;
            }
        }
    }
}

}  // namespace vts::nn
