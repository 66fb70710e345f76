#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "dih/error.hpp"
#include "dih/rng.hpp"
#include "dih/tensor.hpp"

namespace dih {

// ---------------------------------------------------------------------------
// small dense kernels
// ---------------------------------------------------------------------------

// C[M,N] += A[M,K] * B[K,N], row-major.
template <class T>
void gemm_acc(const T* A, const T* B, T* C, int M, int K, int N) {
    for (int i = 0; i < M; ++i) {
        const T* a = A + static_cast<size_t>(i) * K;
        T* c = C + static_cast<size_t>(i) * N;
        for (int k = 0; k < K; ++k) {
            const T av = a[k];
            if (av == T(0)) continue;
            const T* b = B + static_cast<size_t>(k) * N;
            for (int j = 0; j < N; ++j) c[j] += av * b[j];
        }
    }
}

// B[N,M] = A[M,N] transposed.
template <class T>
std::vector<T> transpose(const T* A, int M, int N) {
    std::vector<T> B(static_cast<size_t>(M) * N);
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < N; ++j) B[static_cast<size_t>(j) * M + i] = A[static_cast<size_t>(i) * N + j];
    }
    return B;
}

// Patch extraction shared by conv and transposed conv. The "grid" is the
// strided (smaller) side; the "image" is the dense side.
// col[(c*k+kh)*k+kw, gy*GW+gx] = image[c, gy*s - p + kh, gx*s - p + kw] (0 outside).
template <class T>
void im2col(const T* image, int C, int H, int W, int k, int s, int p, int GH, int GW, T* col) {
    const size_t grid = static_cast<size_t>(GH) * GW;
    for (int c = 0; c < C; ++c) {
        for (int kh = 0; kh < k; ++kh) {
            for (int kw = 0; kw < k; ++kw) {
                T* row = col + ((static_cast<size_t>(c) * k + kh) * k + kw) * grid;
                for (int gy = 0; gy < GH; ++gy) {
                    const int iy = gy * s - p + kh;
                    if (iy < 0 || iy >= H) {
                        for (int gx = 0; gx < GW; ++gx) row[static_cast<size_t>(gy) * GW + gx] = T(0);
                        continue;
                    }
                    const T* src = image + (static_cast<size_t>(c) * H + iy) * W;
                    for (int gx = 0; gx < GW; ++gx) {
                        const int ix = gx * s - p + kw;
                        row[static_cast<size_t>(gy) * GW + gx] = (ix >= 0 && ix < W) ? src[ix] : T(0);
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatter-accumulate columns back into the image.
template <class T>
void col2im_acc(const T* col, int C, int H, int W, int k, int s, int p, int GH, int GW, T* image) {
    const size_t grid = static_cast<size_t>(GH) * GW;
    for (int c = 0; c < C; ++c) {
        for (int kh = 0; kh < k; ++kh) {
            for (int kw = 0; kw < k; ++kw) {
                const T* row = col + ((static_cast<size_t>(c) * k + kh) * k + kw) * grid;
                for (int gy = 0; gy < GH; ++gy) {
                    const int iy = gy * s - p + kh;
                    if (iy < 0 || iy >= H) continue;
                    T* dst = image + (static_cast<size_t>(c) * H + iy) * W;
                    for (int gx = 0; gx < GW; ++gx) {
                        const int ix = gx * s - p + kw;
                        if (ix >= 0 && ix < W) dst[ix] += row[static_cast<size_t>(gy) * GW + gx];
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// ELU
// ---------------------------------------------------------------------------

template <class T>
inline T elu(T x) {
    return x >= T(0) ? x : std::expm1(x);
}

template <class T>
inline T elu_grad(T x) {
    return x >= T(0) ? T(1) : std::exp(x);
}

// ---------------------------------------------------------------------------
// convolution
// ---------------------------------------------------------------------------

// Cross-correlation, weights (out_c, in_c, k, k).
// Output spatial size: (in + 2*pad - k)/stride + 1.
template <class T>
struct ConvLayer {
    int in_c = 0, out_c = 0, k = 3, stride = 1, pad = 1;
    std::vector<T> W, b;
    std::vector<T> gW, gb;

    void init(int in_channels, int out_channels, int kernel, int s, int p, Rng& rng) {
        in_c = in_channels;
        out_c = out_channels;
        k = kernel;
        stride = s;
        pad = p;
        W.resize(static_cast<size_t>(out_c) * in_c * k * k);
        b.assign(out_c, T(0));
        gW.assign(W.size(), T(0));
        gb.assign(b.size(), T(0));
        const double scale = std::sqrt(2.0 / (static_cast<double>(in_c) * k * k));
        for (auto& w : W) w = static_cast<T>(rng.normal() * scale);
    }

    int out_size(int in) const { return (in + 2 * pad - k) / stride + 1; }

    Tensor<T> forward(const Tensor<T>& x) const {
        const int H = x.extent(1), Wd = x.extent(2);
        if (x.extent(0) != in_c) fail(Status::DimensionMismatch, "conv: channel mismatch");
        const int OH = out_size(H), OW = out_size(Wd);
        Tensor<T> y({out_c, OH, OW});
        std::vector<T> col(static_cast<size_t>(in_c) * k * k * OH * OW);
        im2col(x.data(), in_c, H, Wd, k, stride, pad, OH, OW, col.data());
        gemm_acc(W.data(), col.data(), y.data(), out_c, in_c * k * k, OH * OW);
        for (int c = 0; c < out_c; ++c) {
            T* row = y.data() + static_cast<size_t>(c) * OH * OW;
            for (int i = 0; i < OH * OW; ++i) row[i] += b[c];
        }
        return y;
    }

    // Accumulates parameter gradients; returns gradient w.r.t. the input.
    Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& gy) {
        const int H = x.extent(1), Wd = x.extent(2);
        const int OH = gy.extent(1), OW = gy.extent(2);
        const int patch = in_c * k * k;
        std::vector<T> col(static_cast<size_t>(patch) * OH * OW);
        im2col(x.data(), in_c, H, Wd, k, stride, pad, OH, OW, col.data());

        // gW[oc, patch] += gy[oc, :] * col[patch, :]^T
        const auto colT = transpose(col.data(), patch, OH * OW);
        gemm_acc(gy.data(), colT.data(), gW.data(), out_c, OH * OW, patch);
        for (int c = 0; c < out_c; ++c) {
            const T* row = gy.data() + static_cast<size_t>(c) * OH * OW;
            T acc = T(0);
            for (int i = 0; i < OH * OW; ++i) acc += row[i];
            gb[c] += acc;
        }

        // gx = col2im(W^T * gy)
        const auto Wt = transpose(W.data(), out_c, patch);
        std::vector<T> colg(static_cast<size_t>(patch) * OH * OW, T(0));
        gemm_acc(Wt.data(), gy.data(), colg.data(), patch, out_c, OH * OW);
        Tensor<T> gx({in_c, H, Wd});
        col2im_acc(colg.data(), in_c, H, Wd, k, stride, pad, OH, OW, gx.data());
        return gx;
    }
};

// ---------------------------------------------------------------------------
// transposed convolution
// ---------------------------------------------------------------------------

// Gradient of a convolution w.r.t. its input, as a forward op; exact adjoint
// of ConvLayer with the same geometry. Weights (in_c, out_c, k, k).
// Output spatial size: (in - 1)*stride - 2*pad + k.
template <class T>
struct DeconvLayer {
    int in_c = 0, out_c = 0, k = 4, stride = 2, pad = 1;
    std::vector<T> W, b;
    std::vector<T> gW, gb;

    void init(int in_channels, int out_channels, int kernel, int s, int p, Rng& rng) {
        in_c = in_channels;
        out_c = out_channels;
        k = kernel;
        stride = s;
        pad = p;
        W.resize(static_cast<size_t>(in_c) * out_c * k * k);
        b.assign(out_c, T(0));
        gW.assign(W.size(), T(0));
        gb.assign(b.size(), T(0));
        const double scale = std::sqrt(2.0 / (static_cast<double>(in_c) * k * k));
        for (auto& w : W) w = static_cast<T>(rng.normal() * scale);
    }

    int out_size(int in) const { return (in - 1) * stride - 2 * pad + k; }

    Tensor<T> forward(const Tensor<T>& x) const {
        const int H = x.extent(1), Wd = x.extent(2);
        if (x.extent(0) != in_c) fail(Status::DimensionMismatch, "deconv: channel mismatch");
        const int OH = out_size(H), OW = out_size(Wd);
        const int patch = out_c * k * k;
        // col[patch, H*W] = W^T[patch, in_c] * x[in_c, H*W], then scatter.
        const auto Wt = transpose(W.data(), in_c, patch);
        std::vector<T> col(static_cast<size_t>(patch) * H * Wd, T(0));
        gemm_acc(Wt.data(), x.data(), col.data(), patch, in_c, H * Wd);
        Tensor<T> y({out_c, OH, OW});
        col2im_acc(col.data(), out_c, OH, OW, k, stride, pad, H, Wd, y.data());
        for (int c = 0; c < out_c; ++c) {
            T* row = y.data() + static_cast<size_t>(c) * OH * OW;
            for (int i = 0; i < OH * OW; ++i) row[i] += b[c];
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& gy) {
        const int H = x.extent(1), Wd = x.extent(2);
        const int OH = gy.extent(1), OW = gy.extent(2);
        const int patch = out_c * k * k;
        std::vector<T> col(static_cast<size_t>(patch) * H * Wd);
        im2col(gy.data(), out_c, OH, OW, k, stride, pad, H, Wd, col.data());

        // gW[in_c, patch] += x[in_c, :] * col[patch, :]^T
        const auto colT = transpose(col.data(), patch, H * Wd);
        gemm_acc(x.data(), colT.data(), gW.data(), in_c, H * Wd, patch);
        for (int c = 0; c < out_c; ++c) {
            const T* row = gy.data() + static_cast<size_t>(c) * OH * OW;
            T acc = T(0);
            for (int i = 0; i < OH * OW; ++i) acc += row[i];
            gb[c] += acc;
        }

        // gx = W * col
        Tensor<T> gx({in_c, H, Wd});
        gemm_acc(W.data(), col.data(), gx.data(), in_c, patch, H * Wd);
        return gx;
    }
};

// ---------------------------------------------------------------------------
// fully connected
// ---------------------------------------------------------------------------

template <class T>
struct DenseLayer {
    int in_n = 0, out_n = 0;
    std::vector<T> W, b;
    std::vector<T> gW, gb;

    void init(int in, int out, Rng& rng) {
        in_n = in;
        out_n = out;
        W.resize(static_cast<size_t>(out_n) * in_n);
        b.assign(out_n, T(0));
        gW.assign(W.size(), T(0));
        gb.assign(b.size(), T(0));
        const double scale = std::sqrt(2.0 / static_cast<double>(in_n));
        for (auto& w : W) w = static_cast<T>(rng.normal() * scale);
    }

    std::vector<T> forward(std::span<const T> x) const {
        std::vector<T> y(out_n);
        for (int o = 0; o < out_n; ++o) {
            const T* row = W.data() + static_cast<size_t>(o) * in_n;
            T acc = b[o];
            for (int i = 0; i < in_n; ++i) acc += row[i] * x[i];
            y[o] = acc;
        }
        return y;
    }

    std::vector<T> backward(std::span<const T> x, std::span<const T> gy) {
        std::vector<T> gx(in_n, T(0));
        for (int o = 0; o < out_n; ++o) {
            const T g = gy[o];
            gb[o] += g;
            T* grow = gW.data() + static_cast<size_t>(o) * in_n;
            const T* row = W.data() + static_cast<size_t>(o) * in_n;
            for (int i = 0; i < in_n; ++i) {
                grow[i] += g * x[i];
                gx[i] += row[i] * g;
            }
        }
        return gx;
    }
};

// ---------------------------------------------------------------------------
// batch norm + scale + ELU
// ---------------------------------------------------------------------------

enum class RunMode { Train, Eval };

template <class T>
struct NormActCache {
    std::vector<T> xhat;     // standardized input
    std::vector<T> inv_std;  // per channel
    std::vector<T> act_in;   // pre-ELU values
};

// Per-channel standardization over the spatial extent (training mode uses
// the current statistics, eval mode the running ones), then the affine
// scaling gamma*x+beta, then ELU.
template <class T>
struct NormActLayer {
    static constexpr double kEps = 1e-5;
    static constexpr double kMomentum = 0.1;

    int channels = 0;
    std::vector<T> gamma, beta;
    std::vector<T> g_gamma, g_beta;
    std::vector<T> run_mean, run_var;

    void init(int c) {
        channels = c;
        gamma.assign(c, T(1));
        beta.assign(c, T(0));
        g_gamma.assign(c, T(0));
        g_beta.assign(c, T(0));
        run_mean.assign(c, T(0));
        run_var.assign(c, T(1));
    }

    Tensor<T> forward(const Tensor<T>& x, RunMode mode, NormActCache<T>* cache,
                      bool update_running = true) {
        const int C = x.extent(0);
        const int hw = x.extent(1) * x.extent(2);
        if (C != channels) fail(Status::DimensionMismatch, "norm_act: channel mismatch");
        if (hw == 0) fail(Status::InvalidArgument, "norm_act: zero-size channel");

        Tensor<T> y(x.shape);
        if (cache) {
            cache->xhat.resize(x.numel());
            cache->inv_std.resize(C);
            cache->act_in.resize(x.numel());
        }
        for (int c = 0; c < C; ++c) {
            const T* in = x.data() + static_cast<size_t>(c) * hw;
            T* out = y.data() + static_cast<size_t>(c) * hw;
            T mean, var;
            if (mode == RunMode::Train) {
                T sum = T(0);
                for (int i = 0; i < hw; ++i) sum += in[i];
                mean = sum / static_cast<T>(hw);
                T sq = T(0);
                for (int i = 0; i < hw; ++i) {
                    const T d = in[i] - mean;
                    sq += d * d;
                }
                var = sq / static_cast<T>(hw);
                if (update_running) {
                    run_mean[c] = static_cast<T>((1.0 - kMomentum) * run_mean[c] + kMomentum * mean);
                    run_var[c] = static_cast<T>((1.0 - kMomentum) * run_var[c] + kMomentum * var);
                }
            } else {
                mean = run_mean[c];
                var = run_var[c];
            }
            const T inv_std = static_cast<T>(1.0 / std::sqrt(static_cast<double>(var) + kEps));
            if (cache) cache->inv_std[c] = inv_std;
            for (int i = 0; i < hw; ++i) {
                const T xh = (in[i] - mean) * inv_std;
                const T a = gamma[c] * xh + beta[c];
                if (cache) {
                    cache->xhat[static_cast<size_t>(c) * hw + i] = xh;
                    cache->act_in[static_cast<size_t>(c) * hw + i] = a;
                }
                out[i] = elu(a);
            }
        }
        return y;
    }

    // Training-mode backward (gradients flow through the batch statistics).
    Tensor<T> backward(const Tensor<T>& gy, const NormActCache<T>& cache) {
        const int C = gy.extent(0);
        const int hw = gy.extent(1) * gy.extent(2);
        Tensor<T> gx(gy.shape);
        for (int c = 0; c < C; ++c) {
            const size_t off = static_cast<size_t>(c) * hw;
            const T* g_out = gy.data() + off;
            const T* xhat = cache.xhat.data() + off;
            const T* act_in = cache.act_in.data() + off;
            T* g_in = gx.data() + off;

            // through ELU, then the affine
            T sum_g = T(0), sum_gx = T(0);
            std::vector<T> g_affine(hw);
            for (int i = 0; i < hw; ++i) {
                const T g = g_out[i] * elu_grad(act_in[i]);
                g_affine[i] = g;
                sum_g += g;
                sum_gx += g * xhat[i];
            }
            g_beta[c] += sum_g;
            g_gamma[c] += sum_gx;

            const T inv_std = cache.inv_std[c];
            const T scale = gamma[c] * inv_std / static_cast<T>(hw);
            for (int i = 0; i < hw; ++i) {
                g_in[i] = scale * (static_cast<T>(hw) * g_affine[i] - sum_g - xhat[i] * sum_gx);
            }
        }
        return gx;
    }
};

} // namespace dih
