// Low-level compute kernels. The canopysr::kernels functions are the
// OpenMP-parallel production path; canopysr::kernels::ref holds plain serial
// implementations kept as references for tests and benchmarks.
//
// Every parallel kernel gives each output element (or output row) to exactly
// one thread and accumulates contributions in the same order as the serial
// reference, so parallel and serial results are bit-identical.
#pragma once

#include <cstddef>

namespace canopysr::kernels {

// 2-D convolution, stride 1, odd kernel size k, zero padding k/2 (shape
// preserving).
//   x: (n, cin, h, w)   weights: (cout, cin, k, k)   bias: (cout) or nullptr
//   y: (n, cout, h, w)
void conv2d_forward(const double* x, const double* weights, const double* bias,
                    double* y, int n, int cin, int h, int w, int cout, int k);

// dx: (n, cin, h, w), accumulated from scratch (overwritten).
void conv2d_backward_input(const double* dy, const double* weights, double* dx,
                           int n, int cin, int h, int w, int cout, int k);

// dweights/dbias are accumulated with += (caller zeroes at step boundaries).
void conv2d_backward_params(const double* x, const double* dy, double* dweights,
                            double* dbias, int n, int cin, int h, int w,
                            int cout, int k);

// Rearranges (c*r^2, h, w) into (c, r*h, r*w). Channel c*r*r + i*r + j maps to
// output channel c at spatial offset (i, j) inside each r x r block.
void pixel_shuffle(const double* x, double* y, int c, int r, int h, int w);

// Exact inverse of pixel_shuffle: (c, r*h, r*w) -> (c*r^2, h, w).
void pixel_unshuffle(const double* y, double* x, int c, int r, int h, int w);

// Per-pixel layer normalization over the channel axis.
//   x, y: (c, h, w); gamma, beta: (c); xhat: (c, h, w) cache for backward.
void layernorm_forward(const double* x, const double* gamma, const double* beta,
                       double* y, double* xhat, double* inv_sigma, int c, int h,
                       int w, double eps);

void layernorm_backward(const double* dy, const double* gamma, const double* xhat,
                        const double* inv_sigma, double* dx, double* dgamma,
                        double* dbeta, int c, int h, int w);

// Temporal attention core over a feature series, applied independently per
// pixel. Inputs are the position-encoded features; the per-head query is
// spatially constant.
//   feats:  (t_len, d, h, w)          position-encoded features
//   wk, wv: (heads, d_head, d_attn)   per-head projections; d = heads * d_head
//   query:  (heads, d_attn)
//   valid:  (t_len) 1 = real observation, 0 = padding
// Outputs:
//   out:    (heads * d_attn, h, w)    concatenated head outputs
//   attn:   (heads, t_len, h, w)      softmax weights (exact 0 on padding)
// Padded timesteps receive weight exactly 0; weights over valid steps sum to 1.
void attention_forward(const double* feats, const double* wk, const double* wv,
                       const double* query, const unsigned char* valid,
                       double* out, double* attn, int t_len, int heads,
                       int d_head, int d_attn, int h, int w);

// Backward pass; recomputes keys/values per pixel from feats.
// dfeats is overwritten; dwk/dwv/dquery are accumulated with +=.
void attention_backward(const double* feats, const double* wk, const double* wv,
                        const double* query, const unsigned char* valid,
                        const double* attn, const double* dout, double* dfeats,
                        double* dwk, double* dwv, double* dquery, int t_len,
                        int heads, int d_head, int d_attn, int h, int w);

namespace ref {

void conv2d_forward(const double* x, const double* weights, const double* bias,
                    double* y, int n, int cin, int h, int w, int cout, int k);
void conv2d_backward_input(const double* dy, const double* weights, double* dx,
                           int n, int cin, int h, int w, int cout, int k);
void conv2d_backward_params(const double* x, const double* dy, double* dweights,
                            double* dbias, int n, int cin, int h, int w,
                            int cout, int k);
void pixel_shuffle(const double* x, double* y, int c, int r, int h, int w);
void attention_forward(const double* feats, const double* wk, const double* wv,
                       const double* query, const unsigned char* valid,
                       double* out, double* attn, int t_len, int heads,
                       int d_head, int d_attn, int h, int w);

} // namespace ref

} // namespace canopysr::kernels
