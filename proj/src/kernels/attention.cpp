#include "canopysr/kernels.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace canopysr::kernels {

namespace {

constexpr int kMaxT = 64;

// Per-pixel forward shared by parallel and reference paths.
// feats layout (t, d, h, w); reads channel slice [h0, h0 + d_head) per head.
inline void attend_pixel(const double* feats, const double* wk, const double* wv,
                         const double* query, const unsigned char* valid,
                         double* out, double* attn, int t_len, int heads,
                         int d_head, int d_attn, std::size_t hw, std::size_t p) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_attn));
  const int d = heads * d_head;
  double keys[kMaxT * 64];
  double logits[kMaxT];
  double alpha[kMaxT];
  for (int hd = 0; hd < heads; ++hd) {
    const double* wkh = wk + static_cast<std::size_t>(hd) * d_head * d_attn;
    const double* wvh = wv + static_cast<std::size_t>(hd) * d_head * d_attn;
    const double* q = query + static_cast<std::size_t>(hd) * d_attn;
    const int h0 = hd * d_head;
    double maxlogit = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < t_len; ++t) {
      if (!valid[t])
        continue;
      const double* f = feats + (static_cast<std::size_t>(t) * d + h0) * hw + p;
      double* kt = keys + static_cast<std::size_t>(t) * d_attn;
      for (int a = 0; a < d_attn; ++a)
        kt[a] = 0.0;
      for (int c = 0; c < d_head; ++c) {
        const double fv = f[static_cast<std::size_t>(c) * hw];
        const double* wrow = wkh + static_cast<std::size_t>(c) * d_attn;
        for (int a = 0; a < d_attn; ++a)
          kt[a] += fv * wrow[a];
      }
      double l = 0.0;
      for (int a = 0; a < d_attn; ++a)
        l += kt[a] * q[a];
      logits[t] = l * scale;
      if (logits[t] > maxlogit)
        maxlogit = logits[t];
    }
    double denom = 0.0;
    for (int t = 0; t < t_len; ++t) {
      if (valid[t]) {
        alpha[t] = std::exp(logits[t] - maxlogit);
        denom += alpha[t];
      } else {
        alpha[t] = 0.0;
      }
    }
    for (int t = 0; t < t_len; ++t) {
      alpha[t] = valid[t] ? alpha[t] / denom : 0.0;
      attn[(static_cast<std::size_t>(hd) * t_len + t) * hw + p] = alpha[t];
    }
    double acc[64];
    for (int a = 0; a < d_attn; ++a)
      acc[a] = 0.0;
    for (int t = 0; t < t_len; ++t) {
      if (!valid[t])
        continue;
      const double* f = feats + (static_cast<std::size_t>(t) * d + h0) * hw + p;
      double vt[64];
      for (int a = 0; a < d_attn; ++a)
        vt[a] = 0.0;
      for (int c = 0; c < d_head; ++c) {
        const double fv = f[static_cast<std::size_t>(c) * hw];
        const double* wrow = wvh + static_cast<std::size_t>(c) * d_attn;
        for (int a = 0; a < d_attn; ++a)
          vt[a] += fv * wrow[a];
      }
      for (int a = 0; a < d_attn; ++a)
        acc[a] += alpha[t] * vt[a];
    }
    for (int a = 0; a < d_attn; ++a)
      out[(static_cast<std::size_t>(hd) * d_attn + a) * hw + p] = acc[a];
  }
}

} // namespace

void attention_forward(const double* feats, const double* wk, const double* wv,
                       const double* query, const unsigned char* valid,
                       double* out, double* attn, int t_len, int heads,
                       int d_head, int d_attn, int h, int w) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (long long p = 0; p < static_cast<long long>(hw); ++p)
    attend_pixel(feats, wk, wv, query, valid, out, attn, t_len, heads, d_head,
                 d_attn, hw, static_cast<std::size_t>(p));
}

void attention_backward(const double* feats, const double* wk, const double* wv,
                        const double* query, const unsigned char* valid,
                        const double* attn, const double* dout, double* dfeats,
                        double* dwk, double* dwv, double* dquery, int t_len,
                        int heads, int d_head, int d_attn, int h, int w) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  const std::size_t wsz = static_cast<std::size_t>(heads) * d_head * d_attn;
  const std::size_t qsz = static_cast<std::size_t>(heads) * d_attn;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_attn));
  const int d = heads * d_head;

  // Per-row partials for the parameter grads, reduced serially afterwards so
  // the result does not depend on the thread count.
  std::vector<double> pwk(static_cast<std::size_t>(h) * wsz, 0.0);
  std::vector<double> pwv(static_cast<std::size_t>(h) * wsz, 0.0);
  std::vector<double> pq(static_cast<std::size_t>(h) * qsz, 0.0);

#pragma omp parallel for schedule(static)
  for (int row = 0; row < h; ++row) {
    double* rwk = pwk.data() + static_cast<std::size_t>(row) * wsz;
    double* rwv = pwv.data() + static_cast<std::size_t>(row) * wsz;
    double* rq = pq.data() + static_cast<std::size_t>(row) * qsz;
    double keys[kMaxT * 64];
    double vals[kMaxT * 64];
    double dalpha[kMaxT];
    double dlogit[kMaxT];
    for (int col = 0; col < w; ++col) {
      const std::size_t p = static_cast<std::size_t>(row) * w + col;
      for (int hd = 0; hd < heads; ++hd) {
        const double* wkh = wk + static_cast<std::size_t>(hd) * d_head * d_attn;
        const double* wvh = wv + static_cast<std::size_t>(hd) * d_head * d_attn;
        const double* q = query + static_cast<std::size_t>(hd) * d_attn;
        const int h0 = hd * d_head;
        // Recompute K and V for this pixel.
        for (int t = 0; t < t_len; ++t) {
          if (!valid[t])
            continue;
          const double* f = feats + (static_cast<std::size_t>(t) * d + h0) * hw + p;
          double* kt = keys + static_cast<std::size_t>(t) * d_attn;
          double* vt = vals + static_cast<std::size_t>(t) * d_attn;
          for (int a = 0; a < d_attn; ++a) {
            kt[a] = 0.0;
            vt[a] = 0.0;
          }
          for (int c = 0; c < d_head; ++c) {
            const double fv = f[static_cast<std::size_t>(c) * hw];
            const double* wkrow = wkh + static_cast<std::size_t>(c) * d_attn;
            const double* wvrow = wvh + static_cast<std::size_t>(c) * d_attn;
            for (int a = 0; a < d_attn; ++a) {
              kt[a] += fv * wkrow[a];
              vt[a] += fv * wvrow[a];
            }
          }
        }
        const double* dov = dout + static_cast<std::size_t>(hd) * d_attn * hw;
        // d(alpha), dV, softmax backward.
        double dots = 0.0;
        for (int t = 0; t < t_len; ++t) {
          if (!valid[t]) {
            dalpha[t] = 0.0;
            continue;
          }
          const double* vt = vals + static_cast<std::size_t>(t) * d_attn;
          double s = 0.0;
          for (int a = 0; a < d_attn; ++a)
            s += dov[static_cast<std::size_t>(a) * hw + p] * vt[a];
          dalpha[t] = s;
          dots += attn[(static_cast<std::size_t>(hd) * t_len + t) * hw + p] * s;
        }
        for (int t = 0; t < t_len; ++t) {
          const double al = attn[(static_cast<std::size_t>(hd) * t_len + t) * hw + p];
          dlogit[t] = valid[t] ? al * (dalpha[t] - dots) : 0.0;
        }
        for (int t = 0; t < t_len; ++t) {
          if (!valid[t]) {
            // Padded steps receive no gradient; zero their feature slice.
            double* df = dfeats + (static_cast<std::size_t>(t) * d + h0) * hw + p;
            for (int c = 0; c < d_head; ++c)
              df[static_cast<std::size_t>(c) * hw] = 0.0;
            continue;
          }
          const double al = attn[(static_cast<std::size_t>(hd) * t_len + t) * hw + p];
          const double* kt = keys + static_cast<std::size_t>(t) * d_attn;
          const double* f = feats + (static_cast<std::size_t>(t) * d + h0) * hw + p;
          double dk[64], dv[64];
          for (int a = 0; a < d_attn; ++a) {
            dk[a] = dlogit[t] * q[a] * scale;
            dv[a] = al * dov[static_cast<std::size_t>(a) * hw + p];
            rq[static_cast<std::size_t>(hd) * d_attn + a] += dlogit[t] * kt[a] * scale;
          }
          double* df = dfeats + (static_cast<std::size_t>(t) * d + h0) * hw + p;
          for (int c = 0; c < d_head; ++c) {
            const double fv = f[static_cast<std::size_t>(c) * hw];
            const double* wkrow = wkh + static_cast<std::size_t>(c) * d_attn;
            const double* wvrow = wvh + static_cast<std::size_t>(c) * d_attn;
            double* rwkrow = rwk + (static_cast<std::size_t>(hd) * d_head + c) * d_attn;
            double* rwvrow = rwv + (static_cast<std::size_t>(hd) * d_head + c) * d_attn;
            double acc = 0.0;
            for (int a = 0; a < d_attn; ++a) {
              acc += wkrow[a] * dk[a] + wvrow[a] * dv[a];
              rwkrow[a] += fv * dk[a];
              rwvrow[a] += fv * dv[a];
            }
            df[static_cast<std::size_t>(c) * hw] = acc;
          }
        }
      }
    }
  }
  for (int row = 0; row < h; ++row) {
    const double* rwk = pwk.data() + static_cast<std::size_t>(row) * wsz;
    const double* rwv = pwv.data() + static_cast<std::size_t>(row) * wsz;
    const double* rq = pq.data() + static_cast<std::size_t>(row) * qsz;
    for (std::size_t i = 0; i < wsz; ++i) {
      dwk[i] += rwk[i];
      dwv[i] += rwv[i];
    }
    for (std::size_t i = 0; i < qsz; ++i)
      dquery[i] += rq[i];
  }
}

namespace ref {

void attention_forward(const double* feats, const double* wk, const double* wv,
                       const double* query, const unsigned char* valid,
                       double* out, double* attn, int t_len, int heads,
                       int d_head, int d_attn, int h, int w) {
  const std::size_t hw = static_cast<std::size_t>(h) * w;
  for (std::size_t p = 0; p < hw; ++p)
    attend_pixel(feats, wk, wv, query, valid, out, attn, t_len, heads, d_head,
                 d_attn, hw, p);
}

} // namespace ref

} // namespace canopysr::kernels
