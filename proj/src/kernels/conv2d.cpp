#include "canopysr/kernels.hpp"

namespace canopysr::kernels {

namespace {

// Row-accumulating inner body shared by the parallel and serial entry points,
// so both produce bit-identical sums (contributions ordered ic, ky, kx).
inline void conv_row(const double* x, const double* weights, const double* bias,
                     double* out_row, int nn, int oc, int oy, int cin, int h,
                     int w, int k) {
  const int pad = k / 2;
  const double b = bias ? bias[oc] : 0.0;
  for (int ox = 0; ox < w; ++ox)
    out_row[ox] = b;
  for (int ic = 0; ic < cin; ++ic) {
    const double* wbase = weights + ((static_cast<std::size_t>(oc) * cin + ic) * k) * k;
    const double* xplane = x + (static_cast<std::size_t>(nn) * cin + ic) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      const int iy = oy + ky - pad;
      if (iy < 0 || iy >= h)
        continue;
      const double* in_row = xplane + static_cast<std::size_t>(iy) * w;
      for (int kx = 0; kx < k; ++kx) {
        const double wgt = wbase[ky * k + kx];
        const int dx = kx - pad;
        const int x0 = dx < 0 ? -dx : 0;
        const int x1 = dx > 0 ? w - dx : w;
        for (int ox = x0; ox < x1; ++ox)
          out_row[ox] += wgt * in_row[ox + dx];
      }
    }
  }
}

inline void conv_bwd_input_row(const double* dy, const double* weights,
                               double* dx_row, int nn, int ic, int iy, int cin,
                               int h, int w, int cout, int k) {
  const int pad = k / 2;
  for (int ix = 0; ix < w; ++ix)
    dx_row[ix] = 0.0;
  for (int oc = 0; oc < cout; ++oc) {
    const double* wbase = weights + ((static_cast<std::size_t>(oc) * cin + ic) * k) * k;
    const double* dyplane = dy + (static_cast<std::size_t>(nn) * cout + oc) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      const int oy = iy - ky + pad;
      if (oy < 0 || oy >= h)
        continue;
      const double* dy_row = dyplane + static_cast<std::size_t>(oy) * w;
      for (int kx = 0; kx < k; ++kx) {
        const double wgt = wbase[ky * k + kx];
        const int dxo = pad - kx;
        const int x0 = dxo < 0 ? -dxo : 0;
        const int x1 = dxo > 0 ? w - dxo : w;
        for (int ix = x0; ix < x1; ++ix)
          dx_row[ix] += wgt * dy_row[ix + dxo];
      }
    }
  }
}

inline void conv_bwd_weight_pair(const double* x, const double* dy, double* dweights,
                                 int oc, int ic, int n, int cin, int h, int w,
                                 int cout, int k) {
  const int pad = k / 2;
  double* wbase = dweights + ((static_cast<std::size_t>(oc) * cin + ic) * k) * k;
  for (int ky = 0; ky < k; ++ky) {
    for (int kx = 0; kx < k; ++kx) {
      double acc = 0.0;
      const int dx = kx - pad;
      const int x0 = dx < 0 ? -dx : 0;
      const int x1 = dx > 0 ? w - dx : w;
      for (int nn = 0; nn < n; ++nn) {
        const double* xplane = x + (static_cast<std::size_t>(nn) * cin + ic) * h * w;
        const double* dyplane = dy + (static_cast<std::size_t>(nn) * cout + oc) * h * w;
        for (int oy = 0; oy < h; ++oy) {
          const int iy = oy + ky - pad;
          if (iy < 0 || iy >= h)
            continue;
          const double* in_row = xplane + static_cast<std::size_t>(iy) * w;
          const double* dy_row = dyplane + static_cast<std::size_t>(oy) * w;
          double s = 0.0;
          for (int ox = x0; ox < x1; ++ox)
            s += dy_row[ox] * in_row[ox + dx];
          acc += s;
        }
      }
      wbase[ky * k + kx] += acc;
    }
  }
}

} // namespace

void conv2d_forward(const double* x, const double* weights, const double* bias,
                    double* y, int n, int cin, int h, int w, int cout, int k) {
#pragma omp parallel for collapse(3) schedule(static)
  for (int nn = 0; nn < n; ++nn)
    for (int oc = 0; oc < cout; ++oc)
      for (int oy = 0; oy < h; ++oy) {
        double* out_row =
            y + ((static_cast<std::size_t>(nn) * cout + oc) * h + oy) * w;
        conv_row(x, weights, bias, out_row, nn, oc, oy, cin, h, w, k);
      }
}

void conv2d_backward_input(const double* dy, const double* weights, double* dx,
                           int n, int cin, int h, int w, int cout, int k) {
#pragma omp parallel for collapse(3) schedule(static)
  for (int nn = 0; nn < n; ++nn)
    for (int ic = 0; ic < cin; ++ic)
      for (int iy = 0; iy < h; ++iy) {
        double* dx_row =
            dx + ((static_cast<std::size_t>(nn) * cin + ic) * h + iy) * w;
        conv_bwd_input_row(dy, weights, dx_row, nn, ic, iy, cin, h, w, cout, k);
      }
}

void conv2d_backward_params(const double* x, const double* dy, double* dweights,
                            double* dbias, int n, int cin, int h, int w,
                            int cout, int k) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int oc = 0; oc < cout; ++oc)
    for (int ic = 0; ic < cin; ++ic)
      conv_bwd_weight_pair(x, dy, dweights, oc, ic, n, cin, h, w, cout, k);
  if (dbias) {
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < cout; ++oc) {
      double acc = 0.0;
      for (int nn = 0; nn < n; ++nn) {
        const double* dyplane = dy + (static_cast<std::size_t>(nn) * cout + oc) * h * w;
        for (int i = 0; i < h * w; ++i)
          acc += dyplane[i];
      }
      dbias[oc] += acc;
    }
  }
}

namespace ref {

void conv2d_forward(const double* x, const double* weights, const double* bias,
                    double* y, int n, int cin, int h, int w, int cout, int k) {
  const int pad = k / 2;
  for (int nn = 0; nn < n; ++nn)
    for (int oc = 0; oc < cout; ++oc)
      for (int oy = 0; oy < h; ++oy)
        for (int ox = 0; ox < w; ++ox) {
          double acc = bias ? bias[oc] : 0.0;
          for (int ic = 0; ic < cin; ++ic)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int iy = oy + ky - pad;
                const int ix = ox + kx - pad;
                if (iy < 0 || iy >= h || ix < 0 || ix >= w)
                  continue;
                acc += weights[((static_cast<std::size_t>(oc) * cin + ic) * k + ky) * k + kx] *
                       x[((static_cast<std::size_t>(nn) * cin + ic) * h + iy) * w + ix];
              }
          y[((static_cast<std::size_t>(nn) * cout + oc) * h + oy) * w + ox] = acc;
        }
}

void conv2d_backward_input(const double* dy, const double* weights, double* dx,
                           int n, int cin, int h, int w, int cout, int k) {
  const int pad = k / 2;
  for (int nn = 0; nn < n; ++nn)
    for (int ic = 0; ic < cin; ++ic)
      for (int iy = 0; iy < h; ++iy)
        for (int ix = 0; ix < w; ++ix) {
          double acc = 0.0;
          for (int oc = 0; oc < cout; ++oc)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int oy = iy - ky + pad;
                const int ox = ix - kx + pad;
                if (oy < 0 || oy >= h || ox < 0 || ox >= w)
                  continue;
                acc += weights[((static_cast<std::size_t>(oc) * cin + ic) * k + ky) * k + kx] *
                       dy[((static_cast<std::size_t>(nn) * cout + oc) * h + oy) * w + ox];
              }
          dx[((static_cast<std::size_t>(nn) * cin + ic) * h + iy) * w + ix] = acc;
        }
}

void conv2d_backward_params(const double* x, const double* dy, double* dweights,
                            double* dbias, int n, int cin, int h, int w,
                            int cout, int k) {
  for (int oc = 0; oc < cout; ++oc)
    for (int ic = 0; ic < cin; ++ic)
      conv_bwd_weight_pair(x, dy, dweights, oc, ic, n, cin, h, w, cout, k);
  if (dbias)
    for (int oc = 0; oc < cout; ++oc) {
      double acc = 0.0;
      for (int nn = 0; nn < n; ++nn) {
        const double* dyplane = dy + (static_cast<std::size_t>(nn) * cout + oc) * h * w;
        for (int i = 0; i < h * w; ++i)
          acc += dyplane[i];
      }
      dbias[oc] += acc;
    }
}

} // namespace ref

} // namespace canopysr::kernels
