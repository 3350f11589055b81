#pragma once

// Direct 3-D convolution kernels shared by conv3d, conv3d_transpose and their
// depthwise variants.
//
// Every kernel relates a "small" grid (conv output / transposed-conv input) to a
// "big" grid (conv input / transposed-conv output): small position o touches big
// position o*stride - pad + tap along each axis. Weights are laid out
// [small_channels][big_channels / groups][k][k][k], which is the conv3d layout
// [Cout][Cin/g] and the conv3d_transpose layout [Cin][Cout/g].
//
// Each parallel task owns a disjoint slice of its output and walks its inputs in a
// fixed order, so results do not depend on the thread count.

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

namespace vxae::detail {

struct TapGeometry {
  std::int64_t batch = 1;
  std::int64_t small_channels = 1;
  std::int64_t big_channels = 1;
  std::int64_t groups = 1;
  std::array<std::int64_t, 3> small{};  // D, H, W
  std::array<std::int64_t, 3> big{};
  std::int64_t kernel = 1;
  std::int64_t stride = 1;
  std::int64_t pad = 0;

  std::int64_t small_volume() const { return small[0] * small[1] * small[2]; }
  std::int64_t big_volume() const { return big[0] * big[1] * big[2]; }
  std::int64_t small_per_group() const { return small_channels / groups; }
  std::int64_t big_per_group() const { return big_channels / groups; }
  std::int64_t taps() const { return kernel * kernel * kernel; }
};

// Range [lo, hi) of small indices o whose big index o*stride - pad + tap is in bounds.
struct TapRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline std::vector<TapRange> tap_ranges(std::int64_t small_extent, std::int64_t big_extent, std::int64_t kernel,
                                        std::int64_t stride, std::int64_t pad) {
  std::vector<TapRange> ranges(static_cast<std::size_t>(kernel));
  for (std::int64_t t = 0; t < kernel; ++t) {
    // 0 <= o*stride - pad + t <= big_extent - 1
    std::int64_t lo = -floor_div(-(pad - t), stride);  // ceil((pad - t) / stride)
    std::int64_t hi = floor_div(big_extent - 1 + pad - t, stride) + 1;
    lo = std::max<std::int64_t>(lo, 0);
    hi = std::min<std::int64_t>(hi, small_extent);
    ranges[static_cast<std::size_t>(t)] = {lo, std::max(lo, hi)};
  }
  return ranges;
}

// small_out[n, cs] += sum over group channels and taps of w * big[n, cb, o*s - p + tap]
template <typename T>
void tap_gather(const TapGeometry& g, const T* big, const T* weight, T* small_out) {
  const auto rd = tap_ranges(g.small[0], g.big[0], g.kernel, g.stride, g.pad);
  const auto rh = tap_ranges(g.small[1], g.big[1], g.kernel, g.stride, g.pad);
  const auto rw = tap_ranges(g.small[2], g.big[2], g.kernel, g.stride, g.pad);
  const std::int64_t k = g.kernel, s = g.stride, p = g.pad;
  const std::int64_t sh = g.small[1], sw = g.small[2];
  const std::int64_t bh = g.big[1], bw = g.big[2];
  const std::int64_t cs_per = g.small_per_group(), cb_per = g.big_per_group();
  const std::int64_t tasks = g.batch * g.small_channels;

#pragma omp parallel for schedule(static)
  for (std::int64_t task = 0; task < tasks; ++task) {
    const std::int64_t n = task / g.small_channels;
    const std::int64_t cs = task % g.small_channels;
    const std::int64_t group = cs / cs_per;
    T* out = small_out + task * g.small_volume();
    for (std::int64_t od = 0; od < g.small[0]; ++od) {
      for (std::int64_t cbl = 0; cbl < cb_per; ++cbl) {
        const std::int64_t cb = group * cb_per + cbl;
        const T* in = big + (n * g.big_channels + cb) * g.big_volume();
        const T* wk = weight + (cs * cb_per + cbl) * g.taps();
        for (std::int64_t kd = 0; kd < k; ++kd) {
          if (od < rd[kd].lo || od >= rd[kd].hi) continue;
          const std::int64_t id = od * s - p + kd;
          for (std::int64_t kh = 0; kh < k; ++kh) {
            for (std::int64_t oh = rh[kh].lo; oh < rh[kh].hi; ++oh) {
              const std::int64_t ih = oh * s - p + kh;
              T* orow = out + (od * sh + oh) * sw;
              const T* irow = in + (id * bh + ih) * bw;
              for (std::int64_t kw = 0; kw < k; ++kw) {
                const T wv = wk[(kd * k + kh) * k + kw];
                const std::int64_t lo = rw[kw].lo, hi = rw[kw].hi;
                if (s == 1) {
                  const T* src = irow + (kw - p);
                  for (std::int64_t ow = lo; ow < hi; ++ow) orow[ow] += wv * src[ow];
                } else {
                  for (std::int64_t ow = lo; ow < hi; ++ow) orow[ow] += wv * irow[ow * s - p + kw];
                }
              }
            }
          }
        }
      }
    }
  }
}

// big_out[n, cb, o*s - p + tap] += sum over group channels and taps of w * small[n, cs, o]
template <typename T>
void tap_scatter(const TapGeometry& g, const T* small, const T* weight, T* big_out) {
  const auto rd = tap_ranges(g.small[0], g.big[0], g.kernel, g.stride, g.pad);
  const auto rh = tap_ranges(g.small[1], g.big[1], g.kernel, g.stride, g.pad);
  const auto rw = tap_ranges(g.small[2], g.big[2], g.kernel, g.stride, g.pad);
  const std::int64_t k = g.kernel, s = g.stride, p = g.pad;
  const std::int64_t sh = g.small[1], sw = g.small[2];
  const std::int64_t bh = g.big[1], bw = g.big[2];
  const std::int64_t cs_per = g.small_per_group(), cb_per = g.big_per_group();
  const std::int64_t tasks = g.batch * g.big_channels;

#pragma omp parallel for schedule(static)
  for (std::int64_t task = 0; task < tasks; ++task) {
    const std::int64_t n = task / g.big_channels;
    const std::int64_t cb = task % g.big_channels;
    const std::int64_t group = cb / cb_per;
    const std::int64_t cbl = cb % cb_per;
    T* out = big_out + task * g.big_volume();
    for (std::int64_t od = 0; od < g.small[0]; ++od) {
      for (std::int64_t csl = 0; csl < cs_per; ++csl) {
        const std::int64_t cs = group * cs_per + csl;
        const T* in = small + (n * g.small_channels + cs) * g.small_volume();
        const T* wk = weight + (cs * cb_per + cbl) * g.taps();
        for (std::int64_t kd = 0; kd < k; ++kd) {
          if (od < rd[kd].lo || od >= rd[kd].hi) continue;
          const std::int64_t id = od * s - p + kd;
          for (std::int64_t kh = 0; kh < k; ++kh) {
            for (std::int64_t oh = rh[kh].lo; oh < rh[kh].hi; ++oh) {
              const std::int64_t ih = oh * s - p + kh;
              const T* irow = in + (od * sh + oh) * sw;
              T* orow = out + (id * bh + ih) * bw;
              for (std::int64_t kw = 0; kw < k; ++kw) {
                const T wv = wk[(kd * k + kh) * k + kw];
                const std::int64_t lo = rw[kw].lo, hi = rw[kw].hi;
                if (s == 1) {
                  T* dst = orow + (kw - p);
                  for (std::int64_t ow = lo; ow < hi; ++ow) dst[ow] += wv * irow[ow];
                } else {
                  for (std::int64_t ow = lo; ow < hi; ++ow) orow[ow * s - p + kw] += wv * irow[ow];
                }
              }
            }
          }
        }
      }
    }
  }
}

// weight_grad[cs, cbl, tap] += sum_n sum_o small[n, cs, o] * big[n, cb, o*s - p + tap]
template <typename T>
void tap_correlate(const TapGeometry& g, const T* small, const T* big, T* weight_grad) {
  const auto rd = tap_ranges(g.small[0], g.big[0], g.kernel, g.stride, g.pad);
  const auto rh = tap_ranges(g.small[1], g.big[1], g.kernel, g.stride, g.pad);
  const auto rw = tap_ranges(g.small[2], g.big[2], g.kernel, g.stride, g.pad);
  const std::int64_t k = g.kernel, s = g.stride, p = g.pad;
  const std::int64_t sh = g.small[1], sw = g.small[2];
  const std::int64_t bh = g.big[1], bw = g.big[2];
  const std::int64_t cs_per = g.small_per_group(), cb_per = g.big_per_group();
  const std::int64_t tasks = g.small_channels * cb_per;
  const std::int64_t taps = g.taps();

#pragma omp parallel for schedule(static)
  for (std::int64_t task = 0; task < tasks; ++task) {
    const std::int64_t cs = task / cb_per;
    const std::int64_t cbl = task % cb_per;
    const std::int64_t cb = (cs / cs_per) * cb_per + cbl;
    std::vector<double> acc(static_cast<std::size_t>(taps), 0.0);
    for (std::int64_t n = 0; n < g.batch; ++n) {
      const T* sm = small + (n * g.small_channels + cs) * g.small_volume();
      const T* bg = big + (n * g.big_channels + cb) * g.big_volume();
      for (std::int64_t od = 0; od < g.small[0]; ++od) {
        for (std::int64_t kd = 0; kd < k; ++kd) {
          if (od < rd[kd].lo || od >= rd[kd].hi) continue;
          const std::int64_t id = od * s - p + kd;
          for (std::int64_t kh = 0; kh < k; ++kh) {
            for (std::int64_t oh = rh[kh].lo; oh < rh[kh].hi; ++oh) {
              const std::int64_t ih = oh * s - p + kh;
              const T* srow = sm + (od * sh + oh) * sw;
              const T* brow = bg + (id * bh + ih) * bw;
              for (std::int64_t kw = 0; kw < k; ++kw) {
                const std::int64_t lo = rw[kw].lo, hi = rw[kw].hi;
                T dot = 0;
                if (s == 1) {
                  const T* src = brow + (kw - p);
#pragma omp simd reduction(+ : dot)
                  for (std::int64_t ow = lo; ow < hi; ++ow) dot += srow[ow] * src[ow];
                } else {
                  for (std::int64_t ow = lo; ow < hi; ++ow) dot += srow[ow] * brow[ow * s - p + kw];
                }
                acc[static_cast<std::size_t>((kd * k + kh) * k + kw)] += static_cast<double>(dot);
              }
            }
          }
        }
      }
    }
    T* dst = weight_grad + task * taps;
    for (std::int64_t t = 0; t < taps; ++t) dst[t] += static_cast<T>(acc[static_cast<std::size_t>(t)]);
  }
}

// im2col for groups == 1: col[(cb, tap), o] = big[n, cb, o*s - p + tap], zero outside.
template <typename T>
void tap_im2col(const TapGeometry& g, const T* big_sample, T* col) {
  const auto rd = tap_ranges(g.small[0], g.big[0], g.kernel, g.stride, g.pad);
  const auto rh = tap_ranges(g.small[1], g.big[1], g.kernel, g.stride, g.pad);
  const auto rw = tap_ranges(g.small[2], g.big[2], g.kernel, g.stride, g.pad);
  const std::int64_t k = g.kernel, s = g.stride, p = g.pad;
  const std::int64_t sh = g.small[1], sw = g.small[2];
  const std::int64_t bh = g.big[1], bw = g.big[2];
  const std::int64_t vol = g.small_volume();
  for (std::int64_t cb = 0; cb < g.big_channels; ++cb) {
    const T* in = big_sample + cb * g.big_volume();
    for (std::int64_t kd = 0; kd < k; ++kd)
      for (std::int64_t kh = 0; kh < k; ++kh)
        for (std::int64_t kw = 0; kw < k; ++kw) {
          T* row = col + ((cb * k + kd) * k + kh) * k * vol + kw * vol;
          std::fill(row, row + vol, T(0));
          for (std::int64_t od = rd[kd].lo; od < rd[kd].hi; ++od) {
            const std::int64_t id = od * s - p + kd;
            for (std::int64_t oh = rh[kh].lo; oh < rh[kh].hi; ++oh) {
              const std::int64_t ih = oh * s - p + kh;
              const T* irow = in + (id * bh + ih) * bw;
              T* dst = row + (od * sh + oh) * sw;
              for (std::int64_t ow = rw[kw].lo; ow < rw[kw].hi; ++ow) dst[ow] = irow[ow * s - p + kw];
            }
          }
        }
  }
}

// Inverse scatter of tap_im2col: big[n, cb, o*s - p + tap] += col[(cb, tap), o].
template <typename T>
void tap_col2im(const TapGeometry& g, const T* col, T* big_sample) {
  const auto rd = tap_ranges(g.small[0], g.big[0], g.kernel, g.stride, g.pad);
  const auto rh = tap_ranges(g.small[1], g.big[1], g.kernel, g.stride, g.pad);
  const auto rw = tap_ranges(g.small[2], g.big[2], g.kernel, g.stride, g.pad);
  const std::int64_t k = g.kernel, s = g.stride, p = g.pad;
  const std::int64_t sh = g.small[1], sw = g.small[2];
  const std::int64_t bh = g.big[1], bw = g.big[2];
  const std::int64_t vol = g.small_volume();
  for (std::int64_t cb = 0; cb < g.big_channels; ++cb) {
    T* out = big_sample + cb * g.big_volume();
    for (std::int64_t kd = 0; kd < k; ++kd)
      for (std::int64_t kh = 0; kh < k; ++kh)
        for (std::int64_t kw = 0; kw < k; ++kw) {
          const T* row = col + ((cb * k + kd) * k + kh) * k * vol + kw * vol;
          for (std::int64_t od = rd[kd].lo; od < rd[kd].hi; ++od) {
            const std::int64_t id = od * s - p + kd;
            for (std::int64_t oh = rh[kh].lo; oh < rh[kh].hi; ++oh) {
              const std::int64_t ih = oh * s - p + kh;
              T* orow = out + (id * bh + ih) * bw;
              const T* src = row + (od * sh + oh) * sw;
              for (std::int64_t ow = rw[kw].lo; ow < rw[kw].hi; ++ow) orow[ow * s - p + kw] += src[ow];
            }
          }
        }
  }
}

}  // namespace vxae::detail
