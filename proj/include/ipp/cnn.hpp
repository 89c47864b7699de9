#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipp/env.hpp"
#include "ipp/rng.hpp"

namespace ipp {

// Architecture: 4x80x80 -> conv 32@8x8/4 -> conv 64@4x4/2 -> conv 64@2x2/1
// -> fc 512 -> linear n_actions, softplus + floor for positivity.
// Valid convolutions, fractional output sizes floored: 80->19->8->7.

template <class T>
struct ConvLayer {
  int in_c, in_h, in_w, out_c, k, stride;
  int out_h, out_w;
  std::vector<T> w;  // [oc][ic][ky][kx]
  std::vector<T> b;  // [oc]

  ConvLayer(int ic, int ih, int iw, int oc, int kk, int s)
      : in_c(ic), in_h(ih), in_w(iw), out_c(oc), k(kk), stride(s) {
    out_h = (in_h - k) / stride + 1;
    out_w = (in_w - k) / stride + 1;
    w.assign(static_cast<size_t>(oc) * ic * k * k, T(0));
    b.assign(static_cast<size_t>(oc), T(0));
  }
  size_t out_size() const { return static_cast<size_t>(out_c) * out_h * out_w; }
  size_t in_size() const { return static_cast<size_t>(in_c) * in_h * in_w; }
};

template <class T>
struct DenseLayer {
  int in_n, out_n;
  std::vector<T> w;  // [out][in]
  std::vector<T> b;

  DenseLayer(int in, int out) : in_n(in), out_n(out) {
    w.assign(static_cast<size_t>(in) * out, T(0));
    b.assign(static_cast<size_t>(out), T(0));
  }
};

template <class T>
struct Cnn {
  static constexpr int kInC = FrameStack::kFrames;
  static constexpr int kIn = FrameStack::kSize;

  ConvLayer<T> conv1{kInC, kIn, kIn, 32, 8, 4};
  ConvLayer<T> conv2{32, 19, 19, 64, 4, 2};
  ConvLayer<T> conv3{64, 8, 8, 64, 2, 1};
  DenseLayer<T> fc1{64 * 7 * 7, 512};
  DenseLayer<T> out{512, kNumActions};
  T alpha_floor = T(0.01);

  Cnn() {
    // Shape chain must hold by construction.
    if (conv1.out_h != 19 || conv2.out_h != 8 || conv3.out_h != 7)
      throw std::logic_error("cnn: unexpected layer shapes");
  }

  struct NamedTensor {
    std::string name;
    std::vector<uint32_t> dims;
    std::vector<T>* data;
  };

  std::vector<NamedTensor> tensors() {
    auto u = [](int v) { return static_cast<uint32_t>(v); };
    return {
        {"conv1.w", {u(conv1.out_c), u(conv1.in_c), u(conv1.k), u(conv1.k)}, &conv1.w},
        {"conv1.b", {u(conv1.out_c)}, &conv1.b},
        {"conv2.w", {u(conv2.out_c), u(conv2.in_c), u(conv2.k), u(conv2.k)}, &conv2.w},
        {"conv2.b", {u(conv2.out_c)}, &conv2.b},
        {"conv3.w", {u(conv3.out_c), u(conv3.in_c), u(conv3.k), u(conv3.k)}, &conv3.w},
        {"conv3.b", {u(conv3.out_c)}, &conv3.b},
        {"fc1.w", {u(fc1.out_n), u(fc1.in_n)}, &fc1.w},
        {"fc1.b", {u(fc1.out_n)}, &fc1.b},
        {"out.w", {u(out.out_n), u(out.in_n)}, &out.w},
        {"out.b", {u(out.out_n)}, &out.b},
    };
  }

  void init_weights(uint64_t seed) {
    Rng rng(seed, 0x1f2e3d4c);
    auto fill = [&](std::vector<T>& w, int fan_in) {
      T bound = T(1) / std::sqrt(T(fan_in));
      for (T& v : w) v = static_cast<T>(rng.uniform_range(-double(bound), double(bound)));
    };
    fill(conv1.w, conv1.in_c * conv1.k * conv1.k);
    fill(conv2.w, conv2.in_c * conv2.k * conv2.k);
    fill(conv3.w, conv3.in_c * conv3.k * conv3.k);
    fill(fc1.w, fc1.in_n);
    fill(out.w, out.in_n);
    // biases stay zero
  }

  void zero() {
    for (auto& t : tensors())
      std::fill(t.data->begin(), t.data->end(), T(0));
  }

  template <class U>
  void copy_from(Cnn<U>& other) {
    auto dst = tensors();
    auto src = other.tensors();
    for (size_t i = 0; i < dst.size(); ++i) {
      for (size_t j = 0; j < dst[i].data->size(); ++j)
        (*dst[i].data)[j] = static_cast<T>((*src[i].data)[j]);
    }
    alpha_floor = static_cast<T>(other.alpha_floor);
  }
};

template <class T>
struct CnnActivations {
  std::vector<T> a1, a2, a3, af;  // post-relu
  std::vector<T> zo;              // linear output
  std::vector<T> alpha;           // softplus(zo) + floor
};

namespace detail {

template <class T>
void conv_forward(const ConvLayer<T>& L, const T* in, T* out, bool relu) {
  const int s = L.stride, k = L.k;
  for (int oc = 0; oc < L.out_c; ++oc) {
    for (int oy = 0; oy < L.out_h; ++oy) {
      T* orow = out + (static_cast<size_t>(oc) * L.out_h + oy) * L.out_w;
      for (int ox = 0; ox < L.out_w; ++ox) orow[ox] = L.b[static_cast<size_t>(oc)];
      for (int ic = 0; ic < L.in_c; ++ic) {
        for (int ky = 0; ky < k; ++ky) {
          const T* irow = in + (static_cast<size_t>(ic) * L.in_h + oy * s + ky) * L.in_w;
          const T* wrow =
              L.w.data() + ((static_cast<size_t>(oc) * L.in_c + ic) * k + ky) * k;
          for (int ox = 0; ox < L.out_w; ++ox) {
            const T* ip = irow + ox * s;
            T acc = T(0);
            for (int kx = 0; kx < k; ++kx) acc += ip[kx] * wrow[kx];
            orow[ox] += acc;
          }
        }
      }
      if (relu) {
        for (int ox = 0; ox < L.out_w; ++ox) orow[ox] = orow[ox] > T(0) ? orow[ox] : T(0);
      }
    }
  }
}

// dout is the gradient wrt the post-relu output; the relu mask is taken
// from `out` (post-relu values). dIn may be null for the first layer.
template <class T>
void conv_backward(const ConvLayer<T>& L, const T* in, const T* out, const T* dout,
                   ConvLayer<T>& grad, T* din) {
  const int s = L.stride, k = L.k;
  for (int oc = 0; oc < L.out_c; ++oc) {
    for (int oy = 0; oy < L.out_h; ++oy) {
      const size_t row = (static_cast<size_t>(oc) * L.out_h + oy) * L.out_w;
      for (int ox = 0; ox < L.out_w; ++ox) {
        T dz = dout[row + ox];
        if (out[row + ox] <= T(0)) continue;  // relu mask (inactive or zero grad)
        if (dz == T(0)) continue;
        grad.b[static_cast<size_t>(oc)] += dz;
        for (int ic = 0; ic < L.in_c; ++ic) {
          const size_t ibase = (static_cast<size_t>(ic) * L.in_h + oy * s) * L.in_w + ox * s;
          const size_t wbase = ((static_cast<size_t>(oc) * L.in_c + ic) * k) * k;
          for (int ky = 0; ky < k; ++ky) {
            const T* ip = in + ibase + static_cast<size_t>(ky) * L.in_w;
            T* wp = grad.w.data() + wbase + static_cast<size_t>(ky) * k;
            for (int kx = 0; kx < k; ++kx) wp[kx] += dz * ip[kx];
            if (din) {
              const T* wv = L.w.data() + wbase + static_cast<size_t>(ky) * k;
              T* dp = din + ibase + static_cast<size_t>(ky) * L.in_w;
              for (int kx = 0; kx < k; ++kx) dp[kx] += dz * wv[kx];
            }
          }
        }
      }
    }
  }
}

template <class T>
void dense_forward(const DenseLayer<T>& L, const T* in, T* out, bool relu) {
  for (int o = 0; o < L.out_n; ++o) {
    const T* wrow = L.w.data() + static_cast<size_t>(o) * L.in_n;
    T acc = L.b[static_cast<size_t>(o)];
    for (int i = 0; i < L.in_n; ++i) acc += wrow[i] * in[i];
    out[o] = relu ? (acc > T(0) ? acc : T(0)) : acc;
  }
}

template <class T>
void dense_backward(const DenseLayer<T>& L, const T* in, const T* out, const T* dout,
                    bool relu, DenseLayer<T>& grad, T* din) {
  if (din) {
    for (int i = 0; i < L.in_n; ++i) din[i] = T(0);
  }
  for (int o = 0; o < L.out_n; ++o) {
    T dz = dout[o];
    if (relu && out[o] <= T(0)) continue;
    if (dz == T(0)) continue;
    grad.b[static_cast<size_t>(o)] += dz;
    const T* wrow = L.w.data() + static_cast<size_t>(o) * L.in_n;
    T* grow = grad.w.data() + static_cast<size_t>(o) * L.in_n;
    for (int i = 0; i < L.in_n; ++i) {
      grow[i] += dz * in[i];
      if (din) din[i] += dz * wrow[i];
    }
  }
}

template <class T>
T softplus(T z) {
  // Stable for large |z|.
  if (z > T(30)) return z;
  if (z < T(-30)) return std::exp(z);
  return std::log1p(std::exp(z));
}

template <class T>
T sigmoid(T z) {
  if (z >= T(0)) {
    T e = std::exp(-z);
    return T(1) / (T(1) + e);
  }
  T e = std::exp(z);
  return e / (T(1) + e);
}

}  // namespace detail

// x must point at 4*80*80 values. Returns alpha in acts.alpha.
template <class T>
void cnn_forward(const Cnn<T>& net, const T* x, CnnActivations<T>& acts) {
  acts.a1.resize(net.conv1.out_size());
  acts.a2.resize(net.conv2.out_size());
  acts.a3.resize(net.conv3.out_size());
  acts.af.resize(static_cast<size_t>(net.fc1.out_n));
  acts.zo.resize(static_cast<size_t>(net.out.out_n));
  acts.alpha.resize(static_cast<size_t>(net.out.out_n));

  detail::conv_forward(net.conv1, x, acts.a1.data(), true);
  detail::conv_forward(net.conv2, acts.a1.data(), acts.a2.data(), true);
  detail::conv_forward(net.conv3, acts.a2.data(), acts.a3.data(), true);
  detail::dense_forward(net.fc1, acts.a3.data(), acts.af.data(), true);
  detail::dense_forward(net.out, acts.af.data(), acts.zo.data(), false);
  for (int i = 0; i < net.out.out_n; ++i)
    acts.alpha[static_cast<size_t>(i)] =
        detail::softplus(acts.zo[static_cast<size_t>(i)]) + net.alpha_floor;
}

// Convenience single-input forward returning alpha.
template <class T>
std::vector<T> cnn_predict(const Cnn<T>& net, std::span<const float> input) {
  if (input.size() != static_cast<size_t>(Cnn<T>::kInC) * Cnn<T>::kIn * Cnn<T>::kIn)
    throw std::invalid_argument("cnn_predict: input must be 4x80x80");
  std::vector<T> x(input.begin(), input.end());
  CnnActivations<T> acts;
  cnn_forward(net, x.data(), acts);
  return acts.alpha;
}

// Scratch buffers for one example's backward pass.
template <class T>
struct CnnBackwardScratch {
  std::vector<T> da3, da2, da1, daf, dzo;
};

// Accumulates into `grad` the gradient of this example's contribution
// sum_i (alpha_i - target_i)^2 * weight. Returns the unweighted example
// loss. `acts` must come from cnn_forward on the same x.
template <class T>
T cnn_backward_example(const Cnn<T>& net, const T* x, const CnnActivations<T>& acts,
                       std::span<const T> target, T weight, Cnn<T>& grad,
                       CnnBackwardScratch<T>& s) {
  s.dzo.resize(acts.zo.size());
  s.daf.resize(acts.af.size());
  s.da3.resize(acts.a3.size());
  s.da2.assign(acts.a2.size(), T(0));
  s.da1.assign(acts.a1.size(), T(0));

  T loss = T(0);
  for (size_t i = 0; i < acts.alpha.size(); ++i) {
    T diff = acts.alpha[i] - target[i];
    loss += diff * diff;
    s.dzo[i] = T(2) * diff * detail::sigmoid(acts.zo[i]) * weight;
  }
  detail::dense_backward(net.out, acts.af.data(), acts.zo.data(), s.dzo.data(), false,
                         grad.out, s.daf.data());
  detail::dense_backward(net.fc1, acts.a3.data(), acts.af.data(), s.daf.data(), true,
                         grad.fc1, s.da3.data());
  detail::conv_backward(net.conv3, acts.a2.data(), acts.a3.data(), s.da3.data(), grad.conv3,
                        s.da2.data());
  detail::conv_backward(net.conv2, acts.a1.data(), acts.a2.data(), s.da2.data(), grad.conv2,
                        s.da1.data());
  detail::conv_backward(net.conv1, x, acts.a1.data(), s.da1.data(), grad.conv1,
                        static_cast<T*>(nullptr));
  return loss;
}

}  // namespace ipp
