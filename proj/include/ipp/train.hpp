#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ipp/cnn.hpp"
#include "ipp/dataset.hpp"
#include "ipp/rng.hpp"

namespace ipp {

struct TrainConfig {
  double learning_rate = 3e-4;
  int minibatch_size = 32;
  int epochs = 10;
  int delta_window = 10;
  uint64_t rng_seed = 0;
  double alpha_floor = 0.01;
  int threads = 1;

  void validate() const {
    if (learning_rate < 0.0) throw std::invalid_argument("learning_rate must be >= 0");
    if (minibatch_size < 1 || epochs < 1 || delta_window < 1 || threads < 1)
      throw std::invalid_argument("train config values must be positive");
    if (alpha_floor <= 0.0) throw std::invalid_argument("alpha_floor must be > 0");
  }
};

// Mean over the batch of the squared-error vector norm.
template <class T>
double cnn_loss(const Cnn<T>& net, const Dataset& ds, std::span<const size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("cnn_loss: empty batch");
  std::vector<float> buf(Cnn<T>::kInC * Cnn<T>::kIn * Cnn<T>::kIn);
  std::vector<T> x(buf.size());
  CnnActivations<T> acts;
  double total = 0.0;
  for (size_t idx : indices) {
    ds.assemble_input(idx, buf.data());
    for (size_t i = 0; i < buf.size(); ++i) x[i] = static_cast<T>(buf[i]);
    cnn_forward(net, x.data(), acts);
    for (int i = 0; i < kNumActions; ++i) {
      double d = static_cast<double>(acts.alpha[static_cast<size_t>(i)]) -
                 ds.examples[idx].target[static_cast<size_t>(i)];
      total += d * d;
    }
  }
  return total / static_cast<double>(indices.size());
}

namespace detail {

// Gradient of the mean batch loss over indices [begin, end) of `order`,
// accumulated into `grad` (which must be zeroed by the caller). Returns
// the summed (unweighted) example losses.
template <class T>
double cnn_batch_gradient_chunk(const Cnn<T>& net, const Dataset& ds,
                                std::span<const size_t> batch, size_t begin, size_t end,
                                T inv_batch, Cnn<T>& grad) {
  std::vector<float> buf(Cnn<T>::kInC * Cnn<T>::kIn * Cnn<T>::kIn);
  std::vector<T> x(buf.size());
  std::vector<T> target(kNumActions);
  CnnActivations<T> acts;
  CnnBackwardScratch<T> scratch;
  double loss_sum = 0.0;
  for (size_t i = begin; i < end; ++i) {
    size_t idx = batch[i];
    ds.assemble_input(idx, buf.data());
    for (size_t j = 0; j < buf.size(); ++j) x[j] = static_cast<T>(buf[j]);
    for (int j = 0; j < kNumActions; ++j)
      target[static_cast<size_t>(j)] = static_cast<T>(ds.examples[idx].target[static_cast<size_t>(j)]);
    cnn_forward(net, x.data(), acts);
    loss_sum += static_cast<double>(cnn_backward_example(
        net, x.data(), acts, std::span<const T>(target), inv_batch, grad, scratch));
  }
  return loss_sum;
}

}  // namespace detail

// Computes the mean-loss gradient for one minibatch. With threads > 1 the
// batch is split into contiguous chunks reduced in chunk order, so the
// result is fixed for a given thread count.
template <class T>
double cnn_batch_gradient(const Cnn<T>& net, const Dataset& ds, std::span<const size_t> batch,
                          Cnn<T>& grad, int threads) {
  grad.zero();
  T inv_batch = T(1) / static_cast<T>(batch.size());
  size_t n = batch.size();
  size_t nthreads = std::min<size_t>(static_cast<size_t>(threads), n);
  if (nthreads <= 1) {
    double loss = detail::cnn_batch_gradient_chunk(net, ds, batch, 0, n, inv_batch, grad);
    return loss / static_cast<double>(n);
  }
  std::vector<Cnn<T>> grads(nthreads);
  std::vector<double> losses(nthreads, 0.0);
  std::vector<std::thread> pool;
  for (size_t t = 0; t < nthreads; ++t) {
    size_t begin = n * t / nthreads;
    size_t end = n * (t + 1) / nthreads;
    pool.emplace_back([&, t, begin, end] {
      grads[t].zero();
      grads[t].alpha_floor = net.alpha_floor;
      losses[t] =
          detail::cnn_batch_gradient_chunk(net, ds, batch, begin, end, inv_batch, grads[t]);
    });
  }
  for (auto& th : pool) th.join();
  auto dst = grad.tensors();
  for (size_t t = 0; t < nthreads; ++t) {
    auto src = grads[t].tensors();
    for (size_t k = 0; k < dst.size(); ++k) {
      T* d = dst[k].data->data();
      const T* s = src[k].data->data();
      for (size_t j = 0; j < dst[k].data->size(); ++j) d[j] += s[j];
    }
  }
  double loss = std::accumulate(losses.begin(), losses.end(), 0.0);
  return loss / static_cast<double>(n);
}

// Shuffled minibatch SGD; deterministic for a given seed and thread
// count. Returns the per-epoch mean training loss.
template <class T>
std::vector<double> sgd_fit(Cnn<T>& net, const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (ds.examples.empty()) throw std::invalid_argument("sgd_fit: empty dataset");

  Rng rng(cfg.rng_seed, 0x7ea1);
  std::vector<size_t> order(ds.examples.size());
  std::iota(order.begin(), order.end(), size_t{0});

  Cnn<T> grad;
  std::vector<double> history;
  T lr = static_cast<T>(cfg.learning_rate);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t seen = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.minibatch_size)) {
      size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.minibatch_size));
      std::span<const size_t> batch(order.data() + start, end - start);
      double loss = cnn_batch_gradient(net, ds, batch, grad, cfg.threads);
      if (!std::isfinite(loss)) throw std::runtime_error("sgd_fit: training diverged");
      epoch_loss += loss * static_cast<double>(batch.size());
      seen += batch.size();
      auto dst = net.tensors();
      auto src = grad.tensors();
      for (size_t k = 0; k < dst.size(); ++k) {
        T* w = dst[k].data->data();
        const T* g = src[k].data->data();
        for (size_t j = 0; j < dst[k].data->size(); ++j) w[j] -= lr * g[j];
      }
    }
    history.push_back(epoch_loss / static_cast<double>(seen));
  }
  return history;
}

}  // namespace ipp
