#pragma once

#include <cstdint>
#include <new>
#include <vector>

#include "terragan/rng.hpp"

namespace terragan {

/// 64-byte-aligned allocator for every buffer that feeds the SIMD kernels.
/// Fixed alignment keeps vectorized loop peeling identical across
/// allocations, which run-to-run bit determinism depends on.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t kAlign = 64;

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(
        ::operator new(n * sizeof(T), std::align_val_t(kAlign)));
  }
  void deallocate(T* p, std::size_t) noexcept {
    ::operator delete(p, std::align_val_t(kAlign));
  }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
};

using FloatVec = std::vector<float, AlignedAllocator<float>>;

/// Dense float32 NCHW tensor. Vectors are stored as (n, dim, 1, 1).
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  FloatVec v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        v(static_cast<size_t>(n_) * c_ * h_ * w_, 0.0f) {}

  int64_t count() const { return static_cast<int64_t>(n) * c * h * w; }
  int64_t per_sample() const { return static_cast<int64_t>(c) * h * w; }

  float* sample(int i) { return v.data() + static_cast<size_t>(i) * per_sample(); }
  const float* sample(int i) const {
    return v.data() + static_cast<size_t>(i) * per_sample();
  }

  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  /// Shape change without touching data; element count must match.
  Tensor reshaped(int n_, int c_, int h_, int w_) const;

  void zero() { std::fill(v.begin(), v.end(), 0.0f); }
};

/// Draws from N(0, stddev^2); the initializer used for every dense, conv and
/// deconv weight tensor.
void fill_normal(FloatVec& values, float stddev, Rng& rng);

}  // namespace terragan
