#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hcpde/tensor.hpp"

namespace hcpde {

/// Numerical failure distinct from usage errors; maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// splitmix64 step; used to derive independent substreams from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(mix_seed(seed, stream));
}

std::uint64_t fnv1a64(const void* data, size_t len);
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);
std::uint64_t tensor_hash(const Tensor& t);

int hardware_threads();

// Run fn(i) for i in [0, n); tasks are pulled from a shared counter by up to
// max_threads workers. Exceptions are rethrown on the calling thread (first
// one wins). max_threads <= 1 runs inline.
void parallel_for(dim_t n, int max_threads, const std::function<void(dim_t)>& fn);

double wall_ms();

}  // namespace hcpde
