#include "hcpde/util.hpp"

#include <atomic>
#include <chrono>
#include <cstring>
#include <thread>

#include "hcpde/grid.hpp"

namespace hcpde {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(const void* data, size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::uint64_t tensor_hash(const Tensor& t) {
  std::uint64_t h = fnv1a64(t.data(), static_cast<size_t>(t.numel()) * sizeof(double));
  for (dim_t d : t.shape()) h = fnv1a64(&d, sizeof(d)) ^ (h * 0x100000001b3ULL);
  return h;
}

int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(dim_t n, int max_threads, const std::function<void(dim_t)>& fn) {
  if (n <= 0) return;
  if (max_threads <= 1 || n == 1) {
    for (dim_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<dim_t>(max_threads, n));
  std::atomic<dim_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  auto body = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const dim_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers - 1));
  for (int w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double wall_ms() {
  const auto now = std::chrono::steady_clock::now().time_since_epoch();
  return std::chrono::duration<double, std::milli>(now).count();
}

// ---- grid --------------------------------------------------------------

void Grid::validate() const {
  if (axes.empty()) throw std::invalid_argument("Grid: no axes");
  for (const Axis& ax : axes) {
    if (ax.n < 2) throw std::invalid_argument("Grid: axis size < 2");
    if (!(ax.extent > 0.0)) throw std::invalid_argument("Grid: non-positive extent");
  }
  if (axes.back().kind != AxisKind::Time)
    throw std::invalid_argument("Grid: last axis must be the time axis");
  for (size_t i = 0; i + 1 < axes.size(); ++i)
    if (axes[i].kind == AxisKind::Time)
      throw std::invalid_argument("Grid: time axis must be last");
}

Grid make_grid_ds(dim_t nx, dim_t nt, double t_final) {
  Grid g;
  g.axes = {{nx, 1.0, AxisKind::SpaceBounded}, {nt, t_final, AxisKind::Time}};
  g.validate();
  return g;
}

Grid make_grid_ns(dim_t nx, dim_t ny, dim_t nt, double t_final) {
  Grid g;
  g.axes = {{nx, 1.0, AxisKind::SpacePeriodic},
            {ny, 1.0, AxisKind::SpacePeriodic},
            {nt, t_final, AxisKind::Time}};
  g.validate();
  return g;
}

Grid make_grid_rd(dim_t nx, dim_t ny, dim_t nt, double t_final) {
  Grid g;
  g.axes = {{nx, 1.0, AxisKind::SpaceBounded},
            {ny, 1.0, AxisKind::SpaceBounded},
            {nt, t_final, AxisKind::Time}};
  g.validate();
  return g;
}

}  // namespace hcpde
