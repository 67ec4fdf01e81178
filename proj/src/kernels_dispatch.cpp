#include <atomic>
#include <cstdlib>
#include <string_view>

#include "wdro/kernels.hpp"

namespace wdro::kernels {
namespace {

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::Scalar: return &scalar_table();
    case Backend::Avx2: return avx2_table();
    case Backend::Neon: return neon_table();
  }
  return nullptr;
}

Backend detect() {
  if (const char* env = std::getenv("WDRO_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return Backend::Scalar;
    if (want == "avx2" && avx2_table()) return Backend::Avx2;
    if (want == "neon" && neon_table()) return Backend::Neon;
  }
  if (avx2_table()) return Backend::Avx2;
  if (neon_table()) return Backend::Neon;
  return Backend::Scalar;
}

struct State {
  std::atomic<Backend> backend{detect()};
  std::atomic<const KernelTable*> table{table_for(backend.load())};
};

State& state() {
  static State s;
  return s;
}

}  // namespace

Backend active_backend() { return state().backend.load(std::memory_order_relaxed); }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

bool force_backend(Backend b) {
  const KernelTable* t = table_for(b);
  if (!t) return false;
  state().table.store(t, std::memory_order_relaxed);
  state().backend.store(b, std::memory_order_relaxed);
  return true;
}

const KernelTable& active() { return *state().table.load(std::memory_order_relaxed); }

}  // namespace wdro::kernels
