#include "poplab/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace poplab::kernels {

const Table& active() {
  static const Table* chosen = [] {
    const char* force = std::getenv("POPLAB_FORCE_SCALAR");
    if (force && std::strcmp(force, "0") != 0) return &scalar_table();
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
      if (const Table* t = avx2_table()) return t;
    }
#endif
    return &scalar_table();
  }();
  return *chosen;
}

}  // namespace poplab::kernels
