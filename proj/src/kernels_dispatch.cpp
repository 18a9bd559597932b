#include "titan/kernels/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace titan::kernels {

namespace {

using detail::Impl;

Isa g_isa = Isa::scalar;
const Impl* g_impl = nullptr;

bool has_avx2_cpu() {
#if defined(TITAN_NO_AVX2)
  return false;
#elif defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const Impl* impl_for(Isa isa) {
#ifndef TITAN_NO_AVX2
  if (isa == Isa::avx2) return &detail::avx2_impl();
#endif
  (void)isa;
  return &detail::scalar_impl();
}

void resolve() {
  if (g_impl != nullptr) return;
  Isa isa = has_avx2_cpu() ? Isa::avx2 : Isa::scalar;
  if (const char* env = std::getenv("TITAN_KERNELS")) {
    const std::string v(env);
    if (v == "scalar") {
      isa = Isa::scalar;
    } else if (v == "avx2") {
      if (!has_avx2_cpu()) throw std::runtime_error("TITAN_KERNELS=avx2 but CPU lacks AVX2");
      isa = Isa::avx2;
    } else if (!v.empty()) {
      throw std::runtime_error("unknown TITAN_KERNELS value: " + v);
    }
  }
  g_isa = isa;
  g_impl = impl_for(isa);
}

const Impl& impl() {
  resolve();
  return *g_impl;
}

}  // namespace

Isa active_isa() {
  resolve();
  return g_isa;
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool cpu_supports_avx2() { return has_avx2_cpu(); }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && !has_avx2_cpu())
    throw std::runtime_error("cannot force avx2 kernels: CPU lacks AVX2");
  g_isa = isa;
  g_impl = impl_for(isa);
}

void affine(const double* w, const double* b, const double* x, double* y,
            int rows, int cols) {
  impl().affine(w, b, x, y, rows, cols);
}

double dot(const double* a, const double* b, int n) { return impl().dot(a, b, n); }

void matvec_t_acc(const double* w, const double* dy, double* dx, int rows, int cols) {
  impl().matvec_t_acc(w, dy, dx, rows, cols);
}

void ger_acc(double* dw, const double* dy, const double* x, int rows, int cols) {
  impl().ger_acc(dw, dy, x, rows, cols);
}

void axpy(double a, const double* x, double* y, int n) { impl().axpy(a, x, y, n); }

void rmsprop_update(double* w, const double* g, double* ms, int n,
                    double lr, double alpha, double eps) {
  impl().rmsprop_update(w, g, ms, n, lr, alpha, eps);
}

}  // namespace titan::kernels
