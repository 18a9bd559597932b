#pragma once

#include <cstdint>
#include <string>

namespace titan::kernels {

// Dense double-precision primitives behind a runtime-selected implementation.
//
// Contract: every implementation must produce bit-identical results for the
// same inputs.  Reductions (dot, affine rows) accumulate in four interleaved
// partial sums over the 4-aligned prefix, combine them as (s0+s2)+(s1+s3),
// then fold the tail left to right.  No FMA contraction anywhere.  Elementwise
// ops perform the same scalar operation sequence per element.  This keeps
// training runs reproducible regardless of which implementation the
// dispatcher picks.

enum class Isa { scalar = 0, avx2 = 1 };

// Implementation currently in use.  Resolved on first call: the TITAN_KERNELS
// environment variable ("scalar" or "avx2") wins if set, otherwise the best
// ISA the CPU supports.
Isa active_isa();
const char* isa_name(Isa isa);
bool cpu_supports_avx2();

// Force a specific implementation (tests use this).  Throws std::runtime_error
// if the requested ISA is unsupported on this CPU.
void force_isa(Isa isa);

// y = W*x + b.  W is row-major [rows x cols]; b may be nullptr (treated as 0).
void affine(const double* w, const double* b, const double* x, double* y,
            int rows, int cols);

// Blocked-accumulation dot product (reduction order fixed by the contract).
double dot(const double* a, const double* b, int n);

// dx += W^T * dy.  W row-major [rows x cols], dy has rows entries, dx cols.
void matvec_t_acc(const double* w, const double* dy, double* dx,
                  int rows, int cols);

// dw += dy * x^T (rank-1 accumulate).  dw row-major [rows x cols].
void ger_acc(double* dw, const double* dy, const double* x, int rows, int cols);

// y += a*x.
void axpy(double a, const double* x, double* y, int n);

// RMSProp step on a flat buffer:
//   ms = alpha*ms + (1-alpha)*g*g;  w -= lr * g / (sqrt(ms) + eps)
void rmsprop_update(double* w, const double* g, double* ms, int n,
                    double lr, double alpha, double eps);

namespace detail {

struct Impl {
  void (*affine)(const double*, const double*, const double*, double*, int, int);
  double (*dot)(const double*, const double*, int);
  void (*matvec_t_acc)(const double*, const double*, double*, int, int);
  void (*ger_acc)(double*, const double*, const double*, int, int);
  void (*axpy)(double, const double*, double*, int);
  void (*rmsprop_update)(double*, const double*, double*, int, double, double, double);
};

const Impl& scalar_impl();
const Impl& avx2_impl();  // only callable when cpu_supports_avx2()

}  // namespace detail

}  // namespace titan::kernels
