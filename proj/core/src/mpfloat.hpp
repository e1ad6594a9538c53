#pragma once

// Minimal RAII wrapper over mpfr_t. Every value carries its own precision;
// results take the precision of the left operand.

#include <mpfr.h>

#include <utility>

namespace fvddp::detail {

class MpFloat {
 public:
  explicit MpFloat(mpfr_prec_t bits, double value = 0.0) {
    mpfr_init2(v_, bits);
    mpfr_set_d(v_, value, MPFR_RNDN);
  }
  MpFloat(const MpFloat& other) {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  MpFloat& operator=(const MpFloat& other) {
    if (this != &other) {
      mpfr_set_prec(v_, mpfr_get_prec(other.v_));
      mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
  }
  ~MpFloat() { mpfr_clear(v_); }

  MpFloat& operator*=(const MpFloat& o) {
    mpfr_mul(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  MpFloat& operator*=(double d) {
    mpfr_mul_d(v_, v_, d, MPFR_RNDN);
    return *this;
  }
  MpFloat& operator/=(double d) {
    mpfr_div_d(v_, v_, d, MPFR_RNDN);
    return *this;
  }
  MpFloat& operator+=(const MpFloat& o) {
    mpfr_add(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }
  MpFloat& operator-=(const MpFloat& o) {
    mpfr_sub(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }

  /// this += a * b
  void add_product(const MpFloat& a, const MpFloat& b, MpFloat& scratch) {
    mpfr_mul(scratch.v_, a.v_, b.v_, MPFR_RNDN);
    mpfr_add(v_, v_, scratch.v_, MPFR_RNDN);
  }

  void negate() { mpfr_neg(v_, v_, MPFR_RNDN); }

  MpFloat& mul_si(long n) {
    mpfr_mul_si(v_, v_, n, MPFR_RNDN);
    return *this;
  }
  MpFloat& div_si(long n) {
    mpfr_div_si(v_, v_, n, MPFR_RNDN);
    return *this;
  }
  /// this *= (theta + j), with the sum formed at full precision.
  MpFloat& mul_shifted(double theta, long j) {
    MpFloat f(mpfr_get_prec(v_), theta);
    mpfr_add_si(f.v_, f.v_, j, MPFR_RNDN);
    mpfr_mul(v_, v_, f.v_, MPFR_RNDN);
    return *this;
  }
  /// this /= (theta + j), with the sum formed at full precision.
  MpFloat& div_shifted(double theta, long j) {
    MpFloat f(mpfr_get_prec(v_), theta);
    mpfr_add_si(f.v_, f.v_, j, MPFR_RNDN);
    mpfr_div(v_, v_, f.v_, MPFR_RNDN);
    return *this;
  }

  /// exp(-i (theta + i - 1) t / 2), the survival factor of death level i.
  void set_level_decay(long i, double theta, double t) {
    mpfr_set_d(v_, theta, MPFR_RNDN);
    mpfr_add_si(v_, v_, i - 1, MPFR_RNDN);
    mpfr_mul_si(v_, v_, i, MPFR_RNDN);
    mpfr_mul_d(v_, v_, t, MPFR_RNDN);
    mpfr_div_si(v_, v_, -2, MPFR_RNDN);
    mpfr_exp(v_, v_, MPFR_RNDN);
  }

  /// exp(x) for a double exponent, at this value's precision.
  void set_exp(double x) {
    mpfr_set_d(v_, x, MPFR_RNDN);
    mpfr_exp(v_, v_, MPFR_RNDN);
  }
  void set(double d) { mpfr_set_d(v_, d, MPFR_RNDN); }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

 private:
  mpfr_t v_;
};

}  // namespace fvddp::detail
