#pragma once

#include <gmpxx.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace cartan {

struct Error : std::runtime_error {
  std::string code;
  Error(std::string c, const std::string& what)
      : std::runtime_error(c + ": " + what), code(std::move(c)) {}
};

using Rat = mpq_class;

// R < C < H; QI is C over exact rationals and reported as such
enum class Ring { R = 0, C = 1, H = 2 };

inline Ring join(Ring a, Ring b) { return static_cast<int>(a) > static_cast<int>(b) ? a : b; }

template <class T> struct Num;

template <> struct Num<double> {
  static constexpr bool exact = false;
  static double d(double v) { return v; }
  static bool zero(double v) { return v == 0.0; }
  static double from(long n, long den = 1) { return double(n) / double(den); }
  static std::string str(double v) { return std::to_string(v); }
};

template <> struct Num<Rat> {
  static constexpr bool exact = true;
  static double d(const Rat& v) { return v.get_d(); }
  static bool zero(const Rat& v) { return sgn(v) == 0; }
  static Rat from(long n, long den = 1) {
    Rat r(n, den);
    r.canonicalize();
    return r;
  }
  static std::string str(const Rat& v) { return v.get_str(); }
};

inline std::string ring_name(Ring r, bool exact) {
  switch (r) {
    case Ring::R: return "R";
    case Ring::C: return exact ? "QI" : "C";
    default: return "H";
  }
}

// w + x i + y j + z k
template <class T> struct Quat {
  T w{0}, x{0}, y{0}, z{0};

  Quat() = default;
  Quat(const T& a) : w(a) {}
  template <class I, std::enable_if_t<std::is_integral_v<I>, int> = 0>
  Quat(I a) : w(T(static_cast<long>(a))) {}
  Quat(const T& a, const T& b, const T& c = T(0), const T& d = T(0)) : w(a), x(b), y(c), z(d) {}

  static Quat cplx(const T& re, const T& im) { return Quat(re, im); }
  static Quat I() { return Quat(T(0), T(1)); }
  static Quat J() { return Quat(T(0), T(0), T(1)); }
  static Quat K() { return Quat(T(0), T(0), T(0), T(1)); }

  Quat operator+(const Quat& o) const { return Quat(T(w + o.w), T(x + o.x), T(y + o.y), T(z + o.z)); }
  Quat operator-(const Quat& o) const { return Quat(T(w - o.w), T(x - o.x), T(y - o.y), T(z - o.z)); }
  Quat operator-() const { return Quat(T(-w), T(-x), T(-y), T(-z)); }
  Quat operator*(const Quat& o) const {
    return Quat(T(w * o.w - x * o.x - y * o.y - z * o.z),
                T(w * o.x + x * o.w + y * o.z - z * o.y),
                T(w * o.y - x * o.z + y * o.w + z * o.x),
                T(w * o.z + x * o.y - y * o.x + z * o.w));
  }
  Quat& operator+=(const Quat& o) { return *this = *this + o; }
  Quat& operator-=(const Quat& o) { return *this = *this - o; }
  Quat& operator*=(const Quat& o) { return *this = *this * o; }

  Quat scaled(const T& s) const { return Quat(T(w * s), T(x * s), T(y * s), T(z * s)); }

  bool operator==(const Quat& o) const { return w == o.w && x == o.x && y == o.y && z == o.z; }
  bool operator!=(const Quat& o) const { return !(*this == o); }

  bool is_zero() const { return Num<T>::zero(w) && Num<T>::zero(x) && Num<T>::zero(y) && Num<T>::zero(z); }
  bool is_real() const { return Num<T>::zero(x) && Num<T>::zero(y) && Num<T>::zero(z); }
  bool is_complex() const { return Num<T>::zero(y) && Num<T>::zero(z); }

  Ring ring() const { return is_real() ? Ring::R : is_complex() ? Ring::C : Ring::H; }

  Quat conj() const { return Quat(w, T(-x), T(-y), T(-z)); }
  T norm2() const { return T(w * w + x * x + y * y + z * z); }
  double abs() const { return std::sqrt(Num<T>::d(norm2())); }

  Quat inv() const {
    T n2 = norm2();
    if (Num<T>::zero(n2)) throw Error("Singular", "inverse of zero scalar");
    return conj().scaled(T(T(1) / n2));
  }
};

template <class T> Quat<T> conj(const Quat<T>& a) { return a.conj(); }

// a * b^{-1}
template <class T> Quat<T> rdiv(const Quat<T>& a, const Quat<T>& b) { return a * b.inv(); }
// b^{-1} * a
template <class T> Quat<T> ldiv(const Quat<T>& b, const Quat<T>& a) { return b.inv() * a; }

template <class T> Quat<double> to_double(const Quat<T>& q) {
  return Quat<double>(Num<T>::d(q.w), Num<T>::d(q.x), Num<T>::d(q.y), Num<T>::d(q.z));
}

template <class T> std::string to_string(const Quat<T>& q) {
  std::string s = Num<T>::str(q.w);
  const char* names[3] = {"i", "j", "k"};
  const T* parts[3] = {&q.x, &q.y, &q.z};
  for (int c = 0; c < 3; ++c) {
    if (Num<T>::zero(*parts[c])) continue;
    std::string p = Num<T>::str(*parts[c]);
    if (p[0] != '-') p = "+" + p;
    s += p + names[c];
  }
  return s;
}

using QD = Quat<double>;
using QR = Quat<Rat>;

inline Rat rat(long n, long d = 1) { return Num<Rat>::from(n, d); }

}  // namespace cartan
