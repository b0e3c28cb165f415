#pragma once

// Long-double reference implementations. They evaluate each defining formula
// directly (normal equations, O(n^2) rank counting, series for the gamma
// function) and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

using ld = long double;
using Mat = std::vector<std::vector<ld>>;

inline ld mean(const std::vector<ld>& v) {
  ld s = 0;
  for (ld x : v) s += x;
  return s / static_cast<ld>(v.size());
}

inline std::vector<ld> widen(const std::vector<double>& v) { return {v.begin(), v.end()}; }

inline ld pearson(const std::vector<ld>& x, const std::vector<ld>& y) {
  const ld mx = mean(x), my = mean(y);
  ld sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// rank_i = 1 + #{x_j < x_i} + (#{x_j == x_i} - 1) / 2
inline std::vector<ld> ranks(const std::vector<ld>& x) {
  std::vector<ld> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) ++less;
      if (x[j] == x[i]) ++equal;
    }
    r[i] = 1 + static_cast<ld>(less) + static_cast<ld>(equal - 1) / 2;
  }
  return r;
}

inline ld spearman(const std::vector<ld>& x, const std::vector<ld>& y) {
  return pearson(ranks(x), ranks(y));
}

// Gauss-Jordan inverse with partial pivoting.
inline Mat inverse(Mat a) {
  const std::size_t n = a.size();
  Mat inv(n, std::vector<ld>(n, 0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (a[piv][c] == 0) throw std::runtime_error("oracle: singular matrix");
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const ld d = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= d;
      inv[c][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const ld f = a[r][c];
      if (f == 0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

struct Fit {
  std::vector<ld> beta, residuals, leverages;
  Mat xtx_inv;
  ld r2 = 0;
};

// X is row-major n x p.
inline Fit ols(const Mat& X, const std::vector<ld>& y) {
  const std::size_t n = X.size(), p = X[0].size();
  Mat xtx(p, std::vector<ld>(p, 0));
  std::vector<ld> xty(p, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += X[i][a] * y[i];
      for (std::size_t b = 0; b < p; ++b) xtx[a][b] += X[i][a] * X[i][b];
    }
  Fit f;
  f.xtx_inv = inverse(xtx);
  f.beta.assign(p, 0);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) f.beta[a] += f.xtx_inv[a][b] * xty[b];
  f.residuals.resize(n);
  f.leverages.resize(n);
  ld sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ld fitted = 0;
    for (std::size_t a = 0; a < p; ++a) fitted += X[i][a] * f.beta[a];
    f.residuals[i] = y[i] - fitted;
    sse += f.residuals[i] * f.residuals[i];
    ld h = 0;
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) h += X[i][a] * f.xtx_inv[a][b] * X[i][b];
    f.leverages[i] = h;
  }
  const ld my = mean(y);
  ld sst = 0;
  for (ld v : y) sst += (v - my) * (v - my);
  f.r2 = 1 - sse / sst;
  return f;
}

inline Mat hc3(const Mat& X, const Fit& f) {
  const std::size_t n = X.size(), p = X[0].size();
  Mat meat(p, std::vector<ld>(p, 0));
  for (std::size_t i = 0; i < n; ++i) {
    const ld w = f.residuals[i] * f.residuals[i] / ((1 - f.leverages[i]) * (1 - f.leverages[i]));
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) meat[a][b] += w * X[i][a] * X[i][b];
  }
  auto mul = [p](const Mat& A, const Mat& B) {
    Mat C(p, std::vector<ld>(p, 0));
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t k = 0; k < p; ++k)
        for (std::size_t j = 0; j < p; ++j) C[i][j] += A[i][k] * B[k][j];
    return C;
  };
  return mul(mul(f.xtx_inv, meat), f.xtx_inv);
}

// Regularized upper incomplete gamma Q(a, x): series below a+1, Lentz
// continued fraction above.
inline ld gamma_q(ld a, ld x) {
  if (x <= 0) return 1;
  const ld lg = std::lgamma(a);
  if (x < a + 1) {
    ld term = 1 / a, sum = term;
    for (int k = 1; k < 100000; ++k) {
      term *= x / (a + k);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-19L) break;
    }
    return 1 - sum * std::exp(-x + a * std::log(x) - lg);
  }
  const ld tiny = 1e-4000L;
  ld b = x + 1 - a, c = 1 / tiny, d = 1 / b, h = d;
  for (int i = 1; i < 100000; ++i) {
    const ld an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1 / d;
    const ld delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1) < 1e-19L) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

inline ld chi2_sf(ld stat, ld df) { return gamma_q(df / 2, stat / 2); }

struct Test {
  ld statistic = 0;
  ld p_value = 1;
};

// Koenker's studentized form: n R^2 of e^2 on the original regressors.
inline Test breusch_pagan(const Mat& X, const std::vector<ld>& residuals) {
  std::vector<ld> e2;
  for (ld e : residuals) e2.push_back(e * e);
  const auto aux = ols(X, e2);
  Test t;
  t.statistic = static_cast<ld>(X.size()) * aux.r2;
  t.p_value = chi2_sf(t.statistic, static_cast<ld>(X[0].size() - 1));
  return t;
}

inline ld phi(ld z) { return std::erfc(-z / std::sqrt(2.0L)) / 2; }

inline Test anderson_darling(std::vector<ld> x) {
  const std::size_t n = x.size();
  const ld m = mean(x);
  ld ss = 0;
  for (ld v : x) ss += (v - m) * (v - m);
  const ld sd = std::sqrt(ss / static_cast<ld>(n - 1));
  std::sort(x.begin(), x.end());
  ld s = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const ld lo = phi((x[i - 1] - m) / sd);
    const ld hi = phi((x[n - i] - m) / sd);
    s += static_cast<ld>(2 * i - 1) * (std::log(lo) + std::log(1 - hi));
  }
  const ld nn = static_cast<ld>(n);
  const ld a2 = -nn - s / nn;
  Test t;
  t.statistic = a2 * (1 + 0.75L / nn + 2.25L / (nn * nn));
  const ld a = t.statistic;
  ld p;
  if (a >= 0.6L)
    p = std::exp(1.2937L - 5.709L * a + 0.0186L * a * a);
  else if (a >= 0.34L)
    p = std::exp(0.9177L - 4.279L * a - 1.38L * a * a);
  else if (a >= 0.2L)
    p = 1 - std::exp(-8.318L + 42.796L * a - 59.938L * a * a);
  else
    p = 1 - std::exp(-13.436L + 101.14L * a - 223.73L * a * a);
  t.p_value = std::clamp(p, 0.0L, 1.0L);
  return t;
}

inline ld trapezoid(const std::vector<ld>& t, const std::vector<ld>& w) {
  ld e = 0;
  for (std::size_t i = 1; i < t.size(); ++i) e += (w[i] + w[i - 1]) * (t[i] - t[i - 1]) / 2;
  return e;
}

// Relative error helpers. Vectors and matrices compare norm-wise so that
// entries near zero do not dominate.
inline double rel(double got, ld want) {
  const ld d = std::fabs(static_cast<ld>(got) - want);
  const ld s = std::fabs(want);
  return static_cast<double>(s > 0 ? d / s : d);
}

template <typename V>
double rel_vec(const V& got, const std::vector<ld>& want) {
  ld num = 0, den = 0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    const ld d = static_cast<ld>(got[i]) - want[i];
    num += d * d;
    den += want[i] * want[i];
  }
  return static_cast<double>(den > 0 ? std::sqrt(num / den) : std::sqrt(num));
}

template <typename M>
double rel_mat(const M& got, const Mat& want) {
  ld num = 0, den = 0;
  for (std::size_t i = 0; i < want.size(); ++i)
    for (std::size_t j = 0; j < want[i].size(); ++j) {
      const ld d = static_cast<ld>(got(static_cast<long>(i), static_cast<long>(j))) - want[i][j];
      num += d * d;
      den += want[i][j] * want[i][j];
    }
  return static_cast<double>(den > 0 ? std::sqrt(num / den) : std::sqrt(num));
}

}  // namespace oracle
