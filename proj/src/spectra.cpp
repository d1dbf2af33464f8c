#include "fgl/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fgl {
namespace {

// Householder reduction of a symmetric matrix (row-major, modified in place)
// to tridiagonal form. On return d holds the diagonal and e[1..n-1] the
// subdiagonal (e[0] = 0). Eigenvalue-only variant: the orthogonal
// transformation is not accumulated.
void householder_tridiag(std::vector<double>& a, int n, std::vector<double>& d,
                         std::vector<double>& e) {
  auto at = [&](int i, int j) -> double& {
    return a[static_cast<size_t>(i) * n + j];
  };

  for (int i = n - 1; i >= 1; --i) {
    const int l = i - 1;
    double h = 0.0;
    double scale = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::fabs(at(i, k));
      if (scale == 0.0) {
        e[i] = at(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          at(i, k) /= scale;
          h += at(i, k) * at(i, k);
        }
        double f = at(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        at(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += at(j, k) * at(i, k);
          for (int k = j + 1; k <= l; ++k) g += at(k, j) * at(i, k);
          e[j] = g / h;
          f += e[j] * at(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = at(i, j);
          g = e[j] - hh * f;
          e[j] = g;
          for (int k = 0; k <= j; ++k) {
            at(j, k) -= f * e[k] + g * at(i, k);
          }
        }
      }
    } else {
      e[i] = at(i, l);
    }
  }
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) d[i] = at(i, i);
}

double pythag(double a, double b) { return std::hypot(a, b); }

// Implicit-shift QL iteration on a symmetric tridiagonal matrix given by
// diagonal d and subdiagonal e (e[0] unused). Overwrites d with eigenvalues.
void ql_implicit_shift(std::vector<double>& d, std::vector<double>& e, int n) {
  constexpr int kMaxIter = 50;
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) {
          break;
        }
      }
      if (m != l) {
        if (iter++ == kMaxIter) {
          throw std::runtime_error("sym_eigenvalues: QL iteration stalled");
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = pythag(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = pythag(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

double spectral_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

void require_same_size(const Graph& g1, const Graph& g2) {
  if (g1.n() != g2.n()) {
    throw std::invalid_argument("graph size mismatch");
  }
}

}  // namespace

std::vector<double> sym_eigenvalues(const WeightedMatrix& m) {
  const int n = m.n;
  if (n <= 0) {
    throw std::invalid_argument("sym_eigenvalues: dimension must be positive");
  }
  if (m.w.size() != static_cast<size_t>(n) * n) {
    throw std::invalid_argument("sym_eigenvalues: matrix is not n*n");
  }
  std::vector<double> a(m.w);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double x = a[static_cast<size_t>(i) * n + j];
      const double y = a[static_cast<size_t>(j) * n + i];
      if (std::fabs(x - y) > 1e-12) {
        throw std::invalid_argument("sym_eigenvalues: matrix is not symmetric");
      }
      const double mid = 0.5 * (x + y);
      a[static_cast<size_t>(i) * n + j] = mid;
      a[static_cast<size_t>(j) * n + i] = mid;
    }
  }
  std::vector<double> d(n, 0.0);
  std::vector<double> e(n, 0.0);
  if (n == 1) {
    d[0] = a[0];
    return d;
  }
  householder_tridiag(a, n, d, e);
  ql_implicit_shift(d, e, n);
  return d;
}

SpectrumVector adjacency_spectrum(const Graph& g) {
  WeightedMatrix m(g.n());
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      m.at(i, j) = g.edge(i, j) ? 1.0 : 0.0;
    }
  }
  SpectrumVector s;
  s.vals = sym_eigenvalues(m);
  s.convention = SpectrumConvention::AdjacencyDescending;
  std::sort(s.vals.begin(), s.vals.end(), std::greater<double>());
  return s;
}

SpectrumVector laplacian_spectrum(const Graph& g) {
  SpectrumVector s;
  s.vals = sym_eigenvalues(laplacian(g));
  s.convention = SpectrumConvention::LaplacianAscending;
  std::sort(s.vals.begin(), s.vals.end());
  return s;
}

double d_adjacency(const Graph& g1, const Graph& g2) {
  require_same_size(g1, g2);
  return spectral_l2(adjacency_spectrum(g1).vals, adjacency_spectrum(g2).vals);
}

double d_laplacian(const Graph& g1, const Graph& g2) {
  require_same_size(g1, g2);
  return spectral_l2(laplacian_spectrum(g1).vals, laplacian_spectrum(g2).vals);
}

double d_hamming(const Graph& g1, const Graph& g2) {
  require_same_size(g1, g2);
  int diff = 0;
  for (int i = 0; i < g1.n(); ++i) {
    for (int j = i + 1; j < g1.n(); ++j) {
      if (g1.edge(i, j) != g2.edge(i, j)) ++diff;
    }
  }
  return static_cast<double>(diff);
}

}  // namespace fgl
