#pragma once

// Data-parallel scans used by the audits and checkers.
//
// Every kernel has a serial reference in `kernels::serial` and an OpenMP
// version in `kernels::parallel` with identical results: the parallel loops
// only fill per-index slots and any reduction over those slots runs serially
// in index order, so ties and first-hit semantics match exactly.
//
// Distance callables have the shape `double(std::size_t, std::size_t)` and
// must be safe to call concurrently.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace orbitlab::kernels {

struct IndexPair {
  std::size_t first = 0;
  std::size_t second = 0;
  friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

// Extremes of d(n+1, m+1) - d(n, m) over 0 <= n < m < count - 1.
struct ShiftExtremes {
  double max_increase = -std::numeric_limits<double>::infinity();
  IndexPair max_increase_at;
  double max_decrease = -std::numeric_limits<double>::infinity();
  IndexPair max_decrease_at;
  // Largest (d(n+1,m+1) - d(n,m)) - slack(n+1, m+1); <= 0 means the
  // nonincreasing relation holds within the supplied slack.
  double max_slack_excess = -std::numeric_limits<double>::infinity();
  IndexPair max_slack_excess_at;
  std::size_t pairs = 0;
};

struct SublemmaScan {
  std::size_t admissible = 0;
  std::size_t failures = 0;
  std::optional<std::size_t> first_failure_n;
  std::optional<std::size_t> first_failure_nu;
  std::optional<std::size_t> first_failure_m;
};

namespace detail {

inline double argmax_into(const std::vector<double>& v, std::size_t& at) {
  double best = -std::numeric_limits<double>::infinity();
  at = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > best || (std::isnan(v[i]) && !std::isnan(best))) {
      best = v[i];
      at = i;
    }
  }
  return best;
}

struct RowShift {
  double inc = -std::numeric_limits<double>::infinity();
  std::size_t inc_m = 0;
  double dec = -std::numeric_limits<double>::infinity();
  std::size_t dec_m = 0;
  double excess = -std::numeric_limits<double>::infinity();
  std::size_t excess_m = 0;
  std::size_t pairs = 0;
};

template <class Dist, class Slack>
RowShift shift_row(std::size_t n, std::size_t count, const Dist& d,
                   const Slack& slack) {
  RowShift r;
  for (std::size_t m = n + 1; m + 1 < count; ++m) {
    const double delta = d(n + 1, m + 1) - d(n, m);
    if (delta > r.inc) {
      r.inc = delta;
      r.inc_m = m;
    }
    if (-delta > r.dec) {
      r.dec = -delta;
      r.dec_m = m;
    }
    const double excess = delta - slack(n + 1, m + 1);
    if (excess > r.excess) {
      r.excess = excess;
      r.excess_m = m;
    }
    ++r.pairs;
  }
  return r;
}

inline ShiftExtremes merge_rows(const std::vector<RowShift>& rows) {
  ShiftExtremes out;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const RowShift& r = rows[n];
    if (r.pairs == 0) continue;
    if (r.inc > out.max_increase) {
      out.max_increase = r.inc;
      out.max_increase_at = {n, r.inc_m};
    }
    if (r.dec > out.max_decrease) {
      out.max_decrease = r.dec;
      out.max_decrease_at = {n, r.dec_m};
    }
    if (r.excess > out.max_slack_excess) {
      out.max_slack_excess = r.excess;
      out.max_slack_excess_at = {n, r.excess_m};
    }
    out.pairs += r.pairs;
  }
  return out;
}

template <class Dist>
std::optional<std::size_t> row_collision(std::size_t n, std::size_t count,
                                         const Dist& d, double tol) {
  for (std::size_t m = n + 1; m < count; ++m) {
    if (!(d(n, m) > tol)) return m;
  }
  return std::nullopt;
}

template <class Dist>
bool row_covered(std::size_t n, std::size_t centers, const Dist& d,
                 double radius) {
  for (std::size_t k = 0; k < centers; ++k) {
    if (d(n, k) < radius) return true;
  }
  return false;
}

// in_union[nu] is true iff nu lies in the union of balls B(k, rho), k <= n.
template <class Dist>
SublemmaScan sublemma_row(std::size_t n, std::size_t horizon, const Dist& d,
                          double rho, double tol,
                          const std::vector<std::uint8_t>& in_union) {
  SublemmaScan s;
  for (std::size_t nu = n + 1; nu <= horizon; ++nu) {
    if (in_union[nu]) continue;
    for (std::size_t m = nu + 1; m <= horizon; ++m) {
      const double dmn = d(m, n);
      if (!(dmn < rho)) continue;
      ++s.admissible;
      const bool ok = nu < m - n && d(m - n, 0) <= dmn + tol;
      if (!ok) {
        if (s.failures == 0) {
          s.first_failure_n = n;
          s.first_failure_nu = nu;
          s.first_failure_m = m;
        }
        ++s.failures;
      }
    }
  }
  return s;
}

template <class Dist>
std::vector<std::vector<std::uint8_t>> union_membership(std::size_t horizon,
                                                        const Dist& d,
                                                        double rho) {
  std::vector<std::vector<std::uint8_t>> rows(horizon + 1);
  std::vector<std::uint8_t> cur(horizon + 1, 0);
  for (std::size_t n = 0; n <= horizon; ++n) {
    for (std::size_t k = 0; k <= horizon; ++k) {
      if (!cur[k] && d(k, n) < rho) cur[k] = 1;
    }
    rows[n] = cur;
  }
  return rows;
}

inline SublemmaScan merge_scans(const std::vector<SublemmaScan>& rows) {
  SublemmaScan out;
  for (const SublemmaScan& r : rows) {
    out.admissible += r.admissible;
    if (r.failures > 0 && out.failures == 0) {
      out.first_failure_n = r.first_failure_n;
      out.first_failure_nu = r.first_failure_nu;
      out.first_failure_m = r.first_failure_m;
    }
    out.failures += r.failures;
  }
  return out;
}

}  // namespace detail

namespace serial {

// out[i] = fn(i)
template <class Fn>
std::vector<double> evaluate_all(std::size_t count, const Fn& fn) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
  return out;
}

// First pair n < m (lexicographic) with d(n, m) <= tol.
template <class Dist>
std::optional<IndexPair> first_collision(std::size_t count, const Dist& d,
                                         double tol) {
  for (std::size_t n = 0; n < count; ++n) {
    if (auto m = detail::row_collision(n, count, d, tol)) return IndexPair{n, *m};
  }
  return std::nullopt;
}

template <class Dist, class Slack>
ShiftExtremes shift_extremes(std::size_t count, const Dist& d,
                             const Slack& slack) {
  std::vector<detail::RowShift> rows(count);
  for (std::size_t n = 0; n + 2 < count; ++n)
    rows[n] = detail::shift_row(n, count, d, slack);
  return detail::merge_rows(rows);
}

// Least n < count not within `radius` of any k < centers.
template <class Dist>
std::optional<std::size_t> first_uncovered(std::size_t count,
                                           std::size_t centers, const Dist& d,
                                           double radius) {
  for (std::size_t n = 0; n < count; ++n) {
    if (!detail::row_covered(n, centers, d, radius)) return n;
  }
  return std::nullopt;
}

template <class Dist>
SublemmaScan sublemma_scan(std::size_t horizon, const Dist& d, double rho,
                           double tol) {
  const auto in_union = detail::union_membership(horizon, d, rho);
  std::vector<SublemmaScan> rows(horizon + 1);
  for (std::size_t n = 0; n <= horizon; ++n)
    rows[n] = detail::sublemma_row(n, horizon, d, rho, tol, in_union[n]);
  return detail::merge_scans(rows);
}

// counts[k] = #{j > k : d(k, j) <= eps}, saturating at `cap`.
template <class Dist>
std::vector<std::size_t> later_return_counts(std::size_t count, const Dist& d,
                                             double eps, std::size_t cap) {
  std::vector<std::size_t> counts(count, 0);
  for (std::size_t k = 0; k < count; ++k) {
    for (std::size_t j = k + 1; j < count && counts[k] < cap; ++j)
      if (d(k, j) <= eps) ++counts[k];
  }
  return counts;
}

// Hausdorff distance between index sets {0..na-1} and {0..nb-1} under
// cross(i, j) = d(a_i, b_j).
template <class Cross>
double hausdorff(std::size_t na, std::size_t nb, const Cross& cross) {
  if (na == 0 || nb == 0) return std::numeric_limits<double>::infinity();
  double h = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nb; ++j) best = std::min(best, cross(i, j));
    h = std::max(h, best);
  }
  for (std::size_t j = 0; j < nb; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < na; ++i) best = std::min(best, cross(i, j));
    h = std::max(h, best);
  }
  return h;
}

}  // namespace serial

namespace parallel {

template <class Fn>
std::vector<double> evaluate_all(std::size_t count, const Fn& fn) {
  std::vector<double> out(count);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
  return out;
}

template <class Dist>
std::optional<IndexPair> first_collision(std::size_t count, const Dist& d,
                                         double tol) {
  std::vector<std::optional<std::size_t>> rows(count);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    rows[r] = detail::row_collision(r, count, d, tol);
  }
  for (std::size_t r = 0; r < count; ++r)
    if (rows[r]) return IndexPair{r, *rows[r]};
  return std::nullopt;
}

template <class Dist, class Slack>
ShiftExtremes shift_extremes(std::size_t count, const Dist& d,
                             const Slack& slack) {
  std::vector<detail::RowShift> rows(count);
  const auto n = static_cast<std::int64_t>(count >= 2 ? count - 2 : 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    rows[r] = detail::shift_row(r, count, d, slack);
  }
  return detail::merge_rows(rows);
}

template <class Dist>
std::optional<std::size_t> first_uncovered(std::size_t count,
                                           std::size_t centers, const Dist& d,
                                           double radius) {
  std::vector<std::uint8_t> ok(count, 0);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    ok[r] = detail::row_covered(r, centers, d, radius) ? 1 : 0;
  }
  for (std::size_t r = 0; r < count; ++r)
    if (!ok[r]) return r;
  return std::nullopt;
}

template <class Dist>
SublemmaScan sublemma_scan(std::size_t horizon, const Dist& d, double rho,
                           double tol) {
  const auto in_union = detail::union_membership(horizon, d, rho);
  std::vector<SublemmaScan> rows(horizon + 1);
  const auto n = static_cast<std::int64_t>(horizon + 1);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    rows[r] = detail::sublemma_row(r, horizon, d, rho, tol, in_union[r]);
  }
  return detail::merge_scans(rows);
}

template <class Dist>
std::vector<std::size_t> later_return_counts(std::size_t count, const Dist& d,
                                             double eps, std::size_t cap) {
  std::vector<std::size_t> counts(count, 0);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    std::size_t c = 0;
    for (std::size_t j = k + 1; j < count && c < cap; ++j)
      if (d(k, j) <= eps) ++c;
    counts[k] = c;
  }
  return counts;
}

template <class Cross>
double hausdorff(std::size_t na, std::size_t nb, const Cross& cross) {
  if (na == 0 || nb == 0) return std::numeric_limits<double>::infinity();
  std::vector<double> a_side(na), b_side(nb);
  const auto ia = static_cast<std::int64_t>(na);
  const auto ib = static_cast<std::int64_t>(nb);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < ia; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nb; ++j)
      best = std::min(best, cross(static_cast<std::size_t>(i), j));
    a_side[static_cast<std::size_t>(i)] = best;
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < ib; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < na; ++i)
      best = std::min(best, cross(i, static_cast<std::size_t>(j)));
    b_side[static_cast<std::size_t>(j)] = best;
  }
  double h = 0.0;
  for (double v : a_side) h = std::max(h, v);
  for (double v : b_side) h = std::max(h, v);
  return h;
}

}  // namespace parallel

// Index of the maximum (first on ties); NaN wins so audits surface it.
inline std::size_t argmax(const std::vector<double>& v) {
  std::size_t at = 0;
  detail::argmax_into(v, at);
  return at;
}

}  // namespace orbitlab::kernels
