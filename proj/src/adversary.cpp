#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "robustbp/errors.hpp"
#include "robustbp/functionals.hpp"
#include "robustbp/simulation.hpp"

namespace rbp {

namespace {

bool has_zero_endpoint(Family f) { return f != Family::GEVD; }

void check_supported(const Model& model, const EstimatorSpec& spec) {
  if (spec.kind == EstimatorKind::PE && model.family == Family::Gamma)
    throw DomainError("PE at the Gamma family: not applicable");
}

std::vector<double> sorted_copy(std::span<const double> x) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  return s;
}

// Sample with s[idx[j]] replaced by val[j], re-sorted.
std::vector<double> altered(const std::vector<double>& s, const std::vector<std::size_t>& idx,
                            const std::vector<double>& val, std::size_t count) {
  std::vector<double> t = s;
  for (std::size_t j = 0; j < count; ++j) t[idx[j]] = val[j];
  std::sort(t.begin(), t.end());
  return t;
}

// Smallest b in [0, hi] with pred(b), assuming monotonicity; -1 if pred(hi)
// fails.
template <class P>
int first_true(int hi, P pred) {
  if (hi < 0 || !pred(hi)) return -1;
  int lo = 0;
  while (lo < hi) {
    int mid = lo + (hi - lo) / 2;
    if (pred(mid)) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

int explosion_ld(const std::vector<double>& s, const Model& model, const EstimatorSpec& spec) {
  const Dispersion d = spec.dispersion();
  const double m = median_sorted(s, spec.convention);
  const std::size_t n = s.size();
  const double x0 = lower_endpoint(model);
  const auto branch = quotient_branch(model.family, d, spec.restricted);

  // leave the order statistics that define the median in place
  const std::size_t hi = n / 2;
  const std::size_t lo = spec.convention == MedianConvention::HiMed ? hi : (n - 1) / 2;
  std::vector<std::size_t> lower, upper;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < lo && s[i] < m) lower.push_back(i);
    else if (i > hi && s[i] > m) upper.push_back(i);
  }
  // placements for moved upper points: just outside the kMAD window when it
  // is bounded by (k+1)m, otherwise far away and mutually far apart
  const bool kmad = d.type == Dispersion::Type::kMAD;
  const double reach = kmad ? std::max(d.k + 1, 1 + d.k * branch.q_hi) * m : 0.0;
  const double far = 16 * std::max(std::abs(s.back()), std::abs(m)) + reach;
  std::vector<double> up_val(upper.size());
  for (std::size_t j = 0; j < upper.size(); ++j) {
    if (kmad && has_zero_endpoint(model.family))
      up_val[j] = reach * (1 + kPlacementOffset * (j + 1));
    else
      up_val[j] = far * std::pow(2.0, static_cast<double>(j));
  }
  auto low_val = [&](std::size_t i) {
    if (std::isfinite(x0)) return x0 + kPlacementOffset * m * (i + 1);
    return -far * std::pow(2.0, static_cast<double>(i));
  };

  int best = -1;
  const int max_a = static_cast<int>(std::min<std::size_t>(3, lower.size()));
  for (int a = 0; a <= max_a; ++a) {
    if (best >= 0 && a >= best) break;
    std::vector<std::size_t> idx(lower.begin(), lower.begin() + a);
    std::vector<double> val;
    for (int i = 0; i < a; ++i) val.push_back(low_val(i));
    const std::size_t base = idx.size();

    // ascending: the lowest b upper points move out
    std::vector<std::size_t> idx_b = idx;
    std::vector<double> val_b = val;
    for (std::size_t j = 0; j < upper.size(); ++j) {
      idx_b.push_back(upper[j]);
      val_b.push_back(up_val[j]);
    }
    int b = first_true(static_cast<int>(upper.size()), [&](int bb) {
      auto t = altered(s, idx_b, val_b, base + bb);
      return is_broken(t, model, spec, Direction::Explosion);
    });
    if (b >= 0 && (best < 0 || a + b < best)) best = a + b;

    if (!kmad) {
      // sparse: keep upper points that are already isolated, move the rest
      std::vector<std::size_t> idx_s = idx;
      std::vector<double> val_s = val;
      double last = -std::numeric_limits<double>::infinity();
      std::size_t moved = 0;
      for (std::size_t j = 0; j < upper.size(); ++j) {
        double y = s[upper[j]];
        if (y >= 2 * m && y - last >= m) {
          last = y;
        } else {
          idx_s.push_back(upper[j]);
          val_s.push_back(far * std::pow(2.0, static_cast<double>(moved)));
          ++moved;
        }
      }
      int cost = a + static_cast<int>(moved);
      if (best < 0 || cost < best) {
        auto t = altered(s, idx_s, val_s, idx_s.size());
        if (is_broken(t, model, spec, Direction::Explosion)) best = cost;
      }
    }
  }
  return best;
}

// kMAD explosion by lowering the median: send a points to just above x0 so
// that s[j] becomes the hi-med, and clear the window (s[j], (k+1)s[j]) down
// to a-1 points.  Then kMAD reaches m - X_(1) and q -> 1.  Candidates are
// ranked by their count and the first one that verifies is taken.
int explosion_shift(const std::vector<double>& s, const Model& model, const EstimatorSpec& spec,
                    int limit) {
  const double k = spec.k;
  const long n = static_cast<long>(s.size()), h = n / 2;
  struct Cand {
    long r, j, a;
  };
  std::vector<Cand> cands;
  for (long j = 0; j < n; ++j) {
    if (!(s[j] > 0)) continue;
    long wend = std::lower_bound(s.begin(), s.end(), (k + 1) * s[j]) - s.begin();
    long wbeg = std::upper_bound(s.begin(), s.end(), s[j]) - s.begin();
    long W = std::max(0L, wend - wbeg);
    for (long a = std::max(1L, h - j); a <= h; ++a) {
      long below = j - h + a;  // points under s[j] that have to go
      long r = std::max(a, below + std::max(0L, W - a + 1));
      if (limit < 0 || r < limit) cands.push_back({r, j, a});
    }
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Cand& x, const Cand& y) { return x.r < y.r; });
  const double far = 16 * std::max(std::abs(s.back()), 1.0) * (k + 1);
  const double x0 = lower_endpoint(model);
  for (const auto& c : cands) {
    const double mj = s[c.j];
    long wend = std::lower_bound(s.begin(), s.end(), (k + 1) * mj) - s.begin();
    long below = c.j - h + c.a;
    long win = std::max(0L, (wend - c.j - 1) - c.a + 1);
    std::vector<std::size_t> idx;
    for (long i = 0; i < below; ++i) idx.push_back(i);
    for (long i = c.j + 1; i < c.j + 1 + win; ++i) idx.push_back(i);
    for (long i = n - 1; static_cast<long>(idx.size()) < c.r && i >= wend; --i)
      idx.push_back(i);
    if (static_cast<long>(idx.size()) != c.r) continue;
    std::vector<double> val(idx.size());
    for (long i = 0; i < c.r; ++i)
      val[i] = i < c.a ? x0 + kPlacementOffset * mj * (i + 1) / n
                       : far * std::pow(2.0, static_cast<double>(i - c.a));
    auto t = altered(s, idx, val, idx.size());
    if (is_broken(t, model, spec, Direction::Explosion)) return static_cast<int>(c.r);
  }
  return -1;
}

int implosion_ld(const std::vector<double>& s, const Model& model, const EstimatorSpec& spec) {
  const double m = median_sorted(s, spec.convention);
  const std::size_t n = s.size();
  std::vector<std::size_t> by_dist(n), by_top(n);
  std::iota(by_dist.begin(), by_dist.end(), 0);
  std::iota(by_top.begin(), by_top.end(), 0);
  auto dist = [&](std::size_t i) {
    return s[i] > 0 ? std::abs(std::log(s[i] / m)) : std::numeric_limits<double>::infinity();
  };
  std::stable_sort(by_dist.begin(), by_dist.end(),
                   [&](std::size_t a, std::size_t b) { return dist(a) > dist(b); });
  std::reverse(by_top.begin(), by_top.end());
  std::vector<double> val(n, m);
  int best = -1;
  for (auto* order : {&by_dist, &by_top}) {
    int b = first_true(static_cast<int>(n) - 1, [&](int bb) {
      auto t = altered(s, *order, val, bb);
      return is_broken(t, model, spec, Direction::Implosion);
    });
    if (b >= 0 && (best < 0 || b < best)) best = b;
  }
  return best;
}

int explosion_pe(const std::vector<double>& s, const Model& model, const EstimatorSpec& spec) {
  auto q = pe_quartiles(s, spec.convention);
  std::vector<std::size_t> cand;
  for (std::size_t i = s.size(); i-- > 0;)
    if (s[i] > q.q2 && s[i] <= q.q3) cand.push_back(i);
  // s[n/2] leaves Q2 unchanged under every convention; Q2 itself helps when
  // 2*Q2 falls below s[n/2]
  int best = -1;
  for (double target : {s[s.size() / 2], q.q2}) {
    std::vector<double> val(cand.size(), target);
    int b = first_true(static_cast<int>(cand.size()), [&](int bb) {
      auto t = altered(s, cand, val, bb);
      return is_broken(t, model, spec, Direction::Explosion);
    });
    if (b >= 0 && (best < 0 || b < best)) best = b;
  }
  // fallback: collapse the whole band from the lower median to Q3 onto s[n/2]
  const std::size_t n = s.size();
  const double top = s[n / 2];
  if (top > 0) {
    std::vector<std::size_t> idx;
    for (std::size_t i = (n - 1) / 2; i < n && s[i] <= q.q3; ++i)
      if (s[i] != top) idx.push_back(i);
    int cost = static_cast<int>(idx.size());
    if (best < 0 || cost < best) {
      auto t = altered(s, idx, std::vector<double>(idx.size(), top), idx.size());
      if (is_broken(t, model, spec, Direction::Explosion)) best = cost;
    }
  }
  return best;
}

// PE: move the j lowest points up to Q3.  Q3 keeps its value and Q2 climbs
// j order statistics; finish with the fixed-median construction.
int explosion_pe_shift(const std::vector<double>& s, const Model& model,
                       const EstimatorSpec& spec, int limit) {
  const auto q = pe_quartiles(s, spec.convention);
  const int n = static_cast<int>(s.size());
  int best = -1;
  for (int j = 1; j < n / 2 && (limit < 0 || j < limit) && (best < 0 || j < best); ++j) {
    std::vector<double> t(s.begin() + j, s.end());
    t.insert(t.end(), j, q.q3);
    std::sort(t.begin(), t.end());
    int rest = is_broken(t, model, spec, Direction::Explosion) ? 0 : explosion_pe(t, model, spec);
    if (rest >= 0 && (best < 0 || j + rest < best)) best = j + rest;
  }
  return best;
}

}  // namespace

std::vector<Direction> breakdown_directions(const Model& model, const EstimatorSpec& spec) {
  if (spec.kind == EstimatorKind::PE) return {Direction::Explosion};
  auto b = quotient_branch(model.family, spec.dispersion(), spec.restricted);
  bool shape_family = model.family == Family::GPD || model.family == Family::GEVD;
  bool low_end = shape_family && (b.increasing ? spec.restricted : true);
  if (low_end) return {Direction::Explosion, Direction::Implosion};
  return {Direction::Explosion};
}

bool is_broken(std::span<const double> s, const Model& model, const EstimatorSpec& spec,
               Direction dir) {
  check_supported(model, spec);
  if (spec.kind == EstimatorKind::PE) {
    if (model.family == Family::Weibull) return false;  // valid for all Q3 > Q2 > 0
    auto q = pe_quartiles(s, spec.convention);
    auto e = pickands_from_quartiles(model.family, q.q2, q.q3, spec.restricted);
    return !e.valid();
  }
  const Dispersion d = spec.dispersion();
  const double m = median_sorted(s, spec.convention);
  if (!(m > 0)) return dir == Direction::Explosion;
  auto b = quotient_branch(model.family, d, spec.restricted);
  if (dir == Direction::Explosion) {
    double qb = has_zero_endpoint(model.family) ? b.q_hi - kEndpointSlack : b.q_hi;
    return dispersion_at_least(s, d, m, qb * m);
  }
  return dispersion_at_most(s, d, m, b.q_lo * m);
}

int min_alterations(std::span<const double> x, const Model& model, const EstimatorSpec& spec,
                    Direction dir, AttackSet attacks) {
  check_supported(model, spec);
  auto s = sorted_copy(x);
  if (is_broken(s, model, spec, dir)) return 0;
  if (spec.kind == EstimatorKind::PE) {
    if (model.family == Family::Weibull || dir != Direction::Explosion) return -1;
    int best = explosion_pe(s, model, spec);
    if (attacks == AttackSet::ShiftMedian) {
      int b = explosion_pe_shift(s, model, spec, best);
      if (b >= 0 && (best < 0 || b < best)) best = b;
    }
    return best;
  }
  if (dir == Direction::Implosion) return implosion_ld(s, model, spec);
  int best = explosion_ld(s, model, spec);
  if (attacks == AttackSet::ShiftMedian && spec.kind == EstimatorKind::MedkMAD &&
      has_zero_endpoint(model.family)) {
    int b = explosion_shift(s, model, spec, best);
    if (b >= 0 && (best < 0 || b < best)) best = b;
  }
  return best;
}

AlterationOutcome min_alterations_any(std::span<const double> x, const Model& model,
                                      const EstimatorSpec& spec, AttackSet attacks) {
  AlterationOutcome out;
  for (Direction dir : breakdown_directions(model, spec)) {
    int c = min_alterations(x, model, spec, dir, attacks);
    if (c >= 0 && (out.count < 0 || c < out.count)) {
      out.count = c;
      out.direction = dir;
    }
  }
  return out;
}

int exhaustive_min_alterations(std::span<const double> x, const Model& model,
                               const EstimatorSpec& spec, Direction dir,
                               std::span<const double> values, int max_size,
                               bool keep_median) {
  auto s = sorted_copy(x);
  const double m0 = median_sorted(s, spec.convention);
  const int n = static_cast<int>(s.size());
  const int V = static_cast<int>(values.size());
  if (is_broken(s, model, spec, dir)) return 0;
  for (int size = 1; size <= std::min(max_size, n); ++size) {
    std::vector<int> pick(size);
    std::iota(pick.begin(), pick.end(), 0);
    for (;;) {
      // replacement values: non-decreasing index tuples (multisets)
      std::vector<int> vi(size, 0);
      for (;;) {
        std::vector<double> t = s;
        for (int j = 0; j < size; ++j) t[pick[j]] = values[vi[j]];
        std::sort(t.begin(), t.end());
        bool allowed = !keep_median || median_sorted(t, spec.convention) == m0;
        if (allowed && is_broken(t, model, spec, dir)) return size;
        int p = size - 1;
        while (p >= 0 && vi[p] == V - 1) --p;
        if (p < 0) break;
        ++vi[p];
        for (int j = p + 1; j < size; ++j) vi[j] = vi[p];
      }
      int p = size - 1;
      while (p >= 0 && pick[p] == n - size + p) --p;
      if (p < 0) break;
      ++pick[p];
      for (int j = p + 1; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return -1;
}

}  // namespace rbp
