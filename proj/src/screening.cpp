#include "stabgknock/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stabgknock/parallel.hpp"

namespace sgk {

namespace {

struct GramSubset {
  // Shared read-only view of the problem in Gram form.
  Eigen::MatrixXd G;
  Eigen::VectorXd c;
  double yty = 0;
  int n = 0;
  double step = 0;  // 1 / lambda_max(G)

  int p() const { return static_cast<int>(c.size()); }
};

GramSubset make_gram_subset(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  GramSubset gs;
  gs.G.noalias() = x.transpose() * x;
  gs.c.noalias() = x.transpose() * y;
  gs.yty = y.squaredNorm();
  gs.n = static_cast<int>(x.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gs.G, Eigen::EigenvaluesOnly);
  double lmax = es.eigenvalues().maxCoeff();
  gs.step = lmax > 0 ? 1.0 / lmax : 1.0;
  return gs;
}

struct RestrictedFit {
  Eigen::VectorXd beta;  // coefficients over the support, same order
  double rss = 0;
  bool rank_deficient = false;
};

RestrictedFit refit(const GramSubset& gs, const IndexSet& support) {
  RestrictedFit fit;
  if (support.empty()) {
    fit.rss = gs.yty;
    return fit;
  }
  Eigen::MatrixXd gss = gs.G(support, support);
  Eigen::VectorXd cs = gs.c(support);
  Eigen::LLT<Eigen::MatrixXd> llt(gss);
  if (llt.info() == Eigen::Success) {
    fit.beta = llt.solve(cs);
  } else {
    fit.beta = gss.completeOrthogonalDecomposition().solve(cs);
    fit.rank_deficient = true;
  }
  fit.rss = gs.yty - cs.dot(fit.beta);
  if (fit.rss < 0) fit.rss = 0;
  return fit;
}

// Top-k projection. Ties in |value| break by larger |gradient|, then index.
IndexSet top_k_support(const Eigen::VectorXd& v, const Eigen::VectorXd& grad, int k) {
  const int p = static_cast<int>(v.size());
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  std::nth_element(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    double va = std::abs(v[a]), vb = std::abs(v[b]);
    if (va != vb) return va > vb;
    double ga = std::abs(grad[a]), gb = std::abs(grad[b]);
    if (ga != gb) return ga > gb;
    return a < b;
  });
  IndexSet support(idx.begin(), idx.begin() + k);
  std::sort(support.begin(), support.end());
  return support;
}

struct LocalState {
  IndexSet support;
  RestrictedFit fit;
};

Eigen::VectorXd full_gradient(const GramSubset& gs, const LocalState& st) {
  Eigen::VectorXd g = gs.c;
  for (size_t m = 0; m < st.support.size(); ++m)
    g.noalias() -= gs.G.col(st.support[m]) * st.fit.beta[m];
  return g;
}

// Hard-thresholding pursuit: gradient step with step size 1/lambda_max,
// top-k projection, exact refit on the projected support.
LocalState iht(const GramSubset& gs, IndexSet start, int k, int max_iterations, int* iterations) {
  LocalState st{std::move(start), refit(gs, IndexSet{})};
  st.fit = refit(gs, st.support);
  for (int it = 0; it < max_iterations; ++it) {
    ++*iterations;
    Eigen::VectorXd grad = full_gradient(gs, st);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(gs.p());
    for (size_t m = 0; m < st.support.size(); ++m) v[st.support[m]] = st.fit.beta[m];
    v.noalias() += gs.step * grad;
    IndexSet next = top_k_support(v, grad, k);
    if (next == st.support) break;
    RestrictedFit next_fit = refit(gs, next);
    if (next_fit.rss > st.fit.rss + 1e-9 * (1.0 + st.fit.rss)) break;
    st.support = std::move(next);
    st.fit = std::move(next_fit);
  }
  return st;
}

// Exhaustive single-swap descent. For the current support S the best
// (drop i, add j) move is found in O(p·k) per candidate i using rank-one
// identities on the restricted normal equations:
//   RSS(S∖i)        = RSS(S) + β_i² / M_ii,            M = (G_SS)⁻¹
//   x_jᵀr(S∖i)      = ρ_j + (β_i / M_ii)·Γ_{j,i},      Γ = G_{:,S} M
//   x_jᵀ(I−P_{S∖i})x_j = d_j + Γ_{j,i}² / M_ii
// and the add-back gain is the squared correlation over that denominator.
void swap_descent(const GramSubset& gs, LocalState& st, int max_moves, int* moves,
                  bool* rank_flag) {
  const int p = gs.p();
  const int k = static_cast<int>(st.support.size());
  if (k == 0 || k >= p) return;

  while (*moves < max_moves) {
    Eigen::MatrixXd gss = gs.G(st.support, st.support);
    Eigen::LLT<Eigen::MatrixXd> llt(gss);
    if (llt.info() != Eigen::Success) {
      *rank_flag = true;
      return;  // collinear support: keep the pseudo-inverse fit as is
    }
    Eigen::MatrixXd m_inv = llt.solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::VectorXd beta = llt.solve(gs.c(st.support));
    double rss = gs.yty - gs.c(st.support).dot(beta);

    Eigen::MatrixXd g_cols = gs.G(Eigen::all, st.support);  // p×k
    Eigen::MatrixXd gamma = g_cols * m_inv;                 // p×k
    Eigen::VectorXd rho = gs.c - g_cols * beta;             // x_jᵀ residual
    Eigen::VectorXd d = gs.G.diagonal() - (gamma.array() * g_cols.array()).rowwise().sum().matrix();

    std::vector<char> in_support(p, 0);
    for (int s : st.support) in_support[s] = 1;

    double best_gain = 0;
    int best_drop = -1, best_add = -1;
    for (int ii = 0; ii < k; ++ii) {
      const double mii = m_inv(ii, ii);
      if (!(mii > 0)) {
        *rank_flag = true;
        continue;
      }
      const double drop_cost = beta[ii] * beta[ii] / mii;
      const double scale = beta[ii] / mii;
      for (int j = 0; j < p; ++j) {
        if (in_support[j]) continue;
        const double dj = d[j] + gamma(j, ii) * gamma(j, ii) / mii;
        if (dj <= 1e-10 * std::max(1.0, gs.G(j, j))) continue;
        const double rj = rho[j] + scale * gamma(j, ii);
        const double gain = rj * rj / dj - drop_cost;
        if (gain > best_gain) {
          best_gain = gain;
          best_drop = ii;
          best_add = j;
        }
      }
    }

    if (best_drop < 0 || best_gain <= 1e-11 * (1.0 + rss)) return;
    st.support[best_drop] = best_add;
    std::sort(st.support.begin(), st.support.end());
    st.fit = refit(gs, st.support);
    ++*moves;
  }
}

ScreenResult finalize(const GramSubset& gs, const LocalState& st) {
  ScreenResult res;
  res.kept = st.support;
  res.beta_k = Eigen::VectorXd::Zero(gs.p());
  for (size_t m = 0; m < st.support.size(); ++m) res.beta_k[st.support[m]] = st.fit.beta[m];
  res.objective = st.fit.rss / (2.0 * gs.n);
  res.rank_deficient_support = st.fit.rank_deficient;
  return res;
}

Eigen::VectorXd correlation_scores(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   bool pearson) {
  const int p = static_cast<int>(x.cols());
  Eigen::VectorXd scores(p);
  for (int j = 0; j < p; ++j)
    scores[j] = pearson ? pearson_correlation(x.col(j), y) : kendall_tau(x.col(j), y);
  return scores;
}

std::vector<int> ranking_from_scores(const Eigen::VectorXd& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    double sa = std::abs(scores[a]), sb = std::abs(scores[b]);
    if (sa != sb) return sa > sb;
    return a < b;
  });
  return order;
}

IndexSet top_k_of_ranking(const std::vector<int>& ranking, int k) {
  IndexSet kept(ranking.begin(), ranking.begin() + std::min<size_t>(k, ranking.size()));
  std::sort(kept.begin(), kept.end());
  return kept;
}

// Pairs strictly out of order in the merged sequence; stable merge so equals
// are not counted.
long long count_inversions(std::vector<double>& v, std::vector<double>& buf, int lo, int hi) {
  if (hi - lo <= 1) return 0;
  int mid = (lo + hi) / 2;
  long long inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  int a = lo, b = mid, out = lo;
  while (a < mid && b < hi) {
    if (v[b] < v[a]) {
      inv += mid - a;
      buf[out++] = v[b++];
    } else {
      buf[out++] = v[a++];
    }
  }
  while (a < mid) buf[out++] = v[a++];
  while (b < hi) buf[out++] = v[b++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return inv;
}

long long tied_pairs(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  long long total = 0;
  size_t i = 0;
  while (i < v.size()) {
    size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    long long t = static_cast<long long>(j - i);
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

}  // namespace

ScreenResult spls_screen(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k,
                         const ScreenOptions& opt, Rng& rng) {
  const int p = static_cast<int>(x.cols());
  if (k < 0) fail_validation("BadSparsity", "k must be nonnegative");
  if (!x.allFinite() || !y.allFinite())
    fail_validation("NonFiniteInput", "screening inputs contain non-finite values");
  k = std::min(k, p);

  GramSubset gs = make_gram_subset(x, y);
  if (k == 0) return finalize(gs, LocalState{IndexSet{}, refit(gs, IndexSet{})});

  // Start 0 warm-starts from the SIS top-k; the rest are random supports.
  std::vector<IndexSet> starts;
  starts.reserve(opt.multistarts);
  starts.push_back(sis_screen(x, y, k));
  for (int s = 1; s < opt.multistarts; ++s)
    starts.push_back(rng.sample_without_replacement(p, k));

  std::vector<ScreenResult> results(starts.size());
  parallel_for(static_cast<int>(starts.size()), [&](int s) {
    int iht_iters = 0, moves = 0;
    bool rank_flag = false;
    LocalState st = iht(gs, starts[s], k, opt.max_iht_iterations, &iht_iters);
    swap_descent(gs, st, opt.max_swap_moves, &moves, &rank_flag);
    results[s] = finalize(gs, st);
    results[s].iht_iterations = iht_iters;
    results[s].swap_moves = moves;
    results[s].rank_deficient_support |= rank_flag;
  });

  int best = 0;
  for (size_t s = 1; s < results.size(); ++s)
    if (results[s].objective < results[best].objective) best = static_cast<int>(s);
  results[best].restarts = static_cast<int>(starts.size());
  return results[best];
}

ScreenResult exhaustive_best_subset(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k) {
  const int p = static_cast<int>(x.cols());
  if (p > 15) fail_validation("TooLarge", "exhaustive enumeration is limited to p <= 15");
  k = std::min(k, p);
  GramSubset gs = make_gram_subset(x, y);

  LocalState best{IndexSet{}, refit(gs, IndexSet{})};
  for (int size = 1; size <= k; ++size) {
    IndexSet comb(size);
    std::iota(comb.begin(), comb.end(), 0);
    for (;;) {
      RestrictedFit fit = refit(gs, comb);
      if (fit.rss < best.fit.rss * (1.0 - 1e-12) - 1e-15) {
        best.support = comb;
        best.fit = fit;
      }
      int pos = size - 1;
      while (pos >= 0 && comb[pos] == p - size + pos) --pos;
      if (pos < 0) break;
      ++comb[pos];
      for (int q = pos + 1; q < size; ++q) comb[q] = comb[q - 1] + 1;
    }
  }
  return finalize(gs, best);
}

IndexSet sis_screen(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k) {
  return top_k_of_ranking(sis_ranking(x, y), k);
}

IndexSet rrcs_screen(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k) {
  return top_k_of_ranking(rrcs_ranking(x, y), k);
}

std::vector<int> sis_ranking(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return ranking_from_scores(correlation_scores(x, y, true));
}

std::vector<int> rrcs_ranking(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return ranking_from_scores(correlation_scores(x, y, false));
}

std::vector<int> spls_ranking(const ScreenResult& res, const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y) {
  const int p = static_cast<int>(x.cols());
  Eigen::VectorXd resid = y - x * res.beta_k;
  Eigen::VectorXd resid_cor = x.transpose() * resid;

  std::vector<int> kept = res.kept;
  std::stable_sort(kept.begin(), kept.end(), [&](int a, int b) {
    double va = std::abs(res.beta_k[a]), vb = std::abs(res.beta_k[b]);
    if (va != vb) return va > vb;
    return a < b;
  });

  std::vector<char> in_kept(p, 0);
  for (int j : res.kept) in_kept[j] = 1;
  std::vector<int> rest;
  rest.reserve(p - kept.size());
  for (int j = 0; j < p; ++j)
    if (!in_kept[j]) rest.push_back(j);
  std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) {
    double va = std::abs(resid_cor[a]), vb = std::abs(resid_cor[b]);
    if (va != vb) return va > vb;
    return a < b;
  });

  kept.insert(kept.end(), rest.begin(), rest.end());
  return kept;
}

double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(a.size());
  Eigen::VectorXd ac = a.array() - a.mean();
  Eigen::VectorXd bc = b.array() - b.mean();
  const double sa = ac.norm(), sb = bc.norm();
  if (sa < 1e-12 * std::sqrt(double(n)) || sb == 0)
    fail_validation("ZeroVariance", "correlation of a constant column is undefined");
  return ac.dot(bc) / (sa * sb);
}

double kendall_tau(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(a.size());
  if (n < 2) fail_validation("DimensionError", "Kendall tau needs n >= 2");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    if (a[i] != a[j]) return a[i] < a[j];
    return b[i] < b[j];
  });

  std::vector<double> bseq(n);
  for (int i = 0; i < n; ++i) bseq[i] = b[order[i]];

  long long a_ties = 0, ab_ties = 0;
  {
    int i = 0;
    while (i < n) {
      int j = i;
      while (j < n && a[order[j]] == a[order[i]]) ++j;
      long long t = j - i;
      a_ties += t * (t - 1) / 2;
      int u = i;
      while (u < j) {
        int v = u;
        while (v < j && bseq[v] == bseq[u]) ++v;
        long long tb = v - u;
        ab_ties += tb * (tb - 1) / 2;
        u = v;
      }
      i = j;
    }
  }
  long long b_ties = tied_pairs(bseq);

  std::vector<double> work = bseq, buf(n);
  long long discordant = count_inversions(work, buf, 0, n);

  const long long total = static_cast<long long>(n) * (n - 1) / 2;
  // concordant − discordant = total − a_ties − (b_ties − ab_ties) − 2·discordant
  const double cd = static_cast<double>(total - a_ties - (b_ties - ab_ties) - 2 * discordant);
  return cd / static_cast<double>(total);
}

}  // namespace sgk
