#include "lmcot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "lmcot/errors.hpp"

namespace lmcot {

namespace {

void require_both_sides(const ScoredPairs& pairs) {
  if (pairs.genuine.empty() || pairs.impostor.empty())
    throw InputError("genuine and impostor scores must both be non-empty");
}

std::vector<double> sorted_copy(const std::vector<double>& v) {
  std::vector<double> out = v;
  std::sort(out.begin(), out.end());
  return out;
}

/// Share of sorted values >= t.
double share_at_or_above(const std::vector<double>& sorted, double t) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), t);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

/// Share of sorted values < t.
double share_below(const std::vector<double>& sorted, double t) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), t);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

}  // namespace

std::vector<SweepPoint> far_frr_sweep(const ScoredPairs& pairs,
                                      const std::vector<double>& thresholds) {
  require_both_sides(pairs);
  const auto genuine = sorted_copy(pairs.genuine);
  const auto impostor = sorted_copy(pairs.impostor);
  std::vector<SweepPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds)
    out.push_back({t, share_at_or_above(impostor, t), share_below(genuine, t)});
  return out;
}

EerResult eer(const ScoredPairs& pairs) {
  require_both_sides(pairs);
  const auto genuine = sorted_copy(pairs.genuine);
  const auto impostor = sorted_copy(pairs.impostor);

  std::vector<double> grid;
  grid.reserve(genuine.size() + impostor.size() + 1);
  std::merge(genuine.begin(), genuine.end(), impostor.begin(), impostor.end(),
             std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.push_back(std::nextafter(grid.back(), std::numeric_limits<double>::infinity()));

  std::vector<SweepPoint> sweep;
  sweep.reserve(grid.size());
  for (double t : grid)
    sweep.push_back({t, share_at_or_above(impostor, t), share_below(genuine, t)});

  // FAR - FRR is 1 at the lowest score and -1 above the highest.
  std::size_t k = 0;
  while (sweep[k].far - sweep[k].frr > 0.0) ++k;
  if (sweep[k].far == sweep[k].frr) {
    std::size_t last = k;
    while (last + 1 < sweep.size() && sweep[last + 1].far == sweep[last + 1].frr) ++last;
    return {sweep[k].far, 0.5 * (sweep[k].threshold + sweep[last].threshold)};
  }
  const SweepPoint& a = sweep[k - 1];
  const SweepPoint& b = sweep[k];
  const double da = a.far - a.frr;
  const double db = b.far - b.frr;
  const double w = da / (da - db);
  return {a.far + w * (b.far - a.far), a.threshold + w * (b.threshold - a.threshold)};
}

double auc(const ScoredPairs& pairs) {
  require_both_sides(pairs);
  struct Entry {
    double score;
    bool genuine;
  };
  std::vector<Entry> all;
  all.reserve(pairs.genuine.size() + pairs.impostor.size());
  for (double g : pairs.genuine) all.push_back({g, true});
  for (double i : pairs.impostor) all.push_back({i, false});
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.score < b.score; });

  // Sum of 1-based mid-ranks of the genuine scores.
  double rank_sum = 0.0;
  std::size_t start = 0;
  while (start < all.size()) {
    std::size_t end = start;
    std::size_t genuine_in_run = 0;
    while (end < all.size() && all[end].score == all[start].score) {
      genuine_in_run += all[end].genuine ? 1 : 0;
      ++end;
    }
    const double mid_rank = 0.5 * static_cast<double>(start + 1 + end);
    rank_sum += mid_rank * static_cast<double>(genuine_in_run);
    start = end;
  }
  const auto n_gen = static_cast<double>(pairs.genuine.size());
  const auto n_imp = static_cast<double>(pairs.impostor.size());
  const double u = rank_sum - n_gen * (n_gen + 1.0) / 2.0;
  return u / (n_gen * n_imp);
}

std::vector<std::size_t> histogram(const std::vector<double>& scores, std::size_t bins,
                                   HistogramRange range) {
  if (bins == 0) throw InputError("histogram needs at least one bin");
  if (!(range.hi > range.lo)) throw InputError("histogram range must satisfy lo < hi");
  std::vector<std::size_t> counts(bins, 0);
  const double width = range.hi - range.lo;
  for (double x : scores) {
    if (!(x >= range.lo && x <= range.hi)) continue;
    auto bin = static_cast<std::size_t>((x - range.lo) / width * static_cast<double>(bins));
    counts[std::min(bin, bins - 1)] += 1;
  }
  return counts;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw InputError("vector dimensions differ");
  return a.dot(b);
}

double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return 1.0 - cosine_similarity(a, b);
}

namespace {

struct Eigenpair {
  double value;
  Eigen::VectorXd vector;
};

Eigen::VectorXd orthogonal_start(const Eigen::VectorXd& avoid) {
  // First standard basis vector with a usable component orthogonal to `avoid`.
  for (Eigen::Index k = 0; k < avoid.size(); ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(avoid.size(), k);
    e -= avoid.dot(e) * avoid;
    if (e.norm() > 1e-6) return e.normalized();
  }
  return Eigen::VectorXd::Unit(avoid.size(), 0);
}

Eigenpair power_iterate(const Eigen::MatrixXd& cov, const Eigen::VectorXd* avoid,
                        const PcaOptions& opts) {
  const Eigen::Index dim = cov.rows();
  // Start from the row of largest norm, which cannot be orthogonal to the
  // dominant eigenvector unless the matrix is zero.
  Eigen::Index best = 0;
  cov.rowwise().norm().maxCoeff(&best);
  Eigen::VectorXd v = cov.row(best).transpose();
  if (v.norm() < 1e-300)
    v = avoid != nullptr ? orthogonal_start(*avoid) : Eigen::VectorXd::Unit(dim, 0);
  v.normalize();

  for (int it = 0; it < opts.max_iterations; ++it) {
    Eigen::VectorXd next = cov * v;
    const double norm = next.norm();
    if (norm < 1e-300) {
      // Remaining spectrum is zero; any direction orthogonal to the first works.
      if (avoid != nullptr) v = orthogonal_start(*avoid);
      return {0.0, v};
    }
    next /= norm;
    if (next.dot(v) < 0.0) next = -next;
    const double change = (next - v).norm();
    v = next;
    if (change < opts.tolerance) break;
  }
  return {v.dot(cov * v), v};
}

void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0) v = -v;
}

}  // namespace

Eigen::MatrixXd pca2(const Eigen::MatrixXd& data, PcaOptions opts) {
  if (data.cols() < 2) throw InputError("pca2 needs at least 2 dimensions");
  if (data.rows() == 0) throw InputError("pca2 needs at least one row");
  if (!data.allFinite()) throw InputError("non-finite data");
  const Eigen::MatrixXd centred = data.rowwise() - data.colwise().mean();
  const double denom = data.rows() > 1 ? static_cast<double>(data.rows() - 1) : 1.0;
  const Eigen::MatrixXd cov = centred.transpose() * centred / denom;

  Eigenpair first = power_iterate(cov, nullptr, opts);
  const Eigen::MatrixXd deflated = cov - first.value * first.vector * first.vector.transpose();
  Eigenpair second = power_iterate(deflated, &first.vector, opts);
  fix_sign(first.vector);
  fix_sign(second.vector);

  Eigen::MatrixXd basis(data.cols(), 2);
  basis.col(0) = first.vector;
  basis.col(1) = second.vector;
  return centred * basis;
}

double map_at_100(const std::vector<RankedQuery>& queries) {
  constexpr std::size_t kCutoff = 100;
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& q : queries) {
    if (q.num_relevant == 0) continue;
    const std::size_t depth = std::min(q.relevant.size(), kCutoff);
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t k = 0; k < depth; ++k) {
      if (!q.relevant[k]) continue;
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
    total += sum / static_cast<double>(std::min(q.num_relevant, kCutoff));
    ++counted;
  }
  return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

double gap(const std::vector<Prediction>& predictions, std::size_t in_gallery_queries) {
  if (in_gallery_queries == 0) throw InputError("GAP needs at least one in-gallery query");
  std::vector<Prediction> sorted = predictions;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Prediction& a, const Prediction& b) {
    return a.confidence > b.confidence;
  });
  std::size_t correct = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!sorted[i].correct) continue;
    ++correct;
    sum += static_cast<double>(correct) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(in_gallery_queries);
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& sweep) {
  out << "threshold,far,frr\n";
  const auto old_precision = out.precision(17);
  for (const auto& p : sweep) out << p.threshold << ',' << p.far << ',' << p.frr << '\n';
  out.precision(old_precision);
}

void write_histogram_csv(std::ostream& out, HistogramRange range,
                         const std::vector<std::size_t>& genuine,
                         const std::vector<std::size_t>& impostor) {
  if (genuine.size() != impostor.size()) throw InputError("histogram bin counts differ");
  out << "bin_lo,bin_hi,genuine,impostor\n";
  const auto old_precision = out.precision(17);
  const double width = (range.hi - range.lo) / static_cast<double>(genuine.size());
  for (std::size_t b = 0; b < genuine.size(); ++b) {
    const double lo = range.lo + width * static_cast<double>(b);
    const double hi = b + 1 == genuine.size() ? range.hi : lo + width;
    out << lo << ',' << hi << ',' << genuine[b] << ',' << impostor[b] << '\n';
  }
  out.precision(old_precision);
}

}  // namespace lmcot
