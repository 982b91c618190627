#pragma once

// Verification metrics (FAR/FRR, EER, AUC, histograms), the 2-D PCA
// projection used for embedding plots, and the retrieval metrics mAP@100 and
// GAP.
//
// Scores are similarities: higher means "same identity". Histograms of
// cosine distance use d = 1 - s.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace lmcot {

struct ScoredPairs {
  std::vector<double> genuine;
  std::vector<double> impostor;
};

struct SweepPoint {
  double threshold;
  double far;
  double frr;
};

/// FAR(t) = share of impostor scores >= t, FRR(t) = share of genuine scores < t.
std::vector<SweepPoint> far_frr_sweep(const ScoredPairs& pairs,
                                      const std::vector<double>& thresholds);

struct EerResult {
  double eer;
  double threshold;
};

/// Equal error rate. FAR and FRR are evaluated at every distinct score plus
/// one point above the maximum; the crossing is linearly interpolated between
/// the bracketing grid points. A run of grid points with FAR == FRR reports
/// the midpoint threshold of the run. Throws InputError on an empty side.
EerResult eer(const ScoredPairs& pairs);

/// P(genuine > impostor) + 0.5 P(tie), computed from mid-ranks.
double auc(const ScoredPairs& pairs);

struct HistogramRange {
  double lo;
  double hi;
};

/// Counts over `bins` equal-width bins on [lo, hi]; hi itself falls in the
/// last bin, scores outside the range are skipped.
std::vector<std::size_t> histogram(const std::vector<double>& scores, std::size_t bins,
                                   HistogramRange range);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
/// 1 - a.b for unit vectors, in [0, 2].
double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct PcaOptions {
  double tolerance = 1e-9;
  int max_iterations = 10000;
};

/// Mean-centred projection onto the two leading covariance eigenvectors,
/// found by power iteration with deflation. Each eigenvector's
/// largest-magnitude coordinate is made positive. Throws InputError if the
/// data has fewer than 2 columns or no rows.
Eigen::MatrixXd pca2(const Eigen::MatrixXd& data, PcaOptions opts = {});

/// One query's ranked predictions (best first) and how many relevant gallery
/// items exist for it.
struct RankedQuery {
  std::vector<bool> relevant;
  std::size_t num_relevant = 0;
};

/// Mean over queries of (1 / min(m_q, 100)) sum_{k <= min(n_q, 100)} P_q(k) rel_q(k).
/// Queries with m_q == 0 do not count toward Q. Returns 0 when Q == 0.
double map_at_100(const std::vector<RankedQuery>& queries);

struct Prediction {
  double confidence;
  bool correct;
};

/// Global average precision: predictions sorted by confidence (descending,
/// stable on ties), sum of P(i) rel(i) divided by the number of in-gallery
/// queries. Throws InputError if in_gallery_queries == 0.
double gap(const std::vector<Prediction>& predictions, std::size_t in_gallery_queries);

/// "threshold,far,frr" with a header row.
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& sweep);

/// "bin_lo,bin_hi,genuine,impostor" with a header row.
void write_histogram_csv(std::ostream& out, HistogramRange range,
                         const std::vector<std::size_t>& genuine,
                         const std::vector<std::size_t>& impostor);

}  // namespace lmcot
