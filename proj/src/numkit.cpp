#include "ssc/numkit.hpp"

namespace ssc {

namespace {

// k-means++ seeding: first centre uniform, then proportional to D^2.
Matrix seed_centroids(const Matrix& points, int k, CounterRng& rng) {
  const Index n = points.rows();
  Matrix centroids(k, points.cols());
  centroids.row(0) = points.row(static_cast<Index>(rng.uniform_int(n)));
  Vector dist2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Index pick = 0;
    if (total <= 0.0) {
      pick = static_cast<Index>(rng.uniform_int(n));
    } else {
      double target = rng.uniform() * total;
      for (pick = 0; pick + 1 < n; ++pick) {
        target -= dist2(pick);
        if (target < 0.0) break;
      }
    }
    centroids.row(c) = points.row(pick);
    dist2 = dist2.cwiseMin(
        (points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }
  return centroids;
}

double assign(const Matrix& points, const Matrix& centroids,
              std::vector<int>& labels, Vector& best_dist) {
  const Index n = points.rows();
  double inertia = 0.0;
  for (Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Index c = 0; c < centroids.rows(); ++c) {
      const double d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    best_dist(i) = best;
    inertia += best;
  }
  return inertia;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, const KMeansOptions& opts) {
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (points.rows() < k) throw std::invalid_argument("kmeans: fewer points than k");
  const Index n = points.rows();
  CounterRng base(opts.seed);

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    CounterRng rng = base.split(static_cast<std::uint64_t>(restart));
    Matrix centroids = seed_centroids(points, k, rng);
    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    Vector dist(n);
    std::vector<double> history;
    double inertia = assign(points, centroids, labels, dist);
    history.push_back(inertia);
    for (int iter = 0; iter < opts.max_iter; ++iter) {
      Matrix sums = Matrix::Zero(k, points.cols());
      std::vector<int> counts(static_cast<std::size_t>(k), 0);
      for (Index i = 0; i < n; ++i) {
        const int c = labels[static_cast<std::size_t>(i)];
        sums.row(c) += points.row(i);
        ++counts[static_cast<std::size_t>(c)];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
          centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
          continue;
        }
        // Empty cluster: move it onto the worst-served point.
        Index far = 0;
        dist.maxCoeff(&far);
        centroids.row(c) = points.row(far);
        dist(far) = 0.0;
      }
      std::vector<int> previous = labels;
      const double next = assign(points, centroids, labels, dist);
      history.push_back(next);
      inertia = next;
      if (labels == previous) break;
    }
    if (inertia < best.inertia) {
      best.labels = std::move(labels);
      best.centroids = centroids;
      best.inertia = inertia;
      best.history = std::move(history);
    }
  }
  return best;
}

}  // namespace ssc
