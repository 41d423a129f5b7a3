#include "avc/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "avc/errors.hpp"
#include "avc/rng.hpp"
#include "avc/util.hpp"

namespace avc {

RmseVector frame_rmse(const MonoClip& clip, int frame_length, int hop) {
  if (clip.samples.empty()) throw InvalidArgument("frame_rmse: empty clip");
  if (frame_length <= 0 || hop <= 0) {
    throw InvalidArgument("frame_rmse: frame_length and hop must be positive");
  }
  const size_t k = static_cast<size_t>(frame_length);
  const size_t h = static_cast<size_t>(hop);
  const size_t n = clip.samples.size();
  const size_t pad = k / 2;
  const size_t n_frames = 1 + n / h;

  RmseVector out;
  out.frame_length = frame_length;
  out.hop = hop;
  out.values.resize(n_frames);
  for (size_t t = 0; t < n_frames; ++t) {
    const int64_t start = static_cast<int64_t>(t * h) - static_cast<int64_t>(pad);
    double acc = 0.0;
    for (size_t i = 0; i < k; ++i) {
      const int64_t idx = start + static_cast<int64_t>(i);
      if (idx >= 0 && idx < static_cast<int64_t>(n)) {
        const double s = clip.samples[static_cast<size_t>(idx)];
        acc += s * s;
      }
    }
    out.values[t] = std::sqrt(acc / static_cast<double>(k));
  }
  return out;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

struct LloydRun {
  std::vector<std::vector<double>> centroids;
  std::vector<int> assignments;
  double inertia = 0.0;
  std::vector<double> iteration_inertia;
};

std::vector<std::vector<double>> kmeanspp_seed(
    const std::vector<std::vector<double>>& vectors, int k, Rng& rng) {
  std::vector<std::vector<double>> centroids;
  centroids.reserve(static_cast<size_t>(k));
  centroids.push_back(vectors[rng.below(vectors.size())]);

  std::vector<double> d2(vectors.size());
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (size_t i = 0; i < vectors.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& ctr : centroids) best = std::min(best, sq_dist(vectors[i], ctr));
      d2[i] = best;
      total += best;
    }
    size_t pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double running = 0.0;
      pick = vectors.size() - 1;
      for (size_t i = 0; i < vectors.size(); ++i) {
        running += d2[i];
        if (u < running) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(vectors.size());  // all points identical
    }
    centroids.push_back(vectors[pick]);
  }
  return centroids;
}

LloydRun lloyd(const std::vector<std::vector<double>>& vectors,
               std::vector<std::vector<double>> centroids, int max_iter) {
  const size_t n = vectors.size();
  const size_t dim = vectors[0].size();
  const size_t k = centroids.size();

  LloydRun run;
  run.assignments.assign(n, -1);
  std::vector<int> prev(n, -1);

  for (int iter = 0; iter < max_iter; ++iter) {
    // assignment step
    double inertia = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (size_t c = 0; c < k; ++c) {
        const double d = sq_dist(vectors[i], centroids[c]);
        if (d < best) {
          best = d;
          best_c = static_cast<int>(c);
        }
      }
      run.assignments[i] = best_c;
      inertia += best;
    }
    run.iteration_inertia.push_back(inertia);

    // update step
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < n; ++i) {
      const auto c = static_cast<size_t>(run.assignments[i]);
      counts[c]++;
      for (size_t d = 0; d < dim; ++d) sums[c][d] += vectors[i][d];
    }
    for (size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // re-seed the empty cluster at the point farthest from its centroid
        double far_d = -1.0;
        size_t far_i = 0;
        for (size_t i = 0; i < n; ++i) {
          const auto ai = static_cast<size_t>(run.assignments[i]);
          const double d = sq_dist(vectors[i], centroids[ai]);
          if (d > far_d) {
            far_d = d;
            far_i = i;
          }
        }
        centroids[c] = vectors[far_i];
      } else {
        for (size_t d = 0; d < dim; ++d) {
          centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
        }
      }
    }

    if (run.assignments == prev) break;
    prev = run.assignments;
  }

  run.centroids = std::move(centroids);
  run.inertia = 0.0;
  for (size_t i = 0; i < n; ++i) {
    run.inertia +=
        sq_dist(vectors[i], run.centroids[static_cast<size_t>(run.assignments[i])]);
  }
  return run;
}

}  // namespace

ClusterModel kmeans(const std::vector<std::vector<double>>& vectors,
                    const KmeansOptions& options) {
  if (options.k < 1) throw InvalidArgument("kmeans: k must be >= 1");
  if (vectors.size() < static_cast<size_t>(options.k)) {
    throw InvalidArgument("kmeans: fewer vectors (" +
                          std::to_string(vectors.size()) + ") than clusters (" +
                          std::to_string(options.k) + ")");
  }
  for (const auto& v : vectors) {
    if (v.size() != vectors[0].size()) {
      throw InvalidArgument("kmeans: vectors have mixed dimensions");
    }
  }

  Rng rng(options.seed);
  ClusterModel best;
  best.seed = options.seed;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, options.n_init); ++r) {
    auto seeds = kmeanspp_seed(vectors, options.k, rng);
    LloydRun run = lloyd(vectors, std::move(seeds), options.max_iter);
    best.restart_inertias.push_back(run.inertia);
    if (run.inertia < best.inertia) {
      best.inertia = run.inertia;
      best.centroids = std::move(run.centroids);
      best.assignments = std::move(run.assignments);
      best.iteration_inertia = std::move(run.iteration_inertia);
    }
  }
  return best;
}

std::vector<int> assign_clusters(
    const std::vector<std::vector<double>>& vectors,
    const std::vector<std::vector<double>>& centroids) {
  std::vector<int> out(vectors.size(), 0);
  for (size_t i = 0; i < vectors.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < centroids.size(); ++c) {
      const double d = sq_dist(vectors[i], centroids[c]);
      if (d < best) {
        best = d;
        out[i] = static_cast<int>(c);
      }
    }
  }
  return out;
}

const char* to_string(QualityLabel label) {
  return label == QualityLabel::good ? "good" : "bad";
}

std::vector<QualityLabel> label_clusters(
    const ClusterModel& model,
    const std::vector<std::vector<double>>& vectors) {
  const size_t k = model.centroids.size();
  std::vector<double> sum(k, 0.0);
  std::vector<size_t> count(k, 0);
  for (size_t i = 0; i < vectors.size(); ++i) {
    const auto c = static_cast<size_t>(model.assignments[i]);
    for (const double v : vectors[i]) sum[c] += v;
    count[c] += vectors[i].size();
  }
  std::vector<double> mean(k, 0.0);
  for (size_t c = 0; c < k; ++c) {
    mean[c] = count[c] ? sum[c] / static_cast<double>(count[c]) : 0.0;
  }

  size_t good = 0;
  for (size_t c = 1; c < k; ++c) {
    if (mean[c] > mean[good]) {
      good = c;
    } else if (mean[c] == mean[good]) {
      // tie: larger centroid norm wins
      double norm_c = 0.0, norm_g = 0.0;
      for (const double v : model.centroids[c]) norm_c += v * v;
      for (const double v : model.centroids[good]) norm_g += v * v;
      if (norm_c > norm_g) good = c;
    }
  }

  std::vector<QualityLabel> labels(k, QualityLabel::bad);
  labels[good] = QualityLabel::good;
  return labels;
}

QualityFilterResult filter_by_quality(const std::vector<SampleRecord>& records,
                                      ClassLabel target_class, uint64_t seed,
                                      const ClipLoader& load) {
  QualityFilterResult result;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].label == target_class) result.target_indices.push_back(i);
  }
  if (result.target_indices.size() < 2) {
    throw InvalidArgument("filter_by_quality: need at least 2 records of class " +
                          std::string(to_string(target_class)) + ", have " +
                          std::to_string(result.target_indices.size()));
  }

  std::vector<std::vector<double>> vectors(result.target_indices.size());
  parallel_for(result.target_indices.size(), 0, [&](size_t j) {
    vectors[j] = frame_rmse(load(records[result.target_indices[j]])).values;
  });

  KmeansOptions opts;
  opts.seed = seed;
  result.model = kmeans(vectors, opts);
  const auto cluster_labels = label_clusters(result.model, vectors);

  result.target_cluster = result.model.assignments;
  result.target_mean_rmse.resize(vectors.size());
  result.target_label.resize(vectors.size());
  for (size_t j = 0; j < vectors.size(); ++j) {
    double acc = 0.0;
    for (const double v : vectors[j]) acc += v;
    result.target_mean_rmse[j] = vectors[j].empty() ? 0.0 : acc / vectors[j].size();
    result.target_label[j] =
        cluster_labels[static_cast<size_t>(result.model.assignments[j])];
  }

  size_t next_target = 0;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].label != target_class) {
      result.kept.push_back(records[i]);
      continue;
    }
    if (result.target_label[next_target] == QualityLabel::good) {
      result.kept.push_back(records[i]);
    } else {
      result.rejected.push_back(records[i]);
    }
    ++next_target;
  }
  result.target_vectors = std::move(vectors);
  return result;
}

}  // namespace avc
