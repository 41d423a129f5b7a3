#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "avc/audio.hpp"
#include "avc/dataset.hpp"

namespace avc {

// Frame energies sqrt(mean(s^2)) over centered, zero-padded frames.
struct RmseVector {
  std::vector<double> values;
  int frame_length = 2048;
  int hop = 512;
};

RmseVector frame_rmse(const MonoClip& clip, int frame_length = 2048,
                      int hop = 512);

struct KmeansOptions {
  int k = 2;
  uint64_t seed = 0;
  int max_iter = 300;
  int n_init = 10;
};

struct ClusterModel {
  std::vector<std::vector<double>> centroids;
  std::vector<int> assignments;
  double inertia = 0.0;
  uint64_t seed = 0;
  std::vector<double> iteration_inertia;  // winning restart, per Lloyd pass
  std::vector<double> restart_inertias;   // final inertia of every restart
};

// Lloyd's algorithm with k-means++ seeding, squared Euclidean distance,
// best of n_init restarts by inertia. Empty clusters are re-seeded at the
// point farthest from its assigned centroid.
ClusterModel kmeans(const std::vector<std::vector<double>>& vectors,
                    const KmeansOptions& options = {});

// One assignment pass against fixed centroids (convergence checks).
std::vector<int> assign_clusters(
    const std::vector<std::vector<double>>& vectors,
    const std::vector<std::vector<double>>& centroids);

enum class QualityLabel { good, bad };

const char* to_string(QualityLabel label);

// Cluster with the highest grand-mean member energy -> good; ties broken
// toward the larger-centroid-norm cluster.
std::vector<QualityLabel> label_clusters(
    const ClusterModel& model,
    const std::vector<std::vector<double>>& vectors);

using ClipLoader = std::function<MonoClip(const SampleRecord&)>;

struct QualityFilterResult {
  // Non-target records (order preserved) plus good target records.
  std::vector<SampleRecord> kept;
  // Bad target records, original order.
  std::vector<SampleRecord> rejected;
  ClusterModel model;
  // Per target-class record, aligned: input index, RMSE vector, cluster,
  // mean RMSE, label.
  std::vector<size_t> target_indices;
  std::vector<std::vector<double>> target_vectors;
  std::vector<int> target_cluster;
  std::vector<double> target_mean_rmse;
  std::vector<QualityLabel> target_label;
};

// The sample-rejection stage: frame_rmse each target-class clip, cluster with
// k=2, keep the good cluster. Other classes pass through untouched.
QualityFilterResult filter_by_quality(const std::vector<SampleRecord>& records,
                                      ClassLabel target_class, uint64_t seed,
                                      const ClipLoader& load);

}  // namespace avc
