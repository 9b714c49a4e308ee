#pragma once

#include "advis/knn.hpp"
#include "advis/spectral.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

namespace advis {

enum class Symmetrization { mutual_or, directed };

Symmetrization parse_symmetrization(const std::string& s);
std::string to_string(Symmetrization s);

/// Which eigenpairs survive: |lambda|^time >= threshold, at most max_pairs.
struct TruncationPolicy {
  int time = 32;
  double threshold = 1e-12;
  std::size_t max_pairs = 100;
  /// Above this size the Lanczos solver replaces the dense one.
  std::size_t dense_limit = 1500;
};

/// Markov diffusion on a kNN graph. Reversible (mutual-or) operators answer
/// distance queries from truncated eigenpairs of P; directed operators answer
/// them exactly from rows of P^t.
class DiffusionOperator {
public:
  DiffusionOperator() = default;

  std::size_t size() const { return static_cast<std::size_t>(stationary_.size()); }
  Symmetrization symmetrization() const { return symmetrization_; }

  /// lambda_1 >= |lambda_2| >= ...; empty for directed operators.
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  /// Right eigenvectors of P as columns, pi-weighted unit norm.
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  const Eigen::VectorXd& stationary() const { return stationary_; }
  const Eigen::VectorXd& degrees() const { return degrees_; }
  const SparseMatrix& transition() const { return transition_; }

  double distance(int t, std::size_t i, std::size_t j) const;
  /// Rows are diffusion coordinates at time t; Euclidean distance between
  /// rows equals distance(t, i, j).
  RowMatrix embed(int t) const;

  friend DiffusionOperator build_operator_from_adjacency(const SparseMatrix&, Symmetrization,
                                                         const TruncationPolicy&);
  friend void save_operator(const std::filesystem::path&, const DiffusionOperator&);
  friend DiffusionOperator load_operator(const std::filesystem::path&);

private:
  Eigen::VectorXd spectral_weights(int t) const;
  Eigen::VectorXd transition_row(int t, std::size_t i) const;

  Symmetrization symmetrization_ = Symmetrization::mutual_or;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::VectorXd stationary_;
  Eigen::VectorXd degrees_;
  SparseMatrix transition_;
};

/// 0/1 adjacency from kNN lists: mutual-or gives W_ij = 1 iff j in NN(i) or
/// i in NN(j); directed gives W_ij = 1 iff j in NN(i).
SparseMatrix knn_adjacency(const KnnGraph& graph, Symmetrization mode);

/// Connected components of the undirected graph, or strongly connected
/// components in directed mode.
std::size_t count_components(const SparseMatrix& W, Symmetrization mode);

DiffusionOperator build_operator_from_adjacency(const SparseMatrix& W, Symmetrization mode,
                                                const TruncationPolicy& policy = {});

inline DiffusionOperator build_operator(const KnnGraph& graph, Symmetrization mode,
                                        const TruncationPolicy& policy = {}) {
  return build_operator_from_adjacency(knn_adjacency(graph, mode), mode, policy);
}

std::uint64_t operator_cache_key(const RowMatrix& points, std::size_t k, Symmetrization mode,
                                 const TruncationPolicy& policy);
void save_operator(const std::filesystem::path& path, const DiffusionOperator& op);
DiffusionOperator load_operator(const std::filesystem::path& path);

/// Loads from `cache_dir` when a matching entry exists, otherwise builds and
/// stores. An empty cache_dir disables caching.
DiffusionOperator build_operator_cached(const RowMatrix& points, const KnnGraph& graph,
                                        Symmetrization mode, const TruncationPolicy& policy,
                                        const std::filesystem::path& cache_dir);

} // namespace advis
