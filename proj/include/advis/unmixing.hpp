#pragma once

#include "advis/hsi_io.hpp"
#include "advis/nnls.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace advis {

/// Endmember spectra as rows of U (m x D), with the pixel each came from.
struct EndmemberSet {
  RowMatrix U;
  std::vector<std::size_t> pixels;

  std::size_t size() const { return static_cast<std::size_t>(U.rows()); }
};

/// Signal-subspace dimension via HySime: per-band regression noise estimate,
/// then the eigen-directions whose signal power exceeds twice the noise power.
std::size_t hysime(const RowMatrix& points);

/// VCA with its data projection precomputed, so repeated stochastic
/// extractions over the same data only pay for the random direction loop.
class VcaModel {
public:
  VcaModel(const RowMatrix& points, std::size_t m);

  EndmemberSet extract(std::uint64_t seed) const;

  std::size_t materials() const { return m_; }
  bool low_snr_branch() const { return low_snr_; }
  double estimated_snr() const { return snr_; }

private:
  RowMatrix points_;
  std::size_t m_;
  bool low_snr_ = false;
  double snr_ = 0.0;
  Eigen::MatrixXd projected_; // m x n, columns are projected pixels
};

EndmemberSet vca(const RowMatrix& points, std::size_t m, std::uint64_t seed);

/// Per-pixel NNLS abundances against U; n x m, exactly nonnegative.
RowMatrix abundances(const RowMatrix& points, const EndmemberSet& endmembers,
                     const NnlsOptions& opts = {});

/// Largest abundance per row; rows are sum-to-one normalized first unless
/// `normalize` is false.
Eigen::VectorXd purity(const RowMatrix& abundance, bool normalize = true);

/// Mean purity over `runs` VCA+NNLS executions seeded base_seed, base_seed+1, ...
Eigen::VectorXd averaged_purity(const RowMatrix& points, std::size_t m, std::size_t runs,
                                std::uint64_t base_seed, bool normalize = true);

} // namespace advis
