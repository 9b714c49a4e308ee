// Property and synthetic end-to-end acceptance checks. One line per criterion;
// exit status is nonzero when any criterion fails.

#include "advis/diffusion.hpp"
#include "advis/knn.hpp"
#include "advis/metrics.hpp"
#include "advis/modes.hpp"
#include "advis/nnls.hpp"
#include "advis/pipeline.hpp"
#include "advis/segmentation.hpp"
#include "advis/unmixing.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace advis;
namespace t_ = advis::testing;

namespace {

int failures = 0;

struct Outcome {
  bool ok = true;
  std::string detail;
};

void run(const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_seconds > 0 && secs >= limit_seconds) {
    out.ok = false;
    out.detail += " (over time limit " + std::to_string(limit_seconds) + " s)";
  }
  std::printf("%s %s: %s [%.2f s]\n", out.ok ? "PASS" : "FAIL", name.c_str(), out.detail.c_str(), secs);
  std::fflush(stdout);
  if (!out.ok)
    ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Eigen::VectorXd coarse_values(std::size_t n, int levels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, levels);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v)
    x = u(rng) / static_cast<double>(levels);
  return v;
}

} // namespace

int main() {
  run("markov-stationarity", 10.0, [] {
    double worst_row = 0.0, worst_pi = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const std::size_t n = 20 + (seed * 37) % 181; // 20..200
      auto W = t_::random_connected_graph(n, 4.0 / static_cast<double>(n), seed);
      auto op = build_operator_from_adjacency(W, Symmetrization::mutual_or);
      Eigen::MatrixXd P(op.transition());
      worst_row = std::max(worst_row, (P.rowwise().sum().array() - 1.0).abs().maxCoeff());
      Eigen::RowVectorXd pi = op.stationary().transpose();
      worst_pi = std::max(worst_pi, (pi * P - pi).cwiseAbs().maxCoeff());
    }
    return Outcome{worst_row <= 1e-12 && worst_pi <= 1e-10,
                   "50 graphs, max |rowsum-1| " + fmt("%.2e", worst_row) + ", max |piP-pi| " + fmt("%.2e", worst_pi)};
  });

  run("diffusion-distance-vs-matrix-power", 30.0, [] {
    double worst = 0.0;
    std::size_t pairs = 0;
    // full spectrum: the identity with the P^t definition holds untruncated
    TruncationPolicy all;
    all.time = 0;
    all.threshold = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const std::size_t n = 20 + 3 * seed; // up to 47
      auto X = t_::random_points(n, 3, seed);
      auto g = build_knn(X, 5);
      auto op = build_operator(g, Symmetrization::mutual_or, all);
      t_::PreciseDiffusion oracle(Eigen::MatrixXd(knn_adjacency(g, Symmetrization::mutual_or)));
      for (int t : {0, 1, 2, 4, 8, 16}) {
        oracle.advance_to(t);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j) {
            const double want = oracle.distance(i, j);
            worst = std::max(worst, std::abs(op.distance(t, i, j) - want) / want);
            ++pairs;
          }
      }
    }
    return Outcome{worst <= 1e-8, std::to_string(pairs) + " pairs, max relative error " + fmt("%.2e", worst)};
  });

  run("nnls-kkt-and-exhaustive", 30.0, [] {
    double worst_kkt = 0.0, worst_obj = 0.0;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    int problems = 0;
    for (int m = 1; m <= 6; ++m)
      for (int rep = 0; rep < 50; ++rep) {
        Eigen::MatrixXd A(20, m);
        Eigen::VectorXd y(20);
        for (auto& v : A.reshaped())
          v = rep % 2 ? std::abs(g(rng)) : g(rng);
        for (auto& v : y)
          v = g(rng);
        auto r = nnls(A, y);
        Eigen::VectorXd grad = A.transpose() * (A * r.x - y);
        worst_kkt = std::max({worst_kkt, -r.x.minCoeff(), -grad.minCoeff(), std::abs(r.x.dot(grad))});
        const double obj = (A * r.x - y).squaredNorm();
        const double ref = t_::exhaustive_nnls(A, y).second;
        worst_obj = std::max(worst_obj, std::abs(obj - ref) / std::max(1.0, ref));
        ++problems;
      }
    return Outcome{worst_kkt <= 1e-8 && worst_obj <= 1e-6,
                   std::to_string(problems) + " problems, max KKT violation " + fmt("%.2e", worst_kkt) +
                       ", max objective gap " + fmt("%.2e", worst_obj)};
  });

  run("hysime-recovers-m", 0.0, [] {
    bool ok = true;
    std::string detail;
    for (std::size_t m = 2; m <= 6; ++m) {
      int hits = 0;
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto mix = t_::make_mixture(2000, 50, m, 30.0, 1000 * m + seed);
        hits += hysime(mix.points) == m;
      }
      ok = ok && hits >= 9;
      detail += "m=" + std::to_string(m) + ":" + std::to_string(hits) + "/10 ";
    }
    return Outcome{ok, detail + "(SNR 30 dB)"};
  });

  run("dt-rank-propagate-vs-brute-force", 0.0, [] {
    int mismatches = 0, instances = 0;
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      const std::size_t n = 40 + 5 * seed; // up to 95
      auto X = t_::random_points(n, 4, seed + 7);
      auto op = build_operator(build_knn(X, 7), Symmetrization::mutual_or);
      const int t = 1 << (seed % 6);
      auto E = op.embed(t);
      auto z = coarse_values(n, 8, seed);
      t_::DistanceFn dist = [&](std::size_t i, std::size_t j) { return std::sqrt(squared_row_distance(E, i, j)); };
      auto dt = dt_values(op, t, z);
      mismatches += !(dt == t_::brute_dt(dist, z));
      auto ranking = rank_modes(z, dt);
      mismatches += ranking.ordering != t_::brute_ordering(z.cwiseProduct(dt));
      auto partial = dvis_label_modes(ranking, 4);
      // top-ranked modes need not hold the zeta maximum; seed it so no visit is orphaned
      const auto top = descending_order(z).front();
      if (partial.labels[top] == 0) {
        partial.labels[top] = 1;
        partial.provenance[top] = Provenance::mode_assigned;
      }
      auto seg = propagate(partial, z, op, t);
      mismatches += seg.labels != t_::brute_propagate(partial.labels, z, dist);
      ++instances;
    }
    return Outcome{mismatches == 0, std::to_string(instances) + " instances, " + std::to_string(mismatches) +
                                        " mismatches (exact equality)"};
  });

  run("nmi-vs-contingency", 0.0, [] {
    std::mt19937_64 rng(99);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 10 + trial * 13;
      std::uniform_int_distribution<int> ka(1, 1 + trial % 8), kb(1, 1 + (trial / 8) % 5);
      std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        a[static_cast<std::size_t>(i)] = ka(rng);
        b[static_cast<std::size_t>(i)] = kb(rng);
      }
      worst = std::max(worst, std::abs(nmi(a, b) - t_::contingency_nmi(a, b)));
    }
    return Outcome{worst <= 1e-12, "100 pairs, max abs difference " + fmt("%.2e", worst)};
  });

  run("advis-b0-equals-dvis", 0.0, [] {
    int equal = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto mix = t_::make_mixture(300, 10, 3, 30.0, seed + 40);
      PipelineConfig c;
      c.neighbors = 20;
      c.classes = 3;
      c.sigma0 = 0.05;
      c.time = 8;
      c.purity_runs = 10;
      c.seed = seed;
      std::vector<int> none(300, 1);
      GroundTruthOracle oracle(none);
      equal += run_advis(mix.points, c, 0, oracle).labels == run_dvis(mix.points, c).labels;
    }
    return Outcome{equal == 5, std::to_string(equal) + "/5 seeds with identical label vectors"};
  });

  run("synthetic-blobs-end-to-end", 20.0, [] {
    int perfect = 0;
    double worst = 1.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      // 3 x 200 points in 10 bands, centers 0.4 apart, per-band spread 0.05
      auto b = t_::make_blobs(3, 200, 10, 0.05, 0.4, seed);
      PipelineConfig c;
      c.neighbors = 100;
      c.classes = 3;
      c.sigma0 = 0.1;
      c.time = 8;
      c.seed = seed;
      GroundTruthOracle oracle(b.labels);
      const double score = nmi(run_advis(b.points, c, 3, oracle).labels, b.labels);
      perfect += score == 1.0;
      worst = std::min(worst, score);
    }
    return Outcome{perfect == 10, std::to_string(perfect) + "/10 seeds with NMI == 1.0, worst " + fmt("%.6f", worst)};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
