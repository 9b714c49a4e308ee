#include "advis/diffusion.hpp"

#include "advis/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace advis {
namespace {

using Triplet = Eigen::Triplet<double>;

constexpr std::uint64_t kCacheMagic = 0x5644494646555332ULL; // "VDIFFUS2"

std::vector<std::vector<std::size_t>> adjacency_lists(const SparseMatrix& W, bool transpose) {
  std::vector<std::vector<std::size_t>> adj(static_cast<std::size_t>(W.rows()));
  for (Eigen::Index r = 0; r < W.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(W, r); it; ++it) {
      if (it.value() == 0.0)
        continue;
      const auto a = static_cast<std::size_t>(it.row()), b = static_cast<std::size_t>(it.col());
      if (transpose)
        adj[b].push_back(a);
      else
        adj[a].push_back(b);
    }
  return adj;
}

double int_pow(double base, int t) {
  // pow(0, 0) == 1 is what P^0 = I requires
  return std::pow(base, static_cast<double>(t));
}

template <typename T> void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T> T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in)
    throw FormatError("truncated operator cache file");
  return v;
}

void write_doubles(std::ostream& out, const double* p, std::size_t count) {
  write_pod<std::uint64_t>(out, count);
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& in) {
  const auto count = read_pod<std::uint64_t>(in);
  std::vector<double> v(count);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in)
    throw FormatError("truncated operator cache file");
  return v;
}

} // namespace

Symmetrization parse_symmetrization(const std::string& s) {
  if (s == "mutual-or")
    return Symmetrization::mutual_or;
  if (s == "directed")
    return Symmetrization::directed;
  throw InvalidArgument("unknown symmetrization '" + s + "'");
}

std::string to_string(Symmetrization s) {
  return s == Symmetrization::mutual_or ? "mutual-or" : "directed";
}

SparseMatrix knn_adjacency(const KnnGraph& graph, Symmetrization mode) {
  std::vector<Triplet> triplets;
  triplets.reserve(graph.n * graph.k * (mode == Symmetrization::mutual_or ? 2 : 1));
  for (std::size_t i = 0; i < graph.n; ++i)
    for (std::size_t r = 0; r < graph.k; ++r) {
      const auto j = graph.neighbor(i, r);
      triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0);
      if (mode == Symmetrization::mutual_or)
        triplets.emplace_back(static_cast<int>(j), static_cast<int>(i), 1.0);
    }
  SparseMatrix W(static_cast<Eigen::Index>(graph.n), static_cast<Eigen::Index>(graph.n));
  // duplicates collapse to 1 rather than summing
  W.setFromTriplets(triplets.begin(), triplets.end(), [](double, double) { return 1.0; });
  return W;
}

std::size_t count_components(const SparseMatrix& W, Symmetrization mode) {
  const auto n = static_cast<std::size_t>(W.rows());
  if (mode == Symmetrization::mutual_or) {
    auto adj = adjacency_lists(W, false);
    std::vector<char> seen(n, 0);
    std::size_t components = 0;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < n; ++s) {
      if (seen[s])
        continue;
      ++components;
      seen[s] = 1;
      stack.push_back(s);
      while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        for (auto v : adj[u])
          if (!seen[v]) {
            seen[v] = 1;
            stack.push_back(v);
          }
      }
    }
    return components;
  }

  // Kosaraju: finish order on W, then sweep W^T
  auto fwd = adjacency_lists(W, false);
  auto rev = adjacency_lists(W, true);
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s])
      continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next < fwd[u].size()) {
        auto v = fwd[u][next++];
        if (!seen[v]) {
          seen[v] = 1;
          stack.emplace_back(v, 0);
        }
      } else {
        order.push_back(u);
        stack.pop_back();
      }
    }
  }
  std::fill(seen.begin(), seen.end(), 0);
  std::size_t components = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (seen[*it])
      continue;
    ++components;
    std::vector<std::size_t> stack{*it};
    seen[*it] = 1;
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (auto v : rev[u])
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
    }
  }
  return components;
}

DiffusionOperator build_operator_from_adjacency(const SparseMatrix& W, Symmetrization mode,
                                                const TruncationPolicy& policy) {
  const auto n = static_cast<std::size_t>(W.rows());
  if (W.rows() != W.cols() || n == 0)
    throw InvalidArgument("adjacency must be a nonempty square matrix");
  if (policy.time < 0)
    throw InvalidArgument("diffusion time must be nonnegative");

  DiffusionOperator op;
  op.symmetrization_ = mode;
  op.degrees_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (Eigen::Index r = 0; r < W.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(W, r); it; ++it)
      op.degrees_(r) += it.value();
  for (Eigen::Index i = 0; i < op.degrees_.size(); ++i)
    if (!(op.degrees_(i) > 0.0))
      throw InvalidArgument("node " + std::to_string(i) + " has no outgoing edges");

  if (mode == Symmetrization::mutual_or) {
    SparseMatrix asym = W - SparseMatrix(W.transpose());
    asym.prune(0.0);
    if (asym.nonZeros() != 0)
      throw InvalidArgument("mutual-or operator requires a symmetric adjacency");
  }

  const std::size_t components = count_components(W, mode);
  if (components != 1)
    throw DisconnectedGraphError(
        components, "graph has " + std::to_string(components) +
                        (mode == Symmetrization::directed ? " strongly connected" : "") +
                        " components; the diffusion must be irreducible (increase N)");

  op.transition_ = W;
  for (Eigen::Index r = 0; r < op.transition_.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(op.transition_, r); it; ++it)
      it.valueRef() /= op.degrees_(r);

  if (mode == Symmetrization::mutual_or) {
    op.stationary_ = op.degrees_ / op.degrees_.sum();

    const Eigen::VectorXd inv_sqrt_deg = op.degrees_.cwiseSqrt().cwiseInverse();
    SparseMatrix S = inv_sqrt_deg.asDiagonal() * W * inv_sqrt_deg.asDiagonal();
    const std::size_t cap = std::min(n, policy.max_pairs);
    SymmetricEigenpairs pairs = n <= policy.dense_limit
                                    ? dense_top_magnitude(Eigen::MatrixXd(S), cap)
                                    : lanczos_top_magnitude(S, cap);

    std::size_t keep = 0;
    while (keep < static_cast<std::size_t>(pairs.values.size()) &&
           int_pow(std::abs(pairs.values(static_cast<Eigen::Index>(keep))), policy.time) >=
               policy.threshold)
      ++keep;
    keep = std::max<std::size_t>(keep, 1);

    op.eigenvalues_ = pairs.values.head(static_cast<Eigen::Index>(keep));
    // phi_k = sqrt(pi) .* psi_k turns orthonormality into pi-weighted unit norm
    const Eigen::VectorXd inv_sqrt_pi = op.stationary_.cwiseSqrt().cwiseInverse();
    op.eigenvectors_ = inv_sqrt_pi.asDiagonal() * pairs.vectors.leftCols(static_cast<Eigen::Index>(keep));
    canonicalize_signs(op.eigenvectors_);
    // connected reversible chain: the top right eigenvector is exactly constant;
    // rounding noise there would otherwise dominate tiny late-time distances
    op.eigenvectors_.col(0).setOnes();
  } else {
    // power iteration on the lazy chain (I + P) / 2: same pi, no periodicity issue
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
    const SparseMatrix Pt = op.transition_.transpose();
    for (int iter = 0; iter < 10'000'000; ++iter) {
      Eigen::VectorXd next = 0.5 * (pi + Pt * pi);
      next /= next.sum();
      const double change = (next - pi).cwiseAbs().maxCoeff();
      pi = std::move(next);
      if (change <= 1e-15)
        break;
    }
    // polish: ||pi P - pi||_inf must be small, not just the step size
    for (int iter = 0; iter < 1000; ++iter) {
      if ((Pt * pi - pi).cwiseAbs().maxCoeff() <= 1e-12)
        break;
      pi = 0.5 * (pi + Pt * pi);
      pi /= pi.sum();
    }
    op.stationary_ = pi;
  }
  return op;
}

Eigen::VectorXd DiffusionOperator::spectral_weights(int t) const {
  Eigen::VectorXd w(eigenvalues_.size());
  for (Eigen::Index k = 0; k < w.size(); ++k)
    w(k) = int_pow(std::abs(eigenvalues_(k)), t);
  return w;
}

Eigen::VectorXd DiffusionOperator::transition_row(int t, std::size_t i) const {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  row(static_cast<Eigen::Index>(i)) = 1.0;
  const SparseMatrix Pt = transition_.transpose();
  for (int s = 0; s < t; ++s)
    row = Pt * row;
  return row;
}

double DiffusionOperator::distance(int t, std::size_t i, std::size_t j) const {
  if (i >= size() || j >= size())
    throw InvalidArgument("diffusion_distance: index out of range");
  if (t < 0)
    throw InvalidArgument("diffusion_distance: negative time");
  if (symmetrization_ == Symmetrization::directed) {
    const Eigen::VectorXd a = transition_row(t, i), b = transition_row(t, j);
    double sq = 0.0;
    for (Eigen::Index l = 0; l < a.size(); ++l) {
      const double d = a(l) - b(l);
      sq += d * d / stationary_(l);
    }
    return std::sqrt(sq);
  }
  const auto w = spectral_weights(t);
  const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
  double sq = 0.0;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const double d = w(k) * eigenvectors_(ii, k) - w(k) * eigenvectors_(jj, k);
    sq += d * d;
  }
  return std::sqrt(sq);
}

RowMatrix DiffusionOperator::embed(int t) const {
  if (t < 0)
    throw InvalidArgument("embed: negative time");
  const auto n = static_cast<Eigen::Index>(size());
  if (symmetrization_ == Symmetrization::directed) {
    RowMatrix rows = RowMatrix::Identity(n, n);
    for (int s = 0; s < t; ++s)
      rows = RowMatrix(rows * transition_);
    const Eigen::VectorXd inv_sqrt_pi = stationary_.cwiseSqrt().cwiseInverse();
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index l = 0; l < n; ++l)
        rows(i, l) *= inv_sqrt_pi(l);
    return rows;
  }
  const auto w = spectral_weights(t);
  RowMatrix coords(n, eigenvalues_.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < w.size(); ++k)
      coords(i, k) = w(k) * eigenvectors_(i, k);
  return coords;
}

std::uint64_t operator_cache_key(const RowMatrix& points, std::size_t k, Symmetrization mode,
                                 const TruncationPolicy& policy) {
  // FNV-1a over the point bytes and every parameter that shapes the operator
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t rows = static_cast<std::uint64_t>(points.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(points.cols());
  mix(&rows, sizeof rows);
  mix(&cols, sizeof cols);
  mix(points.data(), static_cast<std::size_t>(points.size()) * sizeof(double));
  const std::uint64_t kk = k, sym = mode == Symmetrization::mutual_or ? 0 : 1,
                      cap = policy.max_pairs, dense = policy.dense_limit;
  const std::int64_t time = policy.time;
  mix(&kk, sizeof kk);
  mix(&sym, sizeof sym);
  mix(&time, sizeof time);
  mix(&policy.threshold, sizeof policy.threshold);
  mix(&cap, sizeof cap);
  mix(&dense, sizeof dense);
  return h;
}

void save_operator(const std::filesystem::path& path, const DiffusionOperator& op) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot write operator cache " + path.string());
  write_pod(out, kCacheMagic);
  write_pod<std::uint8_t>(out, op.symmetrization_ == Symmetrization::mutual_or ? 0 : 1);
  const auto n = static_cast<std::uint64_t>(op.size());
  write_pod(out, n);
  write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(op.eigenvalues_.size()));
  write_doubles(out, op.eigenvalues_.data(), static_cast<std::size_t>(op.eigenvalues_.size()));
  write_doubles(out, op.eigenvectors_.data(), static_cast<std::size_t>(op.eigenvectors_.size()));
  write_doubles(out, op.stationary_.data(), static_cast<std::size_t>(op.stationary_.size()));
  write_doubles(out, op.degrees_.data(), static_cast<std::size_t>(op.degrees_.size()));
  std::vector<double> triples;
  triples.reserve(static_cast<std::size_t>(op.transition_.nonZeros()) * 3);
  for (Eigen::Index r = 0; r < op.transition_.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(op.transition_, r); it; ++it) {
      triples.push_back(static_cast<double>(it.row()));
      triples.push_back(static_cast<double>(it.col()));
      triples.push_back(it.value());
    }
  write_doubles(out, triples.data(), triples.size());
}

DiffusionOperator load_operator(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open operator cache " + path.string());
  if (read_pod<std::uint64_t>(in) != kCacheMagic)
    throw FormatError(path.string() + ": not an operator cache file");
  DiffusionOperator op;
  op.symmetrization_ = read_pod<std::uint8_t>(in) == 0 ? Symmetrization::mutual_or : Symmetrization::directed;
  const auto n = static_cast<Eigen::Index>(read_pod<std::uint64_t>(in));
  const auto m = static_cast<Eigen::Index>(read_pod<std::uint64_t>(in));
  auto vals = read_doubles(in);
  auto vecs = read_doubles(in);
  auto pi = read_doubles(in);
  auto deg = read_doubles(in);
  auto triples = read_doubles(in);
  if (static_cast<Eigen::Index>(vals.size()) != m || static_cast<Eigen::Index>(vecs.size()) != n * m ||
      static_cast<Eigen::Index>(pi.size()) != n || static_cast<Eigen::Index>(deg.size()) != n ||
      triples.size() % 3 != 0)
    throw FormatError(path.string() + ": inconsistent operator cache");
  op.eigenvalues_ = Eigen::Map<Eigen::VectorXd>(vals.data(), m);
  op.eigenvectors_ = Eigen::Map<Eigen::MatrixXd>(vecs.data(), n, m);
  op.stationary_ = Eigen::Map<Eigen::VectorXd>(pi.data(), n);
  op.degrees_ = Eigen::Map<Eigen::VectorXd>(deg.data(), n);
  std::vector<Triplet> t;
  t.reserve(triples.size() / 3);
  for (std::size_t i = 0; i < triples.size(); i += 3)
    t.emplace_back(static_cast<int>(triples[i]), static_cast<int>(triples[i + 1]), triples[i + 2]);
  op.transition_.resize(n, n);
  op.transition_.setFromTriplets(t.begin(), t.end());
  return op;
}

DiffusionOperator build_operator_cached(const RowMatrix& points, const KnnGraph& graph,
                                        Symmetrization mode, const TruncationPolicy& policy,
                                        const std::filesystem::path& cache_dir) {
  if (cache_dir.empty())
    return build_operator(graph, mode, policy);
  std::ostringstream name;
  name << "operator-" << std::hex << operator_cache_key(points, graph.k, mode, policy) << ".bin";
  const auto path = cache_dir / name.str();
  if (std::filesystem::exists(path))
    return load_operator(path);
  auto op = build_operator(graph, mode, policy);
  std::filesystem::create_directories(cache_dir);
  save_operator(path, op);
  return op;
}

} // namespace advis
