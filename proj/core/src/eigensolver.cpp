#include "plaqed/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

namespace plaqed {

namespace {

constexpr std::size_t kCacheBytes = std::size_t{512} << 20;

StateVector random_vector(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  StateVector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(normal(rng), normal(rng));
  return v;
}

// Two passes of classical Gram-Schmidt against each set.
void orthogonalize(StateVector& w, const std::vector<StateVector>& a, const std::vector<StateVector>& b) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& y : a) w -= y.dot(w) * y;
    for (const auto& y : b) w -= y.dot(w) * y;
  }
}

double degeneracy_threshold(double lambda, double rel) { return rel * std::max(1.0, std::abs(lambda)); }

struct Locked {
  double value;
  double residual;
  StateVector vector;
};

SpectrumResult assemble(std::vector<Locked> locked, int m, const SolverOptions& options, std::size_t matvecs) {
  std::stable_sort(locked.begin(), locked.end(), [](const Locked& a, const Locked& b) { return a.value < b.value; });
  std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(m), locked.size());
  if (count > 0) {
    const double last = locked[count - 1].value;
    while (count < locked.size() &&
           locked[count].value - last <= degeneracy_threshold(last, options.degeneracy_rel)) {
      ++count;
    }
  }
  SpectrumResult result;
  result.seed = options.seed;
  result.matvecs = matvecs;
  for (std::size_t i = 0; i < count; ++i) {
    result.eigenvalues.push_back(locked[i].value);
    result.residual_norms.push_back(locked[i].residual);
    if (options.keep_vectors) result.eigenvectors.push_back(std::move(locked[i].vector));
  }
  return result;
}

SpectrumResult dense_solve(const LinearOperator& op, int m, const SolverOptions& options) {
  const auto n = static_cast<Eigen::Index>(op.dimension);
  Eigen::MatrixXcd h(n, n);
  StateVector e = StateVector::Zero(n), col;
  for (Eigen::Index j = 0; j < n; ++j) {
    e.setZero();
    e[j] = 1.0;
    op.apply(e, col);
    h.col(j) = col;
  }
  const Eigen::MatrixXcd sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym);
  std::vector<Locked> locked;
  for (Eigen::Index i = 0; i < n; ++i) {
    StateVector v = solver.eigenvectors().col(i);
    const double value = solver.eigenvalues()[i];
    locked.push_back({value, (h * v - value * v).norm(), std::move(v)});
  }
  return assemble(std::move(locked), m, options, static_cast<std::size_t>(n));
}

}  // namespace

std::string SectorLabel::to_string() const {
  std::ostringstream out;
  out << "sz=" << sz;
  if (momentum) out << ";k=" << momentum->to_string();
  return out.str();
}

LinearOperator make_operator(const HamiltonianOperator& op, const SectorBasis& basis, int workers) {
  return {basis.dimension(),
          [&op, &basis, workers](const StateVector& in, StateVector& out) { out = apply(op, basis, in, workers); }};
}

LinearOperator make_operator(const SectorMatrix& matrix) {
  return {matrix.dimension(), [&matrix](const StateVector& in, StateVector& out) { matrix.apply(in, out); }};
}

SpectrumResult lowest_eigenpairs(const LinearOperator& op, int m, const SolverOptions& options) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  if (!(options.tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const std::size_t dim = op.dimension;
  if (dim == 0) return SpectrumResult{{}, {}, {}, {}, {}, options.seed, 0};
  if (dim <= options.dense_threshold) return dense_solve(op, m, options);

  const std::size_t max_matvecs =
      options.max_matvecs > 0 ? options.max_matvecs : 500 * (static_cast<std::size_t>(m) + 1);
  std::mt19937_64 rng(options.seed);
  std::vector<Locked> locked;
  std::vector<StateVector> locked_vectors;
  std::size_t matvecs = 0;
  StateVector restart;
  StateVector w;

  auto fail = [&](const std::string& why) {
    std::ostringstream msg;
    msg << "Lanczos did not converge: " << why << " (locked " << locked.size() << " of " << m << ", " << matvecs
        << " matvecs, dim " << dim << ")";
    throw ConvergenceError(msg.str(), assemble(locked, m, options, matvecs));
  };

  while (true) {
    if (locked.size() >= dim) break;
    if (matvecs >= max_matvecs) fail("matvec budget exhausted");

    // Start vector: the previous unconverged Ritz vector plus a random part so
    // that missing copies of degenerate levels are reachable.
    StateVector start = random_vector(dim, rng);
    start.normalize();
    if (restart.size() > 0) start = restart + 1e-2 * start;
    orthogonalize(start, locked_vectors, {});
    const double start_norm = start.norm();
    if (start_norm < 1e-10) break;
    start /= start_norm;

    const std::size_t space = dim - locked.size();
    const std::size_t kmax = std::min<std::size_t>(static_cast<std::size_t>(options.krylov_dim), space);
    const std::size_t want = std::max<std::size_t>(1, static_cast<std::size_t>(m) > locked.size()
                                                          ? static_cast<std::size_t>(m) - locked.size()
                                                          : 1);
    std::vector<StateVector> basis{start};
    std::vector<double> alpha, beta;
    Eigen::VectorXd ritz_values;
    Eigen::MatrixXd ritz_vectors;

    auto solve_tridiagonal = [&](std::size_t k) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(k));
      Eigen::VectorXd sub = k > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(k - 1)))
                                  : Eigen::VectorXd();
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      ritz_values = tri.eigenvalues();
      ritz_vectors = tri.eigenvectors();
    };

    for (std::size_t j = 0; j < kmax; ++j) {
      if (matvecs >= max_matvecs) break;
      op.apply(basis[j], w);
      ++matvecs;
      const double a = basis[j].dot(w).real();
      alpha.push_back(a);
      w -= a * basis[j];
      if (j > 0) w -= beta[j - 1] * basis[j - 1];
      orthogonalize(w, locked_vectors, basis);
      const double b = w.norm();
      const bool last = (j + 1 == kmax) || b < 1e-12;
      if (!last && (j + 1) % 10 == 0 && j + 1 >= want) {
        solve_tridiagonal(j + 1);
        bool converged = true;
        for (std::size_t i = 0; i < want && i < j + 1; ++i) {
          if (std::abs(b * ritz_vectors(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))) > 0.1 * options.tol) {
            converged = false;
            break;
          }
        }
        if (converged) break;
      }
      if (last) break;
      beta.push_back(b);
      basis.push_back(w / b);
    }

    const std::size_t k = alpha.size();
    solve_tridiagonal(k);

    // Lock the converged prefix of the Ritz spectrum.
    std::vector<Locked> fresh;
    restart.resize(0);
    double lowest = 0.0;
    double lowest_residual = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      StateVector x = StateVector::Zero(static_cast<Eigen::Index>(dim));
      for (std::size_t q = 0; q < k; ++q) x += ritz_vectors(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(i)) * basis[q];
      orthogonalize(x, locked_vectors, {});
      for (const auto& f : fresh) x -= f.vector.dot(x) * f.vector;
      x.normalize();
      op.apply(x, w);
      ++matvecs;
      const double theta = x.dot(w).real();
      const double residual = (w - theta * x).norm();
      if (i == 0) {
        lowest = theta;
        lowest_residual = residual;
      }
      if (residual > options.tol) {
        restart = std::move(x);
        break;
      }
      fresh.push_back({theta, residual, std::move(x)});
      if (fresh.size() >= want + 2) break;
    }

    // Done once the deflated spectrum provably sits above the m-th level: the
    // lowest Ritz value minus its residual bounds an eigenvalue from below, and
    // a missing degenerate copy would have pulled the lowest Ritz value down.
    if (locked.size() >= static_cast<std::size_t>(m)) {
      std::vector<double> values;
      for (const auto& l : locked) values.push_back(l.value);
      std::sort(values.begin(), values.end());
      const double mth = values[static_cast<std::size_t>(m) - 1];
      if (lowest - lowest_residual > mth + degeneracy_threshold(mth, options.degeneracy_rel)) break;
    }
    for (auto& f : fresh) {
      locked_vectors.push_back(f.vector);
      locked.push_back(std::move(f));
    }
  }
  return assemble(std::move(locked), m, options, matvecs);
}

SpectrumResult lowest_eigenpairs(const HamiltonianOperator& op, const SectorBasis& basis, int m,
                                 const SolverOptions& options, int workers) {
  const std::size_t terms = op.bonds().size() + 9 * op.plaquettes().size() + 1;
  const std::size_t estimate = basis.dimension() * terms * (sizeof(Complex) + sizeof(std::uint32_t));
  SpectrumResult result;
  if (estimate <= kCacheBytes) {
    const auto matrix = SectorMatrix::build(op, basis, workers);
    result = lowest_eigenpairs(make_operator(matrix), m, options);
  } else {
    result = lowest_eigenpairs(make_operator(op, basis, workers), m, options);
  }
  result.sector = {basis.sz(), basis.momentum()};
  return result;
}

std::vector<std::vector<std::size_t>> group_degenerate(std::span<const double> eigenvalues, double rel) {
  std::vector<std::size_t> order(eigenvalues.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return eigenvalues[a] < eigenvalues[b]; });
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t idx : order) {
    if (!groups.empty()) {
      const double ref = eigenvalues[groups.back().front()];
      if (eigenvalues[idx] - ref <= degeneracy_threshold(ref, rel)) {
        groups.back().push_back(idx);
        continue;
      }
    }
    groups.push_back({idx});
  }
  return groups;
}

double spin_gap(std::span<const SpectrumResult> sz0, std::span<const SpectrumResult> sz1) {
  auto minimum = [](std::span<const SpectrumResult> spectra) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : spectra) {
      if (!s.eigenvalues.empty()) best = std::min(best, s.eigenvalues.front());
    }
    return best;
  };
  const double e0 = minimum(sz0);
  const double e1 = minimum(sz1);
  if (!std::isfinite(e0) || !std::isfinite(e1)) throw std::invalid_argument("spin_gap needs non-empty spectra");
  return e1 - e0;
}

double spin_gap(const HamiltonianOperator& op, const Cluster& cluster, std::span<const Momentum> k_set,
                const SolverOptions& options, int workers) {
  SolverOptions opts = options;
  opts.keep_vectors = false;
  std::vector<SpectrumResult> s0, s1;
  for (const auto& k : k_set) {
    s0.push_back(lowest_eigenpairs(op, SectorBasis::momentum_basis(cluster, 0.0, k), 1, opts, workers));
    s1.push_back(lowest_eigenpairs(op, SectorBasis::momentum_basis(cluster, 1.0, k), 1, opts, workers));
  }
  return spin_gap(s0, s1);
}

PointGroupLabel label_point_group(std::span<const StateVector> multiplet, const SectorBasis& basis,
                                  const Cluster& cluster) {
  if (!basis.momentum()) throw std::invalid_argument("label_point_group needs a momentum basis");
  if (multiplet.empty()) throw std::invalid_argument("empty multiplet");
  const Momentum k = *basis.momentum();
  const SectorBasis plain = SectorBasis::sz_basis(basis.n_sites(), basis.sz());

  std::vector<StateVector> expanded;
  for (const auto& v : multiplet) expanded.push_back(basis.expand(v));

  PointGroupLabel out;
  std::map<std::string, double> chi;
  for (const auto& op : cluster.point_group_ops()) {
    if (!(transform(op, k) == k)) continue;
    const SitePermuter permute(op.permutation);
    double trace = 0.0;
    for (const auto& psi : expanded) {
      StateVector g = StateVector::Zero(psi.size());
      for (std::size_t i = 0; i < plain.dimension(); ++i) {
        g[static_cast<Eigen::Index>(plain.lookup(permute(plain.representative(i)))->index)] =
            psi[static_cast<Eigen::Index>(i)];
      }
      trace += psi.dot(g).real();
    }
    out.characters.emplace_back(op.name, trace);
    chi[op.name] = trace;
  }

  const double d = static_cast<double>(multiplet.size());
  auto near = [](double a, double b) { return std::abs(a - b) < 1e-6; };
  const bool all_identity =
      std::all_of(out.characters.begin(), out.characters.end(), [&](const auto& c) { return near(c.second, d); });
  if (all_identity) {
    out.label = "A1";
    return out;
  }
  const bool full_c4v = chi.size() == 8;
  if (multiplet.size() == 1) {
    const bool pm_one = std::all_of(out.characters.begin(), out.characters.end(),
                                    [&](const auto& c) { return near(std::abs(c.second), 1.0); });
    if (!pm_one) {
      out.ambiguous = true;
    } else if (full_c4v) {
      const bool c4 = chi["C4"] > 0, mx = chi["mx"] > 0, md = chi["md"] > 0;
      if (c4 && !mx) out.label = "A2";
      if (!c4 && mx && !md) out.label = "B1";
      if (!c4 && !mx && md) out.label = "B2";
    }
  } else if (full_c4v && multiplet.size() == 2 && near(chi["C4"], 0) && near(chi["C2"], -2) && near(chi["mx"], 0) &&
             near(chi["md"], 0)) {
    out.label = "E";
  } else {
    out.ambiguous = true;
  }
  if (out.label.empty()) {
    std::ostringstream sig;
    sig << (multiplet.size() > 1 ? "multiplet" + std::to_string(multiplet.size()) : std::string("chi")) << "[";
    bool first = true;
    for (const auto& [name, value] : out.characters) {
      if (name == "E") continue;
      sig << (first ? "" : ",") << name << ":" << std::round(value * 1000.0) / 1000.0;
      first = false;
    }
    sig << "]";
    out.label = sig.str();
  }
  return out;
}

}  // namespace plaqed
