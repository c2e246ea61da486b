// Kernels that dominate a sweep: basis construction, matrix-free and cached
// Hamiltonian application, and the projector on a single triple.

#include <optional>
#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "plaqed/hamiltonian.hpp"
#include "plaqed/hilbert.hpp"
#include "plaqed/lattice.hpp"

using namespace plaqed;

namespace {

const char* const kClusters[] = {"16", "20"};

StateVector random_vector(std::size_t n) {
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  StateVector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = Complex(g(rng), g(rng));
  return v.normalized();
}

class Sector : public benchmark::Fixture {
 public:
  void SetUp(const benchmark::State& state) override {
    cluster_.emplace(cluster_by_name(kClusters[state.range(0)]));
    basis_.emplace(build_momentum_basis(*cluster_, 0.0, parse_momentum("pi,0", cluster_->n_sites())));
    op_.emplace(build_operator(*cluster_, {1.0, 1.0, 0.8}));
    v_ = random_vector(basis_->dimension());
  }

 protected:
  std::optional<Cluster> cluster_;
  std::optional<SectorBasis> basis_;
  std::optional<HamiltonianOperator> op_;
  StateVector v_;
};

}  // namespace

static void BM_MomentumBasis(benchmark::State& state) {
  const Cluster c = cluster_by_name(kClusters[state.range(0)]);
  for (auto _ : state) {
    auto b = build_momentum_basis(c, 0.0, {0, 0, c.n_sites()});
    benchmark::DoNotOptimize(b.dimension());
  }
}
BENCHMARK(BM_MomentumBasis)->DenseRange(0, 1)->Unit(benchmark::kMillisecond);

BENCHMARK_DEFINE_F(Sector, MatrixFreeApply)(benchmark::State& state) {
  for (auto _ : state) {
    StateVector out = apply(*op_, *basis_, v_);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(basis_->dimension()));
  state.SetLabel("dim " + std::to_string(basis_->dimension()));
}
BENCHMARK_REGISTER_F(Sector, MatrixFreeApply)->DenseRange(0, 1)->Unit(benchmark::kMillisecond);

BENCHMARK_DEFINE_F(Sector, MatrixBuild)(benchmark::State& state) {
  for (auto _ : state) {
    auto m = SectorMatrix::build(*op_, *basis_);
    benchmark::DoNotOptimize(&m);
  }
}
BENCHMARK_REGISTER_F(Sector, MatrixBuild)->DenseRange(0, 1)->Unit(benchmark::kMillisecond);

BENCHMARK_DEFINE_F(Sector, CachedApply)(benchmark::State& state) {
  const auto m = SectorMatrix::build(*op_, *basis_);
  StateVector out(v_.size());
  for (auto _ : state) {
    m.apply(v_, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(basis_->dimension()));
}
BENCHMARK_REGISTER_F(Sector, CachedApply)->DenseRange(0, 1)->Unit(benchmark::kMillisecond);

static void BM_Projector(benchmark::State& state) {
  const Cluster c = cluster_by_name("16");
  const auto b = build_sz_basis(16, 0.0);
  const StateVector v = random_vector(b.dimension());
  const auto& triple = c.plaquettes().front().a_triple;
  for (auto _ : state) {
    StateVector out = apply_projector(triple, b, v);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Projector)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
