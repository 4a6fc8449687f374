#pragma once

// Generic finite-CTMC machinery: state enumeration by closure, sparse
// generator assembly, and stationary-distribution solvers.
//
// States are application structs packable into a 64-bit key. Enumeration
// walks the successor relation from seed states, then relabels states in
// canonical (ascending key) order so that results are independent of
// traversal order. The generator is stored as out-edge CSR with the diagonal
// held implicitly as the row sum.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "polling_tandem/params.hpp"

namespace polling_tandem {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Out-edge CSR without explicit diagonal; out_rate[s] is the total outflow,
// so Q[s][s] = -out_rate[s].
struct SparseGenerator {
  std::int64_t n = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int32_t> col;
  std::vector<double> rate;
  std::vector<double> out_rate;

  double max_rate() const {
    double m = 0.0;
    for (double r : out_rate) m = std::max(m, r);
    return m;
  }
};

// Enumerated state space: canonical order plus a key -> index map for
// warm-start prolongation between truncation levels.
template <class State>
struct StateSpace {
  std::vector<State> states;
  std::unordered_map<std::uint64_t, std::int32_t> index;

  std::int64_t size() const { return static_cast<std::int64_t>(states.size()); }
  std::int32_t id_of(std::uint64_t key) const {
    auto it = index.find(key);
    return it == index.end() ? -1 : it->second;
  }
};

// Breadth-first closure of `succ` from the seeds. succ(state, emit) must call
// emit(next_state, rate) for every outgoing transition. Keys must be unique
// per state (pack(state)).
template <class State, class Pack, class Succ>
StateSpace<State> enumerate_states(const std::vector<State>& seeds, Pack pack,
                                   Succ succ, std::int64_t max_states) {
  StateSpace<State> space;
  std::queue<State> frontier;
  for (const auto& s : seeds) {
    const auto key = pack(s);
    if (space.index.emplace(key, 0).second) {
      space.states.push_back(s);
      frontier.push(s);
    }
  }
  while (!frontier.empty()) {
    const State s = frontier.front();
    frontier.pop();
    succ(s, [&](const State& t, double r) {
      if (r <= 0.0) return;
      const auto key = pack(t);
      if (space.index.emplace(key, 0).second) {
        if (space.size() >= max_states)
          throw TruncationError(
              "state enumeration exceeded max_states; reduce caps or raise "
              "the limit");
        space.states.push_back(t);
        frontier.push(t);
      }
    });
  }
  std::sort(space.states.begin(), space.states.end(),
            [&](const State& a, const State& b) { return pack(a) < pack(b); });
  for (std::int64_t i = 0; i < space.size(); ++i)
    space.index[pack(space.states[i])] = static_cast<std::int32_t>(i);
  return space;
}

template <class State, class Pack, class Succ>
SparseGenerator build_generator(const StateSpace<State>& space, Pack pack,
                                Succ succ) {
  SparseGenerator g;
  g.n = space.size();
  g.row_ptr.assign(g.n + 1, 0);
  g.out_rate.assign(g.n, 0.0);

  // Two passes: count, then fill. Parallel edges to one target are merged.
  std::vector<std::int32_t> scratch_col;
  std::vector<double> scratch_rate;
  auto row_edges = [&](std::int64_t s) {
    scratch_col.clear();
    scratch_rate.clear();
    succ(space.states[s], [&](const State& t, double r) {
      if (r <= 0.0) return;
      const std::int32_t id = space.id_of(pack(t));
      if (id < 0) throw SolverError("successor left the enumerated space");
      scratch_col.push_back(id);
      scratch_rate.push_back(r);
    });
  };

  for (std::int64_t s = 0; s < g.n; ++s) {
    row_edges(s);
    g.row_ptr[s + 1] = static_cast<std::int64_t>(scratch_col.size());
  }
  for (std::int64_t s = 0; s < g.n; ++s) g.row_ptr[s + 1] += g.row_ptr[s];
  g.col.resize(g.row_ptr[g.n]);
  g.rate.resize(g.row_ptr[g.n]);

  std::vector<std::pair<std::int32_t, double>> row;
  for (std::int64_t s = 0; s < g.n; ++s) {
    row_edges(s);
    row.clear();
    for (std::size_t k = 0; k < scratch_col.size(); ++k)
      row.emplace_back(scratch_col[k], scratch_rate[k]);
    std::sort(row.begin(), row.end());
    std::int64_t w = g.row_ptr[s];
    double total = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (w > g.row_ptr[s] && g.col[w - 1] == row[k].first) {
        g.rate[w - 1] += row[k].second;
      } else {
        g.col[w] = row[k].first;
        g.rate[w] = row[k].second;
        ++w;
      }
      total += row[k].second;
    }
    // Self-loops contribute nothing to the generator.
    std::int64_t r = g.row_ptr[s], wr = r;
    for (std::int64_t k = r; k < w; ++k) {
      if (g.col[k] == s) {
        total -= g.rate[k];
        continue;
      }
      g.col[wr] = g.col[k];
      g.rate[wr] = g.rate[k];
      ++wr;
    }
    // Compact in place; trailing slots beyond wr are dead but row_ptr is
    // rebuilt below only when self-loops occurred, which the models here
    // never emit. Guard anyway.
    if (wr != w)
      throw SolverError("self-loop transitions are not supported");
    g.out_rate[s] = total;
  }
  return g;
}

struct Solution {
  std::vector<double> pi;
  double residual_inf = 0.0;  // max_s |(pi Q)_s| / max_rate
  std::int64_t iterations = 0;
  SolveMethod method_used = SolveMethod::Direct;
};

namespace detail {

// In-edge CSR (the transpose graph), used by the iterative solvers.
struct InEdges {
  std::vector<std::int64_t> ptr;
  std::vector<std::int32_t> src;
  std::vector<double> rate;

  static InEdges build(const SparseGenerator& g) {
    InEdges in;
    in.ptr.assign(g.n + 1, 0);
    for (std::int64_t e = 0; e < static_cast<std::int64_t>(g.col.size()); ++e)
      ++in.ptr[g.col[e] + 1];
    for (std::int64_t s = 0; s < g.n; ++s) in.ptr[s + 1] += in.ptr[s];
    in.src.resize(g.col.size());
    in.rate.resize(g.col.size());
    std::vector<std::int64_t> cursor(in.ptr.begin(), in.ptr.end() - 1);
    for (std::int64_t s = 0; s < g.n; ++s)
      for (std::int64_t e = g.row_ptr[s]; e < g.row_ptr[s + 1]; ++e) {
        const auto t = g.col[e];
        in.src[cursor[t]] = static_cast<std::int32_t>(s);
        in.rate[cursor[t]] = g.rate[e];
        ++cursor[t];
      }
    return in;
  }
};

inline double residual_inf(const SparseGenerator& g, const InEdges& in,
                           const std::vector<double>& pi) {
  double worst = 0.0;
  for (std::int64_t s = 0; s < g.n; ++s) {
    double inflow = 0.0;
    for (std::int64_t e = in.ptr[s]; e < in.ptr[s + 1]; ++e)
      inflow += pi[in.src[e]] * in.rate[e];
    worst = std::max(worst, std::abs(inflow - pi[s] * g.out_rate[s]));
  }
  const double scale = g.max_rate();
  return scale > 0 ? worst / scale : worst;
}

inline void normalize(std::vector<double>& x) {
  double sum = 0.0;
  for (double v : x) sum += v;
  if (!(sum > 0.0)) throw SolverError("iterate collapsed to zero");
  for (double& v : x) v /= sum;
}

inline Solution solve_direct(const SparseGenerator& g) {
  // Solve Q^T pi = 0 with the first balance equation replaced by sum(pi)=1.
  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> trips;
  trips.reserve(g.col.size() + 2 * g.n);
  for (std::int64_t s = 0; s < g.n; ++s) {
    trips.emplace_back(0, static_cast<int>(s), 1.0);
    if (s != 0)
      trips.emplace_back(static_cast<int>(s), static_cast<int>(s),
                         -g.out_rate[s]);
  }
  for (std::int64_t s = 0; s < g.n; ++s)
    for (std::int64_t e = g.row_ptr[s]; e < g.row_ptr[s + 1]; ++e)
      if (g.col[e] != 0)
        trips.emplace_back(g.col[e], static_cast<int>(s), g.rate[e]);
  Eigen::SparseMatrix<double> A(g.n, g.n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw SolverError(
        "singular generator in direct solve (disconnected or mis-truncated "
        "chain)");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(g.n);
  b[0] = 1.0;
  Eigen::VectorXd x = lu.solve(b);

  Solution sol;
  sol.pi.assign(x.data(), x.data() + g.n);
  for (double& v : sol.pi) v = std::max(v, 0.0);
  normalize(sol.pi);
  sol.method_used = SolveMethod::Direct;
  sol.iterations = 1;
  sol.residual_inf = residual_inf(g, InEdges::build(g), sol.pi);
  return sol;
}

inline Solution solve_gauss_seidel(const SparseGenerator& g,
                                   const SolverConfig& cfg,
                                   const std::vector<double>* warm) {
  for (std::int64_t s = 0; s < g.n; ++s)
    if (!(g.out_rate[s] > 0.0))
      throw SolverError("absorbing state found (mis-truncated chain)");

  const InEdges in = InEdges::build(g);
  std::vector<double> x(g.n, 1.0 / static_cast<double>(g.n));
  if (warm && static_cast<std::int64_t>(warm->size()) == g.n) x = *warm;

  const double omega = cfg.relaxation;
  std::vector<double> prev;
  Solution sol;
  sol.method_used = SolveMethod::GaussSeidel;
  int check_every = 16;
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    prev = x;
    for (std::int64_t s = 0; s < g.n; ++s) {
      double inflow = 0.0;
      for (std::int64_t e = in.ptr[s]; e < in.ptr[s + 1]; ++e)
        inflow += x[in.src[e]] * in.rate[e];
      // The Gauss-Seidel update already uses in-place new values for earlier
      // states; the self term is excluded because the generator stores no
      // diagonal.
      const double gs = inflow / g.out_rate[s];
      x[s] = omega == 1.0 ? gs : (1.0 - omega) * x[s] + omega * gs;
      if (x[s] < 0.0) x[s] = 0.0;
    }
    normalize(x);
    sol.iterations = sweep;
    double delta = 0.0;
    for (std::int64_t s = 0; s < g.n; ++s) delta += std::abs(x[s] - prev[s]);
    if (delta <= cfg.tol || sweep % check_every == 0 || sweep == cfg.max_sweeps) {
      const double res = residual_inf(g, in, x);
      if (res <= cfg.residual_target || delta <= cfg.tol) {
        sol.pi = std::move(x);
        sol.residual_inf = res;
        if (res > cfg.residual_tol)
          throw SolverError("stationary residual " + std::to_string(res) +
                            " above tolerance after convergence");
        return sol;
      }
    }
  }
  throw SolverError("Gauss-Seidel did not converge within max_sweeps");
}

inline Solution solve_power(const SparseGenerator& g, const SolverConfig& cfg,
                            const std::vector<double>* warm) {
  // Uniformization: P = I + Q/Lambda with Lambda slightly above the largest
  // outflow, iterated until the L1 change is below tol.
  const double lambda_u = 1.01 * g.max_rate();
  if (!(lambda_u > 0.0)) throw SolverError("empty generator");
  const InEdges in = InEdges::build(g);
  std::vector<double> x(g.n, 1.0 / static_cast<double>(g.n));
  if (warm && static_cast<std::int64_t>(warm->size()) == g.n) x = *warm;
  std::vector<double> y(g.n, 0.0);

  Solution sol;
  sol.method_used = SolveMethod::Power;
  for (std::int64_t it = 1; it <= cfg.max_power_iters; ++it) {
    for (std::int64_t s = 0; s < g.n; ++s) {
      double inflow = 0.0;
      for (std::int64_t e = in.ptr[s]; e < in.ptr[s + 1]; ++e)
        inflow += x[in.src[e]] * in.rate[e];
      y[s] = x[s] * (1.0 - g.out_rate[s] / lambda_u) + inflow / lambda_u;
    }
    normalize(y);
    double delta = 0.0;
    for (std::int64_t s = 0; s < g.n; ++s) delta += std::abs(y[s] - x[s]);
    x.swap(y);
    sol.iterations = it;
    if (delta <= cfg.tol) {
      sol.pi = std::move(x);
      sol.residual_inf = residual_inf(g, in, sol.pi);
      if (sol.residual_inf > cfg.residual_tol)
        throw SolverError("stationary residual above tolerance (power)");
      return sol;
    }
  }
  throw SolverError("power iteration did not converge within max_power_iters");
}

}  // namespace detail

inline Solution solve_stationary(const SparseGenerator& g,
                                 const SolverConfig& cfg,
                                 const std::vector<double>* warm = nullptr) {
  switch (cfg.method) {
    case SolveMethod::Direct:
      return detail::solve_direct(g);
    case SolveMethod::GaussSeidel:
      return detail::solve_gauss_seidel(g, cfg, warm);
    case SolveMethod::Power:
      return detail::solve_power(g, cfg, warm);
    case SolveMethod::Auto:
      if (g.n <= cfg.direct_threshold) return detail::solve_direct(g);
      return detail::solve_gauss_seidel(g, cfg, warm);
  }
  throw SolverError("unreachable");
}

}  // namespace polling_tandem
