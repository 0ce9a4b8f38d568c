// detector.hpp - Message-passing symbol detection on the sparse channel
// factor graph, plus an exhaustive MAP reference for small instances.
//
// The graph has one variable node per transmitted symbol and one observation
// node per received sample; edges mirror the nonzeros of the channel matrix.
// Each iteration alternates two sweeps:
//   observation sweep: per edge, the interference seen at observation b when
//     decoding variable a is summarized as a Gaussian with mean mu_ba and
//     variance sigma2_ba computed from the incoming symbol pmfs plus the
//     noise variance;
//   variable sweep: per edge, a fresh symbol pmf proportional to the product
//     of the Gaussian likelihoods of all other neighboring observations,
//     mixed with the previous message by the damping factor.
// Products run in the log domain with per-node max subtraction. Iteration
// stops when no pmf entry moves by more than epsilon, or at the cap. The
// final per-symbol decision maximizes the likelihood product over the full
// observation neighborhood.

#pragma once

#include "ddsim/alphabet.hpp"
#include "ddsim/sparse.hpp"
#include "ddsim/types.hpp"

#include <span>
#include <vector>

namespace ddsim {

struct DetectorParams {
    double damping = 0.5;      // in (0, 1]; 1 disables damping
    int max_iterations = 30;
    double epsilon = 0.01;     // max pmf-entry change defining convergence
};

// Bipartite adjacency of a square sparse matrix. Edges are indexed by their
// position in the observation-major (row-major) sweep; the variable-side
// lists reference the same edge ids.
class FactorGraph {
public:
    struct ObsAdj {
        int var;     // neighboring variable node (column index)
        int edge;
        cplx coeff;  // H[obs, var]
    };
    struct VarAdj {
        int obs;     // neighboring observation node (row index)
        int edge;
        cplx coeff;  // H[obs, var]
    };

    explicit FactorGraph(const SparseChannelMatrix& H);

    int node_count() const { return node_count_; }
    int edge_count() const { return edge_count_; }
    std::span<const ObsAdj> obs_neighbors(int obs) const;  // zeta_b
    std::span<const VarAdj> var_neighbors(int var) const;  // zeta_a

private:
    int node_count_ = 0;
    int edge_count_ = 0;
    std::vector<int> obs_offsets_;
    std::vector<ObsAdj> obs_adj_;
    std::vector<int> var_offsets_;
    std::vector<VarAdj> var_adj_;
};

struct MpResult {
    std::vector<int> symbols;   // alphabet indices, one per variable node
    int iterations = 0;
    bool converged = false;
};

// Damped update: delta * raw + (1 - delta) * previous, elementwise.
void mix_pmf(std::span<double> raw_into_out, std::span<const double> previous, double delta);

// The iterative engine, exposed so the sweeps can be driven and inspected
// individually; detect_mp is the standard loop around it.
class MessagePassingDetector {
public:
    MessagePassingDetector(const FactorGraph& graph, const Alphabet& alphabet,
                           const DetectorParams& params, double noise_var);

    void reset(std::span<const cplx> y);   // uniform pmfs, iteration 0

    // Observation sweep: recompute (mu, sigma2) for every edge.
    void obs_update();

    // Variable sweep: recompute damped pmfs; returns the max pmf change.
    double var_update();

    // Run reset + sweeps until convergence or the iteration cap.
    MpResult run(std::span<const cplx> y);

    // Final decisions from the full-neighborhood likelihood product.
    std::vector<int> decide() const;

    int iterations() const { return iterations_; }

    // Introspection (tests): per-edge quantities addressed by node pair.
    cplx edge_mean(int obs, int var) const;
    double edge_variance(int obs, int var) const;
    std::span<const double> edge_pmf(int var, int obs) const;
    void set_edge_pmf(int var, int obs, std::span<const double> pmf);  // test hook
    double noise_var() const { return noise_var_; }

private:
    int find_edge(int obs, int var) const;
    void refresh_moments(int edge);

    const FactorGraph& graph_;
    const Alphabet& alphabet_;
    DetectorParams params_;
    double noise_var_;
    int q_;   // alphabet size

    std::vector<cplx> y_;
    std::vector<double> pmf_;        // edge-major, q_ entries per edge
    std::vector<cplx> pmf_mean_;     // sum_j pmf(j) a_j, per edge
    std::vector<double> pmf_m2_;     // sum_j pmf(j) |a_j|^2, per edge
    std::vector<cplx> mu_;           // interference mean, per edge
    std::vector<double> sigma2_;     // interference variance, per edge
    std::vector<double> loglik_;     // log Pr(y_obs | x_var = a_j), per edge
    std::vector<double> scratch_;
    int iterations_ = 0;
};

// Steps the engine to a decision. noise_var is the total complex noise
// variance per received element (0 allowed for noiseless runs).
MpResult detect_mp(std::span<const cplx> y, const SparseChannelMatrix& H,
                   const Alphabet& alphabet, const DetectorParams& params, double noise_var);

// Exact argmin over A^dim of ||y - Hx||^2 (uniform prior MAP). Refuses
// instances with more than 2^20 candidates. Ties break toward the
// lexicographically smallest index vector.
std::vector<int> detect_map_bruteforce(std::span<const cplx> y, const SparseChannelMatrix& H,
                                       const Alphabet& alphabet);

} // namespace ddsim
