#include "ddsim/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ddsim {

namespace {

// Interference variance can be exactly zero in noiseless degenerate runs;
// the likelihood exponent needs a finite denominator.
constexpr double kVarianceFloor = 1e-300;

} // namespace

FactorGraph::FactorGraph(const SparseChannelMatrix& H) : node_count_(H.dim()) {
    obs_offsets_.resize(static_cast<size_t>(node_count_) + 1, 0);
    var_offsets_.resize(static_cast<size_t>(node_count_) + 1, 0);

    int edge = 0;
    obs_adj_.reserve(static_cast<size_t>(H.nonzero_count()));
    for (int b = 0; b < node_count_; ++b) {
        obs_offsets_[static_cast<size_t>(b)] = edge;
        for (const auto& e : H.row(b)) {
            obs_adj_.push_back({e.col, edge, e.value});
            ++edge;
        }
    }
    obs_offsets_[static_cast<size_t>(node_count_)] = edge;
    edge_count_ = edge;

    // Bucket the same edges by variable (column).
    std::vector<int> degree(static_cast<size_t>(node_count_), 0);
    for (const auto& adj : obs_adj_) ++degree[static_cast<size_t>(adj.var)];
    for (int a = 0; a < node_count_; ++a)
        var_offsets_[static_cast<size_t>(a) + 1] =
            var_offsets_[static_cast<size_t>(a)] + degree[static_cast<size_t>(a)];
    var_adj_.resize(static_cast<size_t>(edge_count_));
    std::vector<int> cursor(var_offsets_.begin(), var_offsets_.end() - 1);
    for (int b = 0; b < node_count_; ++b) {
        for (int i = obs_offsets_[static_cast<size_t>(b)];
             i < obs_offsets_[static_cast<size_t>(b) + 1]; ++i) {
            const auto& adj = obs_adj_[static_cast<size_t>(i)];
            var_adj_[static_cast<size_t>(cursor[static_cast<size_t>(adj.var)]++)] = {
                b, adj.edge, adj.coeff};
        }
    }
}

std::span<const FactorGraph::ObsAdj> FactorGraph::obs_neighbors(int obs) const {
    return {obs_adj_.data() + obs_offsets_[static_cast<size_t>(obs)],
            static_cast<size_t>(obs_offsets_[static_cast<size_t>(obs) + 1] -
                                obs_offsets_[static_cast<size_t>(obs)])};
}

std::span<const FactorGraph::VarAdj> FactorGraph::var_neighbors(int var) const {
    return {var_adj_.data() + var_offsets_[static_cast<size_t>(var)],
            static_cast<size_t>(var_offsets_[static_cast<size_t>(var) + 1] -
                                var_offsets_[static_cast<size_t>(var)])};
}

void mix_pmf(std::span<double> raw_into_out, std::span<const double> previous, double delta) {
    for (size_t j = 0; j < raw_into_out.size(); ++j)
        raw_into_out[j] = delta * raw_into_out[j] + (1.0 - delta) * previous[j];
}

MessagePassingDetector::MessagePassingDetector(const FactorGraph& graph,
                                               const Alphabet& alphabet,
                                               const DetectorParams& params, double noise_var)
    : graph_(graph), alphabet_(alphabet), params_(params), noise_var_(noise_var),
      q_(alphabet.size()) {
    if (params_.damping <= 0.0 || params_.damping > 1.0)
        throw std::invalid_argument("damping factor must be in (0, 1]");
    if (params_.max_iterations < 1)
        throw std::invalid_argument("max_iterations must be >= 1");
    if (!(params_.epsilon > 0.0))
        throw std::invalid_argument("epsilon must be > 0");
    if (noise_var_ < 0.0)
        throw std::invalid_argument("noise variance must be >= 0");
    const size_t edges = static_cast<size_t>(graph_.edge_count());
    pmf_.resize(edges * static_cast<size_t>(q_));
    pmf_mean_.resize(edges);
    pmf_m2_.resize(edges);
    mu_.resize(edges);
    sigma2_.resize(edges);
    loglik_.resize(edges * static_cast<size_t>(q_));
    scratch_.resize(static_cast<size_t>(q_));
}

void MessagePassingDetector::reset(std::span<const cplx> y) {
    if (y.size() != static_cast<size_t>(graph_.node_count()))
        throw std::invalid_argument("observation vector length mismatch");
    y_.assign(y.begin(), y.end());
    std::fill(pmf_.begin(), pmf_.end(), 1.0 / static_cast<double>(q_));
    for (int e = 0; e < graph_.edge_count(); ++e) refresh_moments(e);
    iterations_ = 0;
}

void MessagePassingDetector::refresh_moments(int edge) {
    const double* p = pmf_.data() + static_cast<size_t>(edge) * static_cast<size_t>(q_);
    cplx mean(0.0, 0.0);
    double m2 = 0.0;
    for (int j = 0; j < q_; ++j) {
        mean += p[j] * alphabet_.points[static_cast<size_t>(j)];
        m2 += p[j] * std::norm(alphabet_.points[static_cast<size_t>(j)]);
    }
    pmf_mean_[static_cast<size_t>(edge)] = mean;
    pmf_m2_[static_cast<size_t>(edge)] = m2;
}

void MessagePassingDetector::obs_update() {
    for (int b = 0; b < graph_.node_count(); ++b) {
        auto nbrs = graph_.obs_neighbors(b);
        // Totals over the whole neighborhood, then subtract each edge's own
        // contribution to get the leave-one-out interference statistics.
        cplx total_mean(0.0, 0.0);
        double total_var = 0.0;
        for (const auto& adj : nbrs) {
            const cplx contrib = adj.coeff * pmf_mean_[static_cast<size_t>(adj.edge)];
            total_mean += contrib;
            total_var += std::norm(adj.coeff) * pmf_m2_[static_cast<size_t>(adj.edge)] -
                         std::norm(contrib);
        }
        for (const auto& adj : nbrs) {
            const cplx contrib = adj.coeff * pmf_mean_[static_cast<size_t>(adj.edge)];
            const double var_contrib =
                std::norm(adj.coeff) * pmf_m2_[static_cast<size_t>(adj.edge)] -
                std::norm(contrib);
            mu_[static_cast<size_t>(adj.edge)] = total_mean - contrib;
            sigma2_[static_cast<size_t>(adj.edge)] =
                std::max(total_var - var_contrib, 0.0) + noise_var_;
        }
    }
}

double MessagePassingDetector::var_update() {
    double max_change = 0.0;
    std::vector<double>& raw = scratch_;
    std::vector<double> total(static_cast<size_t>(q_));
    for (int a = 0; a < graph_.node_count(); ++a) {
        auto nbrs = graph_.var_neighbors(a);
        std::fill(total.begin(), total.end(), 0.0);
        for (const auto& adj : nbrs) {
            double* ll = loglik_.data() + static_cast<size_t>(adj.edge) * static_cast<size_t>(q_);
            const cplx residual_base = y_[static_cast<size_t>(adj.obs)] -
                                       mu_[static_cast<size_t>(adj.edge)];
            const double inv_var =
                1.0 / std::max(sigma2_[static_cast<size_t>(adj.edge)], kVarianceFloor);
            for (int j = 0; j < q_; ++j) {
                const cplx residual =
                    residual_base - adj.coeff * alphabet_.points[static_cast<size_t>(j)];
                ll[j] = -std::norm(residual) * inv_var;
                total[static_cast<size_t>(j)] += ll[j];
            }
        }
        for (const auto& adj : nbrs) {
            const double* ll =
                loglik_.data() + static_cast<size_t>(adj.edge) * static_cast<size_t>(q_);
            // Leave-one-out log-likelihoods, normalized in the log domain.
            double peak = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < q_; ++j) {
                raw[static_cast<size_t>(j)] = total[static_cast<size_t>(j)] - ll[j];
                peak = std::max(peak, raw[static_cast<size_t>(j)]);
            }
            double sum = 0.0;
            for (int j = 0; j < q_; ++j) {
                raw[static_cast<size_t>(j)] = std::exp(raw[static_cast<size_t>(j)] - peak);
                sum += raw[static_cast<size_t>(j)];
            }
            double* p = pmf_.data() + static_cast<size_t>(adj.edge) * static_cast<size_t>(q_);
            const double inv_sum = 1.0 / sum;
            for (int j = 0; j < q_; ++j) {
                const double fresh =
                    params_.damping * (raw[static_cast<size_t>(j)] * inv_sum) +
                    (1.0 - params_.damping) * p[j];
                max_change = std::max(max_change, std::abs(fresh - p[j]));
                p[j] = fresh;
            }
            refresh_moments(adj.edge);
        }
    }
    ++iterations_;
    return max_change;
}

std::vector<int> MessagePassingDetector::decide() const {
    std::vector<int> symbols(static_cast<size_t>(graph_.node_count()));
    std::vector<double> total(static_cast<size_t>(q_));
    for (int a = 0; a < graph_.node_count(); ++a) {
        std::fill(total.begin(), total.end(), 0.0);
        for (const auto& adj : graph_.var_neighbors(a)) {
            const double* ll =
                loglik_.data() + static_cast<size_t>(adj.edge) * static_cast<size_t>(q_);
            for (int j = 0; j < q_; ++j) total[static_cast<size_t>(j)] += ll[j];
        }
        int best = 0;
        for (int j = 1; j < q_; ++j)
            if (total[static_cast<size_t>(j)] > total[static_cast<size_t>(best)]) best = j;
        symbols[static_cast<size_t>(a)] = best;
    }
    return symbols;
}

MpResult MessagePassingDetector::run(std::span<const cplx> y) {
    reset(y);
    MpResult result;
    for (int t = 0; t < params_.max_iterations; ++t) {
        obs_update();
        const double change = var_update();
        if (change < params_.epsilon) {
            result.converged = true;
            break;
        }
    }
    result.iterations = iterations_;
    result.symbols = decide();
    return result;
}

cplx MessagePassingDetector::edge_mean(int obs, int var) const {
    return mu_[static_cast<size_t>(find_edge(obs, var))];
}

double MessagePassingDetector::edge_variance(int obs, int var) const {
    return sigma2_[static_cast<size_t>(find_edge(obs, var))];
}

std::span<const double> MessagePassingDetector::edge_pmf(int var, int obs) const {
    const int e = find_edge(obs, var);
    return {pmf_.data() + static_cast<size_t>(e) * static_cast<size_t>(q_),
            static_cast<size_t>(q_)};
}

void MessagePassingDetector::set_edge_pmf(int var, int obs, std::span<const double> pmf) {
    if (pmf.size() != static_cast<size_t>(q_))
        throw std::invalid_argument("pmf size mismatch");
    const int e = find_edge(obs, var);
    std::copy(pmf.begin(), pmf.end(),
              pmf_.begin() + static_cast<long>(e) * static_cast<long>(q_));
    refresh_moments(e);
}

int MessagePassingDetector::find_edge(int obs, int var) const {
    for (const auto& adj : graph_.obs_neighbors(obs))
        if (adj.var == var) return adj.edge;
    throw std::invalid_argument("no edge between requested nodes");
}

MpResult detect_mp(std::span<const cplx> y, const SparseChannelMatrix& H,
                   const Alphabet& alphabet, const DetectorParams& params, double noise_var) {
    const FactorGraph graph(H);
    MessagePassingDetector engine(graph, alphabet, params, noise_var);
    return engine.run(y);
}

std::vector<int> detect_map_bruteforce(std::span<const cplx> y, const SparseChannelMatrix& H,
                                       const Alphabet& alphabet) {
    const int dim = H.dim();
    if (y.size() != static_cast<size_t>(dim))
        throw std::invalid_argument("observation vector length mismatch");
    const int q = alphabet.size();
    double candidates = 1.0;
    for (int i = 0; i < dim; ++i) {
        candidates *= static_cast<double>(q);
        if (candidates > static_cast<double>(1 << 20))
            throw std::invalid_argument("detect_map_bruteforce: instance too large");
    }

    std::vector<int> current(static_cast<size_t>(dim), 0);
    std::vector<int> best = current;
    double best_metric = std::numeric_limits<double>::infinity();
    std::vector<cplx> x(static_cast<size_t>(dim));

    // Lexicographic odometer over index vectors; strict improvement keeps
    // the smallest tie.
    while (true) {
        for (int i = 0; i < dim; ++i)
            x[static_cast<size_t>(i)] =
                alphabet.points[static_cast<size_t>(current[static_cast<size_t>(i)])];
        double metric = 0.0;
        for (int r = 0; r < dim; ++r) {
            cplx acc(0.0, 0.0);
            for (const auto& e : H.row(r)) acc += e.value * x[static_cast<size_t>(e.col)];
            metric += std::norm(y[static_cast<size_t>(r)] - acc);
        }
        if (metric < best_metric) {
            best_metric = metric;
            best = current;
        }
        int pos = dim - 1;
        while (pos >= 0 && current[static_cast<size_t>(pos)] == q - 1) {
            current[static_cast<size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++current[static_cast<size_t>(pos)];
    }
    return best;
}

} // namespace ddsim
