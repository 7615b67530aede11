#include "rashomon/loss.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rashomon {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double cell_weight(const LossConfig& cfg, CellIndex c) {
    if (cfg.weights.empty()) return 1.0;
    return cfg.weights[c];
}

struct PoolFit {
    bool empty = false;
    double sse = 0.0;
    double mean = kNaN;         // constant model
    std::vector<double> coef;   // linear model
    bool rank_deficient = false;
};

PoolFit fit_constant(const Pool& pool, const Dataset& d, const LossConfig& cfg) {
    PoolFit fit;
    std::int64_t n = 0;
    NeumaierSum wn, wsum;
    for (CellIndex c : pool.members) {
        const auto& s = d.cell(c);
        if (s.n == 0) continue;
        n += s.n;
        const double w = cell_weight(cfg, c);
        wn.add(w * static_cast<double>(s.n));
        wsum.add(w * static_cast<double>(s.n) * s.mean);
    }
    if (n == 0) {
        fit.empty = true;
        return fit;
    }
    if (wn.value() <= 0.0) return fit;  // zero total weight: no loss, no value
    fit.mean = wsum.value() / wn.value();
    NeumaierSum sse;
    for (CellIndex c : pool.members) {
        const auto& s = d.cell(c);
        if (s.n == 0) continue;
        const double w = cell_weight(cfg, c);
        const double dev = s.mean - fit.mean;
        sse.add(w * (s.sse + static_cast<double>(s.n) * dev * dev));
    }
    fit.sse = sse.value();
    return fit;
}

PoolFit fit_linear(const FeatureSpace& space, const Pool& pool, const Dataset& d,
                   const LossConfig& cfg) {
    PoolFit fit;
    const int dim = space.num_features() + 1;
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(dim);
    std::int64_t n = 0;
    for (CellIndex c : pool.members) {
        const auto& s = d.cell(c);
        if (s.n == 0) continue;
        n += s.n;
        const double w = cell_weight(cfg, c) * static_cast<double>(s.n);
        const auto k = space.cell_at(c);
        Eigen::VectorXd x(dim);
        x(0) = 1.0;
        for (int m = 0; m < space.num_features(); ++m) x(m + 1) = static_cast<double>(k[m]);
        xtx.noalias() += w * x * x.transpose();
        xty.noalias() += w * s.mean * x;
    }
    if (n == 0) {
        fit.empty = true;
        return fit;
    }
    // Select independent design columns in order (intercept first) so a
    // regressor that is constant within the pool folds into the intercept
    // and keeps a zero slope, instead of spreading across the null space.
    constexpr double kRankTol = 1e-10;
    std::vector<Eigen::VectorXd> basis;  // xtx-orthonormal coefficient directions
    for (int j = 0; j < dim; ++j) {
        Eigen::VectorXd v = Eigen::VectorXd::Unit(dim, j);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : basis) v -= u * u.dot(xtx * v);
        const double norm2 = v.dot(xtx * v);
        if (norm2 > kRankTol * std::max(1.0, xtx(j, j))) basis.push_back(v / std::sqrt(norm2));
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(dim);
    for (const auto& u : basis) beta += u * u.dot(xty);
    fit.rank_deficient = static_cast<int>(basis.size()) < dim;
    fit.coef.assign(beta.data(), beta.data() + dim);
    NeumaierSum sse;
    for (CellIndex c : pool.members) {
        const auto& s = d.cell(c);
        if (s.n == 0) continue;
        const auto k = space.cell_at(c);
        double yhat = fit.coef[0];
        for (int m = 0; m < space.num_features(); ++m)
            yhat += fit.coef[m + 1] * static_cast<double>(k[m]);
        const double w = cell_weight(cfg, c);
        const double dev = s.mean - yhat;
        sse.add(w * (s.sse + static_cast<double>(s.n) * dev * dev));
    }
    fit.sse = sse.value();
    return fit;
}

PoolFit fit_pool(const FeatureSpace& space, const Pool& pool, const Dataset& d,
                 const LossConfig& cfg) {
    PoolFit fit = cfg.outcome_model == OutcomeModel::linear ? fit_linear(space, pool, d, cfg)
                                                            : fit_constant(pool, d, cfg);
    if (fit.empty && cfg.empty_cells == EmptyCellPolicy::strict)
        throw EmptyPoolError("pool has no observations");
    return fit;
}

}  // namespace

std::vector<double> pool_means(const Partition& p, const Dataset& d, EmptyCellPolicy policy) {
    LossConfig cfg;
    cfg.empty_cells = policy;
    std::vector<double> out;
    out.reserve(p.pools.size());
    for (const auto& pool : p.pools) out.push_back(fit_constant(pool, d, cfg).mean);
    if (policy == EmptyCellPolicy::strict)
        for (double m : out)
            if (std::isnan(m)) throw EmptyPoolError("pool has no observations");
    return out;
}

double mse_loss(const Partition& p, const Dataset& d) {
    if (d.total_n() <= 0) throw std::invalid_argument("dataset has no observations");
    LossConfig cfg;
    NeumaierSum total;
    for (const auto& pool : p.pools) {
        const auto fit = fit_constant(pool, d, cfg);
        if (fit.empty) throw EmptyPoolError("pool has no observations");
        total.add(fit.sse);
    }
    return total.value() / static_cast<double>(d.total_n());
}

double weighted_mse_loss(const Partition& p, const Dataset& d, const std::vector<double>& weights) {
    if (d.total_n() <= 0) throw std::invalid_argument("dataset has no observations");
    if (weights.size() != d.universe_size())
        throw std::invalid_argument("need one weight per cell");
    for (double w : weights)
        if (w < 0.0) throw std::invalid_argument("weights must be non-negative");
    LossConfig cfg;
    cfg.weights = weights;
    NeumaierSum total;
    for (const auto& pool : p.pools) {
        const auto fit = fit_constant(pool, d, cfg);
        if (fit.empty) throw EmptyPoolError("pool has no observations");
        total.add(fit.sse);
    }
    return total.value() / static_cast<double>(d.total_n());
}

LinearFit linear_pool_fit(const FeatureSpace& space, const Pool& pool, const Dataset& d,
                          const std::vector<double>& weights) {
    LossConfig cfg;
    cfg.outcome_model = OutcomeModel::linear;
    cfg.weights = weights;
    const auto fit = fit_linear(space, pool, d, cfg);
    if (fit.empty) throw EmptyPoolError("pool has no observations");
    return {fit.coef, fit.rank_deficient, fit.sse};
}

PoolLoss pool_loss(const FeatureSpace& space, const Pool& pool, const Dataset& d,
                   const LossConfig& cfg) {
    const auto fit = fit_pool(space, pool, d, cfg);
    return {fit.sse, fit.empty};
}

double penalty_value(const Partition& p, const LossConfig& cfg) {
    if (cfg.penalty == PenaltyKind::pool_count)
        return cfg.lambda * static_cast<double>(p.pools.size());
    std::int64_t covered = 0, sq = 0;
    for (const auto& pool : p.pools) {
        const auto h = static_cast<std::int64_t>(pool.members.size());
        covered += h;
        sq += h * h;
    }
    return cfg.lambda * static_cast<double>(covered * covered - sq);
}

double q_value(const FeatureSpace& space, const Partition& p, const Dataset& d,
               const LossConfig& cfg) {
    if (d.total_n() <= 0) throw std::invalid_argument("dataset has no observations");
    NeumaierSum total;
    for (const auto& pool : p.pools) total.add(pool_loss(space, pool, d, cfg).sse);
    return total.value() / static_cast<double>(d.total_n()) + penalty_value(p, cfg);
}

double rashomon_threshold(double q0, double epsilon) {
    if (!(q0 > 0.0)) throw std::invalid_argument("reference loss must be positive");
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be non-negative");
    return q0 * (1.0 + epsilon);
}

double xi(const FeatureSpace& space, const Partition& p, const Dataset& d, const LossConfig& cfg,
          double q0) {
    if (!(q0 > 0.0)) throw std::invalid_argument("reference loss must be positive");
    return (q_value(space, p, d, cfg) - q0) / q0;
}

std::int64_t max_pools(double q0, double epsilon, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("pool cap needs a positive lambda");
    return static_cast<std::int64_t>(
        std::floor(rashomon_threshold(q0, epsilon) / lambda + 1e-9));
}

std::vector<double> fitted_cell_values(const FeatureSpace& space, const Partition& p,
                                       const Dataset& d, const LossConfig& cfg) {
    std::vector<double> out(space.universe_size(), kNaN);
    for (const auto& pool : p.pools) {
        const auto fit = fit_pool(space, pool, d, cfg);
        if (fit.empty) continue;
        for (CellIndex c : pool.members) {
            if (cfg.outcome_model == OutcomeModel::linear) {
                const auto k = space.cell_at(c);
                double yhat = fit.coef[0];
                for (int m = 0; m < space.num_features(); ++m)
                    yhat += fit.coef[m + 1] * static_cast<double>(k[m]);
                out[c] = yhat;
            } else {
                out[c] = fit.mean;
            }
        }
    }
    return out;
}

}  // namespace rashomon
