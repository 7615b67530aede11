#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rashomon/feature_space.hpp"

namespace rashomon {

// Per-cell sufficient statistics; sse is the sum of squared deviations from
// the cell mean. These determine pooled losses for every outcome model here.
struct CellStats {
    std::int64_t n = 0;
    double mean = 0.0;
    double sse = 0.0;
};

class Dataset {
public:
    explicit Dataset(std::size_t universe) : cells_(universe) {}

    const CellStats& cell(CellIndex c) const { return cells_[c]; }
    std::size_t universe_size() const { return cells_.size(); }
    std::int64_t total_n() const { return total_n_; }

private:
    friend class DatasetBuilder;
    std::vector<CellStats> cells_;
    std::int64_t total_n_ = 0;
};

// Accumulates raw observations, then computes cell means and residual masses
// in a second pass.
class DatasetBuilder {
public:
    explicit DatasetBuilder(const FeatureSpace& space);

    void add(CellIndex cell, double y);
    void add(const FeatureCombination& k, double y);

    Dataset build() const;

private:
    const FeatureSpace& space_;
    std::vector<std::vector<double>> raw_;
};

Dataset dataset_from_observations(const FeatureSpace& space,
                                  const std::vector<std::pair<CellIndex, double>>& obs);

}  // namespace rashomon
