#include "rashomon/dataset.hpp"

#include <stdexcept>

#include "rashomon/numeric.hpp"

namespace rashomon {

DatasetBuilder::DatasetBuilder(const FeatureSpace& space)
    : space_(space), raw_(space.universe_size()) {}

void DatasetBuilder::add(CellIndex cell, double y) {
    if (cell >= raw_.size()) throw std::invalid_argument("cell index out of range");
    raw_[cell].push_back(y);
}

void DatasetBuilder::add(const FeatureCombination& k, double y) { add(space_.cell_index(k), y); }

Dataset DatasetBuilder::build() const {
    Dataset d(raw_.size());
    for (std::size_t c = 0; c < raw_.size(); ++c) {
        const auto& ys = raw_[c];
        if (ys.empty()) continue;
        NeumaierSum total;
        for (double y : ys) total.add(y);
        const double mean = total.value() / static_cast<double>(ys.size());
        NeumaierSum sq;
        for (double y : ys) sq.add((y - mean) * (y - mean));
        d.cells_[c] = {static_cast<std::int64_t>(ys.size()), mean, sq.value()};
        d.total_n_ += static_cast<std::int64_t>(ys.size());
    }
    return d;
}

Dataset dataset_from_observations(const FeatureSpace& space,
                                  const std::vector<std::pair<CellIndex, double>>& obs) {
    DatasetBuilder b(space);
    for (const auto& [c, y] : obs) b.add(c, y);
    return b.build();
}

}  // namespace rashomon
