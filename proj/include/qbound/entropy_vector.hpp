#pragma once

#include <Eigen/Dense>

#include "qbound/query.hpp"

namespace qbound {

// One entropy value per nonempty variable subset, stored at
// SubsetIndex::position order.  `normalized` marks division by log2(rmax).
struct EntropyVector {
    Eigen::VectorXd values;
    bool normalized = false;

    double operator[](VarSet s) const { return values(static_cast<Eigen::Index>(s.bits) - 1); }
    double& operator[](VarSet s) { return values(static_cast<Eigen::Index>(s.bits) - 1); }
    std::size_t num_variables() const {
        std::size_t n = 0;
        while ((Eigen::Index{1} << n) - 1 < values.size()) ++n;
        return n;
    }
};

}  // namespace qbound
