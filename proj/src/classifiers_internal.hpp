#pragma once

#include <vector>

#include "tsfc/classifiers.hpp"

namespace tsfc::classifiers {

std::vector<int> forest_votes(const ForestModel& model, const FeatureMatrix& x, std::size_t n_classes);
std::vector<int> rotation_forest_votes(const RotationForestModel& model, const FeatureMatrix& x,
                                       std::size_t n_classes);

}  // namespace tsfc::classifiers
