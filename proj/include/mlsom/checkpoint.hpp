#pragma once

#include <string>

#include "mlsom/classifier.hpp"
#include "mlsom/som.hpp"

namespace mlsom {

/// Grid checkpoint: magic "MLSOM1\0", little-endian u32 height, width, dim,
/// then height*width*dim little-endian IEEE-754 f32 weights, row-major.
/// write -> read -> write round-trips bit-exactly.
void save_grid(const NeuronGrid<float>& grid, const std::string& path);
NeuronGrid<float> load_grid(const std::string& path);

/// Classifier checkpoint: magic "MLCLF1\0", little-endian u32 num_classes,
/// feature_dim, then weights row-major and bias as little-endian f32.
void save_classifier(const LinearClassifier<float>& clf, const std::string& path);
LinearClassifier<float> load_classifier(const std::string& path);

}  // namespace mlsom
