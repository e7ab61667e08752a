#pragma once

#include <string>
#include <vector>

#include "vts/augment.hpp"
#include "vts/collection.hpp"
#include "vts/nn/tensor.hpp"

namespace vts {

// Class label indices follow the Borrmann order: I=0, II=1, III=2, IV=3.
inline int class_index(Borrmann c) { return static_cast<int>(c); }
inline Borrmann class_from_index(int i) {
    if (i < 0 || i > 3) throw UnknownClassLabelError("class_from_index");
    return static_cast<Borrmann>(i);
}

struct LabeledImage {
    ImageU8 image;
    int label = 0;
    std::string phantom_id;
};

// Loads every manifest entry of `split` from dataset_dir (the directory the
// manifest paths are relative to).
std::vector<LabeledImage> load_split(const DatasetManifest& manifest,
                                     const std::string& dataset_dir,
                                     Split split);

// Per-channel standardization constants, computed on resize-only train images
// in the [0,1] domain.
struct ChannelStats {
    std::array<double, 3> mean = {0.5, 0.5, 0.5};
    std::array<double, 3> stddev = {0.25, 0.25, 0.25};
};

ChannelStats compute_channel_stats(const std::vector<LabeledImage>& images,
                                   int input_size);

// Stacks images into an NCHW float tensor: resize to input_size, scale to
// [0,1], standardize per channel.
nn::Tensor<float> make_batch(const std::vector<const ImageU8*>& images,
                             int input_size, const ChannelStats& stats);

}  // namespace vts
