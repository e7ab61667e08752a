#pragma once

#include "vts/image.hpp"

namespace vts {

// Stochastic training-time augmentation. Geometric ops run before photometric
// ops; each fires independently with probability `prob`. Test images only go
// through resize().
struct AugmentConfig {
    int target_size = 224;
    double rotation_deg = 45.0;       // rotations drawn from [-45, 45]
    double crop_scale_min = 0.7;      // area fraction
    double crop_scale_max = 1.0;
    double blur_sigma_min = 1.0;
    double blur_sigma_max = 256.0;
    double noise_sigma_min = 1.0;     // 0-255 domain
    double noise_sigma_max = 50.0;
    double prob = 0.5;
    bool enable_crop = true;
    bool enable_hflip = true;
    bool enable_vflip = true;
    bool enable_rotate = true;
    bool enable_blur = true;
    bool enable_noise = true;

    void check() const {
        if (prob < 0.0 || prob > 1.0)
            throw InvalidConfigError("AugmentConfig: prob outside [0,1]");
        if (blur_sigma_min <= 0 || noise_sigma_min <= 0)
            throw InvalidConfigError("AugmentConfig: sigma ranges must be positive");
        if (rotation_deg < 0)
            throw InvalidConfigError("AugmentConfig: rotation range must be symmetric");
        if (crop_scale_min <= 0 || crop_scale_max > 1.0 ||
            crop_scale_min > crop_scale_max)
            throw InvalidConfigError("AugmentConfig: bad crop scale range");
    }
};

// Bilinear resample to target dimensions (aspect is not preserved).
ImageU8 resize(const ImageU8& image, int target_h, int target_w);

ImageU8 hflip(const ImageU8& image);
ImageU8 vflip(const ImageU8& image);
// Rotation about the image center, bilinear sampling, edge-clamp fill.
ImageU8 rotate(const ImageU8& image, double degrees);
// Uniform sub-rectangle of the given area fraction, resized back.
ImageU8 random_crop(const ImageU8& image, double area_scale, Rng& rng);
// Separable Gaussian, kernel truncated at min(3*sigma, image dim).
ImageU8 gaussian_blur(const ImageU8& image, double sigma);
// Per-pixel iid Gaussian noise in the 0-255 domain, clamped.
ImageU8 gaussian_noise(const ImageU8& image, double sigma, Rng& rng);

// Full pipeline: crop -> hflip -> vflip -> rotate -> blur -> noise.
ImageU8 augment(const ImageU8& image, const AugmentConfig& cfg, Rng& rng);

}  // namespace vts
