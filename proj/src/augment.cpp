#include "vts/augment.hpp"

#include <algorithm>
#include <cmath>

namespace vts {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

// Bilinear sample with edge clamp, per channel.
double sample_bilinear(const ImageU8& img, double y, double x, int ch) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    int x0 = static_cast<int>(x);
    int y0 = static_cast<int>(y);
    int x1 = std::min(x0 + 1, img.width - 1);
    int y1 = std::min(y0 + 1, img.height - 1);
    double tx = x - x0;
    double ty = y - y0;
    double a = img.at(y0, x0, ch) * (1 - tx) + img.at(y0, x1, ch) * tx;
    double b = img.at(y1, x0, ch) * (1 - tx) + img.at(y1, x1, ch) * tx;
    return a * (1 - ty) + b * ty;
}

}  // namespace

ImageU8 resize(const ImageU8& image, int target_h, int target_w) {
    if (target_h <= 0 || target_w <= 0)
        throw ZeroSizeError("resize: target dimensions must be positive");
    if (image.height == target_h && image.width == target_w) return image;

    ImageU8 out(target_h, target_w);
    double sy = static_cast<double>(image.height) / target_h;
    double sx = static_cast<double>(image.width) / target_w;
    for (int r = 0; r < target_h; ++r)
        for (int c = 0; c < target_w; ++c) {
            double y = (r + 0.5) * sy - 0.5;
            double x = (c + 0.5) * sx - 0.5;
            for (int ch = 0; ch < 3; ++ch)
                out.at(r, c, ch) = to_byte(sample_bilinear(image, y, x, ch));
        }
    return out;
}

ImageU8 hflip(const ImageU8& image) {
    ImageU8 out(image.height, image.width);
    for (int r = 0; r < image.height; ++r)
        for (int c = 0; c < image.width; ++c)
            for (int ch = 0; ch < 3; ++ch)
                out.at(r, c, ch) = image.at(r, image.width - 1 - c, ch);
    return out;
}

ImageU8 vflip(const ImageU8& image) {
    ImageU8 out(image.height, image.width);
    for (int r = 0; r < image.height; ++r)
        for (int c = 0; c < image.width; ++c)
            for (int ch = 0; ch < 3; ++ch)
                out.at(r, c, ch) = image.at(image.height - 1 - r, c, ch);
    return out;
}

ImageU8 rotate(const ImageU8& image, double degrees) {
    double rad = degrees * kPi / 180.0;
    double cs = std::cos(rad), sn = std::sin(rad);
    double cx = 0.5 * (image.width - 1);
    double cy = 0.5 * (image.height - 1);

    ImageU8 out(image.height, image.width);
    for (int r = 0; r < image.height; ++r)
        for (int c = 0; c < image.width; ++c) {
            // inverse map: rotate destination back by -theta
            double dx = c - cx, dy = r - cy;
            double sxp = cs * dx + sn * dy + cx;
            double syp = -sn * dx + cs * dy + cy;
            for (int ch = 0; ch < 3; ++ch)
                out.at(r, c, ch) = to_byte(sample_bilinear(image, syp, sxp, ch));
        }
    return out;
}

ImageU8 random_crop(const ImageU8& image, double area_scale, Rng& rng) {
    area_scale = std::clamp(area_scale, 0.01, 1.0);
    double side = std::sqrt(area_scale);
    int cw = std::max(1, static_cast<int>(std::lround(image.width * side)));
    int chh = std::max(1, static_cast<int>(std::lround(image.height * side)));
    int ox = static_cast<int>(rng.uniform_index(image.width - cw + 1));
    int oy = static_cast<int>(rng.uniform_index(image.height - chh + 1));

    ImageU8 crop(chh, cw);
    for (int r = 0; r < chh; ++r)
        for (int c = 0; c < cw; ++c)
            for (int ch = 0; ch < 3; ++ch)
                crop.at(r, c, ch) = image.at(oy + r, ox + c, ch);
    return resize(crop, image.height, image.width);
}

ImageU8 gaussian_blur(const ImageU8& image, double sigma) {
    if (sigma <= 0.0) return image;
    int dim = std::max(image.width, image.height);
    int radius = std::min(static_cast<int>(std::ceil(3.0 * sigma)), dim);

    std::vector<double> kernel(static_cast<std::size_t>(radius) * 2 + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double w = std::exp(-0.5 * (i / sigma) * (i / sigma));
        kernel[i + radius] = w;
        sum += w;
    }
    for (auto& w : kernel) w /= sum;

    // horizontal pass into a float buffer, vertical pass back to bytes
    std::vector<double> tmp(static_cast<std::size_t>(image.height) *
                            image.width * 3);
    for (int r = 0; r < image.height; ++r)
        for (int c = 0; c < image.width; ++c)
            for (int ch = 0; ch < 3; ++ch) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    int cc = std::clamp(c + k, 0, image.width - 1);
                    acc += kernel[k + radius] * image.at(r, cc, ch);
                }
                tmp[(static_cast<std::size_t>(r) * image.width + c) * 3 + ch] = acc;
            }

    ImageU8 out(image.height, image.width);
    for (int r = 0; r < image.height; ++r)
        for (int c = 0; c < image.width; ++c)
            for (int ch = 0; ch < 3; ++ch) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    int rr = std::clamp(r + k, 0, image.height - 1);
                    acc += kernel[k + radius] *
                           tmp[(static_cast<std::size_t>(rr) * image.width + c) *
                                   3 +
                               ch];
                }
                out.at(r, c, ch) = to_byte(acc);
            }
    return out;
}

ImageU8 gaussian_noise(const ImageU8& image, double sigma, Rng& rng) {
    ImageU8 out(image.height, image.width);
    for (std::size_t i = 0; i < image.pixels.size(); ++i)
        out.pixels[i] = to_byte(image.pixels[i] + rng.normal(0.0, sigma));
    return out;
}

ImageU8 augment(const ImageU8& image, const AugmentConfig& cfg, Rng& rng) {
    cfg.check();
    ImageU8 img = image;

    if (cfg.enable_crop && rng.uniform() < cfg.prob) {
        double scale = rng.uniform(cfg.crop_scale_min, cfg.crop_scale_max);
        img = random_crop(img, scale, rng);
    }
    if (cfg.enable_hflip && rng.uniform() < cfg.prob) img = hflip(img);
    if (cfg.enable_vflip && rng.uniform() < cfg.prob) img = vflip(img);
    if (cfg.enable_rotate && rng.uniform() < cfg.prob) {
        double deg = rng.uniform(-cfg.rotation_deg, cfg.rotation_deg);
        img = rotate(img, deg);
    }
    if (cfg.enable_blur && rng.uniform() < cfg.prob) {
        double sigma = rng.uniform(cfg.blur_sigma_min, cfg.blur_sigma_max);
        img = gaussian_blur(img, sigma);
    }
    if (cfg.enable_noise && rng.uniform() < cfg.prob) {
        double sigma = rng.uniform(cfg.noise_sigma_min, cfg.noise_sigma_max);
        img = gaussian_noise(img, sigma, rng);
    }
    return img;
}

}  // namespace vts
