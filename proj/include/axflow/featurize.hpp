#pragma once

#include <string>
#include <vector>

#include "axflow/types.hpp"

namespace axflow {

// Side of the square pixel block behind one feature cell; the feature grid
// is the ceil(1/8) scale of the image.
inline constexpr int kFeatureScale = 8;

// Grayscale image with intensities in [0, 1].
struct ImageGray {
    int height = 0;
    int width = 0;
    std::vector<float> pixels;  // row major, height*width

    ImageGray() = default;
    ImageGray(int h, int w) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, 0.0f) {
        if (h <= 0 || w <= 0) throw ShapeError("image: non-positive extents");
    }
    float& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    float at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Hand-rolled feature extractor at 1/8 resolution. Each 8x8 cell yields d
// channels: mean intensity, mean x Sobel response, mean y Sobel response,
// intensity variance, then (d-4) cosine projections of the flattened patch
// (DCT-II rows, frequencies 1..d-4). The per-cell vector is L2 normalized;
// an all-zero vector falls back to a unit vector in channel 0. Cells reaching
// past the border read clamped pixels so partial cells stay well defined.
// Requires d >= 8 and d divisible by 4, image extents >= 8.
FeatureMap featurize_image(const ImageGray& img, int d);

// Feature file format: magic "F1DF", then u32 h, w, d and h*w*d f32 payload,
// all little endian, payload row major with the channel axis fastest.
void save_features(const FeatureMap& f, const std::string& path);
FeatureMap load_features(const std::string& path);

}  // namespace axflow
