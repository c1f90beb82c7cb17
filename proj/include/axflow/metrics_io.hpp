#pragma once

#include <string>
#include <vector>

#include "axflow/featurize.hpp"
#include "axflow/types.hpp"

namespace axflow {

// Flow accuracy summary. epe is the mean endpoint error over valid pixels;
// f1_all is the percentage of valid pixels whose error exceeds both 3 px and
// 5% of the ground-truth magnitude; s0_10/s10_40/s40plus are mean endpoint
// errors over the speed bins [0,10), [10,40), [40,inf) of the ground-truth
// magnitude (0 when a bin is empty).
struct EvalReport {
    double epe = 0.0;
    double f1_all = 0.0;
    double s0_10 = 0.0;
    double s10_40 = 0.0;
    double s40plus = 0.0;
    std::size_t valid_count = 0;

    std::string to_csv() const;  // header line + one data line
};

// valid is an optional (H, W) mask (> 0.5 means valid); null means all
// pixels. Throws ValueError when no pixel is valid.
EvalReport epe_report(const FlowField& flow, const FlowField& gt, const Grid* valid = nullptr);

// Middlebury .flo: f32 202021.25 tag, i32 width, i32 height, then (u, v)
// f32 pairs, little endian.
void write_flo(const FlowField& flow, const std::string& path);
FlowField read_flo(const std::string& path);

// 8-bit RGB image.
struct ImageRgb {
    int height = 0;
    int width = 0;
    std::vector<unsigned char> rgb;  // row major, 3 bytes per pixel

    ImageRgb() = default;
    ImageRgb(int h, int w)
        : height(h), width(w), rgb(static_cast<std::size_t>(h) * w * 3, 0) {
        if (h <= 0 || w <= 0) throw ShapeError("image: non-positive extents");
    }
};

// Classic 55-hue flow color wheel (segment sizes RY 15, YG 6, GC 4, CB 11,
// BM 13, MR 6). Magnitudes are scaled by max_magnitude (the field's maximum
// when <= 0); zero flow renders white.
ImageRgb flow_to_color(const FlowField& flow, float max_magnitude = 0.0f);

// Binary PNM with maxval 255. P5 loads as intensities v/255; P6 converts to
// gray with (0.299 R + 0.587 G + 0.114 B)/255. '#' comments in headers are
// honored.
ImageGray read_pgm(const std::string& path);
ImageGray read_ppm(const std::string& path);
void write_pgm(const ImageGray& img, const std::string& path);
void write_ppm(const ImageRgb& img, const std::string& path);

}  // namespace axflow
