#include "axflow/featurize.hpp"

#include <algorithm>
#include <cmath>

#include "binio.hpp"

namespace axflow {

namespace {

constexpr int kCell = kFeatureScale;
constexpr double kPi = 3.14159265358979323846;

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// 3x3 Sobel responses at (y, x) with replicated borders. Computed as the
// difference of two identically ordered sums so a constant image gives an
// exact zero.
float sobel_x(const ImageGray& img, int y, int x) {
    auto p = [&](int dy, int dx) {
        return img.at(clampi(y + dy, 0, img.height - 1), clampi(x + dx, 0, img.width - 1));
    };
    float right = p(-1, 1) + 2.0f * p(0, 1) + p(1, 1);
    float left = p(-1, -1) + 2.0f * p(0, -1) + p(1, -1);
    return right - left;
}

float sobel_y(const ImageGray& img, int y, int x) {
    auto p = [&](int dy, int dx) {
        return img.at(clampi(y + dy, 0, img.height - 1), clampi(x + dx, 0, img.width - 1));
    };
    float bottom = p(1, -1) + 2.0f * p(1, 0) + p(1, 1);
    float top = p(-1, -1) + 2.0f * p(-1, 0) + p(-1, 1);
    return bottom - top;
}

}  // namespace

FeatureMap featurize_image(const ImageGray& img, int d) {
    if (img.height < kCell || img.width < kCell)
        throw ShapeError("featurize: image " + std::to_string(img.height) + "x" +
                         std::to_string(img.width) + " is smaller than one 8x8 cell");
    if (d < 8 || d % 4 != 0)
        throw ShapeError("featurize: channel count " + std::to_string(d) +
                         " must be >= 8 and divisible by 4");

    const int fh = (img.height + kCell - 1) / kCell;
    const int fw = (img.width + kCell - 1) / kCell;
    const int nproj = d - 4;

    // DCT-II basis over the flattened 64-pixel patch, frequencies 1..d-4.
    std::vector<float> basis(static_cast<std::size_t>(nproj) * kCell * kCell);
    for (int k = 0; k < nproj; ++k)
        for (int p = 0; p < kCell * kCell; ++p)
            basis[static_cast<std::size_t>(k) * kCell * kCell + p] = static_cast<float>(
                std::cos(kPi * static_cast<double>(k + 1) * (static_cast<double>(p) + 0.5) / (kCell * kCell)));

    Grid out({fh, fw, d});
    parallel_for(static_cast<std::size_t>(fh) * fw, [&](std::size_t begin, std::size_t end) {
        std::vector<float> patch(kCell * kCell);
        for (std::size_t cell = begin; cell < end; ++cell) {
            const int cy = static_cast<int>(cell) / fw;
            const int cx = static_cast<int>(cell) % fw;

            float mean = 0.0f, gx = 0.0f, gy = 0.0f;
            for (int j = 0; j < kCell; ++j) {
                for (int i = 0; i < kCell; ++i) {
                    const int y = clampi(cy * kCell + j, 0, img.height - 1);
                    const int x = clampi(cx * kCell + i, 0, img.width - 1);
                    const float v = img.at(y, x);
                    patch[static_cast<std::size_t>(j) * kCell + i] = v;
                    mean += v;
                    gx += sobel_x(img, y, x);
                    gy += sobel_y(img, y, x);
                }
            }
            mean /= kCell * kCell;
            gx /= kCell * kCell;
            gy /= kCell * kCell;

            float var = 0.0f;
            for (float v : patch) {
                const float dv = v - mean;
                var += dv * dv;
            }
            var /= kCell * kCell;

            float* fv = out.data() + (static_cast<std::size_t>(cy) * fw + cx) * d;
            fv[0] = mean;
            fv[1] = gx;
            fv[2] = gy;
            fv[3] = var;
            for (int k = 0; k < nproj; ++k) {
                const float* row = basis.data() + static_cast<std::size_t>(k) * kCell * kCell;
                float acc = 0.0f;
                for (int p = 0; p < kCell * kCell; ++p) acc += patch[static_cast<std::size_t>(p)] * row[p];
                fv[4 + k] = acc;
            }

            float norm2 = 0.0f;
            for (int c = 0; c < d; ++c) norm2 += fv[c] * fv[c];
            if (norm2 > 0.0f) {
                const float inv = 1.0f / std::sqrt(norm2);
                for (int c = 0; c < d; ++c) fv[c] *= inv;
            } else {
                fv[0] = 1.0f;  // degenerate all-zero cell
            }
        }
    });
    return FeatureMap(std::move(out));
}

namespace {
constexpr char kFeatureMagic[4] = {'F', '1', 'D', 'F'};
constexpr std::uint64_t kMaxElems = 1ull << 31;
}  // namespace

void save_features(const FeatureMap& f, const std::string& path) {
    auto os = binio::open_out(path);
    os.write(kFeatureMagic, 4);
    binio::put_u32(os, static_cast<std::uint32_t>(f.h()));
    binio::put_u32(os, static_cast<std::uint32_t>(f.w()));
    binio::put_u32(os, static_cast<std::uint32_t>(f.d()));
    binio::put_f32_array(os, f.values.data(), f.values.size());
    if (!os) throw IoError("short write: " + path);
}

FeatureMap load_features(const std::string& path) {
    auto is = binio::open_in(path);
    char magic[4];
    if (!is.read(magic, 4)) throw ParseError(path + ": truncated header, expected F1DF magic");
    if (std::memcmp(magic, kFeatureMagic, 4) != 0)
        throw ParseError(path + ": bad magic, expected F1DF");
    std::uint32_t h, w, d;
    if (!binio::get_u32(is, h) || !binio::get_u32(is, w) || !binio::get_u32(is, d))
        throw ParseError(path + ": truncated header");
    if (h == 0 || w == 0 || d == 0)
        throw ParseError(path + ": zero extent");
    const std::uint64_t n = static_cast<std::uint64_t>(h) * w * d;
    if (n > kMaxElems || static_cast<std::uint64_t>(h) * w > kMaxElems)
        throw ParseError(path + ": extent overflow (" + std::to_string(h) + "x" + std::to_string(w) +
                         "x" + std::to_string(d) + ")");
    Grid g({static_cast<int>(h), static_cast<int>(w), static_cast<int>(d)});
    if (!binio::get_f32_array(is, g.data(), g.size()))
        throw ParseError(path + ": truncated payload");
    return FeatureMap(std::move(g));
}

}  // namespace axflow
