#include "axflow/metrics_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "binio.hpp"

namespace axflow {

std::string EvalReport::to_csv() const {
    char line[256];
    std::snprintf(line, sizeof(line), "%.6f,%.6f,%.6f,%.6f,%.6f,%zu", epe, f1_all, s0_10, s10_40,
                  s40plus, valid_count);
    return std::string("epe,f1_all,s0_10,s10_40,s40plus,valid_count\n") + line + "\n";
}

EvalReport epe_report(const FlowField& flow, const FlowField& gt, const Grid* valid) {
    if (!flow.values.same_dims(gt.values))
        throw ShapeError("epe_report: flow " + dims_to_string(flow.values.dims()) + " vs gt " +
                         dims_to_string(gt.values.dims()));
    const int h = flow.h(), w = flow.w();
    if (valid && (valid->ndim() != 2 || valid->dim(0) != h || valid->dim(1) != w))
        throw ShapeError("epe_report: mask extents " + dims_to_string(valid->dims()));

    double sum_epe = 0.0, sum_s0 = 0.0, sum_s1 = 0.0, sum_s2 = 0.0;
    std::size_t n = 0, n0 = 0, n1 = 0, n2 = 0, outliers = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (valid && (*valid)(y, x) <= 0.5f) continue;
            const float du = flow.values(y, x, 0) - gt.values(y, x, 0);
            const float dv = flow.values(y, x, 1) - gt.values(y, x, 1);
            const double err = std::sqrt(static_cast<double>(du) * du + static_cast<double>(dv) * dv);
            const double mag = std::sqrt(static_cast<double>(gt.values(y, x, 0)) * gt.values(y, x, 0) +
                                         static_cast<double>(gt.values(y, x, 1)) * gt.values(y, x, 1));
            ++n;
            sum_epe += err;
            if (err > 3.0 && err > 0.05 * mag) ++outliers;
            if (mag < 10.0) {
                ++n0;
                sum_s0 += err;
            } else if (mag < 40.0) {
                ++n1;
                sum_s1 += err;
            } else {
                ++n2;
                sum_s2 += err;
            }
        }
    if (n == 0) throw ValueError("epe_report: empty valid set");

    EvalReport r;
    r.valid_count = n;
    r.epe = sum_epe / static_cast<double>(n);
    r.f1_all = 100.0 * static_cast<double>(outliers) / static_cast<double>(n);
    r.s0_10 = n0 ? sum_s0 / static_cast<double>(n0) : 0.0;
    r.s10_40 = n1 ? sum_s1 / static_cast<double>(n1) : 0.0;
    r.s40plus = n2 ? sum_s2 / static_cast<double>(n2) : 0.0;
    return r;
}

namespace {
constexpr float kFloTag = 202021.25f;
constexpr int kMaxImageExtent = 1 << 16;
}  // namespace

void write_flo(const FlowField& flow, const std::string& path) {
    auto os = binio::open_out(path);
    binio::put_f32(os, kFloTag);
    binio::put_i32(os, flow.w());
    binio::put_i32(os, flow.h());
    binio::put_f32_array(os, flow.values.data(), flow.values.size());
    if (!os) throw IoError("short write: " + path);
}

FlowField read_flo(const std::string& path) {
    auto is = binio::open_in(path);
    float tag;
    if (!binio::get_f32(is, tag)) throw ParseError(path + ": truncated header");
    if (tag != kFloTag) throw ParseError(path + ": bad tag, not a .flo file");
    std::int32_t w, h;
    if (!binio::get_i32(is, w) || !binio::get_i32(is, h))
        throw ParseError(path + ": truncated header");
    if (w <= 0 || h <= 0 || w > kMaxImageExtent || h > kMaxImageExtent)
        throw ParseError(path + ": implausible extents " + std::to_string(w) + "x" +
                         std::to_string(h));
    FlowField flow = FlowField::zeros(h, w);
    if (!binio::get_f32_array(is, flow.values.data(), flow.values.size()))
        throw ParseError(path + ": truncated payload");
    return flow;
}

namespace {

// 55-entry color wheel, values in [0, 1].
std::vector<std::array<float, 3>> make_color_wheel() {
    constexpr int kRy = 15, kYg = 6, kGc = 4, kCb = 11, kBm = 13, kMr = 6;
    std::vector<std::array<float, 3>> wheel;
    wheel.reserve(kRy + kYg + kGc + kCb + kBm + kMr);
    // RY: red holds, green ramps up; then each segment hands off to the next.
    for (int i = 0; i < kRy; ++i)
        wheel.push_back({1.0f, static_cast<float>(i) / kRy, 0.0f});
    for (int i = 0; i < kYg; ++i)
        wheel.push_back({1.0f - static_cast<float>(i) / kYg, 1.0f, 0.0f});
    for (int i = 0; i < kGc; ++i)
        wheel.push_back({0.0f, 1.0f, static_cast<float>(i) / kGc});
    for (int i = 0; i < kCb; ++i)
        wheel.push_back({0.0f, 1.0f - static_cast<float>(i) / kCb, 1.0f});
    for (int i = 0; i < kBm; ++i)
        wheel.push_back({static_cast<float>(i) / kBm, 0.0f, 1.0f});
    for (int i = 0; i < kMr; ++i)
        wheel.push_back({1.0f, 0.0f, 1.0f - static_cast<float>(i) / kMr});
    return wheel;
}

}  // namespace

ImageRgb flow_to_color(const FlowField& flow, float max_magnitude) {
    if (!all_finite(flow.values)) throw ValueError("flow_to_color: non-finite flow");
    static const std::vector<std::array<float, 3>> wheel = make_color_wheel();
    const int ncols = static_cast<int>(wheel.size());
    const int h = flow.h(), w = flow.w();

    float maxrad = max_magnitude;
    if (!(maxrad > 0.0f)) {
        maxrad = 0.0f;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const float u = flow.values(y, x, 0), v = flow.values(y, x, 1);
                maxrad = std::max(maxrad, std::sqrt(u * u + v * v));
            }
        if (maxrad == 0.0f) maxrad = 1.0f;
    }

    ImageRgb img(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float u = flow.values(y, x, 0) / maxrad;
            const float v = flow.values(y, x, 1) / maxrad;
            const float rad = std::sqrt(u * u + v * v);
            const float a = std::atan2(-v, -u) / 3.14159265358979323846f;
            const float fk = (a + 1.0f) / 2.0f * static_cast<float>(ncols - 1);
            int k0 = static_cast<int>(std::floor(fk));
            if (k0 >= ncols - 1) k0 = ncols - 1;  // a == +1 lands on the last entry
            const int k1 = (k0 + 1) % ncols;
            const float f = fk - static_cast<float>(k0);
            unsigned char* px = img.rgb.data() + (static_cast<std::size_t>(y) * w + x) * 3;
            for (int c = 0; c < 3; ++c) {
                float col = (1.0f - f) * wheel[static_cast<std::size_t>(k0)][static_cast<std::size_t>(c)] +
                            f * wheel[static_cast<std::size_t>(k1)][static_cast<std::size_t>(c)];
                if (rad <= 1.0f)
                    col = 1.0f - rad * (1.0f - col);  // desaturate toward white at low speed
                else
                    col *= 0.75f;  // out of range
                px[c] = static_cast<unsigned char>(
                    std::lround(255.0f * std::min(std::max(col, 0.0f), 1.0f)));
            }
        }
    return img;
}

namespace {

int pnm_next_int(std::istream& is, const std::string& path) {
    // Skips whitespace and '#' comments, then reads a decimal value.
    int c = is.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = is.get();
        } else if (std::isspace(c)) {
            c = is.get();
        } else {
            break;
        }
    }
    if (c == EOF || !std::isdigit(c)) throw ParseError(path + ": malformed header");
    long v = 0;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        if (v > kMaxImageExtent * 4L) throw ParseError(path + ": header value too large");
        c = is.get();
    }
    if (c == EOF) throw ParseError(path + ": truncated header");
    return static_cast<int>(v);
}

void read_pnm_header(std::istream& is, const std::string& path, const char* magic, int& w, int& h) {
    char m[2];
    if (!is.read(m, 2) || m[0] != magic[0] || m[1] != magic[1])
        throw ParseError(path + ": bad magic, expected " + magic);
    w = pnm_next_int(is, path);
    h = pnm_next_int(is, path);
    const int maxval = pnm_next_int(is, path);
    if (w <= 0 || h <= 0 || w > kMaxImageExtent || h > kMaxImageExtent)
        throw ParseError(path + ": implausible extents");
    if (maxval != 255) throw ParseError(path + ": only maxval 255 is supported");
    // pnm_next_int consumed exactly one whitespace after maxval.
}

}  // namespace

ImageGray read_pgm(const std::string& path) {
    auto is = binio::open_in(path);
    int w, h;
    read_pnm_header(is, path, "P5", w, h);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h);
    if (!is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
        throw ParseError(path + ": truncated pixel data");
    ImageGray img(h, w);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        img.pixels[i] = static_cast<float>(bytes[i]) / 255.0f;
    return img;
}

ImageGray read_ppm(const std::string& path) {
    auto is = binio::open_in(path);
    int w, h;
    read_pnm_header(is, path, "P6", w, h);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h * 3);
    if (!is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
        throw ParseError(path + ": truncated pixel data");
    ImageGray img(h, w);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const float r = bytes[i * 3], g = bytes[i * 3 + 1], b = bytes[i * 3 + 2];
        img.pixels[i] = (0.299f * r + 0.587f * g + 0.114f * b) / 255.0f;
    }
    return img;
}

void write_pgm(const ImageGray& img, const std::string& path) {
    auto os = binio::open_out(path);
    os << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> bytes(img.pixels.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const float v = std::min(std::max(img.pixels[i], 0.0f), 1.0f);
        bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("short write: " + path);
}

void write_ppm(const ImageRgb& img, const std::string& path) {
    auto os = binio::open_out(path);
    os << "P6\n" << img.width << " " << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
    if (!os) throw IoError("short write: " + path);
}

}  // namespace axflow
