#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include "axflow/metrics_io.hpp"
#include "axflow/rng.hpp"
#include "doctest.h"

using namespace axflow;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("epe_report computes mean error, outliers and speed bins") {
    FlowField flow = FlowField::zeros(1, 2);
    FlowField gt = FlowField::zeros(1, 2);
    // Pixel 0: gt zero, estimate off by a 3-4-5 triangle; an outlier.
    flow.values(0, 0, 0) = 3.0f;
    flow.values(0, 0, 1) = 4.0f;
    // Pixel 1: exact match at speed 10 (the [10, 40) bin boundary).
    flow.values(0, 1, 0) = 10.0f;
    gt.values(0, 1, 0) = 10.0f;

    EvalReport r = epe_report(flow, gt);
    CHECK(r.valid_count == 2);
    CHECK(r.epe == 2.5);
    CHECK(r.f1_all == 50.0);
    CHECK(r.s0_10 == 5.0);
    CHECK(r.s10_40 == 0.0);
    CHECK(r.s40plus == 0.0);
}

TEST_CASE("epe_report outlier rule needs both 3 px and 5 percent") {
    FlowField flow = FlowField::zeros(1, 1);
    FlowField gt = FlowField::zeros(1, 1);
    gt.values(0, 0, 0) = 60.0f;
    gt.values(0, 0, 1) = 80.0f;  // magnitude 100
    flow.values(0, 0, 0) = 64.0f;
    flow.values(0, 0, 1) = 80.0f;  // error 4 > 3 px but only 4% of magnitude
    EvalReport r = epe_report(flow, gt);
    CHECK(r.f1_all == 0.0);
    CHECK(r.s40plus == 4.0);
    CHECK(r.s0_10 == 0.0);
}

TEST_CASE("epe_report honors the valid mask") {
    FlowField flow = FlowField::zeros(1, 3);
    FlowField gt = FlowField::zeros(1, 3);
    flow.values(0, 1, 0) = 100.0f;  // huge error, but masked out
    Grid valid({1, 3}, {1.0f, 0.0f, 1.0f});
    EvalReport r = epe_report(flow, gt, &valid);
    CHECK(r.valid_count == 2);
    CHECK(r.epe == 0.0);

    Grid none({1, 3});
    CHECK_THROWS_AS(epe_report(flow, gt, &none), ValueError);
    CHECK_THROWS_AS(epe_report(flow, FlowField::zeros(2, 3)), ShapeError);
    Grid bad_mask({3, 1});
    CHECK_THROWS_AS(epe_report(flow, gt, &bad_mask), ShapeError);
}

TEST_CASE("eval report CSV layout") {
    EvalReport r;
    r.epe = 1.5;
    r.f1_all = 25.0;
    r.s0_10 = 0.5;
    r.s10_40 = 2.0;
    r.s40plus = 0.0;
    r.valid_count = 42;
    CHECK(r.to_csv() ==
          "epe,f1_all,s0_10,s10_40,s40plus,valid_count\n"
          "1.500000,25.000000,0.500000,2.000000,0.000000,42\n");
}

TEST_CASE("flo files round trip bitwise and have the documented size") {
    TempFile tmp("tmp_test_flow.flo");
    FlowField flow = FlowField::zeros(3, 4);
    Rng rng(111);
    rng.fill_gaussian(flow.values, 2.0);
    write_flo(flow, tmp.path);
    FlowField back = read_flo(tmp.path);
    CHECK(bitwise_equal(back.values, flow.values));

    TempFile tiny("tmp_test_tiny.flo");
    write_flo(FlowField::zeros(1, 1), tiny.path);
    std::ifstream is(tiny.path, std::ios::binary | std::ios::ate);
    CHECK(is.tellg() == std::streampos(20));  // 4 tag + 4 w + 4 h + 2 floats
}

TEST_CASE("flo parse errors") {
    TempFile tmp("tmp_test_badtag.flo");
    std::ofstream os(tmp.path, std::ios::binary);
    const float tag = 1.0f;
    const std::int32_t one = 1;
    os.write(reinterpret_cast<const char*>(&tag), 4);
    os.write(reinterpret_cast<const char*>(&one), 4);
    os.write(reinterpret_cast<const char*>(&one), 4);
    const float uv[2] = {0.0f, 0.0f};
    os.write(reinterpret_cast<const char*>(uv), 8);
    os.close();
    CHECK_THROWS_WITH_AS(read_flo(tmp.path), doctest::Contains("bad tag"), ParseError);

    TempFile trunc("tmp_test_trunc.flo");
    std::ofstream ts(trunc.path, std::ios::binary);
    ts.write("ab", 2);
    ts.close();
    CHECK_THROWS_AS(read_flo(trunc.path), ParseError);
}

TEST_CASE("flow_to_color closed forms") {
    FlowField flow = FlowField::zeros(2, 2);
    flow.values(0, 1, 0) = 1.0f;   // unit +x: first wheel entry, pure red
    flow.values(1, 0, 0) = 0.5f;   // half speed: desaturated red
    flow.values(1, 1, 0) = 2.0f;   // over range: darkened red
    ImageRgb img = flow_to_color(flow, 1.0f);
    auto px = [&](int y, int x) { return img.rgb.data() + (static_cast<std::size_t>(y) * 2 + x) * 3; };
    CHECK(px(0, 0)[0] == 255);  // zero flow renders white
    CHECK(px(0, 0)[1] == 255);
    CHECK(px(0, 0)[2] == 255);
    CHECK(px(0, 1)[0] == 255);
    CHECK(px(0, 1)[1] == 0);
    CHECK(px(0, 1)[2] == 0);
    CHECK(px(1, 0)[0] == 255);
    CHECK(px(1, 0)[1] == 128);
    CHECK(px(1, 0)[2] == 128);
    CHECK(px(1, 1)[0] == 191);  // 0.75 * 255 rounded
    CHECK(px(1, 1)[1] == 0);
    CHECK(px(1, 1)[2] == 0);

    // The automatic scale equals passing the field's maximum explicitly.
    FlowField f2 = FlowField::zeros(1, 2);
    f2.values(0, 0, 0) = 3.0f;
    f2.values(0, 0, 1) = 4.0f;
    ImageRgb autoscaled = flow_to_color(f2);
    ImageRgb explicit_max = flow_to_color(f2, 5.0f);
    CHECK(autoscaled.rgb == explicit_max.rgb);

    FlowField bad = FlowField::zeros(1, 1);
    bad.values(0, 0, 0) = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(flow_to_color(bad), ValueError);
}

TEST_CASE("pgm files round trip exactly") {
    TempFile tmp("tmp_test_img.pgm");
    ImageGray img(2, 3);
    const unsigned char levels[6] = {0, 37, 64, 128, 200, 255};
    for (int i = 0; i < 6; ++i) img.pixels[static_cast<std::size_t>(i)] = levels[i] / 255.0f;
    write_pgm(img, tmp.path);
    ImageGray back = read_pgm(tmp.path);
    REQUIRE(back.height == 2);
    REQUIRE(back.width == 3);
    for (int i = 0; i < 6; ++i) CHECK(back.pixels[static_cast<std::size_t>(i)] == img.pixels[static_cast<std::size_t>(i)]);
}

TEST_CASE("pnm headers accept comments") {
    TempFile tmp("tmp_test_comment.pgm");
    std::ofstream os(tmp.path, std::ios::binary);
    os << "P5\n# a comment line\n3 2\n255\n";
    const unsigned char data[6] = {0, 51, 102, 153, 204, 255};
    os.write(reinterpret_cast<const char*>(data), 6);
    os.close();
    ImageGray img = read_pgm(tmp.path);
    REQUIRE(img.height == 2);
    REQUIRE(img.width == 3);
    CHECK(img.at(0, 1) == 51.0f / 255.0f);
    CHECK(img.at(1, 2) == 1.0f);
}

TEST_CASE("ppm files load as luma") {
    TempFile tmp("tmp_test_img.ppm");
    ImageRgb img(1, 2);
    img.rgb = {255, 0, 0, 0, 255, 0};
    write_ppm(img, tmp.path);
    ImageGray gray = read_ppm(tmp.path);
    REQUIRE(gray.height == 1);
    REQUIRE(gray.width == 2);
    CHECK(gray.at(0, 0) == doctest::Approx(0.299).epsilon(1e-6));
    CHECK(gray.at(0, 1) == doctest::Approx(0.587).epsilon(1e-6));
}

TEST_CASE("pnm parse errors") {
    {
        TempFile tmp("tmp_test_badmagic.pgm");
        std::ofstream os(tmp.path, std::ios::binary);
        os << "P4\n1 1\n255\n";
        os.put('\0');
        os.close();
        CHECK_THROWS_WITH_AS(read_pgm(tmp.path), doctest::Contains("expected P5"), ParseError);
    }
    {
        TempFile tmp("tmp_test_maxval.pgm");
        std::ofstream os(tmp.path, std::ios::binary);
        os << "P5\n1 1\n16\n";
        os.put('\0');
        os.close();
        CHECK_THROWS_WITH_AS(read_pgm(tmp.path), doctest::Contains("maxval"), ParseError);
    }
    {
        TempFile tmp("tmp_test_short.pgm");
        std::ofstream os(tmp.path, std::ios::binary);
        os << "P5\n4 4\n255\n";
        os.put('\0');
        os.close();
        CHECK_THROWS_WITH_AS(read_pgm(tmp.path), doctest::Contains("truncated"), ParseError);
    }
    CHECK_THROWS_AS(ImageRgb(0, 5), ShapeError);
}
