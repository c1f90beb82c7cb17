#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>

#include "axflow/rng.hpp"
#include "axflow/weights_io.hpp"
#include "doctest.h"

using namespace axflow;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void put_u16(std::ofstream& os, std::uint16_t v) {
    os.write(reinterpret_cast<const char*>(&v), 2);
}
void put_u32(std::ofstream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), 4);
}

}  // namespace

TEST_CASE("weight sets round trip bitwise") {
    TempFile tmp("tmp_test_weights.f1dw");
    Rng rng(101);
    WeightSet set;
    set["alpha"] = Grid({4});
    set["beta.gamma"] = Grid({3, 5});
    set["delta"] = Grid({2, 2, 2, 2});
    for (auto& [name, grid] : set) rng.fill_gaussian(grid, 1.0);
    save_weights(set, tmp.path);

    WeightSet back = load_weights(tmp.path);
    REQUIRE(back.size() == set.size());
    for (const auto& [name, grid] : set) {
        REQUIRE(back.count(name) == 1);
        CHECK(bitwise_equal(back.at(name), grid));
    }
}

TEST_CASE("weight file parse errors") {
    {
        TempFile tmp("tmp_test_w_badmagic.f1dw");
        std::ofstream os(tmp.path, std::ios::binary);
        os.write("NOPE\0\0\0\0", 8);
        os.close();
        CHECK_THROWS_WITH_AS(load_weights(tmp.path),
                             doctest::Contains("expected F1DW"), ParseError);
    }
    {
        // Truncate inside the payload; the error must name the tensor.
        TempFile tmp("tmp_test_w_trunc.f1dw");
        WeightSet set;
        set["alpha"] = Grid::full({8}, 1.0f);
        save_weights(set, tmp.path);
        std::ifstream is(tmp.path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
        is.close();
        std::ofstream os(tmp.path, std::ios::binary | std::ios::trunc);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 12));
        os.close();
        CHECK_THROWS_WITH_AS(load_weights(tmp.path), doctest::Contains("alpha"), ParseError);
    }
    {
        // Two tensors with the same name.
        TempFile tmp("tmp_test_w_dup.f1dw");
        std::ofstream os(tmp.path, std::ios::binary);
        os.write("F1DW", 4);
        put_u32(os, 2);
        for (int t = 0; t < 2; ++t) {
            put_u16(os, 1);
            os.write("a", 1);
            const unsigned char rank = 1;
            os.write(reinterpret_cast<const char*>(&rank), 1);
            put_u32(os, 1);
            const float v = 1.0f;
            os.write(reinterpret_cast<const char*>(&v), 4);
        }
        os.close();
        CHECK_THROWS_WITH_AS(load_weights(tmp.path), doctest::Contains("duplicate"), ParseError);
    }
    {
        // A zero extent.
        TempFile tmp("tmp_test_w_zeroext.f1dw");
        std::ofstream os(tmp.path, std::ios::binary);
        os.write("F1DW", 4);
        put_u32(os, 1);
        put_u16(os, 1);
        os.write("a", 1);
        const unsigned char rank = 2;
        os.write(reinterpret_cast<const char*>(&rank), 1);
        put_u32(os, 3);
        put_u32(os, 0);
        os.close();
        CHECK_THROWS_WITH_AS(load_weights(tmp.path), doctest::Contains("zero extent"), ParseError);
    }
    CHECK_THROWS_AS(load_weights("tmp_test_w_missing.f1dw"), IoError);
}

TEST_CASE("weight lookup names the missing tensor") {
    WeightSet set;
    set["present"] = Grid({1});
    CHECK(&weight(set, "present") == &set.at("present"));
    CHECK_THROWS_WITH_AS(weight(set, "absent"), doctest::Contains("absent"), ValueError);
}
