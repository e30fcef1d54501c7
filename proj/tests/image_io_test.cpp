#include <gtest/gtest.h>

#include <fstream>

#include "campro/error.hpp"
#include "campro/image_io.hpp"
#include "json.hpp"
#include "test_util.hpp"

namespace campro {
namespace {

const std::filesystem::path kIoDir = testing::data_dir() / "io";

nlohmann::json expected() {
    std::ifstream in(kIoDir / "expected.json");
    return nlohmann::json::parse(in);
}

std::vector<std::uint8_t> pixels(const GrayImage& img) { return {img.data().begin(), img.data().end()}; }

TEST(ImageIo, ColourPngAndPpmUseRec601Luma) {
    const auto want = expected()["rgb_luma"].get<std::vector<std::uint8_t>>();
    const GrayImage png = read_gray(kIoDir / "rgb.png");
    EXPECT_EQ(png.width(), 7);
    EXPECT_EQ(png.height(), 5);
    EXPECT_EQ(pixels(png), want);
    EXPECT_EQ(pixels(read_gray(kIoDir / "rgb.ppm")), want);
}

TEST(ImageIo, GrayPng) {
    const GrayImage g = read_gray(kIoDir / "gray.png");
    EXPECT_EQ(g.width(), 4);
    EXPECT_EQ(pixels(g), expected()["gray"].get<std::vector<std::uint8_t>>());
}

TEST(ImageIo, JpegDecodesCloseToSource) {
    const GrayImage g = read_gray(kIoDir / "smooth.jpg");
    const auto want = expected()["smooth"].get<std::vector<int>>();
    ASSERT_EQ(g.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(g.data()[i], want[i], 4) << i;
}

TEST(ImageIo, WriteReadRoundTrip) {
    const auto dir = testing::scratch_dir("image_io");
    std::mt19937 rng(61);
    const GrayImage img = testing::random_gray(rng, 13, 9);
    write_gray(img, dir / "a.png");
    write_gray(img, dir / "a.pgm");
    EXPECT_EQ(read_gray(dir / "a.png"), img);
    EXPECT_EQ(read_gray(dir / "a.pgm"), img);
    EXPECT_THROW(write_gray(img, dir / "a.bmp"), FormatError);
}

TEST(ImageIo, MaskThreshold) {
    const auto dir = testing::scratch_dir("image_io_mask");
    write_png(GrayImage(3, 1, std::vector<std::uint8_t>{128, 129, 255}), dir / "m.png");
    EXPECT_EQ(read_mask(dir / "m.png"), BinaryMask(3, 1, std::vector<std::uint8_t>{0, 1, 1}));
}

TEST(ImageIo, Errors) {
    const auto dir = testing::scratch_dir("image_io_err");
    EXPECT_THROW(read_gray(dir / "missing.png"), IoError);
    {
        std::ofstream f(dir / "broken.png", std::ios::binary);
        f << "\x89PNG garbage";
    }
    EXPECT_THROW(read_gray(dir / "broken.png"), Error);
    {
        std::ofstream f(dir / "broken.jpg", std::ios::binary);
        f << "\xff\xd8\xff garbage";
    }
    EXPECT_THROW(read_gray(dir / "broken.jpg"), Error);
    {
        std::ofstream f(dir / "short.pgm", std::ios::binary);
        f << "P5\n4 4\n255\nab";
    }
    EXPECT_THROW(read_gray(dir / "short.pgm"), Error);
    EXPECT_EQ(rec601_luma(255, 255, 255), 255);
    EXPECT_EQ(rec601_luma(0, 0, 0), 0);
}

}  // namespace
}  // namespace campro
