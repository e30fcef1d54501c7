#include "campro/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

// jpeglib.h needs FILE and size_t declared first
#include <jpeglib.h>

namespace campro {
namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

std::vector<unsigned char> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

GrayImage read_png(const fs::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw FormatError(path.string() + ": " + image.message);
    }
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGBA : PNG_FORMAT_GA;
    const int channels = color ? 4 : 2;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&image);
        throw FormatError(path.string() + ": " + image.message);
    }
    const int w = static_cast<int>(image.width);
    const int h = static_cast<int>(image.height);
    std::vector<std::uint8_t> gray(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < gray.size(); ++i) {
        const std::uint8_t* p = buf.data() + i * channels;
        gray[i] = color ? rec601_luma(p[0], p[1], p[2]) : p[0];
    }
    return GrayImage(w, h, std::move(gray));
}

struct JpegErrorMgr {
    jpeg_error_mgr base;
    std::jmp_buf jump;
};

void jpeg_on_error(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(err->jump, 1);
}

GrayImage read_jpeg(const fs::path& path) {
    const auto bytes = slurp(path);
    jpeg_decompress_struct cinfo{};
    JpegErrorMgr err{};
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_on_error;
    std::vector<std::uint8_t> gray;
    int w = 0;
    int h = 0;
    if (setjmp(err.jump)) {
        char message[JMSG_LENGTH_MAX];
        (*cinfo.err->format_message)(reinterpret_cast<j_common_ptr>(&cinfo), message);
        jpeg_destroy_decompress(&cinfo);
        throw FormatError(path.string() + ": " + message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    // Y of YCbCr is Rec.601 luma
    cinfo.out_color_space = JCS_GRAYSCALE;
    jpeg_start_decompress(&cinfo);
    w = static_cast<int>(cinfo.output_width);
    h = static_cast<int>(cinfo.output_height);
    gray.resize(static_cast<std::size_t>(w) * h);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = gray.data() + static_cast<std::size_t>(cinfo.output_scanline) * w;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return GrayImage(w, h, std::move(gray));
}

// PNM tokens: whitespace separated, '#' comments to end of line.
class PnmReader {
public:
    PnmReader(const std::vector<unsigned char>& bytes, const fs::path& path)
        : bytes_(bytes), path_(path) {}

    std::string token() {
        skip_space();
        std::string t;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) t.push_back(static_cast<char>(bytes_[pos_++]));
        if (t.empty()) fail("unexpected end of header");
        return t;
    }

    int integer() {
        const std::string t = token();
        try {
            return std::stoi(t);
        } catch (const std::exception&) {
            fail("bad integer '" + t + "'");
        }
    }

    // exactly one whitespace byte separates the header from raster data
    std::size_t data_start() { return pos_ + 1; }
    [[noreturn]] void fail(const std::string& what) const {
        throw FormatError(path_.string() + ": " + what);
    }

private:
    void skip_space() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    const fs::path& path_;
    std::size_t pos_ = 0;
};

GrayImage read_pnm(const fs::path& path) {
    const auto bytes = slurp(path);
    PnmReader rd(bytes, path);
    const std::string magic = rd.token();
    if (magic != "P2" && magic != "P5" && magic != "P6") rd.fail("unsupported PNM magic " + magic);
    const int w = rd.integer();
    const int h = rd.integer();
    const int maxval = rd.integer();
    if (w < 1 || h < 1) rd.fail("bad dimensions");
    if (maxval < 1 || maxval > 255) rd.fail("only 8-bit PNM is supported");
    auto scale = [maxval](int v) {
        return static_cast<std::uint8_t>(maxval == 255 ? v : (v * 255 + maxval / 2) / maxval);
    };
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<std::uint8_t> gray(n);
    if (magic == "P2") {
        for (std::size_t i = 0; i < n; ++i) gray[i] = scale(std::clamp(rd.integer(), 0, maxval));
    } else {
        const std::size_t start = rd.data_start();
        const std::size_t channels = magic == "P6" ? 3 : 1;
        if (bytes.size() < start + n * channels) {
            rd.fail("truncated raster: expected " + std::to_string(n * channels) + " bytes");
        }
        const unsigned char* p = bytes.data() + start;
        for (std::size_t i = 0; i < n; ++i) {
            gray[i] = channels == 3
                          ? rec601_luma(scale(p[3 * i]), scale(p[3 * i + 1]), scale(p[3 * i + 2]))
                          : scale(p[i]);
        }
    }
    return GrayImage(w, h, std::move(gray));
}

}  // namespace

std::uint8_t rec601_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    return static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) / 1000u);
}

GrayImage read_gray(const fs::path& path) {
    if (!fs::exists(path)) throw IoError("no such file: " + path.string());
    const std::string ext = lower_extension(path);
    if (ext == ".png") return read_png(path);
    if (ext == ".jpg" || ext == ".jpeg") return read_jpeg(path);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm(path);
    throw FormatError(path.string() + ": unsupported image extension");
}

BinaryMask read_mask(const fs::path& path, int threshold) {
    return threshold_mask(read_gray(path), threshold);
}

void write_png(const GrayImage& img, const fs::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.data().data(), 0, nullptr)) {
        throw IoError(path.string() + ": " + image.message);
    }
}

void write_pgm(const GrayImage& img, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data().data()),
              static_cast<std::streamsize>(img.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

void write_gray(const GrayImage& img, const fs::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") return write_png(img, path);
    if (ext == ".pgm") return write_pgm(img, path);
    throw FormatError(path.string() + ": can only write .png or .pgm");
}

}  // namespace campro
