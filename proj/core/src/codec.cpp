#include <csetjmp>
#include <cstdio>
#include <memory>

#include <jpeglib.h>
#include <png.h>

#include "leafrec/image.hpp"

namespace leafrec {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

RasterImage load_png_file(std::FILE* fp, const std::string& path) {
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw ImageError("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ImageError("png: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError("png: failed to decode " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    RasterImage img(static_cast<int>(w), static_cast<int>(h));
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < w; ++x) {
            std::size_t i = img.idx(static_cast<int>(x), static_cast<int>(y));
            img.r[i] = row[x * 3 + 0];
            img.g[i] = row[x * 3 + 1];
            img.b[i] = row[x * 3 + 2];
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

struct JpegErrorMgr {
    jpeg_error_mgr base;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

RasterImage load_jpeg_file(std::FILE* fp, const std::string& path) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw ImageError("jpeg: failed to decode " + path);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    RasterImage img(static_cast<int>(cinfo.output_width),
                    static_cast<int>(cinfo.output_height));
    std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * 3);
    JSAMPROW rows[1] = {row.data()};
    int y = 0;
    while (cinfo.output_scanline < cinfo.output_height) {
        jpeg_read_scanlines(&cinfo, rows, 1);
        for (int x = 0; x < img.width; ++x) {
            std::size_t i = img.idx(x, y);
            img.r[i] = row[x * 3 + 0];
            img.g[i] = row[x * 3 + 1];
            img.b[i] = row[x * 3 + 2];
        }
        ++y;
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

}  // namespace

RasterImage load_image(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw ImageError("cannot open " + path);

    unsigned char magic[8] = {};
    std::size_t n = std::fread(magic, 1, sizeof magic, fp.get());
    std::rewind(fp.get());
    if (n >= 8 && png_sig_cmp(magic, 0, 8) == 0)
        return load_png_file(fp.get(), path);
    if (n >= 2 && magic[0] == 0xFF && magic[1] == 0xD8)
        return load_jpeg_file(fp.get(), path);
    throw ImageError("unsupported image format: " + path);
}

namespace {

void write_png_rows(const std::string& path, int w, int h, int colorType,
                    const std::vector<std::vector<std::uint8_t>>& rows) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw ImageError("cannot write " + path);
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw ImageError("png: allocation failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw ImageError("png: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ImageError("png: failed to encode " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, w, h, 8, colorType, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (const auto& row : rows)
        png_write_row(png, const_cast<png_bytep>(row.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

void save_png(const RasterImage& img, const std::string& path) {
    std::vector<std::vector<std::uint8_t>> rows(img.height);
    for (int y = 0; y < img.height; ++y) {
        rows[y].resize(static_cast<std::size_t>(img.width) * 3);
        for (int x = 0; x < img.width; ++x) {
            std::size_t i = img.idx(x, y);
            rows[y][x * 3 + 0] = img.r[i];
            rows[y][x * 3 + 1] = img.g[i];
            rows[y][x * 3 + 2] = img.b[i];
        }
    }
    write_png_rows(path, img.width, img.height, PNG_COLOR_TYPE_RGB, rows);
}

void save_png(const GrayImage& img, const std::string& path) {
    std::vector<std::vector<std::uint8_t>> rows(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y].assign(img.v.begin() + img.idx(0, y),
                       img.v.begin() + img.idx(0, y) + img.width);
    write_png_rows(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, rows);
}

}  // namespace leafrec
