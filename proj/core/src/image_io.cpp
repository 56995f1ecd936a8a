#include "infiltra/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "infiltra/error.hpp"

namespace infiltra {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        if (mode[0] == 'r')
            throw Error("FileNotFound", "cannot open '" + path.string() + "'");
        throw Error("IoError", "cannot write '" + path.string() + "'");
    }
    return f;
}

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    (void)png;
    throw Error("InvalidImage", msg ? msg : "libpng error");
}

void png_warn_fn(png_structp, png_const_charp) {}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
        if (png) info = png_create_info_struct(png);
        if (!png || !info) throw Error("IoError", "cannot allocate libpng structures");
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
        if (png) info = png_create_info_struct(png);
        if (!png || !info) throw Error("IoError", "cannot allocate libpng structures");
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

bool has_png_magic(std::FILE* f) {
    unsigned char sig[8] = {};
    const std::size_t got = std::fread(sig, 1, sizeof sig, f);
    std::rewind(f);
    return got == sizeof sig && png_sig_cmp(sig, 0, sizeof sig) == 0;
}

// Reads an 8-bit image with `channels` output channels into `rows` callbacks.
template <typename RowFn>
void read_png_rows(const std::filesystem::path& path, int channels, std::size_t& width,
                   std::size_t& height, RowFn row_fn) {
    FilePtr file = open_file(path, "rb");
    if (!has_png_magic(file.get())) throw Error("InvalidImage", "not a PNG file");

    PngReader r;
    png_init_io(r.png, file.get());
    png_read_info(r.png, r.info);

    png_set_expand(r.png);       // palette -> rgb, low bit depth -> 8
    png_set_strip_16(r.png);
    png_set_strip_alpha(r.png);
    if (channels == 3)
        png_set_gray_to_rgb(r.png);
    png_read_update_info(r.png, r.info);

    width = png_get_image_width(r.png, r.info);
    height = png_get_image_height(r.png, r.info);
    const int got_channels = png_get_channels(r.png, r.info);
    if (got_channels != channels)
        throw Error("InvalidImage", "expected a " + std::to_string(channels) +
                                        "-channel image, got " + std::to_string(got_channels));
    if (png_get_bit_depth(r.png, r.info) != 8)
        throw Error("InvalidImage", "expected 8-bit samples");

    if (png_get_interlace_type(r.png, r.info) != PNG_INTERLACE_NONE) {
        // interlaced images need whole-image reads; they are rare and small
        std::vector<std::vector<png_byte>> data(height,
                                                std::vector<png_byte>(width * channels));
        std::vector<png_bytep> ptrs(height);
        for (std::size_t y = 0; y < height; ++y) ptrs[y] = data[y].data();
        png_read_image(r.png, ptrs.data());
        for (std::size_t y = 0; y < height; ++y) row_fn(y, data[y].data());
    } else {
        std::vector<png_byte> row(width * channels);
        for (std::size_t y = 0; y < height; ++y) {
            png_read_row(r.png, row.data(), nullptr);
            row_fn(y, row.data());
        }
    }
    png_read_end(r.png, nullptr);
}

MaskGrid read_pgm(const std::filesystem::path& path) {
    FilePtr file = open_file(path, "rb");
    char magic[3] = {};
    if (std::fscanf(file.get(), "%2s", magic) != 1 || std::strcmp(magic, "P5") != 0)
        throw Error("InvalidImage", "not a binary PGM file");
    long w = 0, h = 0, maxval = 0;
    // PGM headers allow '#' comments between tokens
    auto next_long = [&](long& out) {
        int c;
        do {
            c = std::fgetc(file.get());
            if (c == '#') {
                while (c != '\n' && c != EOF) c = std::fgetc(file.get());
            }
        } while (c == ' ' || c == '\t' || c == '\n' || c == '\r');
        std::ungetc(c, file.get());
        if (std::fscanf(file.get(), "%ld", &out) != 1)
            throw Error("InvalidImage", "malformed PGM header");
    };
    next_long(w);
    next_long(h);
    next_long(maxval);
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255)
        throw Error("InvalidImage", "unsupported PGM geometry or depth");
    std::fgetc(file.get());  // single whitespace after maxval
    MaskGrid out(static_cast<std::size_t>(w), static_cast<std::size_t>(h));
    if (std::fread(out.data(), 1, out.size(), file.get()) != out.size())
        throw Error("InvalidImage", "truncated PGM data");
    return out;
}

}  // namespace

MaskGrid read_gray_image(const std::filesystem::path& path) {
    {
        FilePtr probe = open_file(path, "rb");
        if (!has_png_magic(probe.get())) {
            probe.reset();
            return read_pgm(path);
        }
    }
    std::size_t w = 0, h = 0;
    MaskGrid out;
    read_png_rows(path, 1, w, h, [&](std::size_t y, const png_byte* row) {
        if (out.empty()) out = MaskGrid(w, h);
        std::memcpy(out.row(y), row, w);
    });
    return out;
}

RgbImage read_rgb_image(const std::filesystem::path& path) {
    std::size_t w = 0, h = 0;
    RgbImage out;
    read_png_rows(path, 3, w, h, [&](std::size_t y, const png_byte* row) {
        if (out.empty()) out = RgbImage(w, h);
        Rgb8* dst = out.row(y);
        for (std::size_t x = 0; x < w; ++x) dst[x] = Rgb8{row[3 * x], row[3 * x + 1],
                                                          row[3 * x + 2]};
    });
    return out;
}

namespace {

template <typename RowFn>
void write_png_rows(const std::filesystem::path& path, std::size_t width, std::size_t height,
                    int color_type, std::size_t row_bytes, RowFn row_fn) {
    if (width == 0 || height == 0) throw Error("InvalidImage", "cannot write an empty image");
    FilePtr file = open_file(path, "wb");
    PngWriter w;
    png_init_io(w.png, file.get());
    // fixed fast settings keep outputs byte-identical across runs
    png_set_compression_level(w.png, 1);
    png_set_filter(w.png, 0, PNG_FILTER_NONE);
    png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    std::vector<png_byte> row(row_bytes);
    for (std::size_t y = 0; y < height; ++y) {
        row_fn(y, row.data());
        png_write_row(w.png, row.data());
    }
    png_write_end(w.png, nullptr);
    if (std::fflush(file.get()) != 0)
        throw Error("IoError", "failed to flush '" + path.string() + "'");
}

}  // namespace

void write_gray_png(const std::filesystem::path& path, const MaskGrid& image) {
    write_png_rows(path, image.width(), image.height(), PNG_COLOR_TYPE_GRAY, image.width(),
                   [&](std::size_t y, png_byte* row) {
                       std::memcpy(row, image.row(y), image.width());
                   });
}

void write_gray_pgm(const std::filesystem::path& path, const MaskGrid& image) {
    if (image.empty()) throw Error("InvalidImage", "cannot write an empty image");
    FilePtr file = open_file(path, "wb");
    std::fprintf(file.get(), "P5\n%zu %zu\n255\n", image.width(), image.height());
    if (std::fwrite(image.data(), 1, image.size(), file.get()) != image.size())
        throw Error("IoError", "failed to write '" + path.string() + "'");
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image) {
    write_png_rows(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, image.width() * 3,
                   [&](std::size_t y, png_byte* row) {
                       const Rgb8* src = image.row(y);
                       for (std::size_t x = 0; x < image.width(); ++x) {
                           row[3 * x] = src[x].r;
                           row[3 * x + 1] = src[x].g;
                           row[3 * x + 2] = src[x].b;
                       }
                   });
}

}  // namespace infiltra
