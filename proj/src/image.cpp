#include "handcontact/image.hpp"

#include "handcontact/errors.hpp"
#include "handcontact/util.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <string>

namespace handcontact {

void Image::fill(Color c) {
    for (std::size_t i = 0; i + 2 < rgb.size(); i += 3) {
        rgb[i] = c[0];
        rgb[i + 1] = c[1];
        rgb[i + 2] = c[2];
    }
}

Image make_image(int width, int height, Color background) {
    if (width <= 0 || height <= 0) throw EncodeError("image dimensions must be positive");
    Image img;
    img.width = width;
    img.height = height;
    img.rgb.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3, 0);
    img.fill(background);
    return img;
}

// ---------------------------------------------------------------------------
// JPEG

namespace {
struct JpegErrorMgr {
    jpeg_error_mgr pub;
    jmp_buf jump;
    std::string message;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    char buf[JMSG_LENGTH_MAX];
    (*cinfo->err->format_message)(cinfo, buf);
    err->message = buf;
    longjmp(err->jump, 1);
}
} // namespace

std::vector<std::uint8_t> encode_jpeg(const Image& image, int quality) {
    if (image.empty()) throw EncodeError("cannot encode an empty image");
    jpeg_compress_struct cinfo{};
    JpegErrorMgr jerr{};
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;

    unsigned char* out_buf = nullptr;
    unsigned long out_size = 0;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_compress(&cinfo);
        if (out_buf) free(out_buf);
        throw EncodeError("jpeg encode failed: " + jerr.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &out_buf, &out_size);
    cinfo.image_width = static_cast<JDIMENSION>(image.width);
    cinfo.image_height = static_cast<JDIMENSION>(image.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    const std::size_t stride = static_cast<std::size_t>(image.width) * 3;
    while (cinfo.next_scanline < cinfo.image_height) {
        const JSAMPLE* row = image.rgb.data() + cinfo.next_scanline * stride;
        JSAMPROW rows[1] = {const_cast<JSAMPROW>(row)};
        jpeg_write_scanlines(&cinfo, rows, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::vector<std::uint8_t> bytes(out_buf, out_buf + out_size);
    free(out_buf);
    return bytes;
}

Image decode_jpeg(const std::vector<std::uint8_t>& bytes) {
    if (bytes.empty()) throw ParseError("empty jpeg payload");
    jpeg_decompress_struct cinfo{};
    JpegErrorMgr jerr{};
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw ParseError("jpeg decode failed: " + jerr.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    Image img;
    img.width = static_cast<int>(cinfo.output_width);
    img.height = static_cast<int>(cinfo.output_height);
    img.rgb.assign(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) * 3, 0);
    const std::size_t stride = static_cast<std::size_t>(img.width) * 3;
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW rows[1] = {img.rgb.data() + cinfo.output_scanline * stride};
        jpeg_read_scanlines(&cinfo, rows, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

// ---------------------------------------------------------------------------
// PNG

std::vector<std::uint8_t> encode_png(const Image& image) {
    if (image.empty()) throw EncodeError("cannot encode an empty image");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw EncodeError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw EncodeError("png_create_info_struct failed");
    }
    std::vector<std::uint8_t> out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw EncodeError("png encode failed");
    }
    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep data, png_size_t len) {
            auto* vec = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
            vec->insert(vec->end(), data, data + len);
        },
        nullptr);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(image.width) * 3;
    for (int y = 0; y < image.height; ++y)
        png_write_row(png, const_cast<png_bytep>(image.rgb.data() + static_cast<std::size_t>(y) * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

Image load_image(const std::filesystem::path& path) {
    std::string ext = util::to_lower(path.extension().string());
    auto bytes = util::read_binary_file(path);
    if (ext == ".jpg" || ext == ".jpeg") return decode_jpeg(bytes);
    throw ParseError("unsupported image format '" + ext + "' (expected .jpg)");
}

void save_jpeg(const Image& image, const std::filesystem::path& path, int quality) {
    util::write_binary_file(path, encode_jpeg(image, quality));
}

void save_png(const Image& image, const std::filesystem::path& path) {
    util::write_binary_file(path, encode_png(image));
}

// ---------------------------------------------------------------------------
// Drawing

void draw_disc(Image& img, double cx, double cy, double radius, Color c) {
    int x0 = static_cast<int>(std::floor(cx - radius));
    int x1 = static_cast<int>(std::ceil(cx + radius));
    int y0 = static_cast<int>(std::floor(cy - radius));
    int y1 = static_cast<int>(std::ceil(cy + radius));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy <= radius * radius) img.set(x, y, c);
        }
}

void draw_line(Image& img, double x0, double y0, double x1, double y1, Color c) {
    const double dx = x1 - x0, dy = y1 - y0;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy)))));
    for (int i = 0; i <= steps; ++i) {
        double t = static_cast<double>(i) / steps;
        img.set(static_cast<int>(std::lround(x0 + t * dx)),
                static_cast<int>(std::lround(y0 + t * dy)), c);
    }
}

namespace {
// 5x7 digit glyphs, one bit per pixel, row-major from the top
constexpr std::uint8_t kDigitRows[10][7] = {
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}, // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}, // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}, // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}, // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}, // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}, // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}, // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}, // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}, // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}, // 9
};
} // namespace

void draw_number(Image& img, double cx, double cy, const std::string& text, int scale,
                 Color fill, Color outline) {
    const int gw = 5 * scale, gh = 7 * scale, gap = scale;
    const int total_w = static_cast<int>(text.size()) * gw +
                        (static_cast<int>(text.size()) - 1) * gap;
    int ox = static_cast<int>(std::lround(cx - total_w / 2.0));
    int oy = static_cast<int>(std::lround(cy - gh / 2.0));

    auto draw_pass = [&](Color c, int border) {
        int x = ox;
        for (char ch : text) {
            if (ch < '0' || ch > '9') continue;
            const std::uint8_t* rows = kDigitRows[ch - '0'];
            for (int r = 0; r < 7; ++r)
                for (int col = 0; col < 5; ++col)
                    if (rows[r] & (1 << (4 - col)))
                        for (int sy = -border; sy < scale + border; ++sy)
                            for (int sx = -border; sx < scale + border; ++sx)
                                img.set(x + col * scale + sx, oy + r * scale + sy, c);
            x += gw + gap;
        }
    };
    draw_pass(outline, 1);
    draw_pass(fill, 0);
}

} // namespace handcontact
