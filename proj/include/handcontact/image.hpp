#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace handcontact {

using Color = std::array<std::uint8_t, 3>;

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb; // row-major, 3 bytes per pixel

    bool empty() const { return width <= 0 || height <= 0 || rgb.empty(); }

    void fill(Color c);
    void set(int x, int y, Color c) {
        if (x < 0 || y < 0 || x >= width || y >= height) return;
        std::size_t i = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                             static_cast<std::size_t>(x));
        rgb[i] = c[0];
        rgb[i + 1] = c[1];
        rgb[i + 2] = c[2];
    }
    Color get(int x, int y) const {
        std::size_t i = 3 * (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                             static_cast<std::size_t>(x));
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }
};

Image make_image(int width, int height, Color background);

std::vector<std::uint8_t> encode_jpeg(const Image& image, int quality);
Image decode_jpeg(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_png(const Image& image);

Image load_image(const std::filesystem::path& path); // .jpg/.jpeg only
void save_jpeg(const Image& image, const std::filesystem::path& path, int quality);
void save_png(const Image& image, const std::filesystem::path& path);

// drawing primitives used by the visual prompt renderer
void draw_disc(Image& img, double cx, double cy, double radius, Color c);
void draw_line(Image& img, double x0, double y0, double x1, double y1, Color c);
// 5x7 bitmap digits; draws `text` (digits only) centered at (cx, cy) with a
// 1px contrasting outline. Returns nothing; unknown characters are skipped.
void draw_number(Image& img, double cx, double cy, const std::string& text, int scale,
                 Color fill, Color outline);

} // namespace handcontact
