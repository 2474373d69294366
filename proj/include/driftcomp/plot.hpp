#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

// Self-contained raster plotting: profile snapshots are rendered in-process
// to PNG (truecolor, stored-deflate) so figure-style output needs no
// external tooling. Output bytes are a pure function of the inputs and the
// requested size.

namespace driftcomp {

namespace png {

inline uint32_t crc32(const unsigned char* data, std::size_t len, uint32_t crc = 0xFFFFFFFFu) {
    static const auto table = [] {
        std::vector<uint32_t> t(256);
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return crc;
}

inline uint32_t adler32(const unsigned char* data, std::size_t len) {
    uint32_t a = 1, b = 0;
    for (std::size_t i = 0; i < len; ++i) {
        a = (a + data[i]) % 65521u;
        b = (b + a) % 65521u;
    }
    return (b << 16) | a;
}

inline void put_u32(std::vector<unsigned char>& out, uint32_t x) {
    out.push_back(static_cast<unsigned char>(x >> 24));
    out.push_back(static_cast<unsigned char>(x >> 16));
    out.push_back(static_cast<unsigned char>(x >> 8));
    out.push_back(static_cast<unsigned char>(x));
}

inline void put_chunk(std::vector<unsigned char>& out, const char type[4],
                      const std::vector<unsigned char>& data) {
    put_u32(out, static_cast<uint32_t>(data.size()));
    std::vector<unsigned char> body(type, type + 4);
    body.insert(body.end(), data.begin(), data.end());
    out.insert(out.end(), body.begin(), body.end());
    put_u32(out, crc32(body.data(), body.size()) ^ 0xFFFFFFFFu);
}

// Writes 8-bit RGB pixels (row-major, 3 bytes per pixel) as a PNG using
// uncompressed deflate blocks.
inline void write_rgb8(const std::string& path, const std::vector<unsigned char>& rgb,
                       int width, int height) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw std::runtime_error("pixel buffer size mismatch");

    // Raw scanline stream: filter byte 0 before each row.
    std::vector<unsigned char> raw;
    raw.reserve(rgb.size() + static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        const std::size_t off = static_cast<std::size_t>(y) * width * 3;
        raw.insert(raw.end(), rgb.begin() + off, rgb.begin() + off + static_cast<std::size_t>(width) * 3);
    }

    std::vector<unsigned char> idat;
    idat.push_back(0x78);
    idat.push_back(0x01);
    std::size_t pos = 0;
    while (pos < raw.size()) {
        const std::size_t chunk = std::min<std::size_t>(65535, raw.size() - pos);
        const bool last = pos + chunk == raw.size();
        idat.push_back(last ? 1 : 0);
        idat.push_back(static_cast<unsigned char>(chunk & 0xFF));
        idat.push_back(static_cast<unsigned char>(chunk >> 8));
        idat.push_back(static_cast<unsigned char>(~chunk & 0xFF));
        idat.push_back(static_cast<unsigned char>((~chunk >> 8) & 0xFF));
        idat.insert(idat.end(), raw.begin() + pos, raw.begin() + pos + chunk);
        pos += chunk;
    }
    put_u32(idat, adler32(raw.data(), raw.size()));

    std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    std::vector<unsigned char> ihdr;
    put_u32(ihdr, static_cast<uint32_t>(width));
    put_u32(ihdr, static_cast<uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    put_chunk(out, "IHDR", ihdr);
    put_chunk(out, "IDAT", idat);
    put_chunk(out, "IEND", {});

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

}  // namespace png

namespace plotdetail {

// Classic 5x7 column font, ASCII 0x20..0x7E, LSB = top row.
inline const unsigned char* glyph(char c) {
    static const unsigned char font[95][5] = {
        {0x00, 0x00, 0x00, 0x00, 0x00}, {0x00, 0x00, 0x5F, 0x00, 0x00},
        {0x00, 0x07, 0x00, 0x07, 0x00}, {0x14, 0x7F, 0x14, 0x7F, 0x14},
        {0x24, 0x2A, 0x7F, 0x2A, 0x12}, {0x23, 0x13, 0x08, 0x64, 0x62},
        {0x36, 0x49, 0x55, 0x22, 0x50}, {0x00, 0x05, 0x03, 0x00, 0x00},
        {0x00, 0x1C, 0x22, 0x41, 0x00}, {0x00, 0x41, 0x22, 0x1C, 0x00},
        {0x14, 0x08, 0x3E, 0x08, 0x14}, {0x08, 0x08, 0x3E, 0x08, 0x08},
        {0x00, 0x50, 0x30, 0x00, 0x00}, {0x08, 0x08, 0x08, 0x08, 0x08},
        {0x00, 0x60, 0x60, 0x00, 0x00}, {0x20, 0x10, 0x08, 0x04, 0x02},
        {0x3E, 0x51, 0x49, 0x45, 0x3E}, {0x00, 0x42, 0x7F, 0x40, 0x00},
        {0x42, 0x61, 0x51, 0x49, 0x46}, {0x21, 0x41, 0x45, 0x4B, 0x31},
        {0x18, 0x14, 0x12, 0x7F, 0x10}, {0x27, 0x45, 0x45, 0x45, 0x39},
        {0x3C, 0x4A, 0x49, 0x49, 0x30}, {0x01, 0x71, 0x09, 0x05, 0x03},
        {0x36, 0x49, 0x49, 0x49, 0x36}, {0x06, 0x49, 0x49, 0x29, 0x1E},
        {0x00, 0x36, 0x36, 0x00, 0x00}, {0x00, 0x56, 0x36, 0x00, 0x00},
        {0x00, 0x08, 0x14, 0x22, 0x41}, {0x14, 0x14, 0x14, 0x14, 0x14},
        {0x41, 0x22, 0x14, 0x08, 0x00}, {0x02, 0x01, 0x51, 0x09, 0x06},
        {0x32, 0x49, 0x79, 0x41, 0x3E}, {0x7E, 0x11, 0x11, 0x11, 0x7E},
        {0x7F, 0x49, 0x49, 0x49, 0x36}, {0x3E, 0x41, 0x41, 0x41, 0x22},
        {0x7F, 0x41, 0x41, 0x22, 0x1C}, {0x7F, 0x49, 0x49, 0x49, 0x41},
        {0x7F, 0x09, 0x09, 0x09, 0x01}, {0x3E, 0x41, 0x49, 0x49, 0x7A},
        {0x7F, 0x08, 0x08, 0x08, 0x7F}, {0x00, 0x41, 0x7F, 0x41, 0x00},
        {0x20, 0x40, 0x41, 0x3F, 0x01}, {0x7F, 0x08, 0x14, 0x22, 0x41},
        {0x7F, 0x40, 0x40, 0x40, 0x40}, {0x7F, 0x02, 0x0C, 0x02, 0x7F},
        {0x7F, 0x04, 0x08, 0x10, 0x7F}, {0x3E, 0x41, 0x41, 0x41, 0x3E},
        {0x7F, 0x09, 0x09, 0x09, 0x06}, {0x3E, 0x41, 0x51, 0x21, 0x5E},
        {0x7F, 0x09, 0x19, 0x29, 0x46}, {0x46, 0x49, 0x49, 0x49, 0x31},
        {0x01, 0x01, 0x7F, 0x01, 0x01}, {0x3F, 0x40, 0x40, 0x40, 0x3F},
        {0x1F, 0x20, 0x40, 0x20, 0x1F}, {0x3F, 0x40, 0x38, 0x40, 0x3F},
        {0x63, 0x14, 0x08, 0x14, 0x63}, {0x07, 0x08, 0x70, 0x08, 0x07},
        {0x61, 0x51, 0x49, 0x45, 0x43}, {0x00, 0x7F, 0x41, 0x41, 0x00},
        {0x02, 0x04, 0x08, 0x10, 0x20}, {0x00, 0x41, 0x41, 0x7F, 0x00},
        {0x04, 0x02, 0x01, 0x02, 0x04}, {0x40, 0x40, 0x40, 0x40, 0x40},
        {0x00, 0x01, 0x02, 0x04, 0x00}, {0x20, 0x54, 0x54, 0x54, 0x78},
        {0x7F, 0x48, 0x44, 0x44, 0x38}, {0x38, 0x44, 0x44, 0x44, 0x20},
        {0x38, 0x44, 0x44, 0x48, 0x7F}, {0x38, 0x54, 0x54, 0x54, 0x18},
        {0x08, 0x7E, 0x09, 0x01, 0x02}, {0x0C, 0x52, 0x52, 0x52, 0x3E},
        {0x7F, 0x08, 0x04, 0x04, 0x78}, {0x00, 0x44, 0x7D, 0x40, 0x00},
        {0x20, 0x40, 0x44, 0x3D, 0x00}, {0x7F, 0x10, 0x28, 0x44, 0x00},
        {0x00, 0x41, 0x7F, 0x40, 0x00}, {0x7C, 0x04, 0x18, 0x04, 0x78},
        {0x7C, 0x08, 0x04, 0x04, 0x78}, {0x38, 0x44, 0x44, 0x44, 0x38},
        {0x7C, 0x14, 0x14, 0x14, 0x08}, {0x08, 0x14, 0x14, 0x18, 0x7C},
        {0x7C, 0x08, 0x04, 0x04, 0x08}, {0x48, 0x54, 0x54, 0x54, 0x20},
        {0x04, 0x3F, 0x44, 0x40, 0x20}, {0x3C, 0x40, 0x40, 0x20, 0x7C},
        {0x1C, 0x20, 0x40, 0x20, 0x1C}, {0x3C, 0x40, 0x30, 0x40, 0x3C},
        {0x44, 0x28, 0x10, 0x28, 0x44}, {0x0C, 0x50, 0x50, 0x50, 0x3C},
        {0x44, 0x64, 0x54, 0x4C, 0x44}, {0x00, 0x08, 0x36, 0x41, 0x00},
        {0x00, 0x00, 0x7F, 0x00, 0x00}, {0x00, 0x41, 0x36, 0x08, 0x00},
        {0x08, 0x04, 0x08, 0x10, 0x08},
    };
    if (c < 0x20 || c > 0x7E) c = '?';
    return font[c - 0x20];
}

struct Canvas {
    int w, h;
    std::vector<unsigned char> px;

    Canvas(int width, int height) : w(width), h(height), px(static_cast<std::size_t>(w) * h * 3, 255) {}

    void set(int x, int y, uint32_t rgb) {
        if (x < 0 || y < 0 || x >= w || y >= h) return;
        const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
        px[i] = static_cast<unsigned char>(rgb >> 16);
        px[i + 1] = static_cast<unsigned char>(rgb >> 8);
        px[i + 2] = static_cast<unsigned char>(rgb);
    }

    void fill_rect(int x0, int y0, int x1, int y1, uint32_t rgb) {
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) set(x, y, rgb);
    }

    void hline(int x0, int x1, int y, uint32_t rgb) {
        for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) set(x, y, rgb);
    }

    void vline(int x, int y0, int y1, uint32_t rgb) {
        for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y) set(x, y, rgb);
    }

    // Bresenham with a 2x2 pen.
    void line(int x0, int y0, int x1, int y1, uint32_t rgb) {
        const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            set(x0, y0, rgb);
            set(x0 + 1, y0, rgb);
            set(x0, y0 + 1, rgb);
            set(x0 + 1, y0 + 1, rgb);
            if (x0 == x1 && y0 == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    }

    void text(int x, int y, const std::string& s, uint32_t rgb, int scale = 2) {
        for (char c : s) {
            const unsigned char* g = glyph(c);
            for (int col = 0; col < 5; ++col)
                for (int row = 0; row < 7; ++row)
                    if (g[col] & (1 << row))
                        fill_rect(x + col * scale, y + row * scale, x + col * scale + scale - 1,
                                  y + row * scale + scale - 1, rgb);
            x += 6 * scale;
        }
    }

    static int text_width(const std::string& s, int scale = 2) {
        return static_cast<int>(s.size()) * 6 * scale;
    }
};

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Largest "nice" step (1, 2, 5 times a power of ten) not above range/n.
inline double nice_step(double range, int n) {
    const double raw = range / std::max(n, 1);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {5.0, 2.0, 1.0})
        if (m * mag <= raw) return m * mag;
    return mag;
}

}  // namespace plotdetail

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    uint32_t rgb = 0x000000;
};

struct PlotSpec {
    int width = 900;
    int height = 600;
    std::string title;
    std::string x_label = "x";
};

// One line plot: labeled curves over a shared abscissa, y axis anchored at
// zero. Fixed margins, grid at nice ticks, legend in the upper right.
inline void render_line_plot(const std::string& path, const PlotSpec& spec,
                             const std::vector<PlotSeries>& series) {
    using namespace plotdetail;
    const int W = std::max(spec.width, 200), H = std::max(spec.height, 150);
    Canvas cv(W, H);

    const int ml = 78, mr = 22, mt = 40, mb = 52;
    const int x0 = ml, x1 = W - mr, y0 = mt, y1 = H - mb;

    double xmin = 0, xmax = 1, ymax = 0;
    bool have = false;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!have) {
                xmin = xmax = s.x[i];
                have = true;
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!have || xmax <= xmin) {
        xmin = 0;
        xmax = 1;
    }
    if (ymax <= 0) ymax = 1.0;
    ymax *= 1.06;

    auto px = [&](double x) {
        return x0 + static_cast<int>(std::lround((x - xmin) / (xmax - xmin) * (x1 - x0)));
    };
    auto py = [&](double y) {
        return y1 - static_cast<int>(std::lround(y / ymax * (y1 - y0)));
    };

    const uint32_t grid_c = 0xE2E2E2, axis_c = 0x202020, text_c = 0x202020;

    // Grid and tick labels.
    const double xstep = nice_step(xmax - xmin, 8);
    for (double tx = std::ceil(xmin / xstep) * xstep; tx <= xmax + 1e-12 * xstep; tx += xstep) {
        const int X = px(tx);
        cv.vline(X, y0, y1, grid_c);
        const std::string lab = tick_label(tx);
        cv.text(X - Canvas::text_width(lab) / 2, y1 + 8, lab, text_c);
    }
    const double ystep = nice_step(ymax, 6);
    for (double ty = 0; ty <= ymax + 1e-12 * ystep; ty += ystep) {
        const int Y = py(ty);
        cv.hline(x0, x1, Y, grid_c);
        const std::string lab = tick_label(ty);
        cv.text(x0 - Canvas::text_width(lab) - 8, Y - 7, lab, text_c);
    }

    // Frame.
    cv.hline(x0, x1, y1, axis_c);
    cv.hline(x0, x1, y0, axis_c);
    cv.vline(x0, y0, y1, axis_c);
    cv.vline(x1, y0, y1, axis_c);

    for (const auto& s : series) {
        for (std::size_t i = 1; i < s.x.size(); ++i)
            cv.line(px(s.x[i - 1]), py(s.y[i - 1]), px(s.x[i]), py(s.y[i]), s.rgb);
    }

    // Legend.
    int ly = y0 + 10;
    for (const auto& s : series) {
        const int lx = x1 - 26 - Canvas::text_width(s.label);
        cv.fill_rect(lx - 22, ly + 4, lx - 6, ly + 8, s.rgb);
        cv.text(lx, ly, s.label, text_c);
        ly += 20;
    }

    cv.text(x0, 12, spec.title, text_c);
    cv.text((x0 + x1) / 2 - Canvas::text_width(spec.x_label) / 2, H - 20, spec.x_label, text_c);

    png::write_rgb8(path, cv.px, W, H);
}

}  // namespace driftcomp
