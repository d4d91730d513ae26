#ifndef MAPLESS_TOOLS_RENDER_HPP
#define MAPLESS_TOOLS_RENDER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <mapless/agent_ground.hpp>
#include <mapless/world_sim.hpp>

namespace render {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kGrey{190, 190, 190};
inline constexpr Rgb kBlue{30, 90, 220};
inline constexpr Rgb kRed{220, 40, 40};
inline constexpr Rgb kGreen{40, 160, 60};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> px;

  Image(int w, int h, Rgb fill = kWhite) : width(w), height(h), px(static_cast<std::size_t>(w) * h, fill) {}

  void set(int x, int y, Rgb c) {
    if (x >= 0 && y >= 0 && x < width && y < height) px[static_cast<std::size_t>(y * width + x)] = c;
  }

  void line(int x0, int y0, int x1, int y1, Rgb c) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      set(x0, y0, c);
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

  void disk(int cx, int cy, int r, Rgb c) {
    for (int y = -r; y <= r; ++y)
      for (int x = -r; x <= r; ++x)
        if (x * x + y * y <= r * r) set(cx + x, cy + y, c);
  }

  void blit(const Image& src, int ox, int oy) {
    for (int y = 0; y < src.height; ++y)
      for (int x = 0; x < src.width; ++x) set(ox + x, oy + y, src.px[static_cast<std::size_t>(y * src.width + x)]);
  }

  void write_ppm(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "P6\n" << width << ' ' << height << "\n255\n";
    for (const auto& p : px) out.write(reinterpret_cast<const char*>(p.data()), 3);
  }
};

/// World-to-pixel transform fitting `bounds` into at most max_side pixels.
struct View {
  mapless::Bounds bounds;
  double scale = 1.0;  // pixels per meter
  int width = 1;
  int height = 1;

  View(const mapless::Bounds& b, int max_side) : bounds(b) {
    const double w = b.xmax - b.xmin, h = b.ymax - b.ymin;
    scale = max_side / std::max(w, h);
    width = std::max(1, static_cast<int>(std::ceil(w * scale)));
    height = std::max(1, static_cast<int>(std::ceil(h * scale)));
  }

  int px(double x) const { return static_cast<int>(std::lround((x - bounds.xmin) * scale)); }
  int py(double y) const { return static_cast<int>(std::lround((bounds.ymax - y) * scale)); }
};

/// Binary PGM (P5) as written by export_snapshot; dark pixels are set cells.
inline std::optional<mapless::BinaryGrid> read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  in.get();
  if (magic != "P5" || w != h || w <= 0 || maxval != 255) return std::nullopt;
  mapless::BinaryGrid g(w);
  for (auto& c : g.cells) {
    const int v = in.get();
    if (v == EOF) return std::nullopt;
    c = v < 128 ? 1 : 0;
  }
  return g;
}

}  // namespace render

#endif  // MAPLESS_TOOLS_RENDER_HPP
