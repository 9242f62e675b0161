#include "escnav/map_export.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace escnav {

namespace {

struct Rgb {
  uint8_t r, g, b;
};

Rgb state_color(CellState s) {
  switch (s) {
    case CellState::Unknown: return {128, 128, 128};
    case CellState::Free: return {255, 255, 255};
    case CellState::Obstacle: return {0, 0, 0};
  }
  return {128, 128, 128};
}

// Stable pastel per room label.
Rgb room_tint(const std::string& label) {
  uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  const std::array<Rgb, 8> palette = {{{255, 230, 200},
                                       {210, 235, 255},
                                       {220, 255, 220},
                                       {250, 220, 250},
                                       {255, 250, 205},
                                       {225, 225, 255},
                                       {255, 220, 220},
                                       {215, 255, 245}}};
  return palette[h % palette.size()];
}

}  // namespace

std::string to_pgm(const NavMap& map) {
  std::ostringstream os;
  os << "P5\n" << map.width() << " " << map.height() << "\n255\n";
  for (int y = map.height() - 1; y >= 0; --y) {
    for (int x = 0; x < map.width(); ++x) {
      const CellState s = map.at({x, y});
      const uint8_t v = s == CellState::Free ? 255 : (s == CellState::Obstacle ? 0 : 128);
      os.put(static_cast<char>(v));
    }
  }
  return os.str();
}

std::string to_ppm(const OverlaySpec& spec) {
  if (!spec.nav) throw std::invalid_argument("to_ppm: nav map required");
  const NavMap& nav = *spec.nav;
  const int w = nav.width(), h = nav.height();
  const double res = nav.resolution();
  std::vector<Rgb> img(static_cast<size_t>(w) * h);

  auto set_cell = [&](const Cell& c, Rgb color) {
    if (c.x < 0 || c.x >= w || c.y < 0 || c.y >= h) return;
    img[static_cast<size_t>(c.y) * w + c.x] = color;
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Rgb color = state_color(nav.at({x, y}));
      if (spec.sem && nav.at({x, y}) == CellState::Free) {
        const std::string& label = spec.sem->room_label({x, y});
        if (!label.empty()) color = room_tint(label);
      }
      img[static_cast<size_t>(y) * w + x] = color;
    }
  }

  if (spec.frontiers) {
    for (const Frontier& f : *spec.frontiers)
      for (const Cell& c : f.cells) set_cell(c, {0, 200, 0});
  }
  if (spec.sem) {
    for (const auto& p : spec.sem->object_points())
      set_cell(point_to_cell(p.position, res), {220, 0, 0});
  }
  for (const Point& p : spec.path) set_cell(point_to_cell(p, res), {80, 80, 255});
  for (const Point& p : spec.goal_markers) set_cell(point_to_cell(p, res), {255, 140, 0});
  if (spec.chosen_frontier) set_cell(point_to_cell(*spec.chosen_frontier, res), {0, 255, 255});
  if (spec.agent) set_cell(point_to_cell(spec.agent->position(), res), {0, 0, 255});

  std::ostringstream os;
  os << "P6\n" << w << " " << h << "\n255\n";
  for (int y = h - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) {
      const Rgb c = img[static_cast<size_t>(y) * w + x];
      os.put(static_cast<char>(c.r));
      os.put(static_cast<char>(c.g));
      os.put(static_cast<char>(c.b));
    }
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

}  // namespace escnav
