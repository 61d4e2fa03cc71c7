#include "pinnmg/grid.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pinnmg {

void write_grid_csv(const Grid2D& g, const std::filesystem::path& path,
                    std::string_view provenance) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open grid file for writing: " + path.string());
  if (!provenance.empty()) {
    os << "# " << provenance << "\n";
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", g.h());
  os << g.n << "," << buf << "\n";
  for (int iy = 0; iy <= g.n; ++iy) {
    for (int ix = 0; ix <= g.n; ++ix) {
      std::snprintf(buf, sizeof(buf), "%.17g", g.at(ix, iy));
      os << buf << (ix == g.n ? '\n' : ',');
    }
  }
  if (!os) throw std::runtime_error("grid write failed: " + path.string());
}

void write_grid_raw(const Grid2D& g, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open grid file for writing: " + path.string());
  os.write("GRID", 4);
  const std::uint32_t n = static_cast<std::uint32_t>(g.n);
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  os.write(reinterpret_cast<const char*>(g.values.data()),
           static_cast<std::streamsize>(g.values.size() * sizeof(double)));
  if (!os) throw std::runtime_error("grid write failed: " + path.string());
}

Grid2D read_grid_raw(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open grid file: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "GRID", 4) != 0) {
    throw std::runtime_error("not a grid file (bad magic): " + path.string());
  }
  std::uint32_t n = 0;
  if (!is.read(reinterpret_cast<char*>(&n), sizeof(n)) || n == 0 || n > 1u << 20) {
    throw std::runtime_error("corrupt grid file: " + path.string());
  }
  Grid2D g(static_cast<int>(n));
  if (!is.read(reinterpret_cast<char*>(g.values.data()),
               static_cast<std::streamsize>(g.values.size() * sizeof(double)))) {
    throw std::runtime_error("grid file truncated: " + path.string());
  }
  return g;
}

}  // namespace pinnmg
