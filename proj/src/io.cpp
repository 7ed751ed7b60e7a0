#include "ctroi/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <zlib.h>

#include "ctroi/errors.hpp"

namespace ctroi {

namespace {

void put_u32_be(std::string& out, std::uint32_t v) {
  out.push_back((char)(v >> 24));
  out.push_back((char)(v >> 16));
  out.push_back((char)(v >> 8));
  out.push_back((char)v);
}

void put_chunk(std::string& out, const char type[4], const std::string& data) {
  put_u32_be(out, (std::uint32_t)data.size());
  std::string body(type, 4);
  body += data;
  out += body;
  std::uint32_t crc =
      crc32(0, (const Bytef*)body.data(), (uInt)body.size());
  put_u32_be(out, crc);
}

std::string deflate_bytes(const std::string& raw) {
  uLongf bound = compressBound((uLong)raw.size());
  std::string out(bound, '\0');
  if (compress2((Bytef*)out.data(), &bound, (const Bytef*)raw.data(),
                (uLong)raw.size(), Z_BEST_COMPRESSION) != Z_OK)
    throw Error("png: deflate failed");
  out.resize(bound);
  return out;
}

std::uint8_t window_byte(double v, double lo, double scale) {
  double t = (v - lo) * scale;
  t = std::clamp(t, 0.0, 1.0);
  return (std::uint8_t)std::lround(t * 255.0);
}

}  // namespace

void write_png_gray8(const std::string& path, int width, int height,
                     const std::vector<std::uint8_t>& pixels) {
  if (width < 1 || height < 1) throw Error("png: empty image");
  if (pixels.size() != (std::size_t)width * height)
    throw Error("png: pixel count does not match dimensions");

  std::string ihdr;
  put_u32_be(ihdr, (std::uint32_t)width);
  put_u32_be(ihdr, (std::uint32_t)height);
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // adaptive filtering
  ihdr.push_back(0);   // no interlace

  std::string raw;
  raw.reserve((std::size_t)height * (width + 1));
  for (int r = 0; r < height; ++r) {
    raw.push_back('\0');  // filter type none
    raw.append((const char*)pixels.data() + (std::size_t)r * width, width);
  }

  std::string png("\x89PNG\r\n\x1a\n", 8);
  put_chunk(png, "IHDR", ihdr);
  put_chunk(png, "IDAT", deflate_bytes(raw));
  put_chunk(png, "IEND", "");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("png: cannot open " + path);
  out.write(png.data(), (std::streamsize)png.size());
  if (!out) throw Error("png: write failed for " + path);
}

SliceExport write_mid_slices(const VoxelVolume& v, const std::string& stem,
                             double lo, double hi) {
  if (v.n < 1) throw Error("slice export: empty volume");
  if (hi <= lo) {
    lo = *std::min_element(v.values.begin(), v.values.end());
    hi = *std::max_element(v.values.begin(), v.values.end());
  }
  double scale = hi > lo ? 1.0 / (hi - lo) : 0.0;
  int n = v.n, mid = n / 2;
  std::vector<std::uint8_t> px((std::size_t)n * n);

  SliceExport paths;
  // axial: z fixed, x across, y down
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      px[(std::size_t)j * n + i] = window_byte(v.at(i, j, mid), lo, scale);
  paths.axial = stem + "_axial.png";
  write_png_gray8(paths.axial, n, n, px);

  // coronal: y fixed, x across, z down
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      px[(std::size_t)k * n + i] = window_byte(v.at(i, mid, k), lo, scale);
  paths.coronal = stem + "_coronal.png";
  write_png_gray8(paths.coronal, n, n, px);

  // sagittal: x fixed, y across, z down
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      px[(std::size_t)k * n + j] = window_byte(v.at(mid, j, k), lo, scale);
  paths.sagittal = stem + "_sagittal.png";
  write_png_gray8(paths.sagittal, n, n, px);
  return paths;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  for (const auto& row : rows)
    if (row.size() != header.size())
      throw Error("csv: row width does not match header");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("csv: cannot open " + path);
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  if (!out) throw Error("csv: write failed for " + path);
}

void write_profile_csv(const VoxelVolume& v, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  int mid = v.n / 2;
  char buf[64];
  for (int i = 0; i < v.n; ++i) {
    Vec3 c = v.voxel_center(i, mid, mid);
    std::snprintf(buf, sizeof buf, "%.17g", c.x);
    std::string x = buf;
    std::snprintf(buf, sizeof buf, "%.17g", v.at(i, mid, mid));
    rows.push_back({std::to_string(i), x, buf});
  }
  write_csv(path, {"index", "x", "value"}, rows);
}

}  // namespace ctroi
