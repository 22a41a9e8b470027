#include "mouthsyrinx/engine/frames.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace mouthsyrinx::engine {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

vision::RgbImage decode_ppm(std::span<const std::uint8_t> bytes, const std::string& name) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& why) -> MalformedImage {
    return MalformedImage(name + ": " + why);
  };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&](const char* what) {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw fail(std::string("missing ") + what);
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1u << 20) throw fail(std::string(what) + " too large");
      ++pos;
    }
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw fail("not a binary PPM (P6)");
  pos = 2;
  const std::size_t width = number("width");
  const std::size_t height = number("height");
  const std::size_t maxval = number("maxval");
  if (width == 0 || height == 0) throw fail("zero dimension");
  if (maxval == 0 || maxval > 255) throw fail("maxval must be in [1, 255]");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("missing separator before pixel data");
  ++pos;

  const std::size_t need = width * height * 3;
  if (bytes.size() - pos < need) {
    throw fail("truncated pixel data (" + std::to_string(bytes.size() - pos) + " of " +
               std::to_string(need) + " bytes)");
  }
  vision::RgbImage img(width, height);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), need, img.pixels.begin());
  if (maxval != 255) {
    for (auto& v : img.pixels) {
      if (v > maxval) throw fail("sample exceeds maxval");
      v = static_cast<std::uint8_t>((v * 255u + maxval / 2) / maxval);
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_ppm(const vision::RgbImage& image) {
  const std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

vision::RgbImage read_ppm(const fs::path& path) {
  const auto bytes = read_file(path);
  return decode_ppm(bytes, path.filename().string());
}

void write_ppm(const fs::path& path, const vision::RgbImage& image) { write_file(path, encode_ppm(image)); }

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

}  // namespace

vision::RgbImage read_png(const fs::path& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw NotFound("cannot open " + path.string());
  const std::string name = path.filename().string();

  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw MalformedImage(name + ": not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialization failed");
  }

  vision::RgbImage img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw MalformedImage(name + ": corrupt PNG data");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_packing(png);
  png_set_strip_alpha(png);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);

  const auto width = png_get_image_width(png, info);
  const auto height = png_get_image_height(png, info);
  if (png_get_rowbytes(png, info) != static_cast<std::size_t>(width) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw MalformedImage(name + ": unsupported PNG layout");
  }
  img = vision::RgbImage(width, height);
  rows.resize(height);
  for (std::size_t y = 0; y < height; ++y) rows[y] = img.pixels.data() + y * width * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png(const fs::path& path, const vision::RgbImage& image) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialization failed");
  }
  std::vector<png_bytep> rows(image.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < image.height; ++y) {
    rows[y] = const_cast<png_bytep>(image.pixels.data() + y * image.width * 3);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

namespace {

std::vector<vision::RgbImage> load_raw(const fs::path& path) {
  fs::path sidecar = path;
  sidecar += ".dims";
  std::ifstream dims(sidecar);
  if (!dims) throw NotFound("raw RGB input needs a sidecar " + sidecar.string());
  std::size_t w = 0, h = 0;
  if (!(dims >> w >> h) || w == 0 || h == 0) {
    throw MalformedImage(sidecar.filename().string() + ": expected '<width> <height>'");
  }
  const auto bytes = read_file(path);
  const std::size_t frame_bytes = w * h * 3;
  if (bytes.empty() || bytes.size() % frame_bytes != 0) {
    throw MalformedImage(path.filename().string() + ": size " + std::to_string(bytes.size()) +
                         " is not a multiple of " + std::to_string(frame_bytes));
  }
  std::vector<vision::RgbImage> images;
  for (std::size_t off = 0; off < bytes.size(); off += frame_bytes) {
    vision::RgbImage img(w, h);
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(off), frame_bytes, img.pixels.begin());
    images.push_back(std::move(img));
  }
  return images;
}

}  // namespace

std::vector<vision::Frame> load_frames(const fs::path& path, double fps) {
  if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  std::error_code ec;
  if (!fs::exists(path, ec)) throw NotFound("no such file or directory: " + path.string());

  std::vector<vision::RgbImage> images;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (!entry.is_regular_file()) continue;
      const std::string ext = lower_extension(entry.path());
      if (ext == ".ppm" || ext == ".png") files.push_back(entry.path());
    }
    std::ranges::sort(files, {}, [](const fs::path& p) { return p.filename().string(); });
    if (files.empty()) throw NotFound("no .ppm or .png frames in " + path.string());
    for (const auto& f : files) images.push_back(lower_extension(f) == ".png" ? read_png(f) : read_ppm(f));
  } else {
    images = load_raw(path);
  }

  std::vector<vision::Frame> frames;
  frames.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].width != images[0].width || images[i].height != images[0].height) {
      throw MixedDimensions("frame " + std::to_string(i) + " is " + std::to_string(images[i].width) + "x" +
                            std::to_string(images[i].height) + ", expected " + std::to_string(images[0].width) +
                            "x" + std::to_string(images[0].height));
    }
    vision::Frame f;
    f.image = std::move(images[i]);
    f.seq = i;
    f.timestamp = static_cast<double>(i) / fps;
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace mouthsyrinx::engine
