// Copyright 2026 The nightisp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nightisp/imageio.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

#include <jpeglib.h>
#include <png.h>

#include "nightisp/error.hpp"

namespace nightisp::imageio {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngReadState {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReadState() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriteState {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriteState() { png_destroy_write_struct(&png, &info); }
};

void pngWarning(png_structp, png_const_charp) {}

struct MemoryReader {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

void pngReadMemory(png_structp png, png_bytep out, png_size_t count) {
    auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
    if (reader->offset + count > reader->bytes.size()) png_error(png, "truncated PNG stream");
    std::memcpy(out, reader->bytes.data() + reader->offset, count);
    reader->offset += count;
}

void pngWriteMemory(png_structp png, png_bytep data, png_size_t count) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + count);
}

void pngFlushNoop(png_structp) {}

// All libpng calls that can longjmp live in these helpers; the only objects
// alive across setjmp are owned by the caller.
bool readGray16Rows(PngReadState& st, std::FILE* fp, Gray16& out, std::string& err) {
    if (setjmp(png_jmpbuf(st.png))) {
        err = "libpng failed to decode stream";
        return false;
    }
    png_init_io(st.png, fp);
    png_read_info(st.png, st.info);
    const png_uint_32 w = png_get_image_width(st.png, st.info);
    const png_uint_32 h = png_get_image_height(st.png, st.info);
    const int depth = png_get_bit_depth(st.png, st.info);
    const int color = png_get_color_type(st.png, st.info);
    if (depth != 16 || color != PNG_COLOR_TYPE_GRAY) {
        err = "expected single-channel 16-bit PNG, got bit depth " + std::to_string(depth) + ", color type " +
              std::to_string(color);
        return false;
    }
    const int passes = png_set_interlace_handling(st.png);
    png_set_swap(st.png);
    png_read_update_info(st.png, st.info);
    out.width = w;
    out.height = h;
    out.samples.resize(static_cast<std::size_t>(w) * h);
    for (int pass = 0; pass < passes; ++pass)
        for (png_uint_32 y = 0; y < h; ++y)
            png_read_row(st.png, reinterpret_cast<png_bytep>(out.samples.data() + static_cast<std::size_t>(y) * w), nullptr);
    png_read_end(st.png, nullptr);
    return true;
}

bool readRgb8Rows(PngReadState& st, MemoryReader& reader, Rgb8& out, std::string& err) {
    if (setjmp(png_jmpbuf(st.png))) {
        err = "libpng failed to decode stream";
        return false;
    }
    png_set_read_fn(st.png, &reader, pngReadMemory);
    png_read_info(st.png, st.info);
    png_set_strip_16(st.png);
    png_set_strip_alpha(st.png);
    png_set_palette_to_rgb(st.png);
    png_set_gray_to_rgb(st.png);
    const int passes = png_set_interlace_handling(st.png);
    png_read_update_info(st.png, st.info);
    const png_uint_32 w = png_get_image_width(st.png, st.info);
    const png_uint_32 h = png_get_image_height(st.png, st.info);
    out.width = w;
    out.height = h;
    out.interleaved.resize(static_cast<std::size_t>(w) * h * 3);
    for (int pass = 0; pass < passes; ++pass)
        for (png_uint_32 y = 0; y < h; ++y)
            png_read_row(st.png, out.interleaved.data() + static_cast<std::size_t>(y) * w * 3, nullptr);
    png_read_end(st.png, nullptr);
    return true;
}

bool writeRows(PngWriteState& st, std::size_t width, std::size_t height, int depth, int colorType,
               std::vector<png_bytep>& rows, std::string& err) {
    if (setjmp(png_jmpbuf(st.png))) {
        err = "libpng failed to encode";
        return false;
    }
    png_set_IHDR(st.png, st.info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), depth, colorType,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(st.png, st.info);
    if (depth == 16) png_set_swap(st.png);
    png_write_image(st.png, rows.data());
    png_write_end(st.png, nullptr);
    return true;
}

struct JpegErrorManager {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpegErrorExit(j_common_ptr info) {
    auto* mgr = reinterpret_cast<JpegErrorManager*>(info->err);
    std::longjmp(mgr->jump, 1);
}

bool compressJpeg(jpeg_compress_struct& cinfo, JpegErrorManager& jerr, const Rgb8& image, int quality,
                  unsigned char** buffer, unsigned long* size) {
    if (setjmp(jerr.jump)) return false;
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, buffer, size);
    cinfo.image_width = static_cast<JDIMENSION>(image.width);
    cinfo.image_height = static_cast<JDIMENSION>(image.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        auto* row = const_cast<JSAMPLE*>(image.interleaved.data() + static_cast<std::size_t>(cinfo.next_scanline) * image.width * 3);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    return true;
}

}  // namespace

Gray16 readGray16Png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw DecodeError("cannot open " + path.string());
    unsigned char sig[8] = {};
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw DecodeError(path.string() + ": not a PNG file");

    PngReadState st;
    st.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, pngWarning);
    if (!st.png) throw DecodeError("libpng init failed");
    st.info = png_create_info_struct(st.png);
    if (!st.info) throw DecodeError("libpng init failed");
    png_set_sig_bytes(st.png, 8);

    Gray16 out;
    std::string err;
    if (!readGray16Rows(st, fp.get(), out, err)) throw DecodeError(path.string() + ": " + err);
    return out;
}

void writeGray16Png(const std::filesystem::path& path, const Gray16& image) {
    PngWriteState st;
    st.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, pngWarning);
    if (!st.png) throw Error("libpng init failed");
    st.info = png_create_info_struct(st.png);
    if (!st.info) throw Error("libpng init failed");
    std::vector<std::uint8_t> bytes;
    png_set_write_fn(st.png, &bytes, pngWriteMemory, pngFlushNoop);
    std::vector<png_bytep> rows(image.height);
    for (std::size_t y = 0; y < image.height; ++y)
        rows[y] = reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(image.samples.data() + y * image.width));
    std::string err;
    if (!writeRows(st, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY, rows, err)) throw Error(err);
    writeFile(path, bytes);
}

std::vector<std::uint8_t> encodePng(const Rgb8& image) {
    PngWriteState st;
    st.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, pngWarning);
    if (!st.png) throw Error("libpng init failed");
    st.info = png_create_info_struct(st.png);
    if (!st.info) throw Error("libpng init failed");
    std::vector<std::uint8_t> bytes;
    png_set_write_fn(st.png, &bytes, pngWriteMemory, pngFlushNoop);
    std::vector<png_bytep> rows(image.height);
    for (std::size_t y = 0; y < image.height; ++y)
        rows[y] = const_cast<png_bytep>(image.interleaved.data() + y * image.width * 3);
    std::string err;
    if (!writeRows(st, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, rows, err)) throw Error(err);
    return bytes;
}

Rgb8 decodePng(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw DecodeError("not a PNG stream");
    PngReadState st;
    st.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, pngWarning);
    if (!st.png) throw DecodeError("libpng init failed");
    st.info = png_create_info_struct(st.png);
    if (!st.info) throw DecodeError("libpng init failed");
    MemoryReader reader{bytes, 0};
    Rgb8 out;
    std::string err;
    if (!readRgb8Rows(st, reader, out, err)) throw DecodeError(err);
    return out;
}

std::vector<std::uint8_t> encodeJpeg(const Rgb8& image, int quality) {
    jpeg_compress_struct cinfo{};
    JpegErrorManager jerr{};
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpegErrorExit;
    unsigned char* buffer = nullptr;
    unsigned long size = 0;
    const bool ok = compressJpeg(cinfo, jerr, image, quality, &buffer, &size);
    std::vector<std::uint8_t> out;
    if (ok) out.assign(buffer, buffer + size);
    jpeg_destroy_compress(&cinfo);
    std::free(buffer);
    if (!ok) throw Error("libjpeg failed to encode");
    return out;
}

std::vector<std::uint8_t> readFile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void writeFile(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

}  // namespace nightisp::imageio
