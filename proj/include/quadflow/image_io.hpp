#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "quadflow/image.hpp"

namespace quadflow {

// File-format violation; carries the byte offset where parsing stopped.
struct FormatError : std::runtime_error {
  size_t offset;
  FormatError(const std::string& path, const std::string& what, size_t off)
      : std::runtime_error(path + ": " + what + " (byte " + std::to_string(off) + ")"),
        offset(off) {}
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, "cannot open for reading", 0);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path, "cannot open for writing", 0);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(path, "write failed", 0);
}

inline bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

// Skips one or more whitespace bytes between header tokens.
inline void skip_ws(const std::string& s, size_t& pos, const std::string& path) {
  if (pos >= s.size() || !is_ws(s[pos]))
    throw FormatError(path, "expected whitespace after header token", pos);
  while (pos < s.size() && is_ws(s[pos])) ++pos;
}

inline long parse_uint(const std::string& s, size_t& pos, const std::string& path) {
  if (pos >= s.size() || s[pos] < '0' || s[pos] > '9')
    throw FormatError(path, "expected unsigned integer in header", pos);
  long value = 0;
  while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
    value = value * 10 + (s[pos] - '0');
    if (value > 1000000000L) throw FormatError(path, "header value out of range", pos);
    ++pos;
  }
  return value;
}

inline uint32_t get_le32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

inline void put_le32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

}  // namespace detail

// Binary PNM: P5 (grayscale) or P6 (RGB), maxval 255, one whitespace after
// each header token. 8-bit samples map to [0,1] as s/255.
inline Image read_image(const std::string& path) {
  const std::string s = detail::read_file(path);
  size_t pos = 0;
  if (s.size() < 2 || s[0] != 'P' || (s[1] != '5' && s[1] != '6'))
    throw FormatError(path, "not a binary PNM (expected P5 or P6 magic)", 0);
  const int channels = (s[1] == '5') ? 1 : 3;
  pos = 2;
  detail::skip_ws(s, pos, path);
  long w = detail::parse_uint(s, pos, path);
  detail::skip_ws(s, pos, path);
  long h = detail::parse_uint(s, pos, path);
  detail::skip_ws(s, pos, path);
  size_t maxval_pos = pos;
  long maxval = detail::parse_uint(s, pos, path);
  if (maxval != 255)
    throw FormatError(path, "unsupported maxval " + std::to_string(maxval), maxval_pos);
  if (w <= 0 || h <= 0) throw FormatError(path, "nonpositive image dimensions", pos);
  if (pos >= s.size() || !detail::is_ws(s[pos]))
    throw FormatError(path, "expected single whitespace before payload", pos);
  ++pos;  // exactly one whitespace byte separates header and payload
  const size_t expected = static_cast<size_t>(w) * h * channels;
  if (s.size() - pos < expected)
    throw FormatError(path, "truncated payload: need " + std::to_string(expected) + " bytes, have " +
                                std::to_string(s.size() - pos),
                      pos);
  if (s.size() - pos > expected)
    throw FormatError(path, "trailing bytes after payload", pos + expected);
  Image img(static_cast<int>(w), static_cast<int>(h), channels);
  for (size_t i = 0; i < expected; ++i)
    img.data[i] = static_cast<unsigned char>(s[pos + i]) / 255.0;
  return img;
}

inline void write_image(const Image& img, const std::string& path) {
  std::string out;
  out.reserve(32 + img.data.size());
  out += (img.channels == 1) ? "P5" : "P6";
  out += '\n';
  out += std::to_string(img.width);
  out += ' ';
  out += std::to_string(img.height);
  out += '\n';
  out += "255\n";
  for (double s : img.data) {
    long q = std::lround(s * 255.0);
    q = std::clamp(q, 0L, 255L);
    out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
  }
  detail::write_file(path, out);
}

// Middlebury .flo: "PIEH", width/height as little-endian int32, then
// width*height (u,v) float32 pairs, row-major. Bit-exact on round trip.
inline FlowField read_flo(const std::string& path) {
  const std::string s = detail::read_file(path);
  if (s.size() < 12) throw FormatError(path, "file too short for .flo header", s.size());
  if (s.compare(0, 4, "PIEH") != 0) throw FormatError(path, "bad magic (expected PIEH)", 0);
  const auto* bytes = reinterpret_cast<const unsigned char*>(s.data());
  int32_t w = static_cast<int32_t>(detail::get_le32(bytes + 4));
  int32_t h = static_cast<int32_t>(detail::get_le32(bytes + 8));
  if (w <= 0 || h <= 0)
    throw FormatError(path, "nonpositive dimensions " + std::to_string(w) + "x" + std::to_string(h), 4);
  const size_t count = static_cast<size_t>(w) * h * 2;
  if (s.size() - 12 != count * 4)
    throw FormatError(path, "payload size mismatch: need " + std::to_string(count * 4) +
                                " bytes, have " + std::to_string(s.size() - 12),
                      12);
  FlowField flow(w, h);
  for (size_t i = 0; i < count; ++i) {
    float f = std::bit_cast<float>(detail::get_le32(bytes + 12 + i * 4));
    if (!std::isfinite(f))
      throw FormatError(path, "non-finite flow component at index " + std::to_string(i), 12 + i * 4);
    flow.data[i] = f;
  }
  return flow;
}

inline void write_flo(const FlowField& flow, const std::string& path) {
  for (double c : flow.data)
    if (!std::isfinite(c)) throw std::invalid_argument(path + ": refusing to write non-finite flow");
  std::string out;
  out.reserve(12 + flow.data.size() * 4);
  out += "PIEH";
  detail::put_le32(out, static_cast<uint32_t>(flow.width));
  detail::put_le32(out, static_cast<uint32_t>(flow.height));
  for (double c : flow.data)
    detail::put_le32(out, std::bit_cast<uint32_t>(static_cast<float>(c)));
  detail::write_file(path, out);
}

}  // namespace quadflow
