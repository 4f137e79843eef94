// Copyright 2026 The partgraph Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "partgraph/io.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "json.hpp"
#include "partgraph/errors.h"

namespace partgraph {
namespace {

using json = nlohmann::json;

void put_u8(std::ostream& out, std::uint8_t v) {
  out.put(static_cast<char>(v));
}

void put_u16(std::ostream& out, std::uint16_t v) {
  const std::array<char, 2> b = {static_cast<char>(v & 0xFF),
                                 static_cast<char>(v >> 8)};
  out.write(b.data(), b.size());
}

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

void put_f32(std::ostream& out, float f) {
  put_u32(out, std::bit_cast<std::uint32_t>(f));
}

void read_exact(std::istream& in, char* dst, std::size_t n,
                const char* what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw FormatError(std::string("truncated ") + what);
  }
}

std::uint8_t get_u8(std::istream& in, const char* what) {
  char c;
  read_exact(in, &c, 1, what);
  return static_cast<std::uint8_t>(c);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b;
  read_exact(in, reinterpret_cast<char*>(b.data()), 4, what);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void expect_magic(std::istream& in, const char (&magic)[5], const char* what) {
  char got[4];
  in.read(got, 4);
  if (in.gcount() != 4 || std::memcmp(got, magic, 4) != 0) {
    throw FormatError(std::string("bad ") + what + " magic, expected \"" +
                      magic + "\"");
  }
}

// Header dims are bounded so that a corrupt header cannot request an
// absurd allocation before the payload length check fails.
constexpr std::uint32_t kMaxDim = 1u << 15;

void check_header_dims(std::uint32_t w, std::uint32_t h, const char* what) {
  if (w == 0 || h == 0 || w > kMaxDim || h > kMaxDim) {
    throw FormatError(std::string("malformed ") + what + " header: size " +
                      std::to_string(w) + "x" + std::to_string(h));
  }
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw FormatError("truncated PGM header");
  return tok;
}

std::uint32_t pgm_number(std::istream& in, const char* field) {
  const std::string tok = pgm_token(in);
  if (!std::all_of(tok.begin(), tok.end(),
                   [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
      tok.size() > 9) {
    throw FormatError(std::string("malformed PGM ") + field + ": " + tok);
  }
  return static_cast<std::uint32_t>(std::stoul(tok));
}

LabelMap make_map_or_format_error(int w, int h, int classes,
                                  std::vector<std::uint16_t> labels,
                                  const char* what) {
  try {
    return LabelMap(w, h, classes, std::move(labels));
  } catch (const DomainError& e) {
    throw FormatError(std::string("invalid ") + what + " payload: " +
                      e.what());
  }
}

}  // namespace

LabelMap read_segmap(std::istream& in) {
  expect_magic(in, "SEGM", "SEGMAP");
  const std::uint8_t version = get_u8(in, "SEGMAP header");
  if (version != kSegmapVersion) {
    throw FormatError("unsupported SEGMAP version " + std::to_string(version));
  }
  const std::uint32_t w = get_u32(in, "SEGMAP header");
  const std::uint32_t h = get_u32(in, "SEGMAP header");
  const std::uint32_t classes = get_u32(in, "SEGMAP header");
  check_header_dims(w, h, "SEGMAP");
  if (classes == 0 || classes > 65536) {
    throw FormatError("malformed SEGMAP header: num_classes " +
                      std::to_string(classes));
  }
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<unsigned char> raw(2 * n);
  read_exact(in, reinterpret_cast<char*>(raw.data()), raw.size(),
             "SEGMAP payload");
  std::vector<std::uint16_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<std::uint16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
  }
  return make_map_or_format_error(static_cast<int>(w), static_cast<int>(h),
                                  static_cast<int>(classes), std::move(labels),
                                  "SEGMAP");
}

void write_segmap(const LabelMap& map, std::ostream& out) {
  out.write("SEGM", 4);
  put_u8(out, kSegmapVersion);
  put_u32(out, static_cast<std::uint32_t>(map.width()));
  put_u32(out, static_cast<std::uint32_t>(map.height()));
  put_u32(out, static_cast<std::uint32_t>(map.num_classes()));
  for (std::uint16_t v : map.labels()) put_u16(out, v);
  if (!out) throw FormatError("failed writing SEGMAP");
}

LabelMap read_pgm(std::istream& in) {
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") {
    throw FormatError("bad PGM magic \"" + magic + "\"");
  }
  const std::uint32_t w = pgm_number(in, "width");
  const std::uint32_t h = pgm_number(in, "height");
  const std::uint32_t maxval = pgm_number(in, "maxval");
  check_header_dims(w, h, "PGM");
  if (maxval == 0 || maxval > 65535) {
    throw FormatError("malformed PGM maxval " + std::to_string(maxval));
  }
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<std::uint16_t> labels(n);
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      std::string tok;
      try {
        tok = pgm_token(in);
      } catch (const FormatError&) {
        throw FormatError("truncated PGM payload at sample " +
                          std::to_string(i));
      }
      if (tok.empty() || tok.size() > 6 ||
          !std::all_of(tok.begin(), tok.end(), [](char c) {
            return std::isdigit(static_cast<unsigned char>(c));
          })) {
        throw FormatError("malformed PGM sample \"" + tok + "\"");
      }
      const unsigned long v = std::stoul(tok);
      if (v > maxval) {
        throw FormatError("PGM sample " + tok + " exceeds maxval " +
                          std::to_string(maxval));
      }
      labels[i] = static_cast<std::uint16_t>(v);
    }
  } else {
    // pgm_token consumed exactly one whitespace byte after maxval.
    const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(n * bytes_per_sample);
    read_exact(in, reinterpret_cast<char*>(raw.data()), raw.size(),
               "PGM payload");
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned v = bytes_per_sample == 2
                             ? (raw[2 * i] << 8) | raw[2 * i + 1]
                             : raw[i];
      if (v > maxval) {
        throw FormatError("PGM sample " + std::to_string(v) +
                          " exceeds maxval " + std::to_string(maxval));
      }
      labels[i] = static_cast<std::uint16_t>(v);
    }
  }
  return make_map_or_format_error(static_cast<int>(w), static_cast<int>(h),
                                  static_cast<int>(maxval) + 1,
                                  std::move(labels), "PGM");
}

void write_pgm(const LabelMap& map, std::ostream& out, PgmEncoding encoding) {
  const int maxval = std::max(map.num_classes() - 1, 1);
  if (encoding == PgmEncoding::kAscii) {
    out << "P2\n" << map.width() << " " << map.height() << "\n"
        << maxval << "\n";
    for (int y = 0; y < map.height(); ++y) {
      for (int x = 0; x < map.width(); ++x) {
        if (x > 0) out << ' ';
        out << map.at(x, y);
      }
      out << '\n';
    }
  } else {
    out << "P5\n" << map.width() << " " << map.height() << "\n"
        << maxval << "\n";
    for (std::uint16_t v : map.labels()) {
      if (maxval > 255) out.put(static_cast<char>(v >> 8));
      out.put(static_cast<char>(v & 0xFF));
    }
  }
  if (!out) throw FormatError("failed writing PGM");
}

LabelMap load_map(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  in.seekg(0);
  in.clear();
  if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) {
    return read_pgm(in);
  }
  return read_segmap(in);
}

void save_map(const LabelMap& map, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  if (path.extension() == ".pgm") {
    write_pgm(map, out, PgmEncoding::kBinary);
  } else {
    write_segmap(map, out);
  }
}

ProbMap read_prob_map(std::istream& in) {
  expect_magic(in, "PROB", "PROB");
  const std::uint8_t version = get_u8(in, "PROB header");
  if (version != kProbmapVersion) {
    throw FormatError("unsupported PROB version " + std::to_string(version));
  }
  const std::uint32_t w = get_u32(in, "PROB header");
  const std::uint32_t h = get_u32(in, "PROB header");
  const std::uint32_t c = get_u32(in, "PROB header");
  check_header_dims(w, h, "PROB");
  if (c == 0 || c > 65536) {
    throw FormatError("malformed PROB header: channels " + std::to_string(c));
  }
  const std::size_t n = static_cast<std::size_t>(w) * h * c;
  std::vector<unsigned char> raw(4 * n);
  read_exact(in, reinterpret_cast<char*>(raw.data()), raw.size(),
             "PROB payload");
  std::vector<double> probs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                               (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
                               (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) |
                               (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
    probs[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  try {
    return ProbMap(static_cast<int>(w), static_cast<int>(h),
                   static_cast<int>(c), std::move(probs));
  } catch (const DomainError& e) {
    throw FormatError(std::string("invalid PROB payload: ") + e.what());
  }
}

void write_prob_map(const ProbMap& probs, std::ostream& out) {
  out.write("PROB", 4);
  put_u8(out, kProbmapVersion);
  put_u32(out, static_cast<std::uint32_t>(probs.width()));
  put_u32(out, static_cast<std::uint32_t>(probs.height()));
  put_u32(out, static_cast<std::uint32_t>(probs.num_classes()));
  for (double v : probs.data()) put_f32(out, static_cast<float>(v));
  if (!out) throw FormatError("failed writing PROB");
}

ProbMap load_prob_map(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_prob_map(in);
}

void save_prob_map(const ProbMap& probs, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  write_prob_map(probs, out);
}

LabelSet parse_label_set(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("label set is not valid JSON: ") + e.what());
  }
  try {
    auto boundaries = doc.at("boundaries").get<std::vector<int>>();
    auto part_names =
        doc.value("part_names", std::vector<std::string>{});
    auto object_names =
        doc.value("object_names", std::vector<std::string>{});
    PartsToObjectsMapping mapping(std::move(boundaries),
                                  std::move(part_names),
                                  std::move(object_names));
    if (doc.contains("num_parts") &&
        doc.at("num_parts").get<int>() != mapping.num_parts()) {
      throw FormatError("label set num_parts " +
                        std::to_string(doc.at("num_parts").get<int>()) +
                        " disagrees with boundaries (" +
                        std::to_string(mapping.num_parts()) + ")");
    }
    if (doc.contains("num_objects") &&
        doc.at("num_objects").get<int>() != mapping.num_objects()) {
      throw FormatError("label set num_objects " +
                        std::to_string(doc.at("num_objects").get<int>()) +
                        " disagrees with boundaries (" +
                        std::to_string(mapping.num_objects()) + ")");
    }
    return LabelSet(std::move(mapping),
                    doc.value("background_is_class_zero", true),
                    doc.value("background_in_miou", true));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed label set: ") + e.what());
  } catch (const DomainError& e) {
    throw FormatError(std::string("invalid label set: ") + e.what());
  }
}

std::string label_set_to_json(const LabelSet& label_set) {
  const auto& m = label_set.mapping;
  json doc = {
      {"num_parts", m.num_parts()},
      {"num_objects", m.num_objects()},
      {"boundaries", m.boundaries()},
      {"part_names", m.part_names()},
      {"object_names", m.object_names()},
      {"background_is_class_zero", label_set.background_is_class_zero},
      {"background_in_miou", label_set.background_in_miou},
  };
  return doc.dump(2) + "\n";
}

LabelSet load_label_set(const std::filesystem::path& path) {
  return parse_label_set(read_text_file(path));
}

void save_label_set(const LabelSet& label_set,
                    const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << label_set_to_json(label_set);
}

void save_ppm(const Tensor& rgb, const std::filesystem::path& path) {
  if (rgb.channels() != 3) {
    throw DomainError("PPM export needs 3 channels, got " +
                      rgb.shape_string());
  }
  std::ofstream out = open_out(path);
  out << "P6\n" << rgb.width() << " " << rgb.height() << "\n255\n";
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(rgb.at(c, y, x), 0.0, 1.0);
        out.put(static_cast<char>(std::lround(v * 255.0)));
      }
    }
  }
}

void save_label_ppm(const LabelMap& map, const std::filesystem::path& path) {
  Tensor rgb(3, map.height(), map.width());
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      // Bit-interleaved palette, as in the Pascal VOC color map.
      unsigned label = map.at(x, y);
      unsigned r = 0, g = 0, b = 0;
      for (int bit = 7; bit >= 0 && label; --bit, label >>= 3) {
        r |= (label & 1u) << bit;
        g |= ((label >> 1) & 1u) << bit;
        b |= ((label >> 2) & 1u) << bit;
      }
      rgb.at(0, y, x) = r / 255.0;
      rgb.at(1, y, x) = g / 255.0;
      rgb.at(2, y, x) = b / 255.0;
    }
  }
  save_ppm(rgb, path);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace partgraph
