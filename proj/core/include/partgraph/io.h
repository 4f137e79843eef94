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

// File formats.
//
// SEGMAP (label maps), little-endian:
//   "SEGM" | u8 version = 1 | u32 width | u32 height | u32 num_classes |
//   width*height u16 labels, row-major.
// PROB (probability maps), little-endian:
//   "PROB" | u8 version = 1 | u32 width | u32 height | u32 channels |
//   width*height*channels f32, channel-last row-major.
// PGM P2 (ASCII) and P5 (binary, big-endian 16-bit samples when maxval >
// 255) are accepted for label maps; maxval + 1 becomes num_classes on
// import and num_classes - 1 (at least 1) is written as maxval on export.
// Label sets are JSON:
//   {"num_parts": N, "num_objects": M, "boundaries": [...],
//    "part_names": [...], "object_names": [...],
//    "background_is_class_zero": true, "background_in_miou": true}

#ifndef PARTGRAPH_IO_H_
#define PARTGRAPH_IO_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "partgraph/segmap.h"
#include "partgraph/tensor.h"

namespace partgraph {

inline constexpr std::uint8_t kSegmapVersion = 1;
inline constexpr std::uint8_t kProbmapVersion = 1;

enum class PgmEncoding { kAscii, kBinary };

LabelMap read_segmap(std::istream& in);
void write_segmap(const LabelMap& map, std::ostream& out);

LabelMap read_pgm(std::istream& in);
void write_pgm(const LabelMap& map, std::ostream& out, PgmEncoding encoding);

// Sniffs the magic bytes: "SEGM" or a P2/P5 header.
LabelMap load_map(const std::filesystem::path& path);
// ".pgm" writes binary PGM; anything else writes SEGMAP.
void save_map(const LabelMap& map, const std::filesystem::path& path);

ProbMap read_prob_map(std::istream& in);
void write_prob_map(const ProbMap& probs, std::ostream& out);
ProbMap load_prob_map(const std::filesystem::path& path);
void save_prob_map(const ProbMap& probs, const std::filesystem::path& path);

LabelSet parse_label_set(const std::string& json_text);
std::string label_set_to_json(const LabelSet& label_set);
LabelSet load_label_set(const std::filesystem::path& path);
void save_label_set(const LabelSet& label_set,
                    const std::filesystem::path& path);

// Binary PPM (P6) of a 3-channel tensor with values in [0, 1].
void save_ppm(const Tensor& rgb, const std::filesystem::path& path);
// Debug dump of a label map with a fixed color palette.
void save_label_ppm(const LabelMap& map, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace partgraph

#endif  // PARTGRAPH_IO_H_
