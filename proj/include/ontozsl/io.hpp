#pragma once

#include <map>
#include <string>
#include <vector>

#include "ontozsl/tensor.hpp"

namespace ontozsl::io {

// Shortest round-trip decimal form of a double (canonical across writes).
std::string format_double(double v);

std::vector<std::string> read_lines(const std::string& path);
void write_text(const std::string& path, const std::string& content);

// Embedding table: one `id v1 v2 ...` row per line, space separated.
using EmbeddingTable = std::map<std::string, Tensor>;
void write_embedding_table(const std::string& path, const EmbeddingTable& table);
EmbeddingTable read_embedding_table(const std::string& path);
long embedding_dim(const EmbeddingTable& table);

// Feature matrix: binary, header {magic "OZFT", version u32, rows u64,
// cols u64} then row-major 32-bit floats. Little-endian.
void write_features(const std::string& path, const Tensor& features);
Tensor read_features(const std::string& path);

// Labels sidecar: one class id per line, row order matches the feature file.
void write_labels(const std::string& path, const std::vector<std::string>& labels);
std::vector<std::string> read_labels(const std::string& path);

// Split file: `class-id TAB seen|unseen` per line.
void write_split(const std::string& path, const std::map<std::string, bool>& is_seen);
std::map<std::string, bool> read_split(const std::string& path);

// Model checkpoint: binary, header {magic "OZSL", version u32, tensor count
// u32, then per tensor rows u64 + cols u64}, then each tensor as raw 32-bit
// float blocks in declaration order. Little-endian.
void write_checkpoint(const std::string& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> read_checkpoint(const std::string& path);

bool file_exists(const std::string& path);
void make_dirs(const std::string& path);

}  // namespace ontozsl::io
