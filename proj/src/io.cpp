#include "ontozsl/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ontozsl/error.hpp"

namespace ontozsl::io {

namespace {

constexpr char kFeatureMagic[4] = {'O', 'Z', 'F', 'T'};
constexpr char kCheckpointMagic[4] = {'O', 'Z', 'S', 'L'};
constexpr uint32_t kFormatVersion = 1;

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw Error("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw Error("cannot open for reading: " + path);
  return f;
}

template <typename T>
void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& f, const std::string& path) {
  T v;
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) throw Error("truncated binary file: " + path);
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> read_lines(const std::string& path) {
  auto f = open_in(path, false);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_text(const std::string& path, const std::string& content) {
  auto f = open_out(path, false);
  f << content;
  if (!f) throw Error("write failed: " + path);
}

void write_embedding_table(const std::string& path, const EmbeddingTable& table) {
  std::ostringstream out;
  for (const auto& [id, vec] : table) {
    out << id;
    for (long i = 0; i < vec.size(); ++i) out << ' ' << format_double(vec[i]);
    out << '\n';
  }
  write_text(path, out.str());
}

EmbeddingTable read_embedding_table(const std::string& path) {
  EmbeddingTable table;
  long dim = -1;
  long lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream iss(line);
    std::string id;
    iss >> id;
    std::vector<double> vals;
    double v;
    while (iss >> v) vals.push_back(v);
    if (id.empty() || vals.empty())
      throw Error(path + ":" + std::to_string(lineno) + ": malformed embedding row");
    if (dim < 0) dim = static_cast<long>(vals.size());
    if (dim != static_cast<long>(vals.size()))
      throw Error(path + ":" + std::to_string(lineno) + ": inconsistent embedding dimension");
    table[id] = Tensor::row(std::move(vals));
  }
  if (table.empty()) throw Error("empty embedding table: " + path);
  return table;
}

long embedding_dim(const EmbeddingTable& table) {
  require(!table.empty(), "embedding table is empty");
  return table.begin()->second.cols();
}

void write_features(const std::string& path, const Tensor& features) {
  features.check_finite("features");
  auto f = open_out(path, true);
  f.write(kFeatureMagic, 4);
  put<uint32_t>(f, kFormatVersion);
  put<uint64_t>(f, static_cast<uint64_t>(features.rows()));
  put<uint64_t>(f, static_cast<uint64_t>(features.cols()));
  for (long i = 0; i < features.size(); ++i) put<float>(f, static_cast<float>(features[i]));
  if (!f) throw Error("write failed: " + path);
}

Tensor read_features(const std::string& path) {
  auto f = open_in(path, true);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kFeatureMagic, 4) != 0)
    throw Error("bad magic in feature file: " + path);
  uint32_t version = get<uint32_t>(f, path);
  if (version != kFormatVersion) throw Error("unsupported feature file version: " + path);
  uint64_t rows = get<uint64_t>(f, path);
  uint64_t cols = get<uint64_t>(f, path);
  Tensor out(static_cast<long>(rows), static_cast<long>(cols));
  for (long i = 0; i < out.size(); ++i) out[i] = static_cast<double>(get<float>(f, path));
  out.check_finite("feature file");
  return out;
}

void write_labels(const std::string& path, const std::vector<std::string>& labels) {
  std::ostringstream out;
  for (const auto& l : labels) out << l << '\n';
  write_text(path, out.str());
}

std::vector<std::string> read_labels(const std::string& path) {
  std::vector<std::string> labels;
  for (const std::string& line : read_lines(path))
    if (!line.empty()) labels.push_back(line);
  return labels;
}

void write_split(const std::string& path, const std::map<std::string, bool>& is_seen) {
  std::ostringstream out;
  for (const auto& [id, seen] : is_seen) out << id << '\t' << (seen ? "seen" : "unseen") << '\n';
  write_text(path, out.str());
}

std::map<std::string, bool> read_split(const std::string& path) {
  std::map<std::string, bool> split;
  long lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(path + ":" + std::to_string(lineno) + ": expected `class TAB seen|unseen`");
    std::string id = line.substr(0, tab);
    std::string tag = line.substr(tab + 1);
    if (tag == "seen")
      split[id] = true;
    else if (tag == "unseen")
      split[id] = false;
    else
      throw Error(path + ":" + std::to_string(lineno) + ": unknown split tag `" + tag + "`");
  }
  return split;
}

void write_checkpoint(const std::string& path, const std::vector<Tensor>& tensors) {
  auto f = open_out(path, true);
  f.write(kCheckpointMagic, 4);
  put<uint32_t>(f, kFormatVersion);
  put<uint32_t>(f, static_cast<uint32_t>(tensors.size()));
  for (const Tensor& t : tensors) {
    put<uint64_t>(f, static_cast<uint64_t>(t.rows()));
    put<uint64_t>(f, static_cast<uint64_t>(t.cols()));
  }
  for (const Tensor& t : tensors) {
    t.check_finite("checkpoint tensor");
    for (long i = 0; i < t.size(); ++i) put<float>(f, static_cast<float>(t[i]));
  }
  if (!f) throw Error("write failed: " + path);
}

std::vector<Tensor> read_checkpoint(const std::string& path) {
  auto f = open_in(path, true);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw Error("bad magic in checkpoint: " + path);
  uint32_t version = get<uint32_t>(f, path);
  if (version != kFormatVersion) throw Error("unsupported checkpoint version: " + path);
  uint32_t count = get<uint32_t>(f, path);
  std::vector<std::pair<long, long>> shapes;
  for (uint32_t i = 0; i < count; ++i) {
    long rows = static_cast<long>(get<uint64_t>(f, path));
    long cols = static_cast<long>(get<uint64_t>(f, path));
    shapes.emplace_back(rows, cols);
  }
  std::vector<Tensor> tensors;
  for (auto [rows, cols] : shapes) {
    Tensor t(rows, cols);
    for (long i = 0; i < t.size(); ++i) t[i] = static_cast<double>(get<float>(f, path));
    tensors.push_back(std::move(t));
  }
  return tensors;
}

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

void make_dirs(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw Error("cannot create directory: " + path);
}

}  // namespace ontozsl::io
