#include "ontozsl/text.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "ontozsl/error.hpp"
#include "ontozsl/io.hpp"

namespace ontozsl {

WordVectors load_word_vectors(const std::string& path) {
  WordVectors wv;
  long lineno = 0;
  for (const std::string& line : io::read_lines(path)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream iss(line);
    std::string token;
    iss >> token;
    std::vector<double> vals;
    double v;
    while (iss >> v) vals.push_back(v);
    if (token.empty() || vals.empty())
      throw Error(path + ":" + std::to_string(lineno) + ": malformed word vector row");
    if (wv.dim == 0) wv.dim = static_cast<long>(vals.size());
    if (wv.dim != static_cast<long>(vals.size()))
      throw Error(path + ":" + std::to_string(lineno) + ": inconsistent word vector dimension");
    wv.table[token] = Tensor::row(std::move(vals));
  }
  require(!wv.table.empty(), "word vector table is empty: " + path);
  return wv;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

const Tensor& TextMatrix::row(const std::string& concept_id) const {
  auto it = rows.find(concept_id);
  require(it != rows.end(), "no text vector for concept: " + concept_id);
  return it->second;
}

TextMatrix text_vectors(const Schema& schema, const WordVectors& words) {
  require(!words.table.empty(), "word vector table is empty");

  // token counts per concept and document frequencies over the corpus
  std::map<std::string, std::map<std::string, long>> counts;
  std::map<std::string, long> doc_len;
  std::map<std::string, long> df;
  long n_docs = 0;
  for (const std::string& c : schema.concepts) {
    auto it = schema.descriptions.find(c);
    if (it == schema.descriptions.end()) continue;
    auto tokens = tokenize(it->second);
    if (tokens.empty()) continue;
    ++n_docs;
    auto& m = counts[c];
    for (const auto& t : tokens) ++m[t];
    doc_len[c] = static_cast<long>(tokens.size());
    for (const auto& [t, cnt] : m) {
      (void)cnt;
      ++df[t];
    }
  }

  TextMatrix tm;
  tm.dim = words.dim;
  for (const std::string& c : schema.concepts) {
    Tensor acc(1, words.dim, 0.0);
    auto it = counts.find(c);
    if (it != counts.end()) {
      double weight_sum = 0.0;
      for (const auto& [token, cnt] : it->second) {
        auto wit = words.table.find(token);
        if (wit == words.table.end()) continue;  // out-of-vocabulary tokens are skipped
        double tf = static_cast<double>(cnt) / static_cast<double>(doc_len[c]);
        double idf = std::log(static_cast<double>(n_docs) / static_cast<double>(df[token])) + 1.0;
        double w = tf * idf;
        for (long i = 0; i < words.dim; ++i) acc[i] += w * wit->second[i];
        weight_sum += w;
      }
      if (weight_sum > 0.0)
        for (long i = 0; i < words.dim; ++i) acc[i] /= weight_sum;
    }
    tm.rows[c] = std::move(acc);
  }
  return tm;
}

}  // namespace ontozsl
