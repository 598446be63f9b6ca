#pragma once

#include <map>
#include <string>
#include <vector>

#include "ontozsl/ontology.hpp"
#include "ontozsl/tensor.hpp"

namespace ontozsl {

// Pre-trained word vectors in the GloVe text layout: token then its floats,
// space separated, one token per line.
struct WordVectors {
  std::map<std::string, Tensor> table;
  long dim = 0;
};

WordVectors load_word_vectors(const std::string& path);

// Lowercase split on everything that is not a letter or digit.
std::vector<std::string> tokenize(const std::string& text);

// Per-concept textual vectors d_i: TF-IDF weighted mean of word vectors.
// tf = count / doc length, idf = ln(N / df) + 1 over the description corpus.
struct TextMatrix {
  std::map<std::string, Tensor> rows;
  long dim = 0;

  const Tensor& row(const std::string& concept_id) const;
};

TextMatrix text_vectors(const Schema& schema, const WordVectors& words);

}  // namespace ontozsl
