#pragma once

#include <map>
#include <string>
#include <vector>

#include "ontozsl/graph.hpp"
#include "ontozsl/io.hpp"
#include "ontozsl/nn.hpp"
#include "ontozsl/ontology.hpp"
#include "ontozsl/text.hpp"

namespace ontozsl {

struct EncoderConfig {
  double margin = 12.0;  // gamma_o
  long dim = 100;        // common-space dimension; raw structural side uses the same
  long epochs = 1000;
  long batch = 128;
  double lr = 0.01;
  std::string mode = "text_aware";  // default | text_aware
  uint64_t seed = 0;

  bool text_aware() const;
};

// Trainable state of the encoder: structural embeddings plus the three
// projection layers of the text-aware variant.
struct EncoderModel {
  std::vector<std::string> concepts;    // sorted; row i of concept_emb
  std::vector<std::string> properties;  // sorted; row i of property_emb
  Tensor concept_emb, property_emb;
  Linear proj_struct, proj_prop, proj_text;
  bool text_aware = true;

  long concept_index(const std::string& id) const;
  long property_index(const std::string& id) const;
};

// One corrupted triple per positive; the property is shared.
struct EncoderBatch {
  std::vector<long> pos_h, pos_p, pos_t;
  std::vector<long> neg_h, neg_t;
};

// -||ci + p - cj||2, the TransE score
double score_structural(const Tensor& ci_s, const Tensor& p_s, const Tensor& cj_s);

// f^T: structural, textual, both crossed terms and the additive term
double score_full(const Tensor& ci_s, const Tensor& ci_t, const Tensor& p_s, const Tensor& cj_s,
                  const Tensor& cj_t);

// Mean hinge over the batch, margin + f(corrupted) - f(positive), built on
// the tape so gradients flow to embeddings and projections.
NodeId encoder_loss_graph(Graph& g, EncoderModel& model, ParamSet& ps, const Tensor& text_rows,
                          const EncoderBatch& batch, double margin);

struct EncoderResult {
  EncoderModel model;
  io::EmbeddingTable table;  // concept -> o_i
  std::vector<double> loss_history;

  // score of an identified triple under the trained model (f^T when
  // text-aware, TransE otherwise)
  double score(const std::string& head, const std::string& property,
               const std::string& tail) const;

 private:
  friend EncoderResult train_encoder(const Schema&, const TextMatrix&, const EncoderConfig&);
  std::map<std::string, Tensor> proj_struct_rows_, proj_text_rows_, proj_prop_rows_;
};

EncoderResult train_encoder(const Schema& schema, const TextMatrix& text,
                            const EncoderConfig& config);

}  // namespace ontozsl
