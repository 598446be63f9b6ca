#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ontozsl/gan.hpp"
#include "ontozsl/imgc.hpp"
#include "ontozsl/io.hpp"
#include "ontozsl/ontology.hpp"

namespace ontozsl {

// Entities, relations and triples with the seen / validation / unseen
// relation partition. Entities form a closed set: every test entity is
// already in the training triples.
struct KGDataset {
  std::vector<std::string> entities;   // sorted
  std::vector<std::string> relations;  // sorted, all partitions
  std::vector<Triple> train_triples, valid_triples, test_triples;
  std::set<std::string> train_relations, valid_relations, test_relations;

  long entity_index(const std::string& id) const;
  void validate() const;
};

// One triples file plus three relation-list files naming each partition.
KGDataset load_kg(const std::string& triples_path, const std::string& train_rel_path,
                  const std::string& valid_rel_path, const std::string& test_rel_path);

struct KgeConfig {
  std::string method = "transe";  // transe | distmult
  long dim = 200;
  double margin = 1.0;  // TransE ranking margin
  long epochs = 500;
  long batch = 128;
  double lr = 0.01;
  uint64_t seed = 0;
};

struct KgeResult {
  std::string method;
  io::EmbeddingTable entity_vecs;    // every entity
  io::EmbeddingTable relation_vecs;  // training relations only
  std::vector<double> loss_history;
};

KgeResult pretrain_kge(const KGDataset& kg, const KgeConfig& config);

// plain triple scores for the ranking oracles
double transe_score(const Tensor& h, const Tensor& r, const Tensor& t);
double distmult_score(const Tensor& h, const Tensor& r, const Tensor& t);

struct ExtractorConfig {
  long f1_dim = 50;
  long f2_dim = 50;
  double margin = 10.0;  // gamma_f
  long neighbor_cap = 50;
  long ref_count = 30;  // m reference triples per bag
  long epochs = 50;
  long batch = 32;  // positives per relation per step
  double lr = 0.0005;
  uint64_t seed = 0;
};

struct ExtractorModel {
  Linear f1;  // entity encoder
  Linear f2;  // neighbor encoder over [x_rn ; x_tn]

  long pair_dim() const { return 2 * f1.out_dim() + 2 * f2.out_dim(); }
};

// Frozen context for pair embeddings: trained layers, pretrained vectors
// and the capped one-hop neighbor lists (sampled once, seeded).
struct PairEmbedder {
  ExtractorModel model;
  Tensor entity_vecs;    // [E, d] aligned with KGDataset::entities
  Tensor relation_vecs;  // [R_train, d]
  std::vector<std::string> relation_ids;                      // row order
  std::vector<std::vector<std::pair<long, long>>> neighbors;  // per entity (rel,idx tail,idx)

  // x_r = [u_ep ; u_h ; u_t] for one entity pair
  Tensor pair_embedding(long h, long t) const;
  // cache of per-entity pieces for bulk ranking
  struct Cache {
    Tensor f1_rows;  // [E, f1_dim]
    Tensor u_rows;   // [E, f2_dim]
  };
  Cache build_cache() const;
  Tensor pair_embedding_cached(const Cache& c, long h, long t) const;
};

// Builds the capped neighbor index over the training triples.
std::vector<std::vector<std::pair<long, long>>> build_neighbor_index(const KGDataset& kg,
                                                                     long cap, uint64_t seed);

struct ExtractorResult {
  PairEmbedder embedder;
  std::vector<double> loss_history;
  std::vector<std::string> skipped_relations;  // bags not larger than m
};

ExtractorResult train_extractor(const KGDataset& kg, const KgeResult& kge,
                                const ExtractorConfig& config);

// 1-based rank of the gold tail among the candidates under the averaged
// cosine score of Eq. 16. Non-gold candidates present in `filter` (known
// true tails for this query) are removed first. Ties break toward the
// smaller entity index.
long rank_tail(const PairEmbedder& pe, const PairEmbedder::Cache& cache,
               const Tensor& generated,  // [N_g, pair_dim]
               long head, long gold, const std::vector<long>& candidates,
               const std::set<long>& filter);

std::map<std::string, double> kgc_metrics(const std::vector<long>& ranks);

// closed-form expected MRR of uniform random ranking over the same
// candidate sets: mean of H(|C|)/|C|
double uniform_random_mrr(const std::vector<long>& candidate_sizes);

struct KgcEvalConfig {
  long n_g = 20;  // generated relation embeddings per unseen relation
  uint64_t seed = 0;
  std::string partition = "test";  // test | valid
  // optional type-constrained candidates: relation TAB entity lines
  std::string candidates_path;
};

struct KgcEvalResult {
  EvalReport report;
  std::vector<long> ranks;
  std::vector<long> candidate_sizes;  // after filtering, per query
};

KgcEvalResult kgc_evaluate(const KGDataset& kg, const PairEmbedder& pe, const GanModel& gan,
                           const io::EmbeddingTable& onto_embeddings,
                           const KgcEvalConfig& config);

void save_extractor(const std::string& path, const ExtractorModel& model);
ExtractorModel load_extractor(const std::string& path);

}  // namespace ontozsl
