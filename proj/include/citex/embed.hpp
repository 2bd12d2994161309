#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "citex/exec.hpp"

namespace citex {

struct Document;
struct Tokenizer;

// Dense unit-norm document vectors, contiguous per row.
class EmbeddingStore {
 public:
  std::size_t size() const { return ids_.size(); }
  int dim() const { return dim_; }
  const std::vector<std::string>& ids() const { return ids_; }

  bool contains(const std::string& doc_id) const;
  std::span<const double> vec(const std::string& doc_id) const;
  std::span<const double> row(std::size_t i) const;
  const std::string& id_at(std::size_t i) const { return ids_[i]; }

  // Normalizes unless told not to; rejects zero vectors and dim mismatches.
  void add(const std::string& doc_id, std::vector<double> values,
           bool normalize = true);

  // doc_id<TAB>f1 f2 ... fd, one per line.
  static EmbeddingStore load(const std::string& path, bool normalize = true);
  void save(const std::string& path) const;

  // Binary alternative: "CXEB" magic, u32 dim, then per record u32 id length,
  // id bytes, dim little-endian f64 values.
  static EmbeddingStore load_binary(const std::string& path,
                                    bool normalize = true);
  void save_binary(const std::string& path) const;

 private:
  int dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

double cosine(std::span<const double> u, std::span<const double> v);

// Deterministic stand-in for a learned sentence encoder: every abstract
// token hashes to a seeded +/-1 projection column; columns are summed and
// the result L2-normalized. Errors on an empty abstract.
std::vector<double> test_embedder(const Document& doc, int dim,
                                  std::uint64_t seed,
                                  const Tokenizer& tokenizer);

struct Neighbor {
  std::string doc_id;
  double score;
};

struct NeighborList {
  std::vector<Neighbor> hits;  // cosine descending, ties by doc_id ascending
  bool approximate = false;
};

// Exact top-K scan. The query and excluded ids are never returned.
NeighborList nearest_neighbors(const EmbeddingStore& store,
                               const std::string& query_id, std::size_t k,
                               const std::unordered_set<std::string>& exclude,
                               Exec exec = Exec::parallel);

// Serial reference for the scan kernel; must agree exactly with the above.
NeighborList nearest_neighbors_serial(
    const EmbeddingStore& store, const std::string& query_id, std::size_t k,
    const std::unordered_set<std::string>& exclude);

// Scan with the query itself eligible as a hit. Retrieval uses this: the
// cited document of an evaluation instance belongs to the training data,
// so it is its own nearest neighbor there.
NeighborList nearest_neighbors_including_query(
    const EmbeddingStore& store, const std::string& query_id, std::size_t k,
    const std::unordered_set<std::string>& exclude, Exec exec = Exec::parallel);

// Signed-random-projection index: optional approximate route behind the
// same result shape (hits flagged approximate). probes counts how many
// Hamming-nearest buckets are scanned; larger probes -> higher recall.
class SrpIndex {
 public:
  SrpIndex(const EmbeddingStore& store, int bits, std::uint64_t seed);

  NeighborList query(const std::string& query_id, std::size_t k,
                     const std::unordered_set<std::string>& exclude,
                     std::size_t probes) const;

 private:
  const EmbeddingStore& store_;
  int bits_;
  std::vector<double> planes_;          // bits_ x dim
  std::vector<std::uint32_t> codes_;    // one per row
  std::vector<std::vector<std::uint32_t>> buckets_;
  std::uint32_t code_of(std::span<const double> v) const;
};

}  // namespace citex
