#include "citex/embed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "citex/corpus.hpp"
#include "citex/errors.hpp"
#include "citex/rng.hpp"
#include "citex/textkit.hpp"

namespace citex {

bool EmbeddingStore::contains(const std::string& doc_id) const {
  return index_.count(doc_id) != 0;
}

std::span<const double> EmbeddingStore::row(std::size_t i) const {
  return {data_.data() + i * dim_, static_cast<std::size_t>(dim_)};
}

std::span<const double> EmbeddingStore::vec(const std::string& doc_id) const {
  auto it = index_.find(doc_id);
  if (it == index_.end()) throw DataError("no embedding for: " + doc_id);
  return row(it->second);
}

void EmbeddingStore::add(const std::string& doc_id,
                         std::vector<double> values, bool normalize) {
  if (values.empty()) throw DataError("empty vector for: " + doc_id);
  if (dim_ == 0) dim_ = static_cast<int>(values.size());
  if (static_cast<int>(values.size()) != dim_)
    throw DataError("dimension mismatch for " + doc_id + ": got " +
                    std::to_string(values.size()) + ", expected " +
                    std::to_string(dim_));
  double norm = std::sqrt(std::inner_product(values.begin(), values.end(),
                                             values.begin(), 0.0));
  if (norm == 0.0) throw DataError("zero-norm vector for: " + doc_id);
  if (normalize) {
    for (double& v : values) v /= norm;
  }
  if (!index_.emplace(doc_id, ids_.size()).second)
    throw DataError("duplicate embedding for: " + doc_id);
  ids_.push_back(doc_id);
  data_.insert(data_.end(), values.begin(), values.end());
}

EmbeddingStore EmbeddingStore::load(const std::string& path, bool normalize) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embeddings file: " + path);
  EmbeddingStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path, line_no, "expected doc_id<TAB>floats");
    std::string id = line.substr(0, tab);
    std::vector<double> values;
    std::istringstream rest(line.substr(tab + 1));
    double v;
    while (rest >> v) values.push_back(v);
    if (!rest.eof())
      throw ParseError(path, line_no, "non-numeric embedding value");
    try {
      store.add(id, std::move(values), normalize);
    } catch (const DataError& e) {
      throw ParseError(path, line_no, e.what());
    }
  }
  return store;
}

void EmbeddingStore::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embeddings to " + path);
  out.precision(17);
  for (std::size_t i = 0; i < size(); ++i) {
    out << ids_[i] << '\t';
    auto r = row(i);
    for (int d = 0; d < dim_; ++d) {
      if (d) out << ' ';
      out << r[d];
    }
    out << '\n';
  }
}

namespace {
constexpr char kMagic[4] = {'C', 'X', 'E', 'B'};
}

void EmbeddingStore::save_binary(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write embeddings to " + path);
  out.write(kMagic, 4);
  std::uint32_t dim = static_cast<std::uint32_t>(dim_);
  out.write(reinterpret_cast<const char*>(&dim), 4);
  for (std::size_t i = 0; i < size(); ++i) {
    std::uint32_t len = static_cast<std::uint32_t>(ids_[i].size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(ids_[i].data(), len);
    auto r = row(i);
    out.write(reinterpret_cast<const char*>(r.data()), sizeof(double) * dim_);
  }
}

EmbeddingStore EmbeddingStore::load_binary(const std::string& path,
                                           bool normalize) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embeddings file: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("bad embeddings magic in " + path);
  std::uint32_t dim = 0;
  if (!in.read(reinterpret_cast<char*>(&dim), 4) || dim == 0)
    throw DataError("bad embeddings dim header in " + path);
  EmbeddingStore store;
  while (true) {
    std::uint32_t len = 0;
    if (!in.read(reinterpret_cast<char*>(&len), 4)) break;
    std::string id(len, '\0');
    if (!in.read(id.data(), len))
      throw DataError("truncated embeddings record in " + path);
    std::vector<double> values(dim);
    if (!in.read(reinterpret_cast<char*>(values.data()),
                 sizeof(double) * dim))
      throw DataError("truncated embeddings record in " + path);
    store.add(id, std::move(values), normalize);
  }
  return store;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw DataError("cosine of vectors with different dims");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw DataError("cosine of zero vector");
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

std::vector<double> test_embedder(const Document& doc, int dim,
                                  std::uint64_t seed,
                                  const Tokenizer& tokenizer) {
  if (doc.abstract_text.empty())
    throw DataError("test_embedder: empty abstract for " + doc.doc_id);
  std::vector<double> acc(dim, 0.0);
  for (const auto& tok : tokenizer.tokenize(doc.abstract_text)) {
    Rng column(stable_hash(tok) ^ seed);
    for (int d = 0; d < dim; ++d)
      acc[d] += (column.next() & 1) ? 1.0 : -1.0;
  }
  double norm = std::sqrt(
      std::inner_product(acc.begin(), acc.end(), acc.begin(), 0.0));
  if (norm == 0.0) {
    // All-columns cancellation is possible in principle; nudge the first
    // axis so the contract (unit vector) still holds.
    acc[0] = 1.0;
    norm = 1.0;
  }
  for (double& v : acc) v /= norm;
  return acc;
}

namespace {

// dot == cosine for unit vectors; stored rows are unit by construction.
double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

NeighborList select_top_k(const EmbeddingStore& store,
                          const std::vector<double>& scores,
                          const std::string& query_id, std::size_t k,
                          const std::unordered_set<std::string>& exclude,
                          bool include_query = false) {
  std::vector<std::uint32_t> order;
  order.reserve(store.size());
  for (std::uint32_t i = 0; i < store.size(); ++i) {
    const std::string& id = store.id_at(i);
    if ((!include_query && id == query_id) || exclude.count(id)) continue;
    order.push_back(i);
  }
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return store.id_at(a) < store.id_at(b);
  };
  if (k < order.size()) {
    std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
    order.resize(k);
  } else {
    std::sort(order.begin(), order.end(), better);
  }
  NeighborList out;
  out.hits.reserve(order.size());
  for (auto i : order) out.hits.push_back({store.id_at(i), scores[i]});
  return out;
}

}  // namespace

NeighborList nearest_neighbors(const EmbeddingStore& store,
                               const std::string& query_id, std::size_t k,
                               const std::unordered_set<std::string>& exclude,
                               Exec exec) {
  std::span<const double> q = store.vec(query_id);
  std::vector<double> scores(store.size());
  for_each_index(store.size(), exec,
                 [&](std::size_t i) { scores[i] = dot(q, store.row(i)); });
  return select_top_k(store, scores, query_id, k, exclude);
}

NeighborList nearest_neighbors_serial(
    const EmbeddingStore& store, const std::string& query_id, std::size_t k,
    const std::unordered_set<std::string>& exclude) {
  std::span<const double> q = store.vec(query_id);
  std::vector<double> scores(store.size());
  for (std::size_t i = 0; i < store.size(); ++i)
    scores[i] = dot(q, store.row(i));
  return select_top_k(store, scores, query_id, k, exclude);
}

NeighborList nearest_neighbors_including_query(
    const EmbeddingStore& store, const std::string& query_id, std::size_t k,
    const std::unordered_set<std::string>& exclude, Exec exec) {
  std::span<const double> q = store.vec(query_id);
  std::vector<double> scores(store.size());
  for_each_index(store.size(), exec,
                 [&](std::size_t i) { scores[i] = dot(q, store.row(i)); });
  return select_top_k(store, scores, query_id, k, exclude, true);
}

// --- approximate route -------------------------------------------------

SrpIndex::SrpIndex(const EmbeddingStore& store, int bits, std::uint64_t seed)
    : store_(store), bits_(bits) {
  if (bits < 1 || bits > 20) throw UsageError("SrpIndex bits out of range");
  planes_.resize(static_cast<std::size_t>(bits) * store.dim());
  Rng rng(seed);
  for (double& v : planes_) v = rng.uniform() * 2.0 - 1.0;
  buckets_.resize(std::size_t{1} << bits);
  codes_.resize(store.size());
  for (std::uint32_t i = 0; i < store.size(); ++i) {
    codes_[i] = code_of(store.row(i));
    buckets_[codes_[i]].push_back(i);
  }
}

std::uint32_t SrpIndex::code_of(std::span<const double> v) const {
  std::uint32_t code = 0;
  for (int b = 0; b < bits_; ++b) {
    std::span<const double> plane(planes_.data() + std::size_t(b) * v.size(),
                                  v.size());
    if (dot(plane, v) >= 0) code |= (1u << b);
  }
  return code;
}

NeighborList SrpIndex::query(const std::string& query_id, std::size_t k,
                             const std::unordered_set<std::string>& exclude,
                             std::size_t probes) const {
  std::span<const double> q = store_.vec(query_id);
  const std::uint32_t qcode = code_of(q);

  // Buckets in Hamming-distance order from the query code.
  std::vector<std::uint32_t> bucket_order(buckets_.size());
  std::iota(bucket_order.begin(), bucket_order.end(), 0u);
  std::sort(bucket_order.begin(), bucket_order.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              int da = std::popcount(a ^ qcode), db = std::popcount(b ^ qcode);
              if (da != db) return da < db;
              return a < b;
            });

  std::vector<std::pair<double, std::uint32_t>> scored;
  std::size_t visited = 0;
  for (std::uint32_t bucket : bucket_order) {
    if (visited >= probes) break;
    ++visited;
    for (std::uint32_t i : buckets_[bucket]) {
      const std::string& id = store_.id_at(i);
      if (id == query_id || exclude.count(id)) continue;
      scored.emplace_back(dot(q, store_.row(i)), i);
    }
  }
  std::sort(scored.begin(), scored.end(),
            [&](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first > b.first;
              return store_.id_at(a.second) < store_.id_at(b.second);
            });
  if (scored.size() > k) scored.resize(k);
  NeighborList out;
  out.approximate = true;
  for (const auto& [score, i] : scored)
    out.hits.push_back({store_.id_at(i), score});
  return out;
}

}  // namespace citex
