#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "citex/corpus.hpp"
#include "citex/rng.hpp"

namespace testutil {

inline citex::Document make_doc(std::string id, std::string abstract,
                                std::string intro = "",
                                std::vector<std::string> body = {}) {
  citex::Document doc;
  doc.doc_id = std::move(id);
  doc.title = "title of " + doc.doc_id;
  doc.abstract_text = std::move(abstract);
  doc.introduction = std::move(intro);
  doc.body_paragraphs = std::move(body);
  return doc;
}

// Unique temp file/dir per call; removed on destruction.
class TempPath {
 public:
  explicit TempPath(const std::string& stem) {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             (stem + "-" + std::to_string(::getpid()) + "-" +
              std::to_string(counter++)))
                .string();
  }
  ~TempPath() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& str() const { return path_; }

 private:
  std::string path_;
};

inline std::string write_temp(const TempPath& path,
                              const std::string& content) {
  std::ofstream out(path.str());
  out << content;
  return path.str();
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

inline std::vector<std::string> random_tokens(citex::Rng& rng,
                                              std::size_t max_len,
                                              std::size_t vocab) {
  std::vector<std::string> out;
  std::size_t len = rng.bounded(max_len + 1);
  for (std::size_t i = 0; i < len; ++i)
    out.push_back("w" + std::to_string(rng.bounded(vocab)));
  return out;
}

inline std::string random_string(citex::Rng& rng, std::size_t max_len,
                                 int alphabet = 6) {
  std::string s;
  std::size_t len = rng.bounded(max_len + 1);
  for (std::size_t i = 0; i < len; ++i)
    s += static_cast<char>('a' + rng.bounded(alphabet));
  return s;
}

}  // namespace testutil
