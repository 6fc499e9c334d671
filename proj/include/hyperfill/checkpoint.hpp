#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "hyperfill/matrix.hpp"

namespace hyperfill {

// Named-matrix checkpoint: JSON document with a format marker, a free-form
// "meta" object, and each matrix stored as {rows, cols, data[row-major]}.
struct Checkpoint {
  nlohmann::json meta;
  std::map<std::string, Mat> matrices;

  const Mat& require(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Plain numeric table I/O (CSV with a header row); used for embeddings.
void save_matrix_csv(const Mat& m, const std::string& path, const std::string& col_prefix);
Mat load_matrix_csv(const std::string& path);

}  // namespace hyperfill
