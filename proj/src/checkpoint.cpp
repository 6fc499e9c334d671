#include "hyperfill/checkpoint.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hyperfill {

namespace {
constexpr const char* kFormat = "hyperfill.checkpoint";
constexpr int kVersion = 1;
}  // namespace

const Mat& Checkpoint::require(const std::string& name) const {
  auto it = matrices.find(name);
  if (it == matrices.end())
    throw std::runtime_error("checkpoint: missing matrix '" + name + "'");
  return it->second;
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  nlohmann::json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["meta"] = ck.meta;
  nlohmann::json mats = nlohmann::json::object();
  for (const auto& [name, m] : ck.matrices) {
    nlohmann::json entry;
    entry["rows"] = m.rows();
    entry["cols"] = m.cols();
    std::vector<double> data;
    data.reserve(m.size());
    for (long r = 0; r < m.rows(); ++r) {
      for (long c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    }
    entry["data"] = std::move(data);
    mats[name] = std::move(entry);
  }
  doc["matrices"] = std::move(mats);

  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << doc.dump(1) << "\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kFormat)
    throw std::runtime_error(path + ": not a checkpoint file");
  if (doc.value("version", 0) != kVersion)
    throw std::runtime_error(path + ": unsupported checkpoint version");

  Checkpoint ck;
  ck.meta = doc.value("meta", nlohmann::json::object());
  for (const auto& [name, entry] : doc.at("matrices").items()) {
    long rows = entry.at("rows").get<long>();
    long cols = entry.at("cols").get<long>();
    const auto& data = entry.at("data");
    if (rows < 0 || cols < 0 || static_cast<long>(data.size()) != rows * cols)
      throw std::runtime_error(path + ": matrix '" + name + "' has inconsistent shape");
    Mat m(rows, cols);
    long k = 0;
    for (long r = 0; r < rows; ++r) {
      for (long c = 0; c < cols; ++c) m(r, c) = data.at(k++).get<double>();
    }
    ck.matrices.emplace(name, std::move(m));
  }
  return ck;
}

void save_matrix_csv(const Mat& m, const std::string& path, const std::string& col_prefix) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "row";
  for (long c = 0; c < m.cols(); ++c) out << "," << col_prefix << c;
  out << "\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (long r = 0; r < m.rows(); ++r) {
    out << r;
    for (long c = 0; c < m.cols(); ++c) out << "," << m(r, c);
    out << "\n";
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

Mat load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  long cols = -1;  // header defines column count minus the row-index column
  {
    std::istringstream is(line);
    std::string cell;
    long count = 0;
    while (std::getline(is, cell, ',')) ++count;
    cols = count - 1;
  }
  if (cols < 1) throw std::runtime_error(path + ": no value columns");

  std::vector<double> values;
  long rows = 0;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string cell;
    long k = 0;
    while (std::getline(is, cell, ',')) {
      if (k > 0) {
        try {
          values.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
        }
      }
      ++k;
    }
    if (k != cols + 1)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(cols + 1) + " cells, got " + std::to_string(k));
    ++rows;
  }
  Mat m(rows, cols);
  long k = 0;
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) m(r, c) = values[k++];
  }
  return m;
}

}  // namespace hyperfill
