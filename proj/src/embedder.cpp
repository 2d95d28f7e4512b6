#include "hipool/embedder.hpp"

#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "hipool/errors.hpp"

namespace hipool {

using nlohmann::json;

Var embed_chunks(Tape& tape, const ChunkSequence& cs, Var table) {
  if (cs.chunks.empty()) throw DomainError("embed_chunks: no chunks");
  std::vector<std::vector<std::size_t>> rows;
  rows.reserve(cs.chunks.size());
  for (const auto& c : cs.chunks) {
    std::vector<std::size_t> ids;
    for (TokenId t : c) {
      if (t != kPadId) ids.push_back(t);
    }
    if (ids.empty()) ids.push_back(kPadId);
    rows.push_back(std::move(ids));
  }
  return tape.gather_mean(table, rows);
}

Var chunk_feed_forward(Tape& tape, Var x, Var weight, Var bias) {
  const std::size_t n = tape.value(x).rows();
  const Var spread = tape.matmul(tape.input(Tensor::ones(n, 1)), bias);
  return tape.relu(tape.add(tape.matmul(x, weight), spread));
}

ExternalEmbeddings load_external(const std::filesystem::path& path, std::optional<std::size_t> dim) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open embeddings file " + path.string());
  ExternalEmbeddings out;
  if (dim) out.dim = *dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!record.is_object() || !record.contains("id") || !record["id"].is_string() || !record.contains("chunks") ||
        !record["chunks"].is_array()) {
      throw FormatError("expected {\"id\": string, \"chunks\": [[number, ...], ...]}", line_no);
    }
    const std::string id = record["id"].get<std::string>();
    const json& chunks = record["chunks"];
    if (chunks.empty()) throw SchemaError("document '" + id + "' has no chunks");
    if (out.dim == 0) {
      if (!chunks[0].is_array() || chunks[0].empty()) throw SchemaError("document '" + id + "' has an empty chunk vector");
      out.dim = chunks[0].size();
    }
    std::vector<double> values;
    values.reserve(chunks.size() * out.dim);
    for (const json& row : chunks) {
      if (!row.is_array()) throw FormatError("chunk of document '" + id + "' is not an array", line_no);
      if (row.size() != out.dim) {
        throw SchemaError("document '" + id + "' has a chunk of dimension " + std::to_string(row.size()) +
                          ", expected " + std::to_string(out.dim));
      }
      for (const json& v : row) {
        if (!v.is_number()) throw FormatError("non-numeric entry in document '" + id + "'", line_no);
        values.push_back(v.get<double>());
      }
    }
    Tensor matrix({chunks.size(), out.dim}, std::move(values));
    if (!out.docs.emplace(id, std::move(matrix)).second) throw SchemaError("duplicate document id '" + id + "'");
  }
  return out;
}

void save_external(const std::filesystem::path& path, const ExternalEmbeddings& embeddings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write embeddings file " + path.string());
  for (const auto& [id, matrix] : embeddings.docs) {
    json chunks = json::array();
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < matrix.cols(); ++j) row.push_back(matrix.at(i, j));
      chunks.push_back(std::move(row));
    }
    out << json{{"id", id}, {"chunks", std::move(chunks)}}.dump() << '\n';
  }
}

}  // namespace hipool
