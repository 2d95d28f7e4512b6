#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "hipool/chunker.hpp"
#include "hipool/tape.hpp"

namespace hipool {

// Row i of the result is the mean of the table rows for the non-PAD tokens of
// chunk i; an all-PAD chunk maps to the PAD row. Throws DomainError for ids
// outside the table.
Var embed_chunks(Tape& tape, const ChunkSequence& cs, Var table);

// relu(X W + 1 b) applied row-wise, the optional capacity layer after the mean.
Var chunk_feed_forward(Tape& tape, Var x, Var weight, Var bias);

// Precomputed chunk vectors keyed by document id.
struct ExternalEmbeddings {
  std::size_t dim = 0;
  std::map<std::string, Tensor> docs;
};

// Line-delimited records {"id": string, "chunks": [[number, ...], ...]}.
// The dimension is taken from `dim` when given, otherwise from the first record.
// FormatError (with line number) on malformed records; SchemaError on ragged
// rows, empty chunk lists, duplicate ids or a dimension mismatch.
ExternalEmbeddings load_external(const std::filesystem::path& path, std::optional<std::size_t> dim = std::nullopt);
void save_external(const std::filesystem::path& path, const ExternalEmbeddings& embeddings);

}  // namespace hipool
