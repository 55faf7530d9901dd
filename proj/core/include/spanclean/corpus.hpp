#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spanclean/alphabet.hpp"
#include "spanclean/text.hpp"

namespace spanclean {

/// An immutable versioned collection of documents. Pipeline steps that
/// modify text return a new store with a bumped version.
struct DocumentStore {
  std::map<std::string, Document> documents;  // id -> document
  std::string origin;
  int version = 1;

  std::vector<std::string> warnings;  // ingestion diagnostics
};

enum class CorpusFormat { XmlRecords, PlainDir };

/// Loads a corpus. XmlRecords splits a single file on <RECORD ID=...>
/// boundaries (one document per record, id taken from the header, the
/// record markup kept in the document text). PlainDir loads every regular
/// file of a directory as one document with the filename as id. Documents
/// containing characters outside the alphabet are skipped with a warning.
DocumentStore ingest_corpus(const std::string& path, CorpusFormat format,
                            const Alphabet& alphabet);

/// Writes one <id>.xml file per document.
void write_store_dir(const DocumentStore& store, const std::string& dir);
/// Concatenates all documents into a single records file.
void write_store_records(const DocumentStore& store, const std::string& path);

/// Deterministic synthetic discharge-record corpus with injected quality
/// defects: mixed date formats, DD/discharge-date mismatches, missing
/// dosage units, comma-separated medication lists, and abbreviation /
/// full-form mixtures.
DocumentStore gen_synthetic_corpus(uint64_t seed, int n);

}  // namespace spanclean
