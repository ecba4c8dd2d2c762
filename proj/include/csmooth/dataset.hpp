#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "csmooth/linalg.hpp"

namespace csmooth {

enum class ColumnKind { real, binary };

// One observational row: case features, instrument values, treatment values,
// the case outcome, and the multi-hot law-article targets used to train the
// instrument encoder.
struct Record {
    Vec features;
    Vec instrument;
    Vec treatments;
    double outcome = 0.0;
    std::vector<int> law_labels;

    bool operator==(const Record&) const = default;
};

struct Schema {
    std::size_t n_features = 0;
    std::size_t n_instruments = 0;
    std::size_t n_treatments = 0;
    std::size_t n_law_labels = 0;
    ColumnKind treatment_kind = ColumnKind::real;
    ColumnKind outcome_kind = ColumnKind::real;

    bool operator==(const Schema&) const = default;
    nlohmann::json to_json() const;
};

struct Provenance {
    enum class Kind { synthetic, ingested };
    Kind kind = Kind::synthetic;
    std::string detail;        // config summary or source path
    std::uint64_t seed = 0;    // synthetic only

    nlohmann::json to_json() const;
};

struct Dataset {
    Schema schema;
    Provenance provenance;
    std::vector<Record> records;

    std::size_t size() const { return records.size(); }

    Vec outcome_column() const;
    Vec treatment_column(std::size_t j) const;
    Vec instrument_column(std::size_t k) const;

    // Row subset in the given index order. Schema and provenance carry over.
    Dataset select(const std::vector<std::size_t>& indices) const;

    void validate() const;  // schema conformance of every record

    std::string to_jsonl() const;
    void save_jsonl(const std::string& path) const;
};

// Reads a JSON-Lines dataset, one record per line with keys `features`,
// `instrument`, `treatments`, `outcome`, `law_labels`. The first line fixes
// the schema; later lines must conform. Errors cite the 1-based line number
// and the offending key.
Dataset load_dataset(const std::string& path);
Dataset parse_jsonl(const std::string& text, const std::string& origin);

}  // namespace csmooth
