#include "csmooth/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "csmooth/errors.hpp"

namespace csmooth {

using nlohmann::json;

nlohmann::json Schema::to_json() const {
    return json{{"n_features", n_features},
                {"n_instruments", n_instruments},
                {"n_treatments", n_treatments},
                {"n_law_labels", n_law_labels},
                {"treatment_kind", treatment_kind == ColumnKind::binary ? "binary" : "real"},
                {"outcome_kind", outcome_kind == ColumnKind::binary ? "binary" : "real"}};
}

nlohmann::json Provenance::to_json() const {
    json j{{"kind", kind == Kind::synthetic ? "synthetic" : "ingested"}, {"detail", detail}};
    if (kind == Kind::synthetic) j["seed"] = seed;
    return j;
}

Vec Dataset::outcome_column() const {
    Vec v(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) v[i] = records[i].outcome;
    return v;
}

Vec Dataset::treatment_column(std::size_t j) const {
    if (j >= schema.n_treatments) throw DataError("treatment column index out of range");
    Vec v(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) v[i] = records[i].treatments[j];
    return v;
}

Vec Dataset::instrument_column(std::size_t k) const {
    if (k >= schema.n_instruments) throw DataError("instrument column index out of range");
    Vec v(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) v[i] = records[i].instrument[k];
    return v;
}

Dataset Dataset::select(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.schema = schema;
    out.provenance = provenance;
    out.records.reserve(indices.size());
    for (std::size_t i : indices) out.records.push_back(records.at(i));
    return out;
}

void Dataset::validate() const {
    if (records.empty()) throw DataError("dataset is empty");
    for (std::size_t i = 0; i < records.size(); ++i) {
        const Record& r = records[i];
        if (r.features.size() != schema.n_features ||
            r.instrument.size() != schema.n_instruments ||
            r.treatments.size() != schema.n_treatments ||
            r.law_labels.size() != schema.n_law_labels) {
            throw DataError("record " + std::to_string(i + 1) + " does not conform to the schema");
        }
        for (int l : r.law_labels) {
            if (l != 0 && l != 1) {
                throw DataError("record " + std::to_string(i + 1) + ": law_labels entries must be 0 or 1");
            }
        }
    }
}

namespace {

json record_to_json(const Record& r) {
    return json{{"features", r.features},
                {"instrument", r.instrument},
                {"treatments", r.treatments},
                {"outcome", r.outcome},
                {"law_labels", r.law_labels}};
}

Vec json_number_array(const json& j, const std::string& key, std::size_t line) {
    if (!j.is_array()) {
        throw DataError("line " + std::to_string(line) + ": key '" + key + "' must be an array");
    }
    Vec out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) {
            throw DataError("line " + std::to_string(line) + ": key '" + key + "' has a non-numeric entry");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

std::string Dataset::to_jsonl() const {
    std::string out;
    for (const Record& r : records) {
        out += record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

void Dataset::save_jsonl(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << to_jsonl();
    if (!f) throw IoError("write failed: " + path);
}

Dataset parse_jsonl(const std::string& text, const std::string& origin) {
    static const char* kKeys[] = {"features", "instrument", "treatments", "outcome", "law_labels"};

    Dataset ds;
    ds.provenance.kind = Provenance::Kind::ingested;
    ds.provenance.detail = origin;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool all_outcomes_binary = true;
    bool all_treatments_binary = true;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError("line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
        }
        if (!j.is_object()) {
            throw DataError("line " + std::to_string(line_no) + ": expected a JSON object");
        }
        for (const char* key : kKeys) {
            if (!j.contains(key)) {
                throw DataError("line " + std::to_string(line_no) + ": missing required key '" + key + "'");
            }
        }

        Record r;
        r.features = json_number_array(j["features"], "features", line_no);
        r.instrument = json_number_array(j["instrument"], "instrument", line_no);
        r.treatments = json_number_array(j["treatments"], "treatments", line_no);
        if (!j["outcome"].is_number()) {
            throw DataError("line " + std::to_string(line_no) + ": key 'outcome' must be a number");
        }
        r.outcome = j["outcome"].get<double>();
        r.law_labels.clear();
        if (!j["law_labels"].is_array()) {
            throw DataError("line " + std::to_string(line_no) + ": key 'law_labels' must be an array");
        }
        for (const auto& v : j["law_labels"]) {
            if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) {
                throw DataError("line " + std::to_string(line_no) + ": key 'law_labels' entries must be 0 or 1");
            }
            r.law_labels.push_back(v.get<int>());
        }

        if (ds.records.empty()) {
            ds.schema.n_features = r.features.size();
            ds.schema.n_instruments = r.instrument.size();
            ds.schema.n_treatments = r.treatments.size();
            ds.schema.n_law_labels = r.law_labels.size();
            if (ds.schema.n_treatments == 0) {
                throw DataError("line " + std::to_string(line_no) + ": key 'treatments' must be non-empty");
            }
        } else {
            const Schema& s = ds.schema;
            if (r.features.size() != s.n_features) {
                throw DataError("line " + std::to_string(line_no) + ": key 'features' has length " +
                                std::to_string(r.features.size()) + ", expected " + std::to_string(s.n_features));
            }
            if (r.instrument.size() != s.n_instruments) {
                throw DataError("line " + std::to_string(line_no) + ": key 'instrument' has length " +
                                std::to_string(r.instrument.size()) + ", expected " + std::to_string(s.n_instruments));
            }
            if (r.treatments.size() != s.n_treatments) {
                throw DataError("line " + std::to_string(line_no) + ": key 'treatments' has length " +
                                std::to_string(r.treatments.size()) + ", expected " + std::to_string(s.n_treatments));
            }
            if (r.law_labels.size() != s.n_law_labels) {
                throw DataError("line " + std::to_string(line_no) + ": key 'law_labels' has length " +
                                std::to_string(r.law_labels.size()) + ", expected " + std::to_string(s.n_law_labels));
            }
        }

        all_outcomes_binary = all_outcomes_binary && (r.outcome == 0.0 || r.outcome == 1.0);
        for (double t : r.treatments) {
            all_treatments_binary = all_treatments_binary && (t == 0.0 || t == 1.0);
        }
        ds.records.push_back(std::move(r));
    }

    if (ds.records.empty()) throw DataError("dataset is empty: " + origin);
    ds.schema.outcome_kind = all_outcomes_binary ? ColumnKind::binary : ColumnKind::real;
    ds.schema.treatment_kind = all_treatments_binary ? ColumnKind::binary : ColumnKind::real;
    return ds;
}

Dataset load_dataset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open dataset file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_jsonl(ss.str(), path);
}

}  // namespace csmooth
