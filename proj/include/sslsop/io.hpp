#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sslsop/trainer.hpp"

namespace sslsop {

// Input that failed validation; `line` is the 1-based offending line of the
// file (0 when no specific line applies).
class ValidationError : public std::runtime_error {
public:
    ValidationError(int line, const std::string& message);
    int line;
};

// Filesystem-level failure (unreadable path, failed write/rename).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& message);
};

// --- dataset files: one JSON object per line ------------------------------
// header: {"schema":1,"d":...,"task":{...},"loss":"...","config":{...}?}
// record: {"id":"...","features":[...],"output": value|null}
// Output values are a class index, a leaf node id, or an array of tags;
// null marks an unlabeled point.

struct DatasetRecord {
    std::string id;
    FeatureVector features;
    std::optional<StructuredOutput> output;
};

struct DatasetFile {
    int d = 0;
    OutputDescriptor desc;
    LossKind kind;
    std::vector<DatasetRecord> records;
    nlohmann::json config;   // effective-config echo, may be null
};

DatasetFile load_dataset(const std::string& path);
void save_dataset(const DatasetFile& file, const std::string& path);

// null outputs form the unlabeled set.
DatasetSplit to_split(const DatasetFile& file);

// --- model files -----------------------------------------------------------
// header: {"schema":1,"n":...,"m":...,"d":...,"k":...,"task":{...},
//          "loss":"...","config":{...}?}
// then n weight records {"i":...,"w":[...]} and n training-feature records
// {"i":...,"x":[...]} — the model is self-contained for neighbor lookup.

struct ModelFile {
    ModelParams params;
    std::vector<FeatureVector> train_X;
    nlohmann::json config;
};

ModelFile load_model(const std::string& path);
void save_model(const ModelFile& file, const std::string& path);

// --- JSON codecs shared by files and the CLI --------------------------------

nlohmann::json task_to_json(const OutputDescriptor& desc);
OutputDescriptor task_from_json(const nlohmann::json& j);

std::string loss_to_string(LossKind kind);
LossKind loss_from_string(const std::string& name);

nlohmann::json output_to_json(const OutputDescriptor& desc, const StructuredOutput& y);
StructuredOutput output_from_json(const OutputDescriptor& desc, const nlohmann::json& j);

// Atomic text write: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace sslsop
