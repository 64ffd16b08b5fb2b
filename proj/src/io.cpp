#include "sslsop/io.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace sslsop {

using nlohmann::json;

ValidationError::ValidationError(int line_, const std::string& message)
    : std::runtime_error(line_ > 0 ? "line " + std::to_string(line_) + ": " + message : message),
      line(line_) {}

IoError::IoError(const std::string& message) : std::runtime_error(message) {}

std::string loss_to_string(LossKind kind) { return to_string(kind); }

LossKind loss_from_string(const std::string& name) {
    if (name == "zero_one") return LossKind::ZeroOne;
    if (name == "tree_ancestor_height") return LossKind::TreeAncestorHeight;
    if (name == "hamming") return LossKind::Hamming;
    throw std::invalid_argument("unknown loss kind \"" + name + "\"");
}

json task_to_json(const OutputDescriptor& desc) {
    json j;
    j["family"] = to_string(desc.family());
    switch (desc.family()) {
        case OutputFamily::Multiclass:
            j["K"] = desc.num_classes();
            break;
        case OutputFamily::TreeLeaf:
            j["parent"] = desc.parent();
            j["leaves"] = desc.leaves();
            break;
        case OutputFamily::TagSequence:
            j["T"] = desc.num_tags();
            j["L"] = desc.seq_length();
            break;
    }
    if (desc.enumeration_cap() != OutputDescriptor::kDefaultEnumerationCap)
        j["enumeration_cap"] = desc.enumeration_cap();
    return j;
}

OutputDescriptor task_from_json(const json& j) {
    if (!j.is_object() || !j.contains("family"))
        throw std::invalid_argument("task descriptor must be an object with a \"family\" field");
    const std::uint64_t cap = j.value("enumeration_cap", OutputDescriptor::kDefaultEnumerationCap);
    const std::string family = j.at("family").get<std::string>();
    if (family == "multiclass")
        return OutputDescriptor::multiclass(j.at("K").get<int>(), cap);
    if (family == "tree_leaf")
        return OutputDescriptor::tree_leaf(j.at("parent").get<std::vector<int>>(),
                                           j.at("leaves").get<std::vector<int>>(), cap);
    if (family == "tag_sequence")
        return OutputDescriptor::tag_sequence(j.at("T").get<int>(), j.at("L").get<int>(), cap);
    throw std::invalid_argument("unknown output family \"" + family + "\"");
}

json output_to_json(const OutputDescriptor& desc, const StructuredOutput& y) {
    switch (desc.family()) {
        case OutputFamily::Multiclass: return y.class_index();
        case OutputFamily::TreeLeaf: return y.leaf_id();
        case OutputFamily::TagSequence: return y.tags();
    }
    return nullptr;
}

StructuredOutput output_from_json(const OutputDescriptor& desc, const json& j) {
    StructuredOutput y;
    if (desc.family() == OutputFamily::TagSequence) {
        if (!j.is_array()) throw std::invalid_argument("sequence output must be an array of tags");
        y = StructuredOutput::tags(j.get<std::vector<int>>());
    } else {
        if (!j.is_number_integer()) throw std::invalid_argument("output must be an integer");
        y.payload = {j.get<int>()};
    }
    desc.require_valid(y);
    return y;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        if (!out) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("failed to move " + tmp.string() + " into place: " + ec.message());
    }
}

namespace {

json parse_line(const std::string& text, int line_no) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError(line_no, "invalid JSON");
    return j;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

FeatureVector features_from_json(const json& j, int d, int line_no) {
    if (!j.is_array()) throw ValidationError(line_no, "\"features\" must be an array");
    if (static_cast<int>(j.size()) != d)
        throw ValidationError(line_no, "feature array has length " + std::to_string(j.size()) +
                                           ", header declares d = " + std::to_string(d));
    FeatureVector x;
    x.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw ValidationError(line_no, "features must be numbers");
        x.push_back(v.get<double>());
    }
    return x;
}

}  // namespace

DatasetFile load_dataset(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines[0].empty())
        throw ValidationError(1, "missing dataset header");

    DatasetFile file;
    {
        const json header = parse_line(lines[0], 1);
        if (!header.is_object() || !header.contains("schema") || !header.contains("d") ||
            !header.contains("task") || !header.contains("loss"))
            throw ValidationError(1, "missing dataset header (need schema, d, task, loss)");
        if (header.at("schema").get<int>() != 1)
            throw ValidationError(1, "unsupported schema version");
        file.d = header.at("d").get<int>();
        if (file.d < 1) throw ValidationError(1, "d must be positive");
        try {
            file.desc = task_from_json(header.at("task"));
            file.kind = loss_from_string(header.at("loss").get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ValidationError(1, e.what());
        }
        if (!loss_valid_for(file.kind, file.desc.family()))
            throw ValidationError(1, "loss \"" + loss_to_string(file.kind) +
                                         "\" does not apply to " + to_string(file.desc.family()) +
                                         " outputs");
        file.config = header.value("config", json());
    }

    std::set<std::string> seen_ids;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;   // tolerate blank lines
        const int line_no = static_cast<int>(ln) + 1;
        const json j = parse_line(lines[ln], line_no);
        if (!j.is_object() || !j.contains("id") || !j.contains("features") || !j.contains("output"))
            throw ValidationError(line_no, "record needs id, features, output");

        DatasetRecord rec;
        rec.id = j.at("id").get<std::string>();
        if (!seen_ids.insert(rec.id).second)
            throw ValidationError(line_no, "duplicate id \"" + rec.id + "\"");
        rec.features = features_from_json(j.at("features"), file.d, line_no);
        if (!j.at("output").is_null()) {
            try {
                rec.output = output_from_json(file.desc, j.at("output"));
            } catch (const std::invalid_argument& e) {
                throw ValidationError(line_no, e.what());
            }
        }
        file.records.push_back(std::move(rec));
    }
    return file;
}

void save_dataset(const DatasetFile& file, const std::string& path) {
    std::ostringstream out;
    json header;
    header["schema"] = 1;
    header["d"] = file.d;
    header["task"] = task_to_json(file.desc);
    header["loss"] = loss_to_string(file.kind);
    if (!file.config.is_null()) header["config"] = file.config;
    out << header.dump() << '\n';

    for (const auto& rec : file.records) {
        json j;
        j["id"] = rec.id;
        j["features"] = rec.features;
        j["output"] = rec.output ? output_to_json(file.desc, *rec.output) : json();
        out << j.dump() << '\n';
    }
    write_file_atomic(path, out.str());
}

DatasetSplit to_split(const DatasetFile& file) {
    DatasetSplit split{{}, {}, file.desc, file.kind};
    split.X.reserve(file.records.size());
    for (std::size_t i = 0; i < file.records.size(); ++i) {
        split.X.push_back(file.records[i].features);
        if (file.records[i].output)
            split.labeled.emplace(static_cast<int>(i), *file.records[i].output);
    }
    return split;
}

ModelFile load_model(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines[0].empty()) throw ValidationError(1, "missing model header");

    ModelFile file;
    int n = 0;
    std::size_t m = 0;
    int d = 0;
    {
        const json header = parse_line(lines[0], 1);
        if (!header.is_object() || !header.contains("schema") || !header.contains("n") ||
            !header.contains("m") || !header.contains("d") || !header.contains("k") ||
            !header.contains("task") || !header.contains("loss"))
            throw ValidationError(1, "missing model header (need schema, n, m, d, k, task, loss)");
        if (header.at("schema").get<int>() != 1)
            throw ValidationError(1, "unsupported schema version");
        n = header.at("n").get<int>();
        m = header.at("m").get<std::size_t>();
        d = header.at("d").get<int>();
        if (n < 1 || m == 0 || d < 1) throw ValidationError(1, "invalid model dimensions");
        try {
            file.params.desc = task_from_json(header.at("task"));
            file.params.kind = loss_from_string(header.at("loss").get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ValidationError(1, e.what());
        }
        file.params.k = header.at("k").get<int>();
        file.config = header.value("config", json());
    }

    file.params.w.assign(n, {});
    file.train_X.assign(n, {});
    std::vector<bool> seen_w(n, false), seen_x(n, false);

    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const int line_no = static_cast<int>(ln) + 1;
        const json j = parse_line(lines[ln], line_no);
        if (!j.is_object() || !j.contains("i"))
            throw ValidationError(line_no, "model record needs an \"i\" field");
        const int i = j.at("i").get<int>();
        if (i < 0 || i >= n)
            throw ValidationError(line_no, "record index " + std::to_string(i) + " out of [0, " +
                                               std::to_string(n) + ")");
        if (j.contains("w")) {
            if (seen_w[i]) throw ValidationError(line_no, "duplicate weight record for index " +
                                                              std::to_string(i));
            auto w = j.at("w").get<std::vector<double>>();
            if (w.size() != m)
                throw ValidationError(line_no, "weight vector has length " +
                                                   std::to_string(w.size()) + ", header says m = " +
                                                   std::to_string(m));
            file.params.w[i] = std::move(w);
            seen_w[i] = true;
        } else if (j.contains("x")) {
            if (seen_x[i]) throw ValidationError(line_no, "duplicate feature record for index " +
                                                              std::to_string(i));
            auto x = j.at("x").get<std::vector<double>>();
            if (static_cast<int>(x.size()) != d)
                throw ValidationError(line_no, "feature vector has length " +
                                                   std::to_string(x.size()) + ", header says d = " +
                                                   std::to_string(d));
            file.train_X[i] = std::move(x);
            seen_x[i] = true;
        } else {
            throw ValidationError(line_no, "model record needs \"w\" or \"x\"");
        }
    }

    for (int i = 0; i < n; ++i) {
        if (!seen_w[i]) throw ValidationError(0, "missing weight record for index " + std::to_string(i));
        if (!seen_x[i]) throw ValidationError(0, "missing feature record for index " + std::to_string(i));
    }
    if (file.params.k < 1 || file.params.k > n)
        throw ValidationError(1, "model k out of range");
    return file;
}

void save_model(const ModelFile& file, const std::string& path) {
    std::ostringstream out;
    json header;
    header["schema"] = 1;
    header["n"] = file.params.n();
    header["m"] = file.params.m();
    header["d"] = file.train_X.empty() ? 0 : file.train_X[0].size();
    header["k"] = file.params.k;
    header["task"] = task_to_json(file.params.desc);
    header["loss"] = loss_to_string(file.params.kind);
    if (!file.config.is_null()) header["config"] = file.config;
    out << header.dump() << '\n';

    for (int i = 0; i < file.params.n(); ++i) {
        json j;
        j["i"] = i;
        j["w"] = file.params.w[i];
        out << j.dump() << '\n';
    }
    for (int i = 0; i < static_cast<int>(file.train_X.size()); ++i) {
        json j;
        j["i"] = i;
        j["x"] = file.train_X[i];
        out << j.dump() << '\n';
    }
    write_file_atomic(path, out.str());
}

}  // namespace sslsop
