#include "apca/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace apca {

namespace {

using nlohmann::json;

constexpr const char* kModelVersion = "apca-model-v1";
constexpr const char* kResultVersion = "apca-result-v1";

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    return out;
}

double parse_double(const std::string& token, const std::string& where) {
    const char* begin = token.data();
    const char* end = begin + token.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw DataError("bad numeric value '" + token + "' " + where);
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

void write_vector(std::ofstream& out, const char* key, const Vector& v) {
    out << key << ' ' << v.size();
    for (Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v[i]);
    out << '\n';
}

void write_matrix(std::ofstream& out, const char* key, const Matrix& m) {
    out << "matrix " << key << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

long long creation_stamp() {
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end && *end == '\0') return v;
    }
    return 0;
}

json record_to_json(const SweepRecord& rec) {
    json j;
    j["mu"] = rec.mu;
    j["best_k"] = rec.best_k;
    j["best_c"] = rec.best_c;
    j["auc_target"] = rec.auc_target;
    if (rec.auc_confound) j["auc_confound"] = *rec.auc_confound;
    j["primary_recon_error"] = rec.primary_recon_error;
    j["concomitant_recon_error"] = rec.concomitant_recon_error;
    j["factor_confound_correlations"] = rec.factor_confound_correlations;
    return j;
}

SweepRecord record_from_json(const json& j) {
    SweepRecord rec;
    rec.mu = j.at("mu").get<double>();
    rec.best_k = j.at("best_k").get<int>();
    rec.best_c = j.at("best_c").get<double>();
    rec.auc_target = j.at("auc_target").get<double>();
    if (j.contains("auc_confound")) rec.auc_confound = j.at("auc_confound").get<double>();
    rec.primary_recon_error = j.at("primary_recon_error").get<double>();
    rec.concomitant_recon_error = j.at("concomitant_recon_error").get<double>();
    rec.factor_confound_correlations =
        j.at("factor_confound_correlations").get<std::vector<double>>();
    return rec;
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw Error("double formatting failed");
    return std::string(buf, ptr);
}

std::string fnv1a_file_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string() + " for hashing");
    std::uint64_t hash = 1469598103934665603ull;
    char chunk[4096];
    while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(chunk[i]);
            hash *= 1099511628211ull;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
    data.validate();
    std::ofstream out = open_output(path);
    for (Index i = 0; i < data.d_primary(); ++i) out << 'x' << i << ',';
    for (Index i = 0; i < data.d_concomitant(); ++i) out << 'y' << i << ',';
    out << "label_target";
    if (data.confound_labels) out << ",label_confound";
    out << '\n';
    if (!data.labels) throw DataError("dataset CSV requires target labels");
    for (Index j = 0; j < data.n_samples(); ++j) {
        for (Index i = 0; i < data.d_primary(); ++i)
            out << format_double(data.primary(i, j)) << ',';
        for (Index i = 0; i < data.d_concomitant(); ++i)
            out << format_double(data.concomitant(i, j)) << ',';
        out << (*data.labels)[static_cast<std::size_t>(j)];
        if (data.confound_labels)
            out << ',' << (*data.confound_labels)[static_cast<std::size_t>(j)];
        out << '\n';
    }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");

    const std::vector<std::string> header = split_csv_line(line);
    Index dx = 0, dy = 0;
    int target_col = -1, confound_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name == "label_target") {
            target_col = static_cast<int>(c);
        } else if (name == "label_confound") {
            confound_col = static_cast<int>(c);
        } else if (!name.empty() && name[0] == 'x') {
            ++dx;
        } else if (!name.empty() && name[0] == 'y') {
            ++dy;
        } else {
            throw DataError(path.string() + ": line 1: unrecognized column '" + name + "'");
        }
    }
    if (dx < 1 || dy < 1)
        throw DataError(path.string() + ": line 1: need at least one x* and one y* column");

    std::vector<std::vector<double>> primary_rows, concomitant_rows;
    std::vector<int> labels, confounds;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError(path.string() + ": line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        const std::string where = "at " + path.string() + ": line " + std::to_string(line_no);
        std::vector<double> px, py;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (static_cast<int>(c) == target_col) {
                labels.push_back(static_cast<int>(parse_double(fields[c], where)));
            } else if (static_cast<int>(c) == confound_col) {
                confounds.push_back(static_cast<int>(parse_double(fields[c], where)));
            } else if (header[c][0] == 'x') {
                px.push_back(parse_double(fields[c], where));
            } else {
                py.push_back(parse_double(fields[c], where));
            }
        }
        primary_rows.push_back(std::move(px));
        concomitant_rows.push_back(std::move(py));
    }
    if (primary_rows.empty()) throw DataError(path.string() + ": no data rows");

    Dataset data;
    const Index n = static_cast<Index>(primary_rows.size());
    data.primary.resize(dx, n);
    data.concomitant.resize(dy, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < dx; ++i)
            data.primary(i, j) = primary_rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
        for (Index i = 0; i < dy; ++i)
            data.concomitant(i, j) =
                concomitant_rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    }
    if (target_col >= 0) data.labels = std::move(labels);
    if (confound_col >= 0) data.confound_labels = std::move(confounds);
    data.validate();
    return data;
}

void write_synth_sidecar(const std::filesystem::path& path, const SynthSpec& spec,
                         const std::string& preset) {
    json j;
    j["preset"] = preset;
    j["n_samples"] = spec.n_samples;
    j["d_primary"] = spec.d_primary;
    j["d_concomitant"] = spec.d_concomitant;
    j["signal_strength"] = spec.signal_strength;
    j["confound_strength"] = spec.confound_strength;
    j["redundancy_strength"] = spec.redundancy_strength;
    j["label_confound_correlation"] = spec.label_confound_correlation;
    j["noise_sigma"] = spec.noise_sigma;
    j["seed"] = spec.seed;
    open_output(path) << j.dump(2) << '\n';
}

void write_model(const std::filesystem::path& path, const ApcaModel& model,
                 const ModelProvenance& provenance) {
    std::ofstream out = open_output(path);
    out << kModelVersion << '\n';
    out << "mu " << format_double(model.mu()) << '\n';
    out << "n_factors " << model.n_factors() << '\n';
    out << "d_primary " << model.d_primary() << '\n';
    out << "d_concomitant " << model.d_concomitant() << '\n';
    out << "dataset_hash " << provenance.dataset_hash << '\n';
    out << "ridge " << format_double(provenance.config.ridge) << '\n';
    out << "eigen_order "
        << (provenance.config.order == EigenOrder::real_part ? "real_part" : "magnitude") << '\n';
    write_vector(out, "eigenvalues", model.eigenvalues());
    write_vector(out, "center_primary", model.center_primary());
    write_vector(out, "center_concomitant", model.center_concomitant());
    write_matrix(out, "encoder", model.encoder());
    write_matrix(out, "primary_loadings", model.primary_loadings());
    write_matrix(out, "adversary_loadings", model.adversary_loadings());
}

LoadedModel read_model(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::string version;
    if (!std::getline(in, version) || version != kModelVersion)
        throw DataError(path.string() + ": unsupported model format '" + version + "'");

    auto expect_key = [&](const std::string& key) {
        std::string got;
        if (!(in >> got) || got != key)
            throw DataError(path.string() + ": expected key '" + key + "', got '" + got + "'");
    };
    auto read_scalar = [&](const std::string& key) {
        expect_key(key);
        std::string token;
        in >> token;
        return parse_double(token, "for key " + key + " in " + path.string());
    };
    auto read_vector = [&](const std::string& key) {
        expect_key(key);
        Index size = 0;
        in >> size;
        Vector v(size);
        std::string token;
        for (Index i = 0; i < size; ++i) {
            in >> token;
            v[i] = parse_double(token, "in vector " + key);
        }
        return v;
    };
    auto read_matrix = [&](const std::string& key) {
        expect_key("matrix");
        expect_key(key);
        Index rows = 0, cols = 0;
        in >> rows >> cols;
        Matrix m(rows, cols);
        std::string token;
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) {
                in >> token;
                m(i, j) = parse_double(token, "in matrix " + key);
            }
        return m;
    };

    const double mu = read_scalar("mu");
    expect_key("n_factors");
    Index l = 0;
    in >> l;
    expect_key("d_primary");
    Index dx = 0;
    in >> dx;
    expect_key("d_concomitant");
    Index dy = 0;
    in >> dy;

    ModelProvenance provenance;
    expect_key("dataset_hash");
    in >> provenance.dataset_hash;
    provenance.config.ridge = read_scalar("ridge");
    expect_key("eigen_order");
    std::string order;
    in >> order;
    provenance.config.order =
        order == "magnitude" ? EigenOrder::magnitude : EigenOrder::real_part;

    const Vector eigenvalues = read_vector("eigenvalues");
    const Vector center_primary = read_vector("center_primary");
    const Vector center_concomitant = read_vector("center_concomitant");
    const Matrix encoder = read_matrix("encoder");
    const Matrix w = read_matrix("primary_loadings");
    const Matrix d = read_matrix("adversary_loadings");
    if (w.rows() != dx || d.rows() != dy)
        throw DataError(path.string() + ": stored shapes disagree with the header");
    return LoadedModel{ApcaModel::from_parts(encoder, w, d, mu, l, center_primary,
                                             center_concomitant, eigenvalues),
                       std::move(provenance)};
}

void write_factors_csv(const std::filesystem::path& path, const Matrix& factors) {
    std::ofstream out = open_output(path);
    for (Index i = 0; i < factors.rows(); ++i) {
        if (i) out << ',';
        out << 'f' << i;
    }
    out << '\n';
    for (Index j = 0; j < factors.cols(); ++j) {
        for (Index i = 0; i < factors.rows(); ++i) {
            if (i) out << ',';
            out << format_double(factors(i, j));
        }
        out << '\n';
    }
}

void write_result_json(const std::filesystem::path& path, const SweepResult& sweep,
                       const std::vector<PipelineScore>& comparison,
                       const ResultMetadata& meta) {
    json j;
    j["format"] = kResultVersion;
    j["experiment"] = meta.experiment;
    j["seed"] = meta.seed;
    j["dataset_hash"] = meta.dataset_hash;
    j["created_unix"] = creation_stamp();
    j["grids"] = {{"mu", meta.mu_grid}, {"k", meta.k_grid}, {"c", meta.c_grid}};
    j["cv_folds"] = meta.cv_folds;
    j["diag_factors"] = sweep.diag_factors;
    j["records"] = json::array();
    for (const SweepRecord& rec : sweep.records) j["records"].push_back(record_to_json(rec));
    if (!comparison.empty()) {
        j["comparison"] = json::array();
        for (const PipelineScore& row : comparison) {
            json r;
            r["preprocessing"] = row.name;
            r["feature_count"] = row.feature_count;
            r["auc"] = row.auc;
            if (row.k) r["k"] = *row.k;
            if (row.c) r["c"] = *row.c;
            if (row.mu) r["mu"] = *row.mu;
            j["comparison"].push_back(r);
        }
    }
    open_output(path) << j.dump(2) << '\n';
}

LoadedResult read_result_json(const std::filesystem::path& path) {
    json j;
    try {
        open_input(path) >> j;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    if (j.value("format", "") != kResultVersion)
        throw DataError(path.string() + ": unsupported result format");
    LoadedResult out;
    out.meta.experiment = j.value("experiment", "");
    out.meta.seed = j.value("seed", std::uint64_t{0});
    out.meta.dataset_hash = j.value("dataset_hash", "none");
    out.meta.mu_grid = j["grids"]["mu"].get<std::vector<double>>();
    out.meta.k_grid = j["grids"]["k"].get<std::vector<int>>();
    out.meta.c_grid = j["grids"]["c"].get<std::vector<double>>();
    out.meta.cv_folds = j.value("cv_folds", 0);
    out.sweep.diag_factors = j.value("diag_factors", 0);
    out.meta.diag_factors = out.sweep.diag_factors;
    for (const json& r : j.at("records")) out.sweep.records.push_back(record_from_json(r));
    if (j.contains("comparison")) {
        for (const json& r : j.at("comparison")) {
            PipelineScore row;
            row.name = r.at("preprocessing").get<std::string>();
            row.feature_count = r.at("feature_count").get<Index>();
            row.auc = r.at("auc").get<double>();
            if (r.contains("k")) row.k = r.at("k").get<int>();
            if (r.contains("c")) row.c = r.at("c").get<double>();
            if (r.contains("mu")) row.mu = r.at("mu").get<double>();
            out.comparison.push_back(std::move(row));
        }
    }
    return out;
}

void write_curves_csv(const std::filesystem::path& path, const SweepResult& sweep) {
    std::ofstream out = open_output(path);
    out << "mu,series,value\n";
    auto emit = [&](double mu, const char* series, double value) {
        out << format_double(mu) << ',' << series << ',' << format_double(value) << '\n';
    };
    for (const SweepRecord& rec : sweep.records) {
        emit(rec.mu, "auc_target", rec.auc_target);
        if (rec.auc_confound) emit(rec.mu, "auc_confound", *rec.auc_confound);
        emit(rec.mu, "primary_recon_error", rec.primary_recon_error);
        emit(rec.mu, "concomitant_recon_error", rec.concomitant_recon_error);
        double max_corr = 0.0;
        for (double v : rec.factor_confound_correlations) max_corr = std::max(max_corr, v);
        emit(rec.mu, "max_factor_confound_correlation", max_corr);
    }
}

} // namespace apca
