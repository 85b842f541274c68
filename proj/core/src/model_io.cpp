#include "terra/model_io.hpp"

#include <fstream>
#include <sstream>

#include "terra/csv.hpp"
#include "terra/error.hpp"

namespace terra::nn {

namespace {

using Json = nlohmann::ordered_json;

Json vector_json(const Eigen::VectorXd& v) {
    return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from(const Json& j, Eigen::Index expected, const std::string& what) {
    const auto values = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != expected) {
        throw CorruptFileError(what + " has " + std::to_string(values.size()) + " entries, expected " +
                               std::to_string(expected));
    }
    return Eigen::Map<const Eigen::VectorXd>(values.data(), expected);
}

Json norm_json(const Normalization& n) {
    return Json{{"offset", vector_json(n.offset)}, {"gain", vector_json(n.gain)}};
}

Normalization norm_from(const Json& j, Eigen::Index dim, const std::string& what) {
    return Normalization{vector_from(j.at("offset"), dim, what + " offset"),
                         vector_from(j.at("gain"), dim, what + " gain")};
}

} // namespace

void save(const ModelFile& file, const std::string& path) {
    const Mlp& m = file.model;
    if (!m.all_finite()) throw InvalidArgument("refusing to save a network with non-finite parameters");
    Json layers = Json::array();
    for (const auto& layer : m.layers()) {
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(layer.weights.size()));
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) w.push_back(layer.weights(i, j));
        }
        layers.push_back(Json{{"weights", w}, {"bias", vector_json(layer.bias)}});
    }
    const Json doc{
        {"format", "terra-mlp"},
        {"version", kModelFormatVersion},
        {"widths", m.widths()},
        {"activation", "tanh"},
        {"input_norm", norm_json(m.input_norm())},
        {"output_norm", norm_json(m.output_norm())},
        {"layers", layers},
        {"manifest", file.manifest},
    };
    csv::ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << doc.dump(1) << '\n';
    if (!out) throw IoError("failed writing '" + path + "'");
}

void save(const Mlp& model, const std::string& path) { save(ModelFile{model, {}}, path); }

ModelFile load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    Json doc;
    try {
        doc = Json::parse(buffer.str());
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError("model file '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "terra-mlp") {
            throw CorruptFileError("'" + path + "' is not a terra model file");
        }
        const int version = doc.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw VersionMismatchError("model file '" + path + "' has format version " +
                                       std::to_string(version) + ", this build reads version " +
                                       std::to_string(kModelFormatVersion));
        }
        ModelFile file;
        file.model = Mlp(doc.at("widths").get<std::vector<int>>());
        Mlp& m = file.model;
        const Json& layers = doc.at("layers");
        if (layers.size() != m.layers().size()) throw CorruptFileError("layer count disagrees with widths");
        for (std::size_t l = 0; l < layers.size(); ++l) {
            auto& layer = m.layers()[l];
            const std::string name = "layer " + std::to_string(l);
            const Eigen::VectorXd w = vector_from(layers[l].at("weights"), layer.weights.size(), name + " weights");
            Eigen::Index k = 0;
            for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
                for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = w(k++);
            }
            layer.bias = vector_from(layers[l].at("bias"), layer.bias.size(), name + " bias");
        }
        m.set_input_norm(norm_from(doc.at("input_norm"), m.input_dim(), "input normalization"));
        m.set_output_norm(norm_from(doc.at("output_norm"), m.output_dim(), "output normalization"));
        if (!m.all_finite()) throw CorruptFileError("model file '" + path + "' holds non-finite values");
        if (doc.contains("manifest")) file.manifest = doc.at("manifest");
        return file;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError("model file '" + path + "' is malformed: " + e.what());
    } catch (const InvalidArgument& e) {
        throw CorruptFileError("model file '" + path + "' is inconsistent: " + e.what());
    }
}

Mlp load(const std::string& path) { return load_file(path).model; }

} // namespace terra::nn
