#include "lru/harness/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lru/error.hpp"

namespace lru::harness {
namespace {

using nlohmann::json;

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    Vector v(static_cast<Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Index>(i)] = values[i];
    return v;
}

json matrix_json(const Matrix& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from(const json& j) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
        throw ParseError("matrix data does not match its shape", -1);
    }
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    }
    return m;
}

json layer_json(const LayerParams& p) {
    return {{"nu", vector_json(p.nu)},         {"theta_phase", vector_json(p.theta_phase)},
            {"gamma_log", vector_json(p.gamma_log)}, {"b_re", matrix_json(p.b_re)},
            {"b_im", matrix_json(p.b_im)},     {"c_re", matrix_json(p.c_re)},
            {"c_im", matrix_json(p.c_im)},     {"d", matrix_json(p.d)}};
}

LayerParams layer_from(const json& j) {
    LayerParams p;
    p.nu = vector_from(j.at("nu"));
    p.theta_phase = vector_from(j.at("theta_phase"));
    p.gamma_log = vector_from(j.at("gamma_log"));
    p.b_re = matrix_from(j.at("b_re"));
    p.b_im = matrix_from(j.at("b_im"));
    p.c_re = matrix_from(j.at("c_re"));
    p.c_im = matrix_from(j.at("c_im"));
    p.d = matrix_from(j.at("d"));
    return p;
}

json stats_json(const std::vector<data::ColumnStats>& stats) {
    json out = json::array();
    for (const auto& s : stats) out.push_back({{"name", s.name}, {"mean", s.mean}, {"scale", s.scale}});
    return out;
}

std::vector<data::ColumnStats> stats_from(const json& j) {
    std::vector<data::ColumnStats> out;
    for (const auto& s : j) {
        out.push_back({s.at("name").get<std::string>(), s.at("mean").get<double>(), s.at("scale").get<double>()});
    }
    return out;
}

}  // namespace

json pipeline_to_json(const data::FittedPipeline& p) {
    json cats = json::array();
    for (const auto& v : p.categorical) cats.push_back({{"name", v.name}, {"values", v.values}});
    return {{"fitted", p.fitted},
            {"impute_window", p.impute_window},
            {"strict_vocabulary", p.strict_vocabulary},
            {"numeric", stats_json(p.numeric)},
            {"categorical", cats},
            {"targets", stats_json(p.targets)}};
}

data::FittedPipeline pipeline_from_json(const json& j) {
    data::FittedPipeline p;
    p.fitted = j.at("fitted").get<bool>();
    p.impute_window = j.at("impute_window").get<int>();
    p.strict_vocabulary = j.at("strict_vocabulary").get<bool>();
    p.numeric = stats_from(j.at("numeric"));
    p.targets = stats_from(j.at("targets"));
    for (const auto& v : j.at("categorical")) {
        p.categorical.push_back({v.at("name").get<std::string>(), v.at("values").get<std::vector<std::string>>()});
    }
    return p;
}

std::string config_hash(const nlohmann::json& value) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : value.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string serialize_checkpoint(const Checkpoint& ck) {
    json layers = json::array();
    for (const auto& layer : ck.network.layers) layers.push_back(layer_json(layer));
    const json j = {
        {"format", "lru-checkpoint"},
        {"version", kCheckpointVersion},
        {"network", {{"layers", layers}}},
        {"optimizer",
         {{"t", ck.optimizer.t},
          {"learning_rate", ck.optimizer.config.learning_rate},
          {"beta1", ck.optimizer.config.beta1},
          {"beta2", ck.optimizer.config.beta2},
          {"epsilon", ck.optimizer.config.epsilon},
          {"m", vector_json(ck.optimizer.m)},
          {"v", vector_json(ck.optimizer.v)}}},
        {"pipeline", pipeline_to_json(ck.pipeline)},
        {"config", ck.config},
        {"seed", ck.seed},
        {"provenance", {{"command", ck.command}, {"config_hash", config_hash(ck.config)}}},
    };
    return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what(), static_cast<long>(e.byte));
    }
    try {
        if (!j.is_object() || j.value("format", std::string{}) != "lru-checkpoint") {
            throw ParseError("not an lru checkpoint", 0);
        }
        const int version = j.at("version").get<int>();
        if (version != kCheckpointVersion) {
            fail(ErrorKind::Version, "unsupported checkpoint version " + std::to_string(version) + " (expected " +
                                         std::to_string(kCheckpointVersion) + ")");
        }
        Checkpoint ck;
        for (const auto& layer : j.at("network").at("layers")) ck.network.layers.push_back(layer_from(layer));
        const json& opt = j.at("optimizer");
        ck.optimizer.t = opt.at("t").get<long>();
        ck.optimizer.config = {opt.at("learning_rate").get<double>(), opt.at("beta1").get<double>(),
                               opt.at("beta2").get<double>(), opt.at("epsilon").get<double>()};
        ck.optimizer.m = vector_from(opt.at("m"));
        ck.optimizer.v = vector_from(opt.at("v"));
        ck.pipeline = pipeline_from_json(j.at("pipeline"));
        ck.config = j.at("config");
        ck.seed = j.at("seed").get<std::uint64_t>();
        ck.command = j.at("provenance").at("command").get<std::string>();
        ck.network.validate();
        if (ck.optimizer.m.size() != ck.optimizer.v.size() ||
            (ck.optimizer.m.size() != 0 && ck.optimizer.m.size() != parameter_count(ck.network.layers))) {
            throw ParseError("optimizer moments do not match the network", -1);
        }
        return ck;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what(), -1);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Contract) throw ParseError(std::string("inconsistent checkpoint: ") + e.what(), -1);
        throw;
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    const std::string text = serialize_checkpoint(checkpoint);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_checkpoint(ss.str());
}

}  // namespace lru::harness
