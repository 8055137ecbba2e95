#include <cstring>
#include <fstream>

#include "eaq/pipeline.hpp"

namespace eaq {

using nlohmann::json;

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
    json j = {{"stage", m.stage},
              {"config_hash", m.config_hash},
              {"seed", m.seed},
              {"inputs", m.inputs},
              {"outputs", m.outputs},
              {"params", m.params}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    out << j.dump(2) << '\n';
}

std::optional<Manifest> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    json j;
    try {
        in >> j;
    } catch (const json::exception&) {
        return std::nullopt;
    }
    Manifest m;
    m.stage = j.value("stage", "");
    m.config_hash = j.value("config_hash", "");
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("inputs")) m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    if (j.contains("outputs"))
        m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    if (j.contains("params")) m.params = j.at("params");
    return m;
}

namespace {

constexpr char kPolicyMagic[8] = {'E', 'A', 'Q', 'P', 'O', 'L', '0', '1'};

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

void put_mlp(std::ostream& out, const Mlp& net) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& l : net.layers) {
        put<std::int32_t>(out, l.in_dim);
        put<std::int32_t>(out, l.out_dim);
        out.write(reinterpret_cast<const char*>(l.w.data()),
                  static_cast<std::streamsize>(l.w.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(l.b.data()),
                  static_cast<std::streamsize>(l.b.size() * sizeof(double)));
    }
}

Mlp get_mlp(std::istream& in) {
    Mlp net;
    const auto n_layers = get<std::uint32_t>(in);
    net.layers.resize(n_layers);
    for (auto& l : net.layers) {
        l.in_dim = get<std::int32_t>(in);
        l.out_dim = get<std::int32_t>(in);
        l.w.resize(static_cast<std::size_t>(l.in_dim) * l.out_dim);
        l.b.resize(l.out_dim);
        l.gw.assign(l.w.size(), 0.0);
        l.gb.assign(l.b.size(), 0.0);
        in.read(reinterpret_cast<char*>(l.w.data()),
                static_cast<std::streamsize>(l.w.size() * sizeof(double)));
        in.read(reinterpret_cast<char*>(l.b.data()),
                static_cast<std::streamsize>(l.b.size() * sizeof(double)));
    }
    return net;
}

}  // namespace

void save_policy(const TrainedPolicy& policy, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write policy: " + path);
    out.write(kPolicyMagic, sizeof(kPolicyMagic));
    put<std::int32_t>(out, static_cast<std::int32_t>(policy.cfg.reg));
    put(out, policy.cfg.cql_weight);
    put(out, policy.cfg.bcq_threshold);
    put(out, policy.cfg.gamma);
    put<std::int32_t>(out, policy.num_agents);
    put<std::int32_t>(out, policy.obs_dim);
    put<std::int32_t>(out, policy.num_actions);
    put_mlp(out, policy.agent);
    const bool has_behavior = !policy.behavior.layers.empty();
    put<std::uint8_t>(out, has_behavior ? 1 : 0);
    if (has_behavior) put_mlp(out, policy.behavior);
    if (!out) throw std::runtime_error("write failed: " + path);
}

TrainedPolicy load_policy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open policy: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kPolicyMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a policy file: " + path);
    TrainedPolicy p;
    p.cfg.reg = static_cast<LearnerConfig::Regularizer>(get<std::int32_t>(in));
    p.cfg.cql_weight = get<double>(in);
    p.cfg.bcq_threshold = get<double>(in);
    p.cfg.gamma = get<double>(in);
    p.num_agents = get<std::int32_t>(in);
    p.obs_dim = get<std::int32_t>(in);
    p.num_actions = get<std::int32_t>(in);
    p.agent = get_mlp(in);
    if (get<std::uint8_t>(in)) p.behavior = get_mlp(in);
    if (!in) throw std::runtime_error("policy file truncated: " + path);
    return p;
}

}  // namespace eaq
