#include "eaq/episode_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace eaq {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
    throw std::runtime_error("parse error in " + path + " (line " + std::to_string(line) +
                             "): " + what);
}

[[noreturn]] void schema_fail(const std::string& path, std::size_t line, const std::string& what) {
    throw std::runtime_error("schema error in " + path + " (line " + std::to_string(line) +
                             "): " + what);
}

Episode episode_from_json(const json& j, const DatasetMeta& meta, const std::string& path,
                          std::size_t line) {
    Episode e;
    e.num_agents = j.at("num_agents").get<int>();
    if (e.num_agents != meta.num_agents)
        schema_fail(path, line, "num_agents differs from file meta");
    const auto& obs = j.at("obs");
    const auto& actions = j.at("actions");
    const auto& rewards = j.at("rewards");
    const std::size_t t = rewards.size();
    if (t == 0) schema_fail(path, line, "episode has no steps");
    if (obs.size() != t || actions.size() != t)
        schema_fail(path, line, "obs/actions/rewards lengths disagree");
    e.obs.resize(t);
    e.actions.resize(t);
    e.rewards.resize(t);
    for (std::size_t i = 0; i < t; ++i) {
        e.rewards[i] = rewards[i].get<double>();
        if (static_cast<int>(obs[i].size()) != e.num_agents ||
            static_cast<int>(actions[i].size()) != e.num_agents)
            schema_fail(path, line, "agent count mismatch at step " + std::to_string(i));
        e.obs[i].resize(e.num_agents);
        e.actions[i].resize(e.num_agents);
        for (int n = 0; n < e.num_agents; ++n) {
            e.obs[i][n] = obs[i][n].get<std::vector<double>>();
            if (static_cast<int>(e.obs[i][n].size()) != meta.obs_dim)
                schema_fail(path, line, "obs dim mismatch at step " + std::to_string(i));
            const int a = actions[i][n].get<int>();
            if (a < 0 || a >= meta.num_actions)
                schema_fail(path, line,
                            "action id " + std::to_string(a) + " outside [0, " +
                                std::to_string(meta.num_actions) + ")");
            e.actions[i][n] = a;
        }
    }
    if (j.contains("rtg")) {
        e.rtg = j.at("rtg").get<std::vector<double>>();
        if (e.rtg.size() != t) schema_fail(path, line, "rtg length disagrees with rewards");
    }
    if (j.contains("source")) e.source = j.at("source").get<std::string>();
    if (j.contains("q_gen")) e.q_gen = j.at("q_gen").get<std::vector<double>>();
    return e;
}

}  // namespace

EpisodeFile load_episodes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open episode file: " + path);
    EpisodeFile file;
    std::string line;
    std::size_t line_no = 0;
    bool have_meta = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& ex) {
            parse_fail(path, line_no, ex.what());
        }
        try {
            if (!have_meta) {
                if (!j.contains("meta") || !j.at("meta").get<bool>())
                    parse_fail(path, line_no, "first record must be the meta object");
                file.meta.num_agents = j.at("num_agents").get<int>();
                file.meta.obs_dim = j.at("obs_dim").get<int>();
                file.meta.num_actions = j.at("num_actions").get<int>();
                file.meta.t_max = j.at("t_max").get<int>();
                file.meta.gamma = j.value("gamma", 0.99);
                have_meta = true;
                continue;
            }
            file.episodes.push_back(episode_from_json(j, file.meta, path, line_no));
        } catch (const json::exception& ex) {
            parse_fail(path, line_no, ex.what());
        }
    }
    return file;
}

void save_episodes(const EpisodeFile& file, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write episode file: " + path);
    json meta = {{"meta", true},
                 {"num_agents", file.meta.num_agents},
                 {"obs_dim", file.meta.obs_dim},
                 {"num_actions", file.meta.num_actions},
                 {"t_max", file.meta.t_max},
                 {"gamma", file.meta.gamma}};
    out << meta.dump() << '\n';
    for (const Episode& e : file.episodes) {
        json j = {{"num_agents", e.num_agents},
                  {"obs", e.obs},
                  {"actions", e.actions},
                  {"rewards", e.rewards}};
        if (e.has_rtg()) j["rtg"] = e.rtg;
        if (!e.source.empty()) j["source"] = e.source;
        if (!e.q_gen.empty()) j["q_gen"] = e.q_gen;
        out << j.dump() << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

constexpr char kCacheMagic[8] = {'E', 'A', 'Q', 'T', 'E', 'N', 'S', '1'};

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void get(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

void put_doubles(std::ostream& out, const std::vector<double>& v) {
    const std::uint64_t n = v.size();
    put(out, n);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

std::vector<double> get_doubles(std::istream& in) {
    std::uint64_t n = 0;
    get(in, n);
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    return v;
}

}  // namespace

void save_tensor_cache(const TensorizedDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write tensor cache: " + path);
    out.write(kCacheMagic, sizeof(kCacheMagic));
    put<std::int32_t>(out, ds.layout.num_agents);
    put<std::int32_t>(out, ds.layout.obs_dim);
    put<std::int32_t>(out, ds.layout.num_actions);
    put<std::int32_t>(out, ds.layout.t_max);
    put_doubles(out, ds.stats.mins);
    put_doubles(out, ds.stats.maxs);
    const std::uint64_t f = ds.stats.is_binary.size();
    put(out, f);
    out.write(reinterpret_cast<const char*>(ds.stats.is_binary.data()),
              static_cast<std::streamsize>(f));
    const std::uint64_t b = ds.data.size();
    put(out, b);
    for (std::uint64_t i = 0; i < b; ++i) {
        put<std::int32_t>(out, ds.episode_lengths[i]);
        put_doubles(out, ds.data[i].v);
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

TensorizedDataset load_tensor_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open tensor cache: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a tensor cache file: " + path);
    std::int32_t n = 0, d = 0, a = 0, t = 0;
    get(in, n);
    get(in, d);
    get(in, a);
    get(in, t);
    TensorizedDataset ds;
    ds.layout = ChannelLayout::make(n, d, a, t);
    ds.stats.mins = get_doubles(in);
    ds.stats.maxs = get_doubles(in);
    std::uint64_t f = 0;
    get(in, f);
    ds.stats.is_binary.resize(f);
    in.read(reinterpret_cast<char*>(ds.stats.is_binary.data()), static_cast<std::streamsize>(f));
    std::uint64_t b = 0;
    get(in, b);
    ds.data.reserve(b);
    ds.episode_lengths.reserve(b);
    for (std::uint64_t i = 0; i < b; ++i) {
        std::int32_t len = 0;
        get(in, len);
        ds.episode_lengths.push_back(len);
        Mat m(ds.layout.feature_rows(), ds.layout.t_max);
        m.v = get_doubles(in);
        if (m.v.size() != static_cast<std::size_t>(m.rows) * m.cols)
            throw std::runtime_error("tensor cache corrupt: " + path);
        ds.data.push_back(std::move(m));
    }
    if (!in) throw std::runtime_error("tensor cache truncated: " + path);
    return ds;
}

}  // namespace eaq
