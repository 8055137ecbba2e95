#include "eaq/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace eaq {

namespace {

constexpr char kMagic[8] = {'E', 'A', 'Q', 'C', 'K', 'P', 'T', '1'};

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

void put_vec(std::ostream& out, const std::vector<double>& v) {
    put<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_vec(std::istream& in) {
    const auto n = get<std::uint64_t>(in);
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    return v;
}

}  // namespace

Checkpoint make_checkpoint(const TrainResult& result, const TrainConfig& cfg,
                           const TensorizedDataset& dataset) {
    Checkpoint ckpt;
    ckpt.cfg = cfg;
    ckpt.layout = dataset.layout;
    ckpt.stats = dataset.stats;
    ckpt.sched = result.sched;
    ckpt.params = result.model.serialize();
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    const TrainConfig& c = ckpt.cfg;
    put(out, c.lambda);
    put<std::int32_t>(out, c.batch_size);
    put(out, c.lr);
    put<std::int32_t>(out, c.epochs);
    put(out, c.gamma);
    put<std::int32_t>(out, c.k_steps);
    put(out, c.beta_start);
    put(out, c.beta_end);
    put<std::uint64_t>(out, c.seed);
    put<std::int32_t>(out, c.base_channels);
    put<std::int32_t>(out, c.groups);
    put<std::int32_t>(out, c.emb_dim);
    put<std::int32_t>(out, c.kernel);
    put<std::uint8_t>(out, c.q_raw_space ? 1 : 0);
    put<std::int32_t>(out, ckpt.layout.num_agents);
    put<std::int32_t>(out, ckpt.layout.obs_dim);
    put<std::int32_t>(out, ckpt.layout.num_actions);
    put<std::int32_t>(out, ckpt.layout.t_max);
    put_vec(out, ckpt.stats.mins);
    put_vec(out, ckpt.stats.maxs);
    put<std::uint64_t>(out, ckpt.stats.is_binary.size());
    out.write(reinterpret_cast<const char*>(ckpt.stats.is_binary.data()),
              static_cast<std::streamsize>(ckpt.stats.is_binary.size()));
    put<std::int32_t>(out, ckpt.sched.k_steps);
    put_vec(out, ckpt.sched.betas);
    put_vec(out, ckpt.params);
    if (!out) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    Checkpoint ckpt;
    TrainConfig& c = ckpt.cfg;
    c.lambda = get<double>(in);
    c.batch_size = get<std::int32_t>(in);
    c.lr = get<double>(in);
    c.epochs = get<std::int32_t>(in);
    c.gamma = get<double>(in);
    c.k_steps = get<std::int32_t>(in);
    c.beta_start = get<double>(in);
    c.beta_end = get<double>(in);
    c.seed = get<std::uint64_t>(in);
    c.base_channels = get<std::int32_t>(in);
    c.groups = get<std::int32_t>(in);
    c.emb_dim = get<std::int32_t>(in);
    c.kernel = get<std::int32_t>(in);
    c.q_raw_space = get<std::uint8_t>(in) != 0;
    const int n = get<std::int32_t>(in);
    const int d = get<std::int32_t>(in);
    const int a = get<std::int32_t>(in);
    const int t = get<std::int32_t>(in);
    ckpt.layout = ChannelLayout::make(n, d, a, t);
    ckpt.stats.mins = get_vec(in);
    ckpt.stats.maxs = get_vec(in);
    const auto nb = get<std::uint64_t>(in);
    ckpt.stats.is_binary.resize(nb);
    in.read(reinterpret_cast<char*>(ckpt.stats.is_binary.data()), static_cast<std::streamsize>(nb));
    const int ks = get<std::int32_t>(in);
    const std::vector<double> betas = get_vec(in);
    if (static_cast<int>(betas.size()) != ks)
        throw std::runtime_error("checkpoint schedule corrupt: " + path);
    ckpt.sched.k_steps = ks;
    ckpt.sched.betas = betas;
    ckpt.sched.alphas.resize(ks);
    ckpt.sched.alpha_bars.resize(ks);
    double abar = 1.0;
    for (int i = 0; i < ks; ++i) {
        ckpt.sched.alphas[i] = 1.0 - betas[i];
        abar *= ckpt.sched.alphas[i];
        ckpt.sched.alpha_bars[i] = abar;
    }
    ckpt.params = get_vec(in);
    if (!in) throw std::runtime_error("checkpoint truncated: " + path);
    return ckpt;
}

TemporalUNet model_from_checkpoint(const Checkpoint& ckpt) {
    TemporalUNet model;
    UNetConfig ucfg;
    ucfg.in_rows = ckpt.layout.feature_rows();
    ucfg.base_channels = ckpt.cfg.base_channels;
    ucfg.groups = ckpt.cfg.groups;
    ucfg.emb_dim = ckpt.cfg.emb_dim;
    ucfg.kernel = ckpt.cfg.kernel;
    model.init(ucfg, 0);
    model.deserialize(ckpt.params);
    return model;
}

}  // namespace eaq
