#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "pcu/training.hpp"

// Checkpoint container, little-endian binary:
//   magic "PCUCKPT1"
//   u64 step
//   u64 config_len, config text (the flat key=value snapshot)
//   u64 n_params, then per parameter:
//     u64 name_len, name bytes
//     u64 ndim, i64 dims[ndim]
//     f64 data[numel], f64 adam_m[numel], f64 adam_v[numel]
// The generator state needs no dedicated field: every random stream is
// derived from (config.seed, step, stable ids).

namespace pcu::train {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

constexpr char kMagic[8] = {'P', 'C', 'U', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_doubles(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::uint64_t get_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

void get_doubles(std::istream& is, std::vector<double>& v) {
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
}

std::string get_string(std::istream& is) {
    std::uint64_t len = get_u64(is);
    std::string s(len, '\0');
    is.read(s.data(), static_cast<std::streamsize>(len));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return s;
}

void open_and_check_magic(std::ifstream& in, const std::filesystem::path& path) {
    in.open(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path.string());
}

}  // namespace

void Trainer::save_checkpoint(const std::filesystem::path& path,
                              const std::string& config_text) const {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("checkpoint: cannot write " + tmp.string());
        out.write(kMagic, 8);
        put_u64(out, static_cast<std::uint64_t>(step_));
        put_u64(out, config_text.size());
        out.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
        const auto& params = network_.params().params();
        put_u64(out, params.size());
        for (const auto& p : params) {
            put_u64(out, p->name.size());
            out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
            const auto& shape = p->value.shape();
            put_u64(out, shape.size());
            for (auto d : shape) put_u64(out, static_cast<std::uint64_t>(d));
            put_doubles(out, p->value.data());
            put_doubles(out, p->adam_m);
            put_doubles(out, p->adam_v);
        }
        if (!out) throw std::runtime_error("checkpoint: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string Trainer::load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in;
    open_and_check_magic(in, path);
    step_ = static_cast<std::int64_t>(get_u64(in));
    std::string config_text = get_string(in);

    const std::uint64_t n_params = get_u64(in);
    if (n_params != network_.params().size())
        throw std::runtime_error("checkpoint: parameter count does not match the model");
    for (std::uint64_t i = 0; i < n_params; ++i) {
        std::string name = get_string(in);
        ad::Parameter* p = network_.params().find(name);
        if (!p) throw std::runtime_error("checkpoint: unknown parameter " + name);
        std::uint64_t ndim = get_u64(in);
        ad::Shape shape(ndim);
        for (auto& d : shape) d = static_cast<std::int64_t>(get_u64(in));
        if (shape != p->value.shape())
            throw std::runtime_error("checkpoint: shape mismatch for " + name);
        get_doubles(in, p->value.raw_data());
        get_doubles(in, p->adam_m);
        get_doubles(in, p->adam_v);
    }
    return config_text;
}

std::string checkpoint_config_text(const std::filesystem::path& path) {
    std::ifstream in;
    open_and_check_magic(in, path);
    get_u64(in);  // step
    return get_string(in);
}

}  // namespace pcu::train
