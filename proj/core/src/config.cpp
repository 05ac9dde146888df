#include "pcu/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pcu::io {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& why) {
    throw std::runtime_error("config:" + std::to_string(line) + ": " + why);
}

double parse_number(const std::string& v, int line) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) fail(line, "malformed number '" + v + "'");
        return d;
    } catch (const std::invalid_argument&) {
        fail(line, "malformed number '" + v + "'");
    } catch (const std::out_of_range&) {
        fail(line, "number out of range '" + v + "'");
    }
}

int to_int(double d, const std::string& key, int line) {
    int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) fail(line, key + " must be an integer");
    return i;
}

struct Field {
    std::function<void(RunConfig&, const std::string&, int)> set;
};

// One registry drives both parsing and serialization so the two can never
// drift apart.
std::map<std::string, Field> field_registry() {
    std::map<std::string, Field> r;
    auto num = [](auto setter) {
        return Field{[setter](RunConfig& c, const std::string& v, int line) {
            setter(c, parse_number(v, line), line);
        }};
    };
    auto boolean = [](auto setter) {
        return Field{[setter](RunConfig& c, const std::string& v, int line) {
            if (v == "true")
                setter(c, true);
            else if (v == "false")
                setter(c, false);
            else
                fail(line, "expected true or false, got '" + v + "'");
        }};
    };
    auto text = [](auto setter) {
        return Field{[setter](RunConfig& c, const std::string& v, int line) {
            if (v.size() < 2 || v.front() != '"' || v.back() != '"')
                fail(line, "expected a quoted string");
            setter(c, v.substr(1, v.size() - 2));
        }};
    };

    r["seed"] = num([](RunConfig& c, double d, int l) {
        c.train.seed = static_cast<std::uint64_t>(to_int(d, "seed", l));
    });
    r["patch_size"] = num([](RunConfig& c, double d, int l) {
        c.train.patch_size = to_int(d, "patch_size", l);
    });
    r["rate"] = num([](RunConfig& c, double d, int l) { c.train.net.rate = to_int(d, "rate", l); });
    r["patches_per_model"] = num([](RunConfig& c, double d, int l) {
        c.train.patches_per_model = to_int(d, "patches_per_model", l);
    });
    r["batch_size"] = num([](RunConfig& c, double d, int l) {
        c.train.batch_size = to_int(d, "batch_size", l);
    });
    r["epochs"] = num([](RunConfig& c, double d, int l) { c.train.epochs = to_int(d, "epochs", l); });
    r["lr0"] = num([](RunConfig& c, double d, int) { c.train.lr0 = d; });
    r["decay_rate"] = num([](RunConfig& c, double d, int) { c.train.decay_rate = d; });
    r["decay_every"] = num([](RunConfig& c, double d, int l) {
        c.train.decay_every = to_int(d, "decay_every", l);
    });
    r["lr_floor"] = num([](RunConfig& c, double d, int) { c.train.lr_floor = d; });
    r["alpha"] = num([](RunConfig& c, double d, int) { c.train.weights.alpha = d; });
    r["beta"] = num([](RunConfig& c, double d, int) { c.train.weights.beta = d; });
    r["gamma"] = num([](RunConfig& c, double d, int) { c.train.weights.gamma = d; });
    r["gcn_k"] = num([](RunConfig& c, double d, int l) { c.train.net.gcn_k = to_int(d, "gcn_k", l); });
    r["level_channels"] = num([](RunConfig& c, double d, int l) {
        c.train.net.level_channels = to_int(d, "level_channels", l);
    });
    r["agg_channels"] = num([](RunConfig& c, double d, int l) {
        c.train.net.agg_channels = to_int(d, "agg_channels", l);
    });
    r["expand_channels"] = num([](RunConfig& c, double d, int l) {
        c.train.net.expand_channels = to_int(d, "expand_channels", l);
    });
    r["head_hidden"] = num([](RunConfig& c, double d, int l) {
        c.train.net.head_hidden = to_int(d, "head_hidden", l);
    });
    r["fixed_grid_span"] = num([](RunConfig& c, double d, int) {
        c.train.net.fixed_grid_span = d;
    });
    r["use_self_attention"] = boolean([](RunConfig& c, bool b) {
        c.train.net.use_self_attention = b;
    });
    r["use_learnable_grid"] = boolean([](RunConfig& c, bool b) {
        c.train.net.use_learnable_grid = b;
    });
    r["use_hierarchical_folding"] = boolean([](RunConfig& c, bool b) {
        c.train.net.use_hierarchical_folding = b;
    });
    r["uniform_seeds"] = num([](RunConfig& c, double d, int l) {
        c.train.uniform.m_seeds = to_int(d, "uniform_seeds", l);
    });
    r["p_values"] = Field{[](RunConfig& c, const std::string& v, int line) {
        if (v.size() < 2 || v.front() != '[' || v.back() != ']')
            fail(line, "p_values must be an array like [0.004, 0.012]");
        c.train.uniform.p_values.clear();
        std::istringstream inner(v.substr(1, v.size() - 2));
        std::string item;
        while (std::getline(inner, item, ',')) {
            item = trim(item);
            if (item.empty()) fail(line, "empty array entry");
            c.train.uniform.p_values.push_back(parse_number(item, line));
        }
        if (c.train.uniform.p_values.empty()) fail(line, "p_values must not be empty");
    }};
    r["sp_k"] = num([](RunConfig& c, double d, int l) { c.train.sp.k = to_int(d, "sp_k", l); });
    r["graph_k"] = num([](RunConfig& c, double d, int l) {
        c.train.graph_k = to_int(d, "graph_k", l);
    });
    r["infer_coverage"] = num([](RunConfig& c, double d, int) { c.train.infer_coverage = d; });
    r["dataset_dir"] = text([](RunConfig& c, const std::string& s) { c.dataset_dir = s; });
    r["output_dir"] = text([](RunConfig& c, const std::string& s) { c.output_dir = s; });
    r["checkpoint_path"] = text([](RunConfig& c, const std::string& s) { c.checkpoint_path = s; });
    return r;
}

std::string shortest(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    static const std::map<std::string, Field> registry = field_registry();
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, raw)) {
        ++line_no;
        auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        auto it = registry.find(key);
        if (it == registry.end()) fail(line_no, "unknown key '" + key + "'");
        if (seen.count(key)) fail(line_no, "duplicate key '" + key + "'");
        seen[key] = line_no;
        it->second.set(cfg, value, line_no);
    }
    return cfg;
}

RunConfig read_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "seed = " << cfg.train.seed << "\n";
    os << "patch_size = " << cfg.train.patch_size << "\n";
    os << "rate = " << cfg.train.net.rate << "\n";
    os << "patches_per_model = " << cfg.train.patches_per_model << "\n";
    os << "batch_size = " << cfg.train.batch_size << "\n";
    os << "epochs = " << cfg.train.epochs << "\n";
    os << "lr0 = " << shortest(cfg.train.lr0) << "\n";
    os << "decay_rate = " << shortest(cfg.train.decay_rate) << "\n";
    os << "decay_every = " << cfg.train.decay_every << "\n";
    os << "lr_floor = " << shortest(cfg.train.lr_floor) << "\n";
    os << "alpha = " << shortest(cfg.train.weights.alpha) << "\n";
    os << "beta = " << shortest(cfg.train.weights.beta) << "\n";
    os << "gamma = " << shortest(cfg.train.weights.gamma) << "\n";
    os << "gcn_k = " << cfg.train.net.gcn_k << "\n";
    os << "level_channels = " << cfg.train.net.level_channels << "\n";
    os << "agg_channels = " << cfg.train.net.agg_channels << "\n";
    os << "expand_channels = " << cfg.train.net.expand_channels << "\n";
    os << "head_hidden = " << cfg.train.net.head_hidden << "\n";
    os << "fixed_grid_span = " << shortest(cfg.train.net.fixed_grid_span) << "\n";
    os << "use_self_attention = " << (cfg.train.net.use_self_attention ? "true" : "false") << "\n";
    os << "use_learnable_grid = " << (cfg.train.net.use_learnable_grid ? "true" : "false") << "\n";
    os << "use_hierarchical_folding = "
       << (cfg.train.net.use_hierarchical_folding ? "true" : "false") << "\n";
    os << "uniform_seeds = " << cfg.train.uniform.m_seeds << "\n";
    os << "p_values = [";
    for (std::size_t i = 0; i < cfg.train.uniform.p_values.size(); ++i) {
        if (i) os << ", ";
        os << shortest(cfg.train.uniform.p_values[i]);
    }
    os << "]\n";
    os << "sp_k = " << cfg.train.sp.k << "\n";
    os << "graph_k = " << cfg.train.graph_k << "\n";
    os << "infer_coverage = " << shortest(cfg.train.infer_coverage) << "\n";
    os << "dataset_dir = \"" << cfg.dataset_dir << "\"\n";
    os << "output_dir = \"" << cfg.output_dir << "\"\n";
    os << "checkpoint_path = \"" << cfg.checkpoint_path << "\"\n";
    return os.str();
}

}  // namespace pcu::io
