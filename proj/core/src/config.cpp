#include "fedvs/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "fedvs/errors.hpp"
#include "fedvs/field.hpp"

namespace fedvs {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::Fedvs: return "fedvs";
        case Strategy::Wait: return "wait";
        case Strategy::Ignore: return "ignore";
        case Strategy::WaitDp: return "wait_dp";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "fedvs") return Strategy::Fedvs;
    if (s == "wait") return Strategy::Wait;
    if (s == "ignore") return Strategy::Ignore;
    if (s == "wait_dp") return Strategy::WaitDp;
    throw ParseError("strategy: expected fedvs|wait|ignore|wait_dp, got '" + s + "'");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
    T out{};
    std::string v = trim(raw);
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ParseError(key + ": expected a number, got '" + raw + "'");
    }
    return out;
}

double parse_double(const std::string& key, const std::string& raw) {
    std::string v = trim(raw);
    try {
        std::size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ParseError(key + ": expected a number, got '" + raw + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& raw) {
    std::string v = trim(raw);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError(key + ": expected true/false, got '" + raw + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& raw) {
    std::vector<T> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number<T>(key, item));
    }
    if (out.empty()) throw ParseError(key + ": expected a comma-separated list");
    return out;
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}
std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
    static const std::map<std::string, Setter> setters = {
        {"n_clients", [](auto& c, const auto& v) { c.n_clients = parse_number<int>("n_clients", v); }},
        {"k", [](auto& c, const auto& v) { c.k = parse_number<int>("k", v); }},
        {"t", [](auto& c, const auto& v) { c.t = parse_number<int>("t", v); }},
        {"prime", [](auto& c, const auto& v) { c.prime = parse_number<std::uint64_t>("prime", v); }},
        {"l_x", [](auto& c, const auto& v) { c.l_x = parse_number<int>("l_x", v); }},
        {"l_w", [](auto& c, const auto& v) { c.l_w = parse_number<int>("l_w", v); }},
        {"degree", [](auto& c, const auto& v) { c.degrees = parse_list<int>("degree", v); }},
        {"embed_dim", [](auto& c, const auto& v) { c.embed_dim = parse_number<int>("embed_dim", v); }},
        {"central_widths",
         [](auto& c, const auto& v) {
             c.central_widths = trim(v).empty() ? std::vector<std::size_t>{}
                                                : parse_list<std::size_t>("central_widths", v);
         }},
        {"lr_server", [](auto& c, const auto& v) { c.lr_server = parse_double("lr_server", v); }},
        {"lr_client", [](auto& c, const auto& v) { c.lr_client = parse_double("lr_client", v); }},
        {"batch", [](auto& c, const auto& v) { c.batch = parse_number<int>("batch", v); }},
        {"rounds", [](auto& c, const auto& v) { c.rounds = parse_number<int>("rounds", v); }},
        {"seed", [](auto& c, const auto& v) { c.seed = parse_number<std::uint64_t>("seed", v); }},
        {"strategy", [](auto& c, const auto& v) { c.strategy = strategy_from_string(trim(v)); }},
        {"w_max", [](auto& c, const auto& v) { c.w_max = parse_double("w_max", v); }},
        {"straggler_fraction",
         [](auto& c, const auto& v) { c.straggler_fraction = parse_double("straggler_fraction", v); }},
        {"nonstraggler_mean_s",
         [](auto& c, const auto& v) { c.nonstraggler_mean_s = parse_double("nonstraggler_mean_s", v); }},
        {"straggler_base_s",
         [](auto& c, const auto& v) { c.straggler_base_s = parse_double("straggler_base_s", v); }},
        {"bandwidth_mbps",
         [](auto& c, const auto& v) { c.bandwidth_mbps = parse_double("bandwidth_mbps", v); }},
        {"ignore_deadline_multiplier",
         [](auto& c, const auto& v) {
             c.ignore_deadline_multiplier = parse_double("ignore_deadline_multiplier", v);
         }},
        {"ignore_deadline_s",
         [](auto& c, const auto& v) { c.ignore_deadline_s = parse_double("ignore_deadline_s", v); }},
        {"dp_epsilon", [](auto& c, const auto& v) { c.dp_epsilon = parse_double("dp_epsilon", v); }},
        {"dp_clip", [](auto& c, const auto& v) { c.dp_clip = parse_double("dp_clip", v); }},
        {"dataset", [](auto& c, const auto& v) { c.dataset = trim(v); }},
        {"csv_path", [](auto& c, const auto& v) { c.csv_path = trim(v); }},
        {"label_column", [](auto& c, const auto& v) { c.label_column = trim(v); }},
        {"task", [](auto& c, const auto& v) { c.task = trim(v); }},
        {"synthetic_samples",
         [](auto& c, const auto& v) { c.synthetic_samples = parse_number<int>("synthetic_samples", v); }},
        {"synthetic_features",
         [](auto& c, const auto& v) { c.synthetic_features = parse_number<int>("synthetic_features", v); }},
        {"synthetic_classes",
         [](auto& c, const auto& v) { c.synthetic_classes = parse_number<int>("synthetic_classes", v); }},
        {"synthetic_margin",
         [](auto& c, const auto& v) { c.synthetic_margin = parse_double("synthetic_margin", v); }},
        {"synthetic_balanced",
         [](auto& c, const auto& v) { c.synthetic_balanced = parse_bool("synthetic_balanced", v); }},
        {"train_fraction",
         [](auto& c, const auto& v) { c.train_fraction = parse_double("train_fraction", v); }},
        {"eval_every", [](auto& c, const auto& v) { c.eval_every = parse_number<int>("eval_every", v); }},
    };
    auto it = setters.find(key);
    if (it == setters.end()) throw ParseError("unknown config key '" + key + "'");
    it->second(cfg, value);
}

void validate(const ExperimentConfig& cfg) {
    // Field/LCC construction enforce primality and the threshold rule.
    Field field(cfg.prime);
    const int threshold = 2 * (cfg.k + cfg.t - 1) + 1;
    if (cfg.k < 1) throw ValidationError("k must be >= 1");
    if (cfg.t < 0) throw ValidationError("t must be >= 0");
    if (cfg.n_clients < 2) throw ValidationError("n_clients must be >= 2");
    if (cfg.n_clients < threshold) {
        throw ValidationError("recovery threshold " + std::to_string(threshold) +
                              " > N = " + std::to_string(cfg.n_clients));
    }
    if (cfg.l_x < 0 || cfg.l_w < 0) throw ValidationError("l_x and l_w must be >= 0");
    if (cfg.embed_dim < 1) throw ValidationError("embed_dim must be >= 1");
    if (cfg.batch < 1) throw ValidationError("batch must be >= 1");
    if (cfg.rounds < 0) throw ValidationError("rounds must be >= 0");
    if (!cfg.degrees.empty() && cfg.degrees.size() != 1 &&
        cfg.degrees.size() != static_cast<std::size_t>(cfg.n_clients)) {
        throw ValidationError("degree: need one value or one per client");
    }
    for (int n = 0; n < cfg.n_clients; ++n) {
        if (cfg.degree_for(n) < 1) throw ValidationError("degree must be >= 1");
    }
    if (cfg.straggler_fraction < 0.0 || cfg.straggler_fraction > 1.0) {
        throw ValidationError("straggler_fraction must be in [0, 1]");
    }
    if (cfg.bandwidth_mbps <= 0.0) throw ValidationError("bandwidth_mbps must be > 0");
    if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0) {
        throw ValidationError("train_fraction must be in (0, 1)");
    }
    if (cfg.dataset != "synthetic" && cfg.dataset != "csv") {
        throw ValidationError("dataset must be synthetic or csv");
    }
    if (cfg.dataset == "csv" && (cfg.csv_path.empty() || cfg.label_column.empty())) {
        throw ValidationError("csv dataset needs csv_path and label_column");
    }
    if (cfg.task != "classification" && cfg.task != "regression") {
        throw ValidationError("task must be classification or regression");
    }
    if (cfg.synthetic_classes < 2) throw ValidationError("synthetic_classes must be >= 2");
    if (cfg.eval_every < 0) throw ValidationError("eval_every must be >= 0");
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = line;
        if (auto hash = stripped.find('#'); hash != std::string::npos) {
            stripped = stripped.substr(0, hash);
        }
        stripped = trim(stripped);
        if (stripped.empty()) continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ParseError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        }
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        try {
            apply_override(cfg, key, value);
        } catch (const ParseError& e) {
            throw ParseError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str(), path);
}

std::map<std::string, std::string> ExperimentConfig::resolved() const {
    std::map<std::string, std::string> out;
    out["n_clients"] = std::to_string(n_clients);
    out["k"] = std::to_string(k);
    out["t"] = std::to_string(t);
    out["prime"] = std::to_string(prime);
    out["l_x"] = std::to_string(l_x);
    out["l_w"] = std::to_string(l_w);
    out["degree"] = degrees.empty() ? std::to_string(degree_default) : join(degrees);
    out["embed_dim"] = std::to_string(embed_dim);
    out["central_widths"] = join(central_widths);
    out["lr_server"] = fmt(lr_server);
    out["lr_client"] = fmt(lr_client);
    out["batch"] = std::to_string(batch);
    out["rounds"] = std::to_string(rounds);
    out["seed"] = std::to_string(seed);
    out["strategy"] = to_string(strategy);
    out["w_max"] = fmt(w_max);
    out["straggler_fraction"] = fmt(straggler_fraction);
    out["nonstraggler_mean_s"] = fmt(nonstraggler_mean_s);
    out["straggler_base_s"] = fmt(straggler_base_s);
    out["bandwidth_mbps"] = fmt(bandwidth_mbps);
    out["ignore_deadline_multiplier"] = fmt(ignore_deadline_multiplier);
    if (ignore_deadline_s) out["ignore_deadline_s"] = fmt(*ignore_deadline_s);
    out["dp_epsilon"] = fmt(dp_epsilon);
    out["dp_clip"] = fmt(dp_clip);
    out["dataset"] = dataset;
    if (!csv_path.empty()) out["csv_path"] = csv_path;
    if (!label_column.empty()) out["label_column"] = label_column;
    out["task"] = task;
    out["synthetic_samples"] = std::to_string(synthetic_samples);
    out["synthetic_features"] = std::to_string(synthetic_features);
    out["synthetic_classes"] = std::to_string(synthetic_classes);
    out["synthetic_margin"] = fmt(synthetic_margin);
    out["synthetic_balanced"] = synthetic_balanced ? "true" : "false";
    out["train_fraction"] = fmt(train_fraction);
    out["eval_every"] = std::to_string(eval_every);
    return out;
}

} // namespace fedvs
