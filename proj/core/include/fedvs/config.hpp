#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fedvs {

enum class Strategy { Fedvs, Wait, Ignore, WaitDp };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

/// Fully resolved experiment parameters. Flat key=value file format with
/// '#' comments; unknown keys are parse errors. Defaults below are the
/// documented schema defaults.
struct ExperimentConfig {
    // protocol
    int n_clients = 10;
    int k = 2;
    int t = 1;
    std::uint64_t prime = (1ULL << 61) - 1;
    int l_x = 16;
    int l_w = 16;
    std::vector<int> degrees;      // per-client PN degree; single value broadcasts
    int degree_default = 2;
    int embed_dim = 8;
    std::vector<std::size_t> central_widths = {32, 16};
    double lr_server = 0.05;
    double lr_client = 0.05;
    int batch = 16;
    int rounds = 200;
    std::uint64_t seed = 1;
    Strategy strategy = Strategy::Fedvs;
    double w_max = 1.0; // declared weight-magnitude bound for the overflow check

    // delays / network
    double straggler_fraction = 0.5;
    double nonstraggler_mean_s = 0.2;
    double straggler_base_s = 1.0;
    double bandwidth_mbps = 300.0;
    double ignore_deadline_multiplier = 2.0;
    std::optional<double> ignore_deadline_s; // absolute override
    double dp_epsilon = 10.0;                // <= 0 disables the noise
    double dp_clip = 1.0;                    // <= 0 disables clipping

    // dataset
    std::string dataset = "synthetic"; // synthetic | csv
    std::string csv_path;
    std::string label_column;
    std::string task = "classification"; // classification | regression
    int synthetic_samples = 1024;
    int synthetic_features = 20;
    int synthetic_classes = 2;
    double synthetic_margin = 0.3;
    bool synthetic_balanced = true;
    double train_fraction = 0.7;

    // reporting
    int eval_every = 10; // 0 = final evaluation only

    int degree_for(int client) const {
        if (degrees.empty()) return degree_default;
        return degrees[degrees.size() == 1 ? 0 : static_cast<std::size_t>(client)];
    }

    /// Stable key -> value view of every resolved field, for the metrics
    /// header and config echo.
    std::map<std::string, std::string> resolved() const;
};

/// Parse the key=value file at `path`. Throws ParseError on malformed
/// lines or unknown keys (naming the key), ValidationError on rule
/// violations (threshold vs N, ranges).
ExperimentConfig load_config(const std::string& path);

/// Parse from an already-read document (used by load_config and tests).
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");

/// Apply one `key=value` override on top of a parsed config, revalidating.
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Re-check cross-field rules; called by the parsers and after overrides.
void validate(const ExperimentConfig& cfg);

} // namespace fedvs
