#include "fedvs/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "fedvs/metrics.hpp"

namespace fedvs {

PartitionedDataset load_dataset(const ExperimentConfig& cfg) {
    if (cfg.dataset == "csv") {
        CsvSpec spec;
        spec.path = cfg.csv_path;
        spec.label_column = cfg.label_column;
        spec.n_clients = cfg.n_clients;
        spec.train_fraction = cfg.train_fraction;
        spec.classification = cfg.task == "classification";
        spec.seed = cfg.seed;
        return ingest_csv(spec);
    }
    SyntheticSpec spec;
    spec.samples = cfg.synthetic_samples;
    spec.features = cfg.synthetic_features;
    spec.classes = cfg.synthetic_classes;
    spec.margin = cfg.synthetic_margin;
    spec.balanced = cfg.synthetic_balanced;
    spec.n_clients = cfg.n_clients;
    spec.train_fraction = cfg.train_fraction;
    return generate_synthetic(spec, cfg.seed);
}

namespace {

RealMatrix pad_rows(const RealMatrix& m, std::size_t rows) {
    RealMatrix out(rows, m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) out.at(r, c) = m.at(r, c);
    }
    return out;
}

/// Snap every entry of every power to the 2^-l_x grid, mirroring the
/// rounding the protocol applies to training data.
PreprocessedData round_to_grid(PreprocessedData data, int l_x) {
    for (RealMatrix& power : data.powers) {
        for (double& e : power.data()) {
            e = std::ldexp(static_cast<double>(round_nearest(std::ldexp(e, l_x))), -l_x);
        }
    }
    return data;
}

} // namespace

Deployment setup_deployment(const ExperimentConfig& cfg, const PartitionedDataset& data) {
    validate(cfg);
    if (static_cast<int>(data.train_features.size()) != cfg.n_clients) {
        throw ValidationError("deployment: dataset partition count differs from n_clients");
    }
    Field field(cfg.prime);
    Rng master(cfg.seed);

    Deployment dep{.field = field,
                   .clients = {},
                   .server =
                       ServerState{
                           .central = {},
                           .labels = {},
                           .valid = {},
                           .field = field,
                           .lcc = LccConfig(field, cfg.k, cfg.t, cfg.n_clients),
                           .quant = QuantConfig{cfg.l_x, cfg.l_w, field, cfg.n_clients, {}},
                           .lr_server = cfg.lr_server,
                           .lr_client = cfg.lr_client,
                           .w_max = cfg.w_max,
                           .strategy = cfg.strategy,
                           .dp = DpParams{cfg.dp_epsilon, cfg.dp_clip},
                           .ignore_deadline_multiplier = cfg.ignore_deadline_multiplier,
                           .ignore_deadline_s = cfg.ignore_deadline_s,
                           .rng = master.fork(7),
                       },
                   .sim = {},
                   .test_powers = {},
                   .test_labels = data.test_labels,
                   .segment_rows = 0,
                   .prep = {},
                   .batch_rng = master.fork(9)};

    const std::size_t m_train = data.train_rows();
    const auto k = static_cast<std::size_t>(cfg.k);
    const std::size_t padded = (m_train + k - 1) / k * k;
    dep.segment_rows = padded / k;

    dep.clients.reserve(static_cast<std::size_t>(cfg.n_clients));
    for (int n = 0; n < cfg.n_clients; ++n) {
        ClientState c;
        c.id = n;
        c.rng = master.fork(100 + static_cast<std::uint64_t>(n));
        const RealMatrix& feat = data.train_features[static_cast<std::size_t>(n)];
        c.powers = preprocess_powers(pad_rows(feat, padded), cfg.degree_for(n));
        c.model = PolyNetModel::init_random(c.powers.width(),
                                            static_cast<std::size_t>(cfg.embed_dim),
                                            cfg.degree_for(n), c.rng);
        dep.clients.push_back(std::move(c));
        dep.test_powers.push_back(round_to_grid(
            preprocess_powers(data.test_features[static_cast<std::size_t>(n)], cfg.degree_for(n)),
            cfg.l_x));
    }

    const bool classification = data.num_classes > 0;
    dep.server.central = CentralModel::init_random(
        static_cast<std::size_t>(cfg.embed_dim), cfg.central_widths,
        classification ? static_cast<std::size_t>(data.num_classes) : 1,
        classification ? LossKind::CrossEntropy : LossKind::Mse, dep.server.rng);
    dep.server.labels = data.train_labels;
    dep.server.labels.resize(padded, 0.0);
    dep.server.valid.assign(padded, 0);
    for (std::size_t i = 0; i < m_train; ++i) dep.server.valid[i] = 1;

    dep.sim.delays = DelayModel{
        .n_clients = cfg.n_clients,
        .num_stragglers =
            static_cast<int>(std::ceil(cfg.straggler_fraction * cfg.n_clients)),
        .nonstraggler_mean_s = cfg.nonstraggler_mean_s,
        .straggler_base_s = cfg.straggler_base_s,
    };
    dep.sim.net = NetworkModel{cfg.bandwidth_mbps * 1e6};
    dep.sim.rng = master.fork(8);

    dep.prep = data_preparation(dep.clients, dep.server);
    return dep;
}

TrainSummary run_single(const ExperimentConfig& cfg, std::ostream& metrics_out) {
    PartitionedDataset data = load_dataset(cfg);
    Deployment dep = setup_deployment(cfg, data);
    MetricsWriter writer(metrics_out);
    writer.header(cfg);
    TrainOptions opts{cfg.rounds, cfg.batch, cfg.eval_every};
    TrainSummary summary =
        train(dep, opts, [&](const RoundMetrics& m) { writer.round(m); });
    writer.summary(summary, dep.prep);
    return summary;
}

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const ZeroInverse*>(&e)) return "ZeroInverse";
    if (dynamic_cast<const DuplicatePoints*>(&e)) return "DuplicatePoints";
    if (dynamic_cast<const ShapeMismatch*>(&e)) return "ShapeMismatch";
    if (dynamic_cast<const OverflowRange*>(&e)) return "OverflowRange";
    if (dynamic_cast<const NonFiniteInput*>(&e)) return "NonFiniteInput";
    if (dynamic_cast<const InsufficientResponders*>(&e)) return "InsufficientResponders";
    if (dynamic_cast<const MissingShare*>(&e)) return "MissingShare";
    if (dynamic_cast<const EmptyResponderSet*>(&e)) return "EmptyResponderSet";
    if (dynamic_cast<const LabelMismatch*>(&e)) return "LabelMismatch";
    if (dynamic_cast<const OverflowBoundViolation*>(&e)) return "OverflowBoundViolation";
    if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
    if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
    if (dynamic_cast<const MalformedRow*>(&e)) return "MalformedRow";
    if (dynamic_cast<const NonNumericFeature*>(&e)) return "NonNumericFeature";
    if (dynamic_cast<const Error*>(&e)) return "Error";
    return "Exception";
}

namespace {

void report_error(const std::exception& e) {
    nlohmann::json rec;
    rec["error"] = {{"kind", error_kind(e)}, {"message", e.what()}};
    std::cerr << rec.dump() << std::endl;
}

int run_to_file(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot open metrics output file '" + path + "'");
    }
    run_single(cfg, out);
    return 0;
}

} // namespace

int run_experiment(const ExperimentConfig& cfg, const std::string& out_path, int sweep_seeds) {
    try {
        if (sweep_seeds <= 1) {
            if (out_path.empty()) {
                run_single(cfg, std::cout);
                return 0;
            }
            return run_to_file(cfg, out_path);
        }
        // Independent seeds fan out across worker threads, one isolated
        // deployment and output file each.
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> failures(static_cast<std::size_t>(sweep_seeds));
        for (int i = 0; i < sweep_seeds; ++i) {
            ExperimentConfig sub = cfg;
            sub.seed = cfg.seed + static_cast<std::uint64_t>(i);
            std::string path = (out_path.empty() ? std::string("metrics") : out_path) + ".seed" +
                               std::to_string(sub.seed);
            workers.emplace_back([sub, path, i, &failures] {
                try {
                    run_to_file(sub, path);
                } catch (...) {
                    failures[static_cast<std::size_t>(i)] = std::current_exception();
                }
            });
        }
        for (std::thread& t : workers) t.join();
        for (const std::exception_ptr& p : failures) {
            if (p) std::rethrow_exception(p);
        }
        return 0;
    } catch (const std::exception& e) {
        report_error(e);
        return 1;
    }
}

} // namespace fedvs
