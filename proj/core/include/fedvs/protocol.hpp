#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fedvs/central_model.hpp"
#include "fedvs/config.hpp"
#include "fedvs/lcc.hpp"
#include "fedvs/polynet.hpp"
#include "fedvs/quant.hpp"
#include "fedvs/sim.hpp"

namespace fedvs {

struct ClientState {
    int id = 0;
    PreprocessedData powers;   // real powers of the padded, bias-augmented data
    PolyNetModel model;
    DataShareSet data_shares;  // one-time, from every source
    ModelShareSet model_shares; // refreshed every round
    std::vector<FieldMatrix> own_quantized_model; // this round's W-bar
    Rng rng{0};
};

struct DpParams {
    double epsilon = 10.0; // <= 0 disables noise
    double clip = 1.0;     // <= 0 disables clipping
};

struct ServerState {
    CentralModel central;
    std::vector<double> labels;       // padded train labels, original row order
    std::vector<std::uint8_t> valid;  // 0 marks zero-padded rows
    Field field;
    LccConfig lcc;
    QuantConfig quant;
    double lr_server = 0.05;
    double lr_client = 0.05;
    double w_max = 1.0;
    Strategy strategy = Strategy::Fedvs;
    DpParams dp;
    double ignore_deadline_multiplier = 2.0;
    std::optional<double> ignore_deadline_s;
    Rng rng{0};
};

struct SimState {
    DelayModel delays;
    NetworkModel net;
    SimClock clock;
    Rng rng{0};
    /// Rounds completed; each round draws its delays from a fork keyed on
    /// this counter, so the draws for a given round depend only on (seed,
    /// round, phase) and never on the strategy's consumption pattern.
    int round_counter = 0;
    /// Test hook: only the first `responder_cap` clients by arrival ever
    /// respond (models responders lost beyond the straggler budget).
    std::optional<int> responder_cap;
};

struct RoundMetrics {
    int round = 0;
    Strategy strategy = Strategy::Fedvs;
    double train_loss = 0.0;
    double elapsed_s = 0.0;  // this round
    double sim_time_s = 0.0; // cumulative clock after the round
    int responders = 0;
    int dropped = 0;
    std::uint64_t bytes_up_per_client = 0; // embedding upload, identical across clients
    std::uint64_t bytes_share_total = 0;   // model-share traffic this round
    bool decode_ok = true;
    std::optional<double> test_acc;
    std::vector<double> arrival_times; // per client, in-memory detail
};

struct DataPrepStats {
    std::vector<std::uint64_t> bytes_sent_per_client;
    std::uint64_t total_bytes = 0;
    std::size_t segment_rows = 0;
};

/// One-time phase: quantize each client's data powers, partition into K
/// row segments, secret-share to every client. Runs the static overflow
/// check first (normalized data, declared w_max).
DataPrepStats data_preparation(std::vector<ClientState>& clients, ServerState& server);

/// Original padded-row indices of the K stacked segments of a coded batch,
/// in decode order: row k*|B|+j of the stack is sample k*segment_rows+B[j].
std::vector<std::size_t> stacked_rows(std::span<const std::size_t> batch,
                                      int k_segments, std::size_t segment_rows);

/// One synchronous FedVS round: model sharing, homomorphic evaluation,
/// threshold decode, dequantization, central update, broadcast, client
/// updates. Every client updates every round; stragglers' data is already
/// inside the decoded sum.
RoundMetrics run_fedvs_round(std::vector<ClientState>& clients, ServerState& server,
                             SimState& sim, std::span<const std::size_t> batch);

/// One plaintext baseline round (Wait / Ignore / Wait-DP) over the same
/// expanded sample set a FedVS round would cover.
RoundMetrics run_baseline_round(Strategy strategy, std::vector<ClientState>& clients,
                                ServerState& server, SimState& sim,
                                std::span<const std::size_t> batch);

/// Central forward/backward on the aggregated embedding: returns the loss
/// and the broadcast gradient, updating the central model in place.
std::pair<double, RealMatrix> central_forward_backward(ServerState& server,
                                                       const RealMatrix& h_avg,
                                                       std::span<const double> labels,
                                                       std::span<const std::uint8_t> valid);

/// Plaintext evaluation on held-out data: average embedding over clients,
/// central forward, argmax accuracy.
double evaluate_accuracy(const std::vector<ClientState>& clients, const ServerState& server,
                         const std::vector<PreprocessedData>& test_powers,
                         std::span<const double> test_labels);

struct Deployment {
    Field field;
    std::vector<ClientState> clients;
    ServerState server;
    SimState sim;
    std::vector<PreprocessedData> test_powers; // per client, grid-rounded
    std::vector<double> test_labels;
    std::size_t segment_rows = 0;
    DataPrepStats prep;
    Rng batch_rng{0};
};

struct TrainOptions {
    int rounds = 200;
    int batch = 16;
    int eval_every = 10; // 0 = final only
};

struct TrainSummary {
    int rounds_run = 0;
    double final_train_loss = 0.0;
    std::optional<double> final_test_acc;
    double total_sim_time_s = 0.0;
    std::uint64_t total_upload_bytes = 0;
};

/// Round loop: coded batches sampled uniformly without replacement per
/// epoch, one metrics record per round through the sink.
TrainSummary train(Deployment& dep, const TrainOptions& opts,
                   const std::function<void(const RoundMetrics&)>& sink = nullptr);

} // namespace fedvs
