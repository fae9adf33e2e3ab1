#include "fedvs/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fedvs {

namespace {

std::vector<FieldMatrix> segment_matrix(const FieldMatrix& m, int k_segments) {
    const std::size_t seg = m.rows() / static_cast<std::size_t>(k_segments);
    std::vector<FieldMatrix> out;
    out.reserve(static_cast<std::size_t>(k_segments));
    for (int k = 0; k < k_segments; ++k) {
        FieldMatrix s(seg, m.cols());
        for (std::size_t r = 0; r < seg; ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) {
                s.at(r, c) = m.at(static_cast<std::size_t>(k) * seg + r, c);
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

RealMatrix vstack(const std::vector<RealMatrix>& blocks) {
    std::size_t rows = 0;
    for (const RealMatrix& b : blocks) rows += b.rows();
    RealMatrix out(rows, blocks.front().cols());
    std::size_t at = 0;
    for (const RealMatrix& b : blocks) {
        for (std::size_t r = 0; r < b.rows(); ++r, ++at) {
            for (std::size_t c = 0; c < b.cols(); ++c) out.at(at, c) = b.at(r, c);
        }
    }
    return out;
}

FieldMatrix fm_vstack(const std::vector<FieldMatrix>& blocks) {
    std::size_t rows = 0;
    for (const FieldMatrix& b : blocks) rows += b.rows();
    FieldMatrix out(rows, blocks.front().cols());
    std::size_t at = 0;
    for (const FieldMatrix& b : blocks) {
        for (std::size_t r = 0; r < b.rows(); ++r, ++at) {
            for (std::size_t c = 0; c < b.cols(); ++c) out.at(at, c) = b.at(r, c);
        }
    }
    return out;
}

struct BatchView {
    std::vector<std::size_t> rows;        // original padded-row indices, stack order
    std::vector<double> labels;
    std::vector<std::uint8_t> valid;
};

BatchView batch_view(const ServerState& server, std::span<const std::size_t> batch,
                     std::size_t segment_rows) {
    BatchView v;
    v.rows = stacked_rows(batch, server.lcc.K, segment_rows);
    v.labels.reserve(v.rows.size());
    v.valid.reserve(v.rows.size());
    for (std::size_t r : v.rows) {
        v.labels.push_back(server.labels[r]);
        v.valid.push_back(server.valid[r]);
    }
    return v;
}

/// Shared tail of every round: central update, gradient broadcast with the
/// averaging factor, local updates on the listed clients.
double update_models(std::vector<ClientState>& clients, ServerState& server,
                     const RealMatrix& h_avg, const BatchView& view, double grad_factor,
                     std::span<const int> update_ids) {
    auto [loss, grad_h] = central_forward_backward(server, h_avg, view.labels, view.valid);
    RealMatrix grad_local = grad_h;
    for (double& g : grad_local.data()) g *= grad_factor;
    for (int id : update_ids) {
        ClientState& c = clients[static_cast<std::size_t>(id)];
        std::vector<RealMatrix> grads = pn_backward_rows(c.powers, grad_local, view.rows);
        for (std::size_t i = 0; i < grads.size(); ++i) {
            rm_axpy(c.model.layers[i], -server.lr_client, grads[i]);
        }
    }
    return loss;
}

std::vector<int> all_ids(std::size_t n) {
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

} // namespace

std::vector<std::size_t> stacked_rows(std::span<const std::size_t> batch, int k_segments,
                                      std::size_t segment_rows) {
    std::vector<std::size_t> rows;
    rows.reserve(batch.size() * static_cast<std::size_t>(k_segments));
    for (int k = 0; k < k_segments; ++k) {
        for (std::size_t j : batch) {
            if (j >= segment_rows) throw ShapeMismatch("batch index outside coded row range");
            rows.push_back(static_cast<std::size_t>(k) * segment_rows + j);
        }
    }
    return rows;
}

DataPrepStats data_preparation(std::vector<ClientState>& clients, ServerState& server) {
    const auto n = static_cast<int>(clients.size());
    const int k_segments = server.lcc.K;
    if (n != server.lcc.N) throw ValidationError("data_preparation: client count differs from N");

    std::vector<std::pair<std::size_t, int>> dims;
    dims.reserve(clients.size());
    for (const ClientState& c : clients) dims.emplace_back(c.powers.width(), c.powers.degree());
    // Features are normalized to [-1,1], so every power is bounded by 1.
    std::int64_t bound = check_overflow_bound(server.quant, dims, 1.0, server.w_max);
    server.quant.max_decoded_magnitude = bound;

    const std::size_t padded_rows = clients.front().powers.rows();
    if (padded_rows % static_cast<std::size_t>(k_segments) != 0) {
        throw ValidationError("data_preparation: padded row count must be a multiple of K");
    }
    const std::size_t seg_rows = padded_rows / static_cast<std::size_t>(k_segments);

    DataPrepStats stats;
    stats.segment_rows = seg_rows;
    stats.bytes_sent_per_client.assign(clients.size(), 0);
    for (ClientState& c : clients) {
        c.data_shares.by_source.assign(clients.size(), {});
        c.model_shares.by_source.assign(clients.size(), {});
    }
    for (ClientState& source : clients) {
        const auto src = static_cast<std::size_t>(source.id);
        for (const RealMatrix& power : source.powers.powers) {
            FieldMatrix quantized = quantize_data(power, server.quant);
            std::vector<FieldMatrix> segments = segment_matrix(quantized, k_segments);
            std::vector<FieldMatrix> shares =
                encode_data(server.field, server.lcc, segments, source.rng);
            for (std::size_t holder = 0; holder < clients.size(); ++holder) {
                clients[holder].data_shares.by_source[src].push_back(std::move(shares[holder]));
            }
        }
        stats.bytes_sent_per_client[src] =
            static_cast<std::uint64_t>(clients.size() - 1) *
            data_share_message_bytes(seg_rows, source.powers.width(), source.powers.degree());
        stats.total_bytes += stats.bytes_sent_per_client[src];
    }
    return stats;
}

std::pair<double, RealMatrix> central_forward_backward(ServerState& server,
                                                       const RealMatrix& h_avg,
                                                       std::span<const double> labels,
                                                       std::span<const std::uint8_t> valid) {
    CentralModel::Grads grads = server.central.backward(h_avg, labels, valid);
    server.central.apply(grads, server.lr_server);
    return {grads.loss, std::move(grads.grad_input)};
}

RoundMetrics run_fedvs_round(std::vector<ClientState>& clients, ServerState& server,
                             SimState& sim, std::span<const std::size_t> batch) {
    const auto n = clients.size();
    const Field& f = server.field;
    const int threshold = server.lcc.recovery_threshold();
    const auto batch_size = static_cast<int>(batch.size());

    // Model quantization and secret sharing (Algorithm phase, client order).
    std::uint64_t share_bytes_total = 0;
    double share_phase_end = 0.0;
    for (ClientState& source : clients) {
        source.own_quantized_model = quantize_model(source.model.layers, server.quant, source.rng);
        for (std::size_t holder = 0; holder < n; ++holder) {
            clients[holder].model_shares.by_source[static_cast<std::size_t>(source.id)].clear();
        }
        for (const FieldMatrix& layer : source.own_quantized_model) {
            std::vector<FieldMatrix> shares = encode_model(f, server.lcc, layer, source.rng);
            for (std::size_t holder = 0; holder < n; ++holder) {
                clients[holder]
                    .model_shares.by_source[static_cast<std::size_t>(source.id)]
                    .push_back(std::move(shares[holder]));
            }
        }
        std::uint64_t msg = model_share_message_bytes(source.model.input_width(),
                                                      source.model.embed_width(),
                                                      source.model.degree());
        share_bytes_total += static_cast<std::uint64_t>(n - 1) * msg;
        double delay = sample_delay(sim.delays, source.id, Phase::ModelShare, batch_size, sim.rng);
        double transfer = sim.net.transfer_seconds(static_cast<std::uint64_t>(n - 1) * msg);
        share_phase_end = std::max(share_phase_end, delay + transfer);
    }

    // Homomorphic embedding evaluation and upload.
    std::vector<CodedEmbedding> uploads;
    uploads.reserve(n);
    std::vector<double> arrivals(n);
    const std::uint64_t upload_bytes =
        embedding_upload_bytes(batch.size(), server.central.input_width());
    for (std::size_t i = 0; i < n; ++i) {
        uploads.push_back(homomorphic_eval(f, clients[i].data_shares, clients[i].model_shares, batch));
        double delay =
            sample_delay(sim.delays, clients[i].id, Phase::EmbeddingUpload, batch_size, sim.rng);
        arrivals[i] = share_phase_end + delay + sim.net.transfer_seconds(upload_bytes);
    }
    if (sim.responder_cap && *sim.responder_cap < threshold) {
        throw InsufficientResponders("fedvs round: only " + std::to_string(*sim.responder_cap) +
                                     " clients responded, threshold is " +
                                     std::to_string(threshold));
    }
    RoundTiming timing = round_time(arrivals, ResponderPolicy::first(threshold));

    // Threshold decode of the embedding sum, then dequantize to the average.
    std::vector<Fp> responder_alphas;
    std::vector<FieldMatrix> responses;
    responder_alphas.reserve(timing.responders.size());
    responses.reserve(timing.responders.size());
    for (int id : timing.responders) {
        responder_alphas.push_back(server.lcc.points.alphas[static_cast<std::size_t>(id)]);
        responses.push_back(uploads[static_cast<std::size_t>(id)]);
    }
    std::vector<FieldMatrix> segments = decode_sum(f, server.lcc, responder_alphas, responses);
    RealMatrix h_avg = dequantize_embedding(fm_vstack(segments), server.quant);

    const std::size_t seg_rows = clients.front().powers.rows() / static_cast<std::size_t>(server.lcc.K);
    BatchView view = batch_view(server, batch, seg_rows);
    std::vector<int> ids = all_ids(n);
    double loss = update_models(clients, server, h_avg, view,
                                1.0 / static_cast<double>(n), ids);

    sim.clock.advance(timing.elapsed_s);
    RoundMetrics m;
    m.strategy = Strategy::Fedvs;
    m.train_loss = loss;
    m.elapsed_s = timing.elapsed_s;
    m.sim_time_s = sim.clock.now_s;
    m.responders = static_cast<int>(timing.responders.size());
    m.dropped = static_cast<int>(n) - m.responders;
    m.bytes_up_per_client = upload_bytes;
    m.bytes_share_total = share_bytes_total;
    m.arrival_times = std::move(arrivals);
    return m;
}

RoundMetrics run_baseline_round(Strategy strategy, std::vector<ClientState>& clients,
                                ServerState& server, SimState& sim,
                                std::span<const std::size_t> batch) {
    if (strategy == Strategy::Fedvs) return run_fedvs_round(clients, server, sim, batch);
    const auto n = clients.size();
    const std::size_t seg_rows = clients.front().powers.rows() / static_cast<std::size_t>(server.lcc.K);
    BatchView view = batch_view(server, batch, seg_rows);
    const auto batch_size = static_cast<int>(batch.size());

    // Plaintext embeddings on the same expanded sample rows.
    std::vector<RealMatrix> embeddings;
    embeddings.reserve(n);
    const std::uint64_t upload_bytes =
        embedding_upload_bytes(view.rows.size(), server.central.input_width());
    std::vector<double> arrivals(n);
    for (std::size_t i = 0; i < n; ++i) {
        RealMatrix h = pn_forward_rows(clients[i].powers, clients[i].model, view.rows);
        if (strategy == Strategy::WaitDp) {
            const double clip = server.dp.clip;
            const double scale = server.dp.epsilon > 0.0 && clip > 0.0
                                     ? clip / server.dp.epsilon
                                     : 0.0;
            for (double& e : h.data()) {
                if (clip > 0.0) e = std::clamp(e, -clip, clip);
                if (scale > 0.0) e += clients[i].rng.laplace(scale);
            }
        }
        embeddings.push_back(std::move(h));
        double delay =
            sample_delay(sim.delays, clients[i].id, Phase::EmbeddingUpload, batch_size, sim.rng);
        arrivals[i] = delay + sim.net.transfer_seconds(upload_bytes);
    }

    ResponderPolicy policy = ResponderPolicy::all();
    if (strategy == Strategy::Ignore) {
        double deadline;
        if (server.ignore_deadline_s) {
            deadline = *server.ignore_deadline_s;
        } else {
            std::vector<double> prompt;
            for (std::size_t i = 0; i < n; ++i) {
                if (!sim.delays.is_straggler(clients[i].id)) prompt.push_back(arrivals[i]);
            }
            if (prompt.empty()) prompt = arrivals; // all-straggler fallback
            std::sort(prompt.begin(), prompt.end());
            deadline = server.ignore_deadline_multiplier * prompt[prompt.size() / 2];
        }
        policy = ResponderPolicy::deadline(deadline);
    }
    RoundTiming timing = round_time(arrivals, policy);
    if (timing.responders.empty()) {
        throw EmptyResponderSet("ignore round: every client missed the deadline");
    }

    const double inv = 1.0 / static_cast<double>(timing.responders.size());
    RealMatrix h_avg(view.rows.size(), server.central.input_width());
    for (int id : timing.responders) rm_axpy(h_avg, inv, embeddings[static_cast<std::size_t>(id)]);

    // Wait and Wait-DP update everyone; Ignore only the clients whose
    // embeddings entered the average.
    std::vector<int> ids = strategy == Strategy::Ignore ? timing.responders : all_ids(n);
    double loss = update_models(clients, server, h_avg, view, inv, ids);

    sim.clock.advance(timing.elapsed_s);
    RoundMetrics m;
    m.strategy = strategy;
    m.train_loss = loss;
    m.elapsed_s = timing.elapsed_s;
    m.sim_time_s = sim.clock.now_s;
    m.responders = static_cast<int>(timing.responders.size());
    m.dropped = static_cast<int>(n) - m.responders;
    m.bytes_up_per_client = upload_bytes;
    m.bytes_share_total = 0;
    m.arrival_times = std::move(arrivals);
    return m;
}

double evaluate_accuracy(const std::vector<ClientState>& clients, const ServerState& server,
                         const std::vector<PreprocessedData>& test_powers,
                         std::span<const double> test_labels) {
    if (test_powers.size() != clients.size()) {
        throw ShapeMismatch("evaluate_accuracy: one test block per client required");
    }
    RealMatrix h(test_powers.front().rows(), server.central.input_width());
    const double inv = 1.0 / static_cast<double>(clients.size());
    for (std::size_t i = 0; i < clients.size(); ++i) {
        rm_axpy(h, inv, pn_forward(test_powers[i], clients[i].model));
    }
    RealMatrix out = server.central.forward(h);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        std::size_t arg = 0;
        for (std::size_t c = 1; c < out.cols(); ++c) {
            if (out.at(r, c) > out.at(r, arg)) arg = c;
        }
        if (arg == static_cast<std::size_t>(test_labels[r])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(out.rows());
}

TrainSummary train(Deployment& dep, const TrainOptions& opts,
                   const std::function<void(const RoundMetrics&)>& sink) {
    TrainSummary summary;
    std::vector<std::size_t> epoch(dep.segment_rows);
    std::iota(epoch.begin(), epoch.end(), 0);
    std::size_t cursor = epoch.size(); // forces a shuffle before the first batch

    auto next_batch = [&](std::size_t want) {
        std::vector<std::size_t> batch;
        batch.reserve(want);
        while (batch.size() < want) {
            if (cursor == epoch.size()) {
                for (std::size_t i = epoch.size(); i > 1; --i) {
                    std::swap(epoch[i - 1], epoch[dep.batch_rng.below(i)]);
                }
                cursor = 0;
                if (!batch.empty()) break; // partial batch at epoch end
            }
            batch.push_back(epoch[cursor++]);
        }
        return batch;
    };

    const auto want = static_cast<std::size_t>(
        std::min<std::size_t>(static_cast<std::size_t>(opts.batch), dep.segment_rows));
    for (int r = 0; r < opts.rounds; ++r) {
        std::vector<std::size_t> batch = next_batch(want);
        RoundMetrics m = dep.server.strategy == Strategy::Fedvs
                             ? run_fedvs_round(dep.clients, dep.server, dep.sim, batch)
                             : run_baseline_round(dep.server.strategy, dep.clients, dep.server,
                                                  dep.sim, batch);
        m.round = r;
        const bool last = r + 1 == opts.rounds;
        if (dep.server.central.loss_kind == LossKind::CrossEntropy &&
            ((opts.eval_every > 0 && (r + 1) % opts.eval_every == 0) || last)) {
            m.test_acc = evaluate_accuracy(dep.clients, dep.server, dep.test_powers,
                                           dep.test_labels);
        }
        summary.rounds_run = r + 1;
        summary.final_train_loss = m.train_loss;
        if (m.test_acc) summary.final_test_acc = m.test_acc;
        summary.total_sim_time_s = m.sim_time_s;
        summary.total_upload_bytes +=
            m.bytes_up_per_client * static_cast<std::uint64_t>(dep.clients.size());
        if (sink) sink(m);
    }
    return summary;
}

} // namespace fedvs
