#include "fedvs/sim.hpp"

#include <algorithm>
#include <numeric>

#include "fedvs/errors.hpp"

namespace fedvs {

double DelayModel::mean_for(int client, Phase phase, int batch_size) const {
    double mean;
    if (is_straggler(client)) {
        int index = client - (n_clients - num_stragglers) + 1; // 1-based straggler index
        mean = straggler_base_s + 2.0 * index / n_clients;
    } else {
        mean = nonstraggler_mean_s;
    }
    if (phase == Phase::ModelShare) mean /= std::max(batch_size, 1);
    return mean;
}

double sample_delay(const DelayModel& model, int client, Phase phase, int batch_size, Rng& rng) {
    return rng.exponential(model.mean_for(client, phase, batch_size));
}

RoundTiming round_time(std::span<const double> arrivals, const ResponderPolicy& policy) {
    std::vector<int> order(arrivals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return arrivals[static_cast<std::size_t>(a)] <
                                                arrivals[static_cast<std::size_t>(b)]; });

    RoundTiming out;
    switch (policy.kind) {
        case ResponderPolicy::Kind::Threshold: {
            if (policy.threshold < 1 || static_cast<std::size_t>(policy.threshold) > arrivals.size()) {
                throw InsufficientResponders("round_time: threshold exceeds client count");
            }
            out.responders.assign(order.begin(), order.begin() + policy.threshold);
            break;
        }
        case ResponderPolicy::Kind::All: {
            out.responders = order;
            break;
        }
        case ResponderPolicy::Kind::Deadline: {
            for (int id : order) {
                if (arrivals[static_cast<std::size_t>(id)] <= policy.deadline_s) {
                    out.responders.push_back(id);
                }
            }
            break;
        }
    }
    out.elapsed_s = 0.0;
    for (int id : out.responders) {
        out.elapsed_s = std::max(out.elapsed_s, arrivals[static_cast<std::size_t>(id)]);
    }
    return out;
}

} // namespace fedvs
