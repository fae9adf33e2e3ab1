#include "fedvs/metrics.hpp"

#include <nlohmann/json.hpp>

namespace fedvs {

using nlohmann::json;

void MetricsWriter::header(const ExperimentConfig& cfg) {
    json rec;
    rec["type"] = "header";
    rec["config"] = cfg.resolved();
    os_ << rec.dump() << "\n";
}

void MetricsWriter::round(const RoundMetrics& m) {
    json rec;
    rec["type"] = "round";
    rec["round"] = m.round;
    rec["strategy"] = to_string(m.strategy);
    rec["sim_time_s"] = m.sim_time_s;
    rec["elapsed_s"] = m.elapsed_s;
    rec["train_loss"] = m.train_loss;
    if (m.test_acc) rec["test_acc"] = *m.test_acc;
    rec["responders"] = m.responders;
    rec["dropped"] = m.dropped;
    rec["bytes_up"] = m.bytes_up_per_client;
    rec["bytes_share"] = m.bytes_share_total;
    os_ << rec.dump() << "\n";
}

void MetricsWriter::summary(const TrainSummary& s, const DataPrepStats& prep) {
    json rec;
    rec["type"] = "summary";
    rec["rounds"] = s.rounds_run;
    rec["final_train_loss"] = s.final_train_loss;
    if (s.final_test_acc) rec["final_test_acc"] = *s.final_test_acc;
    rec["total_sim_time_s"] = s.total_sim_time_s;
    rec["total_upload_bytes"] = s.total_upload_bytes;
    rec["data_share_bytes_total"] = prep.total_bytes;
    rec["data_share_bytes_per_client"] = prep.bytes_sent_per_client;
    os_ << rec.dump() << "\n";
}

} // namespace fedvs
