#pragma once

#include <ostream>

#include "fedvs/config.hpp"
#include "fedvs/protocol.hpp"

namespace fedvs {

/// Line-delimited JSON metrics: one header line echoing the resolved
/// config, one record per round, one trailing summary. Keys are emitted
/// in sorted order, so identical runs produce byte-identical files.
class MetricsWriter {
public:
    explicit MetricsWriter(std::ostream& os) : os_(os) {}

    void header(const ExperimentConfig& cfg);
    void round(const RoundMetrics& m);
    void summary(const TrainSummary& s, const DataPrepStats& prep);

private:
    std::ostream& os_;
};

} // namespace fedvs
