#pragma once

#include <string>
#include <vector>

#include "provgraph/graphbuild.hpp"

namespace provgraph {

struct CaseScore {
    double vo = 0.0;
    double eo = 0.0;
    double veo = 0.0;
};

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
};

struct SuiteReport {
    std::vector<std::string> case_ids;
    std::vector<CaseScore> cases;
    MetricStats vo, eo, veo;
};

// Vertex / edge / combined F1 overlap between candidate and ground truth.
// Nodes are matched by identifier, edges as directed id pairs unless
// undirected is set. Both edge sets empty scores EO = 1; exactly one empty
// scores 0.
CaseScore score_case(const ProvenanceGraph& candidate, const ProvenanceGraph& truth,
                     bool undirected = false);

SuiteReport aggregate(const std::vector<std::string>& case_ids,
                      const std::vector<CaseScore>& scores);

std::string report_to_json(const SuiteReport& report);
std::string report_to_table(const SuiteReport& report);

}  // namespace provgraph
