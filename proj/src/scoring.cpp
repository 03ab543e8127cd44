#include "provgraph/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "provgraph/common.hpp"

namespace provgraph {

namespace {

using IdEdge = std::pair<std::string, std::string>;

std::set<IdEdge> edge_id_set(const ProvenanceGraph& g, bool undirected) {
    std::set<IdEdge> out;
    for (const auto& e : g.edges()) {
        std::string a = g.node_ids()[e.from];
        std::string b = g.node_ids()[e.to];
        if (undirected && b < a) std::swap(a, b);
        out.emplace(std::move(a), std::move(b));
    }
    return out;
}

template <typename T>
size_t intersection_size(const std::set<T>& a, const std::set<T>& b) {
    size_t n = 0;
    for (const auto& x : a) n += b.count(x);
    return n;
}

}  // namespace

CaseScore score_case(const ProvenanceGraph& candidate, const ProvenanceGraph& truth,
                     bool undirected) {
    if (candidate.order() == 0 || truth.order() == 0)
        throw EmptyGraph("score_case requires nonempty node sets");

    std::set<std::string> vc(candidate.node_ids().begin(), candidate.node_ids().end());
    std::set<std::string> vt(truth.node_ids().begin(), truth.node_ids().end());
    auto ec = edge_id_set(candidate, undirected);
    auto et = edge_id_set(truth, undirected);

    const size_t v_shared = intersection_size(vc, vt);
    const size_t e_shared = intersection_size(ec, et);

    CaseScore s;
    s.vo = 2.0 * static_cast<double>(v_shared) / static_cast<double>(vc.size() + vt.size());
    if (ec.empty() && et.empty()) s.eo = 1.0;  // agreement on "no edges"
    else if (ec.empty() || et.empty()) s.eo = 0.0;
    else s.eo = 2.0 * static_cast<double>(e_shared) / static_cast<double>(ec.size() + et.size());
    s.veo = 2.0 * static_cast<double>(v_shared + e_shared) /
            static_cast<double>(vc.size() + vt.size() + ec.size() + et.size());
    return s;
}

SuiteReport aggregate(const std::vector<std::string>& case_ids,
                      const std::vector<CaseScore>& scores) {
    if (scores.empty()) throw EmptyCollection("aggregate requires at least one case");
    if (case_ids.size() != scores.size()) throw SizeMismatch("case ids do not match scores");

    SuiteReport r;
    r.case_ids = case_ids;
    r.cases = scores;

    auto stats = [&](auto field) {
        MetricStats st;
        double sum = 0.0;
        for (const auto& s : scores) sum += s.*field;
        st.mean = sum / static_cast<double>(scores.size());
        double var = 0.0;
        for (const auto& s : scores) {
            double d = s.*field - st.mean;
            var += d * d;
        }
        st.stddev = std::sqrt(var / static_cast<double>(scores.size()));
        return st;
    };
    r.vo = stats(&CaseScore::vo);
    r.eo = stats(&CaseScore::eo);
    r.veo = stats(&CaseScore::veo);
    return r;
}

std::string report_to_json(const SuiteReport& report) {
    nlohmann::json j;
    auto& cases = j["cases"];
    cases = nlohmann::json::array();
    for (size_t i = 0; i < report.cases.size(); ++i) {
        cases.push_back({{"id", report.case_ids[i]},
                         {"vo", report.cases[i].vo},
                         {"eo", report.cases[i].eo},
                         {"veo", report.cases[i].veo}});
    }
    j["mean"] = {{"vo", report.vo.mean}, {"eo", report.eo.mean}, {"veo", report.veo.mean}};
    j["std"] = {{"vo", report.vo.stddev}, {"eo", report.eo.stddev}, {"veo", report.veo.stddev}};
    return j.dump(1);
}

std::string report_to_table(const SuiteReport& report) {
    char line[160];
    std::string out;
    out += "Cases   VO              EO              VEO\n";
    std::snprintf(line, sizeof(line), "%-7zu %.3f+-%.3f    %.3f+-%.3f    %.3f+-%.3f\n",
                  report.cases.size(), report.vo.mean, report.vo.stddev, report.eo.mean,
                  report.eo.stddev, report.veo.mean, report.veo.stddev);
    out += line;
    return out;
}

}  // namespace provgraph
