#include "fresh/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fresh {

namespace {

const char* slack_name(RadiusSlack s) {
    return s == RadiusSlack::LongestEdge ? "longest-edge" : "none";
}

}  // namespace

nlohmann::json metrics_json(const Metrics& m) {
    return {
        {"tp", m.tp},
        {"fp", m.fp},
        {"fn", m.fn},
        {"recall", m.recall},
        {"precision", m.precision},
        {"recall_undefined", m.recall_undefined},
        {"precision_undefined", m.precision_undefined},
    };
}

nlohmann::json summary_json(const JoinReport& report, const std::optional<PairSet>& truth,
                            std::size_t histogram_bins) {
    nlohmann::json j;
    j["n"] = report.n;
    j["params"] = {
        {"delta", report.params.delta},
        {"k", report.params.k},
        {"L", report.params.tables},
        {"L_side", report.params.side},
        {"dim", report.params.dim},
        {"seed", report.params.seed},
    };
    j["config"] = {
        {"r", report.config.r},
        {"tau", report.config.tau},
        {"epsilons", report.config.epsilons},
        {"slack", slack_name(report.config.slack)},
        {"grid_factor", report.config.grid_factor},
    };

    std::size_t verified = 0;
    for (const auto& p : report.pairs) verified += p.verified ? 1 : 0;
    const PairSet reported = report.reported_pairs();
    j["counts"] = {
        {"total_pairs", report.total_pairs()},
        {"candidate_pairs", report.pairs.size()},
        {"verified_pairs", verified},
        {"reported_pairs", reported.size()},
    };

    nlohmann::json stages = nlohmann::json::array();
    for (const auto& [name, count] : stage_breakdown(report).buckets)
        stages.push_back({{"stage", name}, {"count", count}});
    j["stages"] = stages;

    if (truth) {
        j["metrics"] = metrics_json(metrics(reported, *truth));
        const auto h = score_histogram(report, *truth, histogram_bins);
        j["scores"] = {
            {"bins", h.bins},
            {"tp", h.tp},
            {"fp", h.fp},
            {"tp_count", h.tp_count},
            {"fp_count", h.fp_count},
            {"tp_mean", h.tp_mean},
            {"fp_mean", h.fp_mean},
        };
    }

    double query_ms = 0.0;
    for (const auto& q : report.queries) query_ms += q.elapsed_ms;
    j["timing"] = {
        {"build_ms", report.build_ms},
        {"join_ms", report.join_ms},
        {"query_ms_total", query_ms},
    };
    return j;
}

std::string queries_jsonl(const JoinReport& report) {
    std::string out;
    for (const auto& q : report.queries) {
        nlohmann::json j;
        j["query"] = q.query;
        nlohmann::json cands = nlohmann::json::array();
        for (const auto& m : q.candidates) {
            nlohmann::json c = {{"id", m.id}, {"collisions", m.collisions}, {"score", m.score},
                                {"verified", m.verified}};
            if (m.verified) {
                c["verdict"] = to_string(m.verdict);
                c["stage"] = stage_label(m.stage, m.epsilon);
            }
            cands.push_back(std::move(c));
        }
        j["candidates"] = std::move(cands);
        j["reported"] = q.reported_ids();
        j["timing"] = {{"elapsed_ms", q.elapsed_ms}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string pairs_csv(const PairSet& pairs) {
    std::string out = "idA,idB\n";
    for (const auto& [a, b] : pairs) out += std::to_string(a) + "," + std::to_string(b) + "\n";
    return out;
}

PairSet parse_pairs_csv(const std::string& text, const std::string& source) {
    PairSet out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("idA", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError(source + ":" + std::to_string(line_no) + ": expected 'idA,idB'");
        CurveId a = 0, b = 0;
        const auto ra = std::from_chars(line.data(), line.data() + comma, a);
        const auto rb = std::from_chars(line.data() + comma + 1, line.data() + line.size(), b);
        if (ra.ec != std::errc() || ra.ptr != line.data() + comma || rb.ec != std::errc() ||
            rb.ptr != line.data() + line.size())
            throw ParseError(source + ":" + std::to_string(line_no) + ": malformed pair '" + line + "'");
        out.emplace_back(a, b);
    }
    return normalize_pairs(std::move(out));
}

PairSet read_pairs_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_pairs_csv(ss.str(), path.string());
}

nlohmann::json strip_timing(nlohmann::json j) {
    if (j.is_object()) {
        j.erase("timing");
        for (auto& [key, value] : j.items()) value = strip_timing(value);
    } else if (j.is_array()) {
        for (auto& v : j) v = strip_timing(v);
    }
    return j;
}

}  // namespace fresh
