#ifndef FRESH_REPORT_HPP
#define FRESH_REPORT_HPP

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "fresh/engine.hpp"
#include "fresh/experiments.hpp"

namespace fresh {

// Serialized forms of join results. Everything wall-clock related lives under
// a "timing" key so reruns can be compared after dropping it.

nlohmann::json metrics_json(const Metrics& m);

nlohmann::json summary_json(const JoinReport& report, const std::optional<PairSet>& truth,
                            std::size_t histogram_bins = 20);

/// One JSON object per query, newline separated.
std::string queries_jsonl(const JoinReport& report);

/// Header "idA,idB" then one unordered pair per line.
std::string pairs_csv(const PairSet& pairs);
PairSet parse_pairs_csv(const std::string& text, const std::string& source = "<memory>");
PairSet read_pairs_csv(const std::filesystem::path& path);

/// Removes every "timing" member, recursively.
nlohmann::json strip_timing(nlohmann::json j);

}  // namespace fresh

#endif
