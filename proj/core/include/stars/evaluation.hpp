#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "stars/pipeline.hpp"
#include "stars/ranking.hpp"

namespace stars {

/// Precision at k: |relevant ∩ top-k| / |top-k| where top-k takes
/// min(k, list length) entries — the denominator is the retrieved count,
/// not k. An empty ranked list scores 0 and is flagged degenerate.
double precision_at_k(const std::set<std::string>& relevant,
                      const RankedList& ranked, std::size_t k,
                      bool* degenerate = nullptr);

/// Arithmetic mean over included queries; ids in `excluded` are skipped.
/// All-excluded input is an error.
double mean_precision_at_k(const std::map<std::string, double>& per_query,
                           const std::set<std::string>& excluded);

struct ReportRow {
    std::string experiment;
    std::string direction;   // "com-tech" | "tech-com"
    std::string method;      // strategy or ranker name
    std::size_t few_shot_count = 0;
    std::size_t k = 0;
    double mean_p_at_k = 0.0;  // rounded to 6 decimals at construction
    std::size_t n_evaluated = 0;
    std::size_t n_excluded = 0;

    bool operator==(const ReportRow&) const = default;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;

    bool operator==(const ExperimentReport&) const = default;
};

enum class ReportFormat { TableText, Csv, Json };

ReportFormat report_format_from_string(const std::string& s);

/// Deterministic emission: fixed column order, 6-decimal means, byte-stable
/// output. CSV and JSON round-trip to an identical report value. The text
/// table appends published reference values clearly labeled paper-reported;
/// they are display-only and never enter CSV/JSON rows.
std::string report_to_string(const ExperimentReport& report, ReportFormat format);
void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path);
ExperimentReport parse_report_csv(const std::string& content);
ExperimentReport parse_report_json(const std::string& content);

/// Published reference values displayed next to locally computed rows.
/// They orient the reader; nothing in the pipeline asserts against them.
struct ReferenceRow {
    std::string direction;
    std::string method;
    std::size_t few_shot_count = 0;
    std::size_t k = 0;
    double value = 0.0;
};
std::vector<ReferenceRow> published_reference_rows(const std::string& experiment);

/// Full strategy grid: {single-prompt, cot, stars} x {com-tech, tech-com} x
/// k_list, all strategies extracted independently, ranked semantically.
ExperimentReport run_prompting_ablation(const PipelineContext& ctx,
                                        const std::vector<std::size_t>& k_list);

/// Few-shot sweep: stars with each count, company-to-technology direction.
ExperimentReport run_few_shot_sweep(const PipelineContext& ctx,
                                    const std::vector<std::size_t>& counts,
                                    const std::vector<std::size_t>& k_list);

/// Ranker comparison over one shared extraction pass (stars strategy):
/// semantic vs tfidf vs llm-score, company-to-technology direction. Sharing
/// the extraction inputs is what isolates the ranker.
ExperimentReport run_ranking_comparison(const PipelineContext& ctx,
                                        const std::vector<std::size_t>& k_list);

}  // namespace stars
