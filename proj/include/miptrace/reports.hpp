#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "miptrace/metrics.hpp"
#include "miptrace/occlusion.hpp"

namespace miptrace {

enum class ReportFormat { Csv, StructuredText };

/// Key-value pairs echoed into every report header so each output file
/// records the configuration that produced it.
using ReportMeta = std::vector<std::pair<std::string, std::string>>;

/// Renders a double with 6 significant digits, the precision used by all
/// report writers.
std::string format_g6(double v);

struct ScoreRow {
    std::string case_id;
    double angle_deg = 0.0;
    SegScores scores;
};

struct ScoreAggregate {
    std::string metric;
    AggregateScore value;
    int undefined_count = 0;  // rows that had no defined value for this metric
};

/// Per-angle segmentation scores plus aggregate footer lines. An undefined
/// Hausdorff distance renders as an empty field with hd_undefined_flag = 1.
/// Per-case pooling is the mean over angles; dataset pooling aggregates over
/// cases. The report states this.
void write_score_report(std::span<const ScoreRow> rows,
                        std::span<const ScoreAggregate> aggregates, const ReportMeta& meta,
                        const std::string& path, ReportFormat format);

struct CorrectionRow {
    std::string case_id;
    double angle_deg = 0.0;
    ComponentDecision decision;
};

/// One line per original annotation component, with the dataset-level
/// exclusion statistics as a footer.
void write_correction_report(std::span<const CorrectionRow> rows, const ExclusionStats& exclusion,
                             const ReportMeta& meta, const std::string& path, ReportFormat format);

}  // namespace miptrace
