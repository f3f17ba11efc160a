#include "miptrace/reports.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace miptrace {
namespace {

constexpr const char* kPoolingNote = "per-case = mean over angles; dataset = aggregate over cases";

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (const char ch : field) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("report: cannot open " + path + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("report: write failed for " + path);
}

void append_meta(std::string& text, const ReportMeta& meta, const char* prefix) {
    for (const auto& [key, value] : meta)
        text += std::string(prefix) + key + " = " + value + "\n";
}

std::string aggregate_line(const ScoreAggregate& agg) {
    std::string line = agg.metric + ": mean = " + format_g6(agg.value.mean) +
                       ", std = " + format_g6(agg.value.std_dev) +
                       ", n = " + std::to_string(agg.value.n);
    if (agg.undefined_count > 0)
        line += " (" + std::to_string(agg.undefined_count) + " undefined)";
    return line;
}

}  // namespace

std::string format_g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_score_report(std::span<const ScoreRow> rows,
                        std::span<const ScoreAggregate> aggregates, const ReportMeta& meta,
                        const std::string& path, ReportFormat format) {
    std::string text;
    if (format == ReportFormat::Csv) {
        text += "# score report\n";
        append_meta(text, meta, "# ");
        text += std::string("# pooling: ") + kPoolingNote + "\n";
        text += "case_id,angle_deg,dice,iou,hausdorff,hd_undefined_flag\n";
        for (const ScoreRow& row : rows) {
            text += csv_quote(row.case_id) + "," + format_g6(row.angle_deg) + "," +
                    format_g6(row.scores.dice) + "," + format_g6(row.scores.iou) + ",";
            if (row.scores.hausdorff)
                text += format_g6(*row.scores.hausdorff) + ",0\n";
            else
                text += ",1\n";
        }
        for (const ScoreAggregate& agg : aggregates)
            text += "# aggregate " + aggregate_line(agg) + "\n";
    } else {
        text += "report: scores\n";
        append_meta(text, meta, "meta: ");
        text += std::string("pooling: ") + kPoolingNote + "\n";
        for (const ScoreRow& row : rows) {
            text += "row: case_id = " + row.case_id + ", angle_deg = " + format_g6(row.angle_deg) +
                    ", dice = " + format_g6(row.scores.dice) +
                    ", iou = " + format_g6(row.scores.iou) + ", hausdorff = ";
            text += row.scores.hausdorff ? format_g6(*row.scores.hausdorff) : "undefined";
            text += "\n";
        }
        for (const ScoreAggregate& agg : aggregates) text += "aggregate " + aggregate_line(agg) + "\n";
    }
    write_text(path, text);
}

void write_correction_report(std::span<const CorrectionRow> rows, const ExclusionStats& exclusion,
                             const ReportMeta& meta, const std::string& path,
                             ReportFormat format) {
    std::string text;
    const auto stat_lines = [&exclusion](const char* prefix) {
        std::string s;
        s += std::string(prefix) + "tumors_total = " + std::to_string(exclusion.tumors_total) + "\n";
        s += std::string(prefix) + "tumors_excluded = " + std::to_string(exclusion.tumors_excluded) +
             "\n";
        s += std::string(prefix) +
             "excluded_tumor_fraction = " + format_g6(exclusion.excluded_tumor_fraction) + "\n";
        s += std::string(prefix) +
             "excluded_volume_fraction = " + format_g6(exclusion.excluded_volume_fraction) + "\n";
        s += std::string(prefix) +
             "total_tumor_voxels = " + std::to_string(exclusion.total_tumor_voxels) + "\n";
        s += std::string(prefix) +
             "excluded_tumor_voxels = " + std::to_string(exclusion.excluded_tumor_voxels) + "\n";
        return s;
    };

    if (format == ReportFormat::Csv) {
        text += "# correction report\n";
        append_meta(text, meta, "# ");
        text += "case_id,angle_deg,component_id,pixel_count,origin_fraction,action,retained_px\n";
        for (const CorrectionRow& row : rows) {
            const ComponentDecision& d = row.decision;
            text += csv_quote(row.case_id) + "," + format_g6(row.angle_deg) + "," +
                    std::to_string(d.component_id) + "," + std::to_string(d.pixel_count) + "," +
                    format_g6(d.tumor_origin_fraction) + "," + to_string(d.action) + "," +
                    std::to_string(d.retained_pixel_count) + "\n";
        }
        text += stat_lines("# exclusion ");
    } else {
        text += "report: corrections\n";
        append_meta(text, meta, "meta: ");
        for (const CorrectionRow& row : rows) {
            const ComponentDecision& d = row.decision;
            text += "row: case_id = " + row.case_id + ", angle_deg = " + format_g6(row.angle_deg) +
                    ", component_id = " + std::to_string(d.component_id) +
                    ", pixel_count = " + std::to_string(d.pixel_count) +
                    ", origin_fraction = " + format_g6(d.tumor_origin_fraction) +
                    ", action = " + to_string(d.action) +
                    ", retained_px = " + std::to_string(d.retained_pixel_count) + "\n";
        }
        text += stat_lines("exclusion ");
    }
    write_text(path, text);
}

}  // namespace miptrace
