#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "miptrace/metrics.hpp"
#include "miptrace/mips_io.hpp"
#include "miptrace/nifti.hpp"
#include "miptrace/occlusion.hpp"
#include "miptrace/parallel.hpp"
#include "miptrace/phantom.hpp"
#include "miptrace/phantom_file.hpp"
#include "miptrace/projection.hpp"
#include "miptrace/reports.hpp"
#include "miptrace/volume.hpp"

#ifndef MIPTRACE_VERSION
#define MIPTRACE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace miptrace;

namespace {

struct MissingInput : std::runtime_error {
    explicit MissingInput(const std::string& path)
        : std::runtime_error("missing input file: " + path) {}
};

void require_inputs(const std::vector<std::string>& paths) {
    for (const std::string& p : paths)
        if (!p.empty() && !fs::exists(p)) throw MissingInput(p);
}

/// Removes files registered but not committed, so a failed case leaves no
/// partial outputs behind.
struct OutputTracker {
    std::vector<fs::path> pending;

    void add(const fs::path& p) { pending.push_back(p); }
    void commit() { pending.clear(); }
    ~OutputTracker() {
        for (const fs::path& p : pending) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
};

struct ManifestCase {
    std::string case_id;
    std::vector<std::string> paths;
};

std::vector<ManifestCase> read_manifest(const std::string& path, size_t min_paths,
                                        size_t max_paths) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path);
    std::vector<ManifestCase> cases;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        std::istringstream fields(raw);
        ManifestCase c;
        if (!(fields >> c.case_id)) continue;
        std::string token;
        while (fields >> token) c.paths.push_back(token);
        if (c.paths.size() < min_paths || c.paths.size() > max_paths)
            throw std::runtime_error("manifest line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(min_paths) +
                                     (max_paths > min_paths ? ".." + std::to_string(max_paths) : "") +
                                     " paths after the case id");
        cases.push_back(std::move(c));
    }
    return cases;
}

std::string default_case_id(const std::string& path) {
    fs::path name = fs::path(path).filename();
    if (name.extension() == ".gz") name = name.stem();
    return name.stem().string();
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

Interp parse_interp(const std::string& name) {
    return name == "nearest" ? Interp::Nearest : Interp::Linear;
}

Volume3D read_volume(const std::string& path, VolumeKind kind, const std::string& axis_permute) {
    std::vector<std::string> notes;
    Volume3D volume = read_nifti(path, kind, &notes);
    for (const std::string& n : notes) std::cerr << "note: " << path << ": " << n << "\n";
    if (!axis_permute.empty()) {
        const AxisPermutation perm = AxisPermutation::parse(axis_permute);
        if (!perm.identity()) volume = permute_axes(volume, perm);
    }
    return volume;
}

std::vector<double> stack_angles(const MipStack& stack) {
    std::vector<double> angles;
    angles.reserve(stack.images.size());
    for (const MipImage& img : stack.images) angles.push_back(img.angle_deg);
    return angles;
}

// Workers and wall time are deliberately not echoed: equal inputs and
// thresholds must produce byte-identical files at any parallelism.
ReportMeta occlusion_meta(const OcclusionConfig& cfg) {
    return {
        {"miptrace_version", MIPTRACE_VERSION},
        {"origin_threshold", format_g6(cfg.origin_threshold)},
        {"connectivity", std::to_string(cfg.connectivity)},
        {"min_fragment_px", std::to_string(cfg.min_fragment_px)},
        {"contrast_ratio_min", format_g6(cfg.contrast_ratio_min)},
        {"contrast_ring_radius_px", std::to_string(cfg.contrast_ring_radius_px)},
    };
}

// ---------------------------------------------------------------- project

struct ProjectOptions {
    int n = 48;
    std::string interp = "linear";
    int workers = default_worker_count();
    std::string axis_permute;
    std::string out_dir;
};

void run_project_case(const std::string& case_id, const std::string& pet_path,
                      const std::string& label_path, const ProjectOptions& opt) {
    const Volume3D pet = read_volume(pet_path, VolumeKind::Intensity, opt.axis_permute);
    const AngularPlan plan = angular_plan(opt.n);

    const auto t0 = std::chrono::steady_clock::now();
    const MipStack stack = project_stack(pet, plan, parse_interp(opt.interp), opt.workers);
    const double wall = elapsed_ms(t0);

    OutputTracker tracker;
    const fs::path intensity_path = fs::path(opt.out_dir) / (case_id + "_intensity.mips");
    const fs::path provenance_path = fs::path(opt.out_dir) / (case_id + "_provenance.mips");
    tracker.add(intensity_path);
    write_mip_container(stack, intensity_path.string());
    tracker.add(provenance_path);
    write_provenance_container(stack.provenance, stack_angles(stack), provenance_path.string());

    if (!label_path.empty()) {
        Volume3D labels = read_volume(label_path, VolumeKind::Label, opt.axis_permute);
        if (labels.nx != pet.nx || labels.ny != pet.ny || labels.nz != pet.nz)
            throw std::runtime_error(case_id + ": label volume dimensions differ from the PET volume");
        const MipStack label_stack = project_labels(labels, plan, opt.workers);
        const fs::path labels_path = fs::path(opt.out_dir) / (case_id + "_labels.mips");
        tracker.add(labels_path);
        write_mip_container(label_stack, labels_path.string());
    }
    tracker.commit();

    const MipGeometry geom = mip_geometry(pet);
    std::cout << "project " << case_id << ": n=" << plan.n
              << " delta_theta=" << format_g6(plan.delta_theta) << " canvas=" << geom.rows << "x"
              << geom.cols << " wall_ms=" << format_g6(wall) << "\n";
}

// ---------------------------------------------------------------- correct

struct CorrectInputs {
    std::string intensity, provenance, annotations, labels3d;
};

struct CorrectOptions {
    OcclusionConfig cfg;
    int workers = default_worker_count();
    std::string axis_permute;
    std::string out_dir;
    ReportFormat format = ReportFormat::Csv;
};

void run_correct_case(const std::string& case_id, const CorrectInputs& in,
                      const CorrectOptions& opt) {
    MipContainer intensity_c = read_mip_container(in.intensity);
    if (intensity_c.kind != 0)
        throw std::runtime_error(in.intensity + ": expected an intensity container");
    MipContainer provenance_c = read_mip_container(in.provenance);
    if (provenance_c.kind != 2)
        throw std::runtime_error(in.provenance + ": expected a provenance container");
    MipContainer annotation_c = read_mip_container(in.annotations);
    if (annotation_c.kind != 1)
        throw std::runtime_error(in.annotations + ": expected a label container");

    const bool shapes_match = intensity_c.rows == provenance_c.rows &&
                              intensity_c.cols == provenance_c.cols &&
                              intensity_c.rows == annotation_c.rows &&
                              intensity_c.cols == annotation_c.cols;
    if (!shapes_match || intensity_c.angles != provenance_c.angles ||
        intensity_c.angles != annotation_c.angles)
        throw std::runtime_error(case_id + ": containers disagree on geometry or angles");

    const Volume3D labels3d = read_volume(in.labels3d, VolumeKind::Label, opt.axis_permute);
    for (const ProvenanceMap& m : provenance_c.provenance)
        for (const auto& v : m.voxels)
            if (v != ProvenanceMap::kSentinel && !labels3d.in_bounds(v[0], v[1], v[2]))
                throw std::runtime_error(case_id +
                                         ": provenance voxel outside the label volume "
                                         "(was the label volume projected with the same flags?)");

    MipStack intensity = container_to_stack(intensity_c);
    intensity.provenance = std::move(provenance_c.provenance);
    const MipStack annotations = container_to_stack(annotation_c);

    auto [corrected, report] = correct_stack(annotations, intensity, labels3d, opt.cfg, opt.workers);

    OutputTracker tracker;
    const fs::path corrected_path = fs::path(opt.out_dir) / (case_id + "_corrected.mips");
    tracker.add(corrected_path);
    write_mip_container(corrected, corrected_path.string());

    std::vector<CorrectionRow> rows;
    for (const MipCorrection& mip : report.per_mip)
        for (const ComponentDecision& d : mip.decisions)
            rows.push_back({case_id, mip.angle_deg, d});
    const char* ext = opt.format == ReportFormat::Csv ? ".csv" : ".txt";
    const fs::path report_path = fs::path(opt.out_dir) / (case_id + "_correction" + ext);
    tracker.add(report_path);
    write_correction_report(rows, report.exclusion, occlusion_meta(opt.cfg),
                            report_path.string(), opt.format);
    tracker.commit();

    int kept = 0, split = 0, removed = 0;
    for (const CorrectionRow& row : rows) {
        switch (row.decision.action) {
            case ComponentAction::Kept: ++kept; break;
            case ComponentAction::Split: ++split; break;
            default: ++removed; break;
        }
    }
    std::cout << "correct " << case_id << ": components=" << rows.size() << " kept=" << kept
              << " split=" << split << " removed=" << removed
              << " excluded_tumors=" << report.exclusion.tumors_excluded << "/"
              << report.exclusion.tumors_total << "\n";
}

// ---------------------------------------------------------------- metrics

struct MetricsCaseResult {
    std::vector<ScoreRow> rows;
    double dice_mean = 0.0, iou_mean = 0.0;
    std::optional<double> hd_mean;  // over angles with a defined value
    int hd_undefined = 0;
};

MetricsCaseResult run_metrics_case(const std::string& case_id, const std::string& pred_path,
                                   const std::string& truth_path) {
    const MipContainer pred_c = read_mip_container(pred_path);
    const MipContainer truth_c = read_mip_container(truth_path);
    if (pred_c.kind != 1) throw std::runtime_error(pred_path + ": expected a label container");
    if (truth_c.kind != 1) throw std::runtime_error(truth_path + ": expected a label container");
    if (pred_c.rows != truth_c.rows || pred_c.cols != truth_c.cols ||
        pred_c.angles != truth_c.angles)
        throw std::runtime_error(case_id + ": prediction and truth containers disagree on geometry");

    MetricsCaseResult result;
    double dice_sum = 0.0, iou_sum = 0.0, hd_sum = 0.0;
    int hd_defined = 0;
    for (size_t k = 0; k < pred_c.images.size(); ++k) {
        const SegScores s = segmentation_scores(pred_c.images[k], truth_c.images[k]);
        result.rows.push_back({case_id, pred_c.angles[k], s});
        dice_sum += s.dice;
        iou_sum += s.iou;
        if (s.hausdorff) {
            hd_sum += *s.hausdorff;
            ++hd_defined;
        } else {
            ++result.hd_undefined;
        }
    }
    const size_t n = pred_c.images.size();
    if (n == 0) throw std::runtime_error(case_id + ": containers hold no images");
    result.dice_mean = dice_sum / static_cast<double>(n);
    result.iou_mean = iou_sum / static_cast<double>(n);
    if (hd_defined > 0) result.hd_mean = hd_sum / hd_defined;
    return result;
}

void run_metrics(const std::vector<ManifestCase>& cases, const std::string& out_dir,
                 ReportFormat format) {
    std::vector<ScoreRow> rows;
    std::vector<double> dice_means, iou_means, hd_means;
    int hd_undefined = 0;
    for (const ManifestCase& c : cases) {
        MetricsCaseResult r = run_metrics_case(c.case_id, c.paths[0], c.paths[1]);
        rows.insert(rows.end(), r.rows.begin(), r.rows.end());
        dice_means.push_back(r.dice_mean);
        iou_means.push_back(r.iou_mean);
        if (r.hd_mean) hd_means.push_back(*r.hd_mean);
        hd_undefined += r.hd_undefined;
    }

    std::vector<ScoreAggregate> aggregates;
    aggregates.push_back({"dice", aggregate(dice_means), 0});
    aggregates.push_back({"iou", aggregate(iou_means), 0});
    if (!hd_means.empty()) aggregates.push_back({"hausdorff", aggregate(hd_means), hd_undefined});

    const ReportMeta meta = {{"miptrace_version", MIPTRACE_VERSION},
                             {"cases", std::to_string(cases.size())}};
    OutputTracker tracker;
    const char* ext = format == ReportFormat::Csv ? ".csv" : ".txt";
    const fs::path path = fs::path(out_dir) / (std::string("scores") + ext);
    tracker.add(path);
    write_score_report(rows, aggregates, meta, path.string(), format);
    tracker.commit();

    std::cout << "metrics: cases=" << cases.size() << " rows=" << rows.size()
              << " dice_mean=" << format_g6(aggregates[0].value.mean)
              << " iou_mean=" << format_g6(aggregates[1].value.mean) << "\n";
}

// ---------------------------------------------------------------- phantom

void run_phantom(const std::string& spec_path, const std::string& out_dir, int workers,
                 std::optional<uint64_t> seed_override) {
    PhantomSpec spec = read_phantom_spec(spec_path);
    if (seed_override) spec.seed = *seed_override;

    std::vector<std::string> warnings;
    const auto [pet, labels] = generate(spec, workers, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

    const std::string stem = fs::path(spec_path).stem().string();
    OutputTracker tracker;
    const fs::path pet_path = fs::path(out_dir) / (stem + "_pet.nii.gz");
    const fs::path labels_path = fs::path(out_dir) / (stem + "_labels.nii.gz");
    tracker.add(pet_path);
    write_nifti(pet, pet_path.string());
    tracker.add(labels_path);
    write_nifti(labels, labels_path.string());
    tracker.commit();

    std::cout << "phantom " << stem << ": " << spec.nx << "x" << spec.ny << "x" << spec.nz << " "
              << spec.spheres.size() << " spheres -> " << pet_path.string() << ", "
              << labels_path.string() << "\n";
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
    std::vector<int> ns;
    int repeats = 1;
    std::string interp = "linear";
    OcclusionConfig cfg;
    int workers = default_worker_count();
    std::string axis_permute;
    std::string out_dir;
};

void run_sweep(const std::string& pet_path, const std::string& label_path,
               const SweepOptions& opt) {
    {
        std::vector<int> sorted = opt.ns;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::runtime_error("duplicate value in --n list");
    }
    if (opt.repeats < 1) throw std::runtime_error("--repeats must be at least 1");

    const Volume3D pet = read_volume(pet_path, VolumeKind::Intensity, opt.axis_permute);
    const Volume3D labels = read_volume(label_path, VolumeKind::Label, opt.axis_permute);
    if (labels.nx != pet.nx || labels.ny != pet.ny || labels.nz != pet.nz)
        throw std::runtime_error("label volume dimensions differ from the PET volume");
    const Interp interp = parse_interp(opt.interp);

    std::string text = "# sweep report\n";
    for (const auto& [key, value] : occlusion_meta(opt.cfg))
        text += "# " + key + " = " + value + "\n";
    text += "# interp = " + opt.interp + "\n";
    text += "# repeats = " + std::to_string(opt.repeats) + "\n";
    text += "n,delta_theta,wall_ms,bytes,components_before,components_after,excluded_tumor_fraction\n";

    for (const int n : opt.ns) {
        const AngularPlan plan = angular_plan(n);
        MipStack stack;
        std::vector<double> times;
        times.reserve(opt.repeats);
        for (int r = 0; r < opt.repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            stack = project_stack(pet, plan, interp, opt.workers);
            times.push_back(elapsed_ms(t0));
        }
        std::sort(times.begin(), times.end());
        const double wall_ms = times[(times.size() - 1) / 2];

        const MipStack label_stack = project_labels(labels, plan, opt.workers);
        const size_t bytes = serialize_mip_container(stack).size() +
                             serialize_provenance_container(stack.provenance, stack_angles(stack))
                                 .size() +
                             serialize_mip_container(label_stack).size();

        const auto [corrected, report] =
            correct_stack(label_stack, stack, labels, opt.cfg, opt.workers);
        size_t components_before = 0;
        for (const MipCorrection& mip : report.per_mip) components_before += mip.decisions.size();
        size_t components_after = 0;
        for (const MipImage& img : corrected.images)
            components_after += connected_components(img, opt.cfg.connectivity).count;

        text += std::to_string(n) + "," + format_g6(plan.delta_theta) + "," + format_g6(wall_ms) +
                "," + std::to_string(bytes) + "," + std::to_string(components_before) + "," +
                std::to_string(components_after) + "," +
                format_g6(report.exclusion.excluded_tumor_fraction) + "\n";
        std::cout << "sweep n=" << n << ": wall_ms=" << format_g6(wall_ms) << " bytes=" << bytes
                  << "\n";
    }

    OutputTracker tracker;
    const fs::path path = fs::path(opt.out_dir) / "sweep.csv";
    tracker.add(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
    out.close();
    tracker.commit();
}

void ensure_out_dir(const std::string& out_dir) { fs::create_directories(out_dir); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-angle maximum intensity projection pipeline"};
    app.set_version_flag("--version", MIPTRACE_VERSION);
    app.require_subcommand(1);

    // project
    auto* project = app.add_subcommand("project", "project a volume into a MIP stack");
    std::string p_pet, p_labels, p_manifest;
    ProjectOptions p_opt;
    project->add_option("volume", p_pet, "PET volume (.nii or .nii.gz)");
    project->add_option("--labels", p_labels, "binary label volume to project alongside");
    project->add_option("--manifest", p_manifest,
                        "batch file: one 'case_id pet_path [label_path]' per line")
        ->excludes("volume");
    project->add_option("--n", p_opt.n, "number of projection angles")->check(CLI::PositiveNumber);
    project->add_option("--interp", p_opt.interp, "sampling kernel")
        ->check(CLI::IsMember({"linear", "nearest"}));
    project->add_option("--workers", p_opt.workers, "worker threads")->check(CLI::PositiveNumber);
    project->add_option("--axis-permute", p_opt.axis_permute,
                        "axis mapping, e.g. 'y,-x,z' (x left-right, y depth, z yaw)");
    project->add_option("--out", p_opt.out_dir, "output directory")->required();

    // correct
    auto* correct = app.add_subcommand("correct", "occlusion-correct projected annotations");
    CorrectInputs c_in;
    std::string c_manifest, c_format = "csv";
    CorrectOptions c_opt;
    correct->add_option("--intensity", c_in.intensity, "intensity MIPS container");
    correct->add_option("--provenance", c_in.provenance, "provenance MIPS container");
    correct->add_option("--annotations", c_in.annotations, "projected annotation MIPS container");
    correct->add_option("--labels3d", c_in.labels3d, "3D label volume the annotations came from");
    correct->add_option("--manifest", c_manifest,
                        "batch file: 'case_id intensity provenance annotations labels3d' per line");
    correct->add_option("--origin-threshold", c_opt.cfg.origin_threshold,
                        "minimum tumor-origin fraction for keeping a component intact");
    correct->add_option("--connectivity", c_opt.cfg.connectivity, "2D component adjacency")
        ->check(CLI::IsMember({4, 8}));
    correct->add_option("--contrast-ratio", c_opt.cfg.contrast_ratio_min,
                        "minimum fragment/ring mean-intensity ratio");
    correct->add_option("--ring-radius", c_opt.cfg.contrast_ring_radius_px,
                        "contrast ring radius in pixels");
    correct->add_option("--min-fragment", c_opt.cfg.min_fragment_px,
                        "minimum surviving fragment size in pixels");
    correct->add_option("--workers", c_opt.workers, "worker threads")->check(CLI::PositiveNumber);
    correct->add_option("--axis-permute", c_opt.axis_permute,
                        "axis mapping applied to the label volume (must match project)");
    correct->add_option("--report-format", c_format, "report file format")
        ->check(CLI::IsMember({"csv", "text"}));
    correct->add_option("--out", c_opt.out_dir, "output directory")->required();

    // metrics
    auto* metrics = app.add_subcommand("metrics", "score predicted label stacks against truth");
    std::string m_pred, m_truth, m_manifest, m_case = "case", m_format = "csv", m_out;
    metrics->add_option("--pred", m_pred, "predicted label MIPS container");
    metrics->add_option("--truth", m_truth, "ground-truth label MIPS container");
    metrics->add_option("--case-id", m_case, "case id used in the report");
    metrics->add_option("--manifest", m_manifest,
                        "batch file: 'case_id pred_path truth_path' per line");
    metrics->add_option("--report-format", m_format, "report file format")
        ->check(CLI::IsMember({"csv", "text"}));
    metrics->add_option("--out", m_out, "output directory")->required();

    // phantom
    auto* phantom = app.add_subcommand("phantom", "generate a synthetic volume pair");
    std::string ph_spec, ph_out;
    int ph_workers = default_worker_count();
    std::optional<uint64_t> ph_seed;
    phantom->add_option("spec", ph_spec, "phantom description file")->required();
    phantom->add_option("--seed", ph_seed, "override the spec file's noise seed");
    phantom->add_option("--workers", ph_workers, "worker threads")->check(CLI::PositiveNumber);
    phantom->add_option("--out", ph_out, "output directory")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "projection cost and retention across MIP counts");
    std::string s_pet, s_labels;
    SweepOptions s_opt;
    sweep->add_option("volume", s_pet, "PET volume")->required();
    sweep->add_option("--labels", s_labels, "binary label volume")->required();
    sweep->add_option("--n", s_opt.ns, "comma-separated list of angle counts")
        ->required()
        ->delimiter(',');
    sweep->add_option("--repeats", s_opt.repeats, "timing repeats per N (median reported)");
    sweep->add_option("--interp", s_opt.interp, "sampling kernel")
        ->check(CLI::IsMember({"linear", "nearest"}));
    sweep->add_option("--origin-threshold", s_opt.cfg.origin_threshold, "see correct");
    sweep->add_option("--connectivity", s_opt.cfg.connectivity, "see correct")
        ->check(CLI::IsMember({4, 8}));
    sweep->add_option("--contrast-ratio", s_opt.cfg.contrast_ratio_min, "see correct");
    sweep->add_option("--ring-radius", s_opt.cfg.contrast_ring_radius_px, "see correct");
    sweep->add_option("--min-fragment", s_opt.cfg.min_fragment_px, "see correct");
    sweep->add_option("--workers", s_opt.workers, "worker threads")->check(CLI::PositiveNumber);
    sweep->add_option("--axis-permute", s_opt.axis_permute, "axis mapping for both volumes");
    sweep->add_option("--out", s_opt.out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*project) {
            std::vector<ManifestCase> cases;
            if (!p_manifest.empty()) {
                require_inputs({p_manifest});
                cases = read_manifest(p_manifest, 1, 2);
            } else {
                if (p_pet.empty())
                    throw std::runtime_error("project needs a volume argument or --manifest");
                ManifestCase c{default_case_id(p_pet), {p_pet}};
                if (!p_labels.empty()) c.paths.push_back(p_labels);
                cases.push_back(std::move(c));
            }
            for (const ManifestCase& c : cases) require_inputs(c.paths);
            ensure_out_dir(p_opt.out_dir);
            for (const ManifestCase& c : cases)
                run_project_case(c.case_id, c.paths[0], c.paths.size() > 1 ? c.paths[1] : "",
                                 p_opt);
        } else if (*correct) {
            c_opt.cfg.check();
            c_opt.format = c_format == "csv" ? ReportFormat::Csv : ReportFormat::StructuredText;
            std::vector<ManifestCase> cases;
            if (!c_manifest.empty()) {
                require_inputs({c_manifest});
                cases = read_manifest(c_manifest, 4, 4);
            } else {
                if (c_in.intensity.empty() || c_in.provenance.empty() ||
                    c_in.annotations.empty() || c_in.labels3d.empty())
                    throw std::runtime_error(
                        "correct needs --intensity, --provenance, --annotations and --labels3d "
                        "(or --manifest)");
                cases.push_back({"case", {c_in.intensity, c_in.provenance, c_in.annotations,
                                          c_in.labels3d}});
            }
            for (const ManifestCase& c : cases) require_inputs(c.paths);
            ensure_out_dir(c_opt.out_dir);
            for (const ManifestCase& c : cases) {
                CorrectInputs in{c.paths[0], c.paths[1], c.paths[2], c.paths[3]};
                run_correct_case(c.case_id, in, c_opt);
            }
        } else if (*metrics) {
            const ReportFormat format =
                m_format == "csv" ? ReportFormat::Csv : ReportFormat::StructuredText;
            std::vector<ManifestCase> cases;
            if (!m_manifest.empty()) {
                require_inputs({m_manifest});
                cases = read_manifest(m_manifest, 2, 2);
            } else {
                if (m_pred.empty() || m_truth.empty())
                    throw std::runtime_error("metrics needs --pred and --truth (or --manifest)");
                cases.push_back({m_case, {m_pred, m_truth}});
            }
            for (const ManifestCase& c : cases) require_inputs(c.paths);
            if (cases.empty()) throw std::runtime_error("manifest lists no cases");
            ensure_out_dir(m_out);
            run_metrics(cases, m_out, format);
        } else if (*phantom) {
            require_inputs({ph_spec});
            ensure_out_dir(ph_out);
            run_phantom(ph_spec, ph_out, ph_workers, ph_seed);
        } else if (*sweep) {
            require_inputs({s_pet, s_labels});
            s_opt.cfg.check();
            ensure_out_dir(s_opt.out_dir);
            run_sweep(s_pet, s_labels, s_opt);
        }
    } catch (const MissingInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
