#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

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

namespace py = pybind11;
using namespace miptrace;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

VolumeKind parse_kind(const std::string& kind) {
    if (kind == "intensity") return VolumeKind::Intensity;
    if (kind == "label") return VolumeKind::Label;
    throw std::invalid_argument("kind must be 'intensity' or 'label'");
}

std::string kind_name(VolumeKind kind) {
    return kind == VolumeKind::Intensity ? "intensity" : "label";
}

Interp parse_interp(const std::string& name) {
    if (name == "linear") return Interp::Linear;
    if (name == "nearest") return Interp::Nearest;
    throw std::invalid_argument("interp must be 'linear' or 'nearest'");
}

/// Arrays are (nz, ny, nx) C-contiguous, matching the volume's x-fastest
/// memory layout, so arr[z, y, x] == volume.at(x, y, z).
Volume3D volume_from_numpy(FloatArray array, std::tuple<double, double, double> spacing,
                           const std::string& kind) {
    if (array.ndim() != 3) throw std::invalid_argument("volume array must be 3D (nz, ny, nx)");
    const int nz = static_cast<int>(array.shape(0));
    const int ny = static_cast<int>(array.shape(1));
    const int nx = static_cast<int>(array.shape(2));
    Volume3D volume(nx, ny, nz,
                    Spacing{std::get<0>(spacing), std::get<1>(spacing), std::get<2>(spacing)},
                    parse_kind(kind));
    std::memcpy(volume.data.data(), array.data(), sizeof(float) * volume.voxel_count());
    return volume;
}

py::array_t<float> volume_to_numpy(const Volume3D& v) {
    py::array_t<float> out({v.nz, v.ny, v.nx});
    std::memcpy(out.mutable_data(), v.data.data(), sizeof(float) * v.voxel_count());
    return out;
}

MipImage image_from_numpy(FloatArray array, double angle_deg, const std::string& kind) {
    if (array.ndim() != 2) throw std::invalid_argument("image array must be 2D (rows, cols)");
    MipImage img;
    img.rows = static_cast<int>(array.shape(0));
    img.cols = static_cast<int>(array.shape(1));
    img.angle_deg = angle_deg;
    img.kind = kind == "intensity" ? MipKind::Intensity : MipKind::Label;
    img.data.resize(img.pixel_count());
    std::memcpy(img.data.data(), array.data(), sizeof(float) * img.pixel_count());
    return img;
}

py::array_t<float> image_to_numpy(const MipImage& img) {
    py::array_t<float> out({img.rows, img.cols});
    std::memcpy(out.mutable_data(), img.data.data(), sizeof(float) * img.pixel_count());
    return out;
}

py::array_t<int32_t> provenance_to_numpy(const ProvenanceMap& m) {
    py::array_t<int32_t> out({m.rows, m.cols, 3});
    std::memcpy(out.mutable_data(), m.voxels.data(), sizeof(int32_t) * 3 * m.voxels.size());
    return out;
}

}  // namespace

PYBIND11_MODULE(_miptrace, m) {
    m.doc() = "multi-angle maximum intensity projections with per-pixel provenance";

    py::class_<Volume3D>(m, "Volume3D")
        .def_readonly("nx", &Volume3D::nx)
        .def_readonly("ny", &Volume3D::ny)
        .def_readonly("nz", &Volume3D::nz)
        .def_property_readonly("spacing",
                               [](const Volume3D& v) {
                                   return py::make_tuple(v.spacing.sx, v.spacing.sy, v.spacing.sz);
                               })
        .def_property_readonly("kind", [](const Volume3D& v) { return kind_name(v.kind); })
        .def("numpy", &volume_to_numpy, "volume data as a (nz, ny, nx) float32 array")
        .def("__repr__", [](const Volume3D& v) {
            return "<Volume3D " + std::to_string(v.nx) + "x" + std::to_string(v.ny) + "x" +
                   std::to_string(v.nz) + " " + kind_name(v.kind) + ">";
        });

    m.def("volume_from_numpy", &volume_from_numpy, py::arg("array"),
          py::arg("spacing") = std::make_tuple(1.0, 1.0, 1.0), py::arg("kind") = "intensity",
          "builds a volume from a (nz, ny, nx) float32 array");

    py::class_<AngularPlan>(m, "AngularPlan")
        .def_readonly("n", &AngularPlan::n)
        .def_readonly("delta_theta", &AngularPlan::delta_theta)
        .def_readonly("angles", &AngularPlan::angles);

    m.def("angular_plan", &angular_plan, py::arg("n"),
          "n angles spanning the half turn: k * 180/n degrees");

    py::class_<MipImage>(m, "MipImage")
        .def_readonly("rows", &MipImage::rows)
        .def_readonly("cols", &MipImage::cols)
        .def_readonly("angle_deg", &MipImage::angle_deg)
        .def_property_readonly(
            "kind",
            [](const MipImage& i) { return i.kind == MipKind::Intensity ? "intensity" : "label"; })
        .def("numpy", &image_to_numpy);

    m.def("image_from_numpy", &image_from_numpy, py::arg("array"), py::arg("angle_deg") = 0.0,
          py::arg("kind") = "label");

    py::class_<ProvenanceMap>(m, "ProvenanceMap")
        .def_readonly("rows", &ProvenanceMap::rows)
        .def_readonly("cols", &ProvenanceMap::cols)
        .def("numpy", &provenance_to_numpy,
             "source voxel indices as a (rows, cols, 3) int32 array, (-1,-1,-1) where the ray "
             "misses the volume");

    py::class_<MipStack>(m, "MipStack")
        .def_readonly("plan", &MipStack::plan)
        .def_readonly("images", &MipStack::images)
        .def_readonly("provenance", &MipStack::provenance)
        .def_property_readonly(
            "kind",
            [](const MipStack& s) { return s.kind == MipKind::Intensity ? "intensity" : "label"; })
        .def_property_readonly("n", [](const MipStack& s) { return s.images.size(); });

    py::class_<MipGeometry>(m, "MipGeometry")
        .def_readonly("rows", &MipGeometry::rows)
        .def_readonly("cols", &MipGeometry::cols)
        .def_readonly("depth", &MipGeometry::depth)
        .def_readonly("eff_nx", &MipGeometry::eff_nx)
        .def_readonly("eff_ny", &MipGeometry::eff_ny)
        .def_readonly("iso_spacing", &MipGeometry::iso_spacing)
        .def_readonly("resampled", &MipGeometry::resampled);

    m.def("mip_geometry", &mip_geometry, py::arg("volume"));

    m.def(
        "project_mip",
        [](const Volume3D& volume, double angle_deg, const std::string& interp, int workers) {
            return project_mip(volume, angle_deg, parse_interp(interp), workers);
        },
        py::arg("volume"), py::arg("angle_deg"), py::arg("interp") = "linear",
        py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>());

    m.def(
        "project_stack",
        [](const Volume3D& volume, const AngularPlan& plan, const std::string& interp,
           int workers) { return project_stack(volume, plan, parse_interp(interp), workers); },
        py::arg("volume"), py::arg("plan"), py::arg("interp") = "linear", py::arg("workers") = 1,
        py::call_guard<py::gil_scoped_release>());

    m.def("project_labels", &project_labels, py::arg("labels"), py::arg("plan"),
          py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>());

    m.def("mirror", &mirror, py::arg("image"),
          "columns reversed, angle moved to the opposite half turn");

    py::class_<OcclusionConfig>(m, "OcclusionConfig")
        .def(py::init<>())
        .def_readwrite("origin_threshold", &OcclusionConfig::origin_threshold)
        .def_readwrite("connectivity", &OcclusionConfig::connectivity)
        .def_readwrite("min_fragment_px", &OcclusionConfig::min_fragment_px)
        .def_readwrite("contrast_ratio_min", &OcclusionConfig::contrast_ratio_min)
        .def_readwrite("contrast_ring_radius_px", &OcclusionConfig::contrast_ring_radius_px);

    py::class_<ComponentDecision>(m, "ComponentDecision")
        .def_readonly("component_id", &ComponentDecision::component_id)
        .def_readonly("pixel_count", &ComponentDecision::pixel_count)
        .def_readonly("tumor_origin_fraction", &ComponentDecision::tumor_origin_fraction)
        .def_property_readonly("action",
                               [](const ComponentDecision& d) { return to_string(d.action); })
        .def_readonly("retained_pixel_count", &ComponentDecision::retained_pixel_count);

    py::class_<ExclusionStats>(m, "ExclusionStats")
        .def_readonly("tumors_total", &ExclusionStats::tumors_total)
        .def_readonly("tumors_excluded", &ExclusionStats::tumors_excluded)
        .def_readonly("excluded_tumor_fraction", &ExclusionStats::excluded_tumor_fraction)
        .def_readonly("excluded_volume_fraction", &ExclusionStats::excluded_volume_fraction)
        .def_readonly("total_tumor_voxels", &ExclusionStats::total_tumor_voxels)
        .def_readonly("excluded_tumor_voxels", &ExclusionStats::excluded_tumor_voxels);

    py::class_<MipCorrection>(m, "MipCorrection")
        .def_readonly("angle_deg", &MipCorrection::angle_deg)
        .def_readonly("decisions", &MipCorrection::decisions);

    py::class_<CorrectionReport>(m, "CorrectionReport")
        .def_readonly("per_mip", &CorrectionReport::per_mip)
        .def_readonly("exclusion", &CorrectionReport::exclusion);

    m.def(
        "connected_components",
        [](const MipImage& mask, int connectivity) {
            const LabeledComponents cc = connected_components(mask, connectivity);
            py::array_t<int32_t> labels({cc.rows, cc.cols});
            std::memcpy(labels.mutable_data(), cc.labels.data(),
                        sizeof(int32_t) * cc.labels.size());
            return py::make_tuple(labels, cc.count);
        },
        py::arg("mask"), py::arg("connectivity") = 8, "labeled image and component count");

    m.def("detect_and_split", &detect_and_split, py::arg("annotation"), py::arg("provenance"),
          py::arg("labels3d"), py::arg("config") = OcclusionConfig{});

    m.def("correct_mip", &correct_mip, py::arg("annotation"), py::arg("intensity"),
          py::arg("provenance"), py::arg("labels3d"), py::arg("config") = OcclusionConfig{});

    m.def("correct_stack", &correct_stack, py::arg("annotations"), py::arg("intensity"),
          py::arg("labels3d"), py::arg("config") = OcclusionConfig{}, py::arg("workers") = 1,
          py::call_guard<py::gil_scoped_release>());

    m.def(
        "exclusion_stats",
        [](const MipStack& corrected, const std::vector<ProvenanceMap>& provenance,
           const Volume3D& labels3d) {
            return exclusion_stats(corrected, provenance, labels3d);
        },
        py::arg("corrected"), py::arg("provenance"), py::arg("labels3d"));

    py::class_<SegScores>(m, "SegScores")
        .def_readonly("dice", &SegScores::dice)
        .def_readonly("iou", &SegScores::iou)
        .def_readonly("hausdorff", &SegScores::hausdorff);

    py::class_<ClassificationScores>(m, "ClassificationScores")
        .def_readonly("accuracy", &ClassificationScores::accuracy)
        .def_readonly("precision", &ClassificationScores::precision)
        .def_readonly("recall", &ClassificationScores::recall)
        .def_readonly("f1", &ClassificationScores::f1);

    py::class_<AggregateScore>(m, "AggregateScore")
        .def_readonly("mean", &AggregateScore::mean)
        .def_readonly("std_dev", &AggregateScore::std_dev)
        .def_readonly("n", &AggregateScore::n);

    m.def("dice", &dice, py::arg("a"), py::arg("b"));
    m.def("iou", &iou, py::arg("a"), py::arg("b"));
    m.def("hausdorff", &hausdorff, py::arg("a"), py::arg("b"));
    m.def("segmentation_scores", &segmentation_scores, py::arg("a"), py::arg("b"));
    m.def(
        "classification_metrics",
        [](long long tp, long long fp, long long tn, long long fn) {
            return classification_metrics(ConfusionCounts{tp, fp, tn, fn});
        },
        py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));
    m.def("aggregate", &aggregate, py::arg("values"),
          "mean and population standard deviation");

    m.def(
        "suv_normalize",
        [](const Volume3D& activity, double injected_dose_bq, double body_weight_g) {
            return suv_normalize(activity, SuvParams{injected_dose_bq, body_weight_g});
        },
        py::arg("activity"), py::arg("injected_dose_bq"), py::arg("body_weight_g"));

    py::class_<SphereSpec>(m, "SphereSpec")
        .def(py::init([](const std::string& kind, double cx, double cy, double cz, double radius,
                         float intensity) {
                 SphereSpec s;
                 if (kind == "organ")
                     s.kind = SphereKind::Organ;
                 else if (kind == "tumor")
                     s.kind = SphereKind::Tumor;
                 else
                     throw std::invalid_argument("sphere kind must be 'organ' or 'tumor'");
                 s.cx = cx;
                 s.cy = cy;
                 s.cz = cz;
                 s.radius = radius;
                 s.intensity = intensity;
                 return s;
             }),
             py::arg("kind"), py::arg("cx"), py::arg("cy"), py::arg("cz"), py::arg("radius"),
             py::arg("intensity"))
        .def_property_readonly(
            "kind", [](const SphereSpec& s) { return s.kind == SphereKind::Organ ? "organ" : "tumor"; })
        .def_readonly("cx", &SphereSpec::cx)
        .def_readonly("cy", &SphereSpec::cy)
        .def_readonly("cz", &SphereSpec::cz)
        .def_readonly("radius", &SphereSpec::radius)
        .def_readonly("intensity", &SphereSpec::intensity);

    py::class_<PhantomSpec>(m, "PhantomSpec")
        .def(py::init<>())
        .def_readwrite("nx", &PhantomSpec::nx)
        .def_readwrite("ny", &PhantomSpec::ny)
        .def_readwrite("nz", &PhantomSpec::nz)
        .def_property(
            "spacing",
            [](const PhantomSpec& s) { return py::make_tuple(s.spacing.sx, s.spacing.sy, s.spacing.sz); },
            [](PhantomSpec& s, std::tuple<double, double, double> sp) {
                s.spacing = Spacing{std::get<0>(sp), std::get<1>(sp), std::get<2>(sp)};
            })
        .def_readwrite("background_intensity", &PhantomSpec::background_intensity)
        .def_readwrite("spheres", &PhantomSpec::spheres)
        .def_readwrite("noise_sigma", &PhantomSpec::noise_sigma)
        .def_readwrite("seed", &PhantomSpec::seed);

    m.def(
        "generate_phantom",
        [](const PhantomSpec& spec, int workers) {
            std::vector<std::string> warnings;
            auto [pet, labels] = generate(spec, workers, &warnings);
            return py::make_tuple(std::move(pet), std::move(labels), warnings);
        },
        py::arg("spec"), py::arg("workers") = 1,
        "returns (intensity volume, label volume, warnings)");

    m.def("read_phantom_spec", &read_phantom_spec, py::arg("path"));

    m.def(
        "read_nifti",
        [](const std::string& path, const std::string& kind) {
            std::vector<std::string> notes;
            Volume3D volume = read_nifti(path, parse_kind(kind), &notes);
            return py::make_tuple(std::move(volume), notes);
        },
        py::arg("path"), py::arg("kind") = "intensity", "returns (volume, reader notes)");

    m.def("write_nifti", &write_nifti, py::arg("volume"), py::arg("path"));

    m.def("write_mip_container", &write_mip_container, py::arg("stack"), py::arg("path"));
    m.def(
        "write_provenance_container",
        [](const MipStack& stack, const std::string& path) {
            std::vector<double> angles;
            for (const MipImage& img : stack.images) angles.push_back(img.angle_deg);
            write_provenance_container(stack.provenance, angles, path);
        },
        py::arg("stack"), py::arg("path"), "writes the provenance maps of an intensity stack");

    py::class_<MipContainer>(m, "MipContainer")
        .def_readonly("kind", &MipContainer::kind)
        .def_readonly("rows", &MipContainer::rows)
        .def_readonly("cols", &MipContainer::cols)
        .def_readonly("angles", &MipContainer::angles)
        .def_readonly("images", &MipContainer::images)
        .def_readonly("provenance", &MipContainer::provenance);

    m.def("read_mip_container", &read_mip_container, py::arg("path"));
    m.def("container_to_stack", &container_to_stack, py::arg("container"));

    m.def("export_pgm", &export_pgm, py::arg("image"), py::arg("path"), py::arg("lo"),
          py::arg("hi"));

    m.def("default_worker_count", &default_worker_count);
}
