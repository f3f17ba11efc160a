"""Multi-angle maximum intensity projections with per-pixel voxel provenance.

Thin re-export of the compiled module. Volumes cross the boundary as
(nz, ny, nx) float32 arrays, MIP images as (rows, cols) float32, provenance
maps as (rows, cols, 3) int32 with (-1, -1, -1) marking rays that miss the
volume.
"""

from ._miptrace import (
    AggregateScore,
    AngularPlan,
    ClassificationScores,
    ComponentDecision,
    CorrectionReport,
    ExclusionStats,
    MipContainer,
    MipCorrection,
    MipGeometry,
    MipImage,
    MipStack,
    OcclusionConfig,
    PhantomSpec,
    ProvenanceMap,
    SegScores,
    SphereSpec,
    Volume3D,
    aggregate,
    angular_plan,
    classification_metrics,
    connected_components,
    container_to_stack,
    correct_mip,
    correct_stack,
    default_worker_count,
    detect_and_split,
    dice,
    exclusion_stats,
    export_pgm,
    generate_phantom,
    hausdorff,
    image_from_numpy,
    iou,
    mip_geometry,
    mirror,
    project_labels,
    project_mip,
    project_stack,
    read_mip_container,
    read_nifti,
    read_phantom_spec,
    segmentation_scores,
    suv_normalize,
    volume_from_numpy,
    write_mip_container,
    write_nifti,
    write_provenance_container,
)

__all__ = [
    "AggregateScore",
    "AngularPlan",
    "ClassificationScores",
    "ComponentDecision",
    "CorrectionReport",
    "ExclusionStats",
    "MipContainer",
    "MipCorrection",
    "MipGeometry",
    "MipImage",
    "MipStack",
    "OcclusionConfig",
    "PhantomSpec",
    "ProvenanceMap",
    "SegScores",
    "SphereSpec",
    "Volume3D",
    "aggregate",
    "angular_plan",
    "classification_metrics",
    "connected_components",
    "container_to_stack",
    "correct_mip",
    "correct_stack",
    "default_worker_count",
    "detect_and_split",
    "dice",
    "exclusion_stats",
    "export_pgm",
    "generate_phantom",
    "hausdorff",
    "image_from_numpy",
    "iou",
    "mip_geometry",
    "mirror",
    "project_labels",
    "project_mip",
    "project_stack",
    "read_mip_container",
    "read_nifti",
    "read_phantom_spec",
    "segmentation_scores",
    "suv_normalize",
    "volume_from_numpy",
    "write_mip_container",
    "write_nifti",
    "write_provenance_container",
]
