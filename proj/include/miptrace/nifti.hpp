#pragma once

#include <string>
#include <vector>

#include "miptrace/volume.hpp"

namespace miptrace {

/// Reads a 3D NIfTI-1 volume (.nii, or .nii.gz / any gzip-wrapped stream).
/// Supported datatypes: u8, i16, u16, f32, f64; both endiannesses, detected
/// via sizeof_hdr. scl_slope/scl_inter are applied (slope 0 means identity).
/// The file's first three dimensions are taken as (x, y, z) verbatim; axis
/// reinterpretation is the caller's job (see permute_axes).
///
/// `notes`, when given, collects tolerated deviations and ignored metadata
/// (slope 0, qform/sform present but not applied). Nothing is reinterpreted
/// silently.
Volume3D read_nifti(const std::string& path, VolumeKind kind = VolumeKind::Intensity,
                    std::vector<std::string>* notes = nullptr);

/// Writes a volume as single-file NIfTI-1, 32-bit float, little-endian,
/// slope 1 / inter 0, spacing in pixdim. A path ending in .gz is
/// gzip-compressed. Output bytes depend only on the volume contents.
void write_nifti(const Volume3D& volume, const std::string& path);

}  // namespace miptrace
