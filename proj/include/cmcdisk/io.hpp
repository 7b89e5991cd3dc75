#pragma once

#include "cmcdisk/solver.hpp"

#include <filesystem>
#include <string>

namespace cmcdisk {

/// Shortest round-trip decimal form of a double (deterministic).
std::string fmt_double(double x);

/// OBJ text: "v x y z" lines then "f i j k" (1-based). Mesh export writes
/// the planar vertices with z = 0.
void write_obj(const std::filesystem::path& path, const DiskMesh& mesh);
void write_obj(const std::filesystem::path& path, const SurfaceMap& map);

/// Legacy-ASCII VTK unstructured grid (triangle cells, type 5).
void write_vtk(const std::filesystem::path& path, const DiskMesh& mesh);
void write_vtk(const std::filesystem::path& path, const SurfaceMap& map);

/// Sidecar listing the ordered boundary-loop vertex indices, 0-based, one
/// per line.
void write_bnd(const std::filesystem::path& path, const DiskMesh& mesh);

/// Reads positions from an OBJ written by write_obj onto the given mesh and
/// validates the sidecar against the mesh boundary loop.
SurfaceMap read_map(const std::filesystem::path& obj_path, const std::filesystem::path& bnd_path,
                    std::shared_ptr<const DiskMesh> mesh);

void write_iterations_csv(const std::filesystem::path& path, std::span<const IterRow> rows);

/// CSV row of energies: eps,p,H,D,Deps,V,E,hopf_defect,orth_defect.
void write_energy_csv(const std::filesystem::path& path, std::span<const EnergyReport> rows);

void write_spectrum_json(const std::filesystem::path& path, const SpectralReport& report);

}  // namespace cmcdisk
