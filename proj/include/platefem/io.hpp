#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "platefem/adapt.hpp"
#include "platefem/assembly.hpp"
#include "platefem/mesh.hpp"

namespace platefem {

/// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void write_records_csv(const std::filesystem::path& path,
                              const std::vector<ConvergenceRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot open " + path.string() + " for writing");
  out << "ndofs,nelems,eta,energynorm\n";
  for (const ConvergenceRecord& r : records) {
    out << r.ndofs << ',' << r.nelems << ',' << format_double(r.eta) << ',';
    if (r.energy_error) out << format_double(*r.energy_error);
    out << '\n';
  }
  if (!out) throw std::runtime_error("csv: write failed for " + path.string());
}

inline std::vector<ConvergenceRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "ndofs,nelems,eta,energynorm")
    throw std::runtime_error("csv: unexpected header in " + path.string());
  std::vector<ConvergenceRecord> records;
  int step = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    ConvergenceRecord r;
    r.step = step++;
    std::getline(ss, field, ',');
    r.ndofs = std::stol(field);
    std::getline(ss, field, ',');
    r.nelems = std::stoi(field);
    std::getline(ss, field, ',');
    r.eta = std::stod(field);
    if (std::getline(ss, field, ',') && !field.empty()) r.energy_error = std::stod(field);
    records.push_back(r);
  }
  return records;
}

/// Legacy ASCII VTK unstructured grid with per-element estimator values and
/// the vertex deflections.
inline void write_vtk(const std::filesystem::path& path, const Mesh& mesh,
                      const std::vector<double>& eta_K, const std::vector<double>& deflection) {
  if (static_cast<int>(eta_K.size()) != mesh.n_triangles())
    throw std::invalid_argument("vtk: eta_K size mismatch");
  if (static_cast<int>(deflection.size()) != mesh.n_vertices())
    throw std::invalid_argument("vtk: deflection size mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("vtk: cannot open " + path.string() + " for writing");
  out << "# vtk DataFile Version 2.0\n";
  out << "plate bending solution\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const Vertex& v : mesh.vertices)
    out << format_double(v.x) << ' ' << format_double(v.y) << " 0\n";
  out << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << '\n';
  for (const Triangle& t : mesh.triangles)
    out << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  out << "CELL_TYPES " << mesh.n_triangles() << '\n';
  for (int t = 0; t < mesh.n_triangles(); ++t) out << "5\n";
  out << "CELL_DATA " << mesh.n_triangles() << '\n';
  out << "SCALARS eta_K double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (double v : eta_K) out << format_double(v) << '\n';
  out << "POINT_DATA " << mesh.n_vertices() << '\n';
  out << "SCALARS deflection double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (double v : deflection) out << format_double(v) << '\n';
  if (!out) throw std::runtime_error("vtk: write failed for " + path.string());
}

inline std::vector<double> vertex_deflections(const Solution& sol) {
  const int nv = sol.field.mesh->n_vertices();
  std::vector<double> u(nv);
  for (int v = 0; v < nv; ++v) u[v] = sol.value_at_vertex(v);
  return u;
}

}  // namespace platefem
