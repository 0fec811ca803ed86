#include "qld/io.hpp"

#include <cstdio>
#include <fstream>

#include "qld/errors.hpp"
#include "qld/kinematics.hpp"

namespace qld {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path, bool append = false) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw Error("cannot open output file " + path);
  return out;
}

}  // namespace

void write_vtk_snapshot(const std::string& path, const Grid& g,
                        const FieldState& s, const MaterialModel& m) {
  std::ofstream out = open_out(path);
  const int nx = g.nodes_along(0);
  const int ny = g.nodes_along(1);
  out << "# vtk DataFile Version 3.0\n";
  out << "qld field snapshot t=" << format_double(s.t) << "\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << nx << " " << ny << " 1\n";
  out << "ORIGIN " << format_double(g.origin[0]) << " "
      << format_double(g.dim > 1 ? g.origin[1] : 0.0) << " 0\n";
  out << "SPACING " << format_double(g.h[0]) << " "
      << format_double(g.dim > 1 ? g.h[1] : 1.0) << " 1\n";
  out << "POINT_DATA " << g.node_count() << "\n";

  const auto dps = gradients(s, g);
  out << "SCALARS e double 1\nLOOKUP_TABLE default\n";
  for (std::size_t id = 0; id < g.node_count(); ++id)
    out << format_double(energy(m, dps[id], s.w[id])) << "\n";

  auto vectors = [&](const char* name, auto&& value) {
    out << "VECTORS " << name << " double\n";
    for (std::size_t id = 0; id < g.node_count(); ++id) {
      const Vec3 v = value(id);
      out << format_double(v.x) << " " << format_double(v.y) << " "
          << format_double(v.z) << "\n";
    }
  };
  vectors("u", [&](std::size_t id) { return s.x[id] - g.coord(id); });
  vectors("w", [&](std::size_t id) { return s.w[id]; });
  vectors("xdot", [&](std::size_t id) { return s.v[id]; });
  vectors("wdot", [&](std::size_t id) { return s.wv[id]; });
}

DiagnosticsWriter::DiagnosticsWriter(const std::string& path) : path_(path) {
  open_out(path_) << "t,H,px,py,pz,mux,muy,muz,dissipation,max_residual\n";
}

void DiagnosticsWriter::append(const DiagRow& r) {
  std::ofstream out = open_out(path_, true);
  out << format_double(r.t) << "," << format_double(r.H) << ","
      << format_double(r.p.x) << "," << format_double(r.p.y) << ","
      << format_double(r.p.z) << "," << format_double(r.mu.x) << ","
      << format_double(r.mu.y) << "," << format_double(r.mu.z) << ","
      << format_double(r.dissipation) << "," << format_double(r.maxResidual)
      << "\n";
}

InterfaceWriter::InterfaceWriter(const std::string& path) : path_(path) {
  open_out(path_) << "t,marker,X1,X2,m1,m2,kappa,U,G\n";
}

void InterfaceWriter::append(double t, const InterfaceCurve& c) {
  std::ofstream out = open_out(path_, true);
  for (std::size_t k = 0; k < c.size(); ++k) {
    out << format_double(t) << "," << k << "," << format_double(c.X[k].x) << ","
        << format_double(c.X[k].y) << "," << format_double(c.normal[k].x) << ","
        << format_double(c.normal[k].y) << "," << format_double(c.kappa[k])
        << "," << format_double(c.U[k]) << "," << format_double(c.G[k]) << "\n";
  }
}

ReportWriter::ReportWriter(const std::string& path) : path_(path) {
  open_out(path_) << "suite,check,value,threshold,pass\n";
}

void ReportWriter::append(const std::string& suite, const std::string& check,
                          double value, double threshold, bool pass) {
  std::ofstream out = open_out(path_, true);
  out << suite << "," << check << "," << format_double(value) << ","
      << format_double(threshold) << "," << (pass ? 1 : 0) << "\n";
  if (!pass) ++failures_;
}

}  // namespace qld
