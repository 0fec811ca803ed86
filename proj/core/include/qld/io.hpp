#pragma once

// Output writers.  Everything is plain text with a fixed layout and %.17g
// number formatting, so identical runs produce byte-identical files.

#include <string>
#include <vector>

#include "qld/dynamics.hpp"
#include "qld/grid.hpp"
#include "qld/interface.hpp"

namespace qld {

/// Fixed shortest-lossless formatting used by all writers.
std::string format_double(double v);

/// Legacy-VTK ASCII structured-points snapshot: scalar e, vectors u, w,
/// xdot, wdot.  Dimensions/spacing/origin mirror the grid spec exactly.
void write_vtk_snapshot(const std::string& path, const Grid& g,
                        const FieldState& s, const MaterialModel& m);

/// Diagnostics CSV with the fixed column order
/// t,H,px,py,pz,mux,muy,muz,dissipation,max_residual
class DiagnosticsWriter {
 public:
  explicit DiagnosticsWriter(const std::string& path);
  void append(const DiagRow& row);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Interface CSV rows: t,marker,X1,X2,m1,m2,kappa,U,G
class InterfaceWriter {
 public:
  explicit InterfaceWriter(const std::string& path);
  void append(double t, const InterfaceCurve& c);

 private:
  std::string path_;
};

/// Verification report rows: suite,check,value,threshold,pass
class ReportWriter {
 public:
  explicit ReportWriter(const std::string& path);
  void append(const std::string& suite, const std::string& check, double value,
              double threshold, bool pass);
  int failures() const { return failures_; }

 private:
  std::string path_;
  int failures_ = 0;
};

}  // namespace qld
