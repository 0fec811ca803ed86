#include "qld/scenario.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "qld/rng.hpp"

namespace qld {

using nlohmann::json;

SchemaError::SchemaError(std::vector<std::string> v)
    : Error([&v] {
        std::string s = "scenario rejected with " + std::to_string(v.size()) +
                        " violation(s):";
        for (const auto& e : v) s += "\n  " + e;
        return s;
      }()),
      violations(std::move(v)) {}

namespace {

struct Check {
  std::vector<std::string> violations;

  void fail(const std::string& path, const std::string& msg) {
    violations.push_back("schema: " + path + ": " + msg);
  }
  void failUnit(const std::string& path, const std::string& msg) {
    violations.push_back("unit: " + path + ": " + msg);
  }

  void known_keys(const json& j, const std::string& path,
                  std::initializer_list<const char*> keys) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool ok = false;
      for (const char* k : keys)
        if (it.key() == k) ok = true;
      if (!ok) violations.push_back("unknown-key: " + path + "." + it.key());
    }
  }

  double num(const json& j, const std::string& path, const char* key,
             double fallback, bool required = false) {
    if (!j.contains(key)) {
      if (required) fail(path + "." + key, "required number missing");
      return fallback;
    }
    if (!j[key].is_number()) {
      fail(path + "." + key, "expected a number");
      return fallback;
    }
    return j[key].get<double>();
  }

  long long integer(const json& j, const std::string& path, const char* key,
                    long long fallback, bool required = false) {
    if (!j.contains(key)) {
      if (required) fail(path + "." + key, "required integer missing");
      return fallback;
    }
    if (!j[key].is_number_integer()) {
      fail(path + "." + key, "expected an integer");
      return fallback;
    }
    return j[key].get<long long>();
  }

  std::string str(const json& j, const std::string& path, const char* key,
                  const std::string& fallback, bool required = false) {
    if (!j.contains(key)) {
      if (required) fail(path + "." + key, "required string missing");
      return fallback;
    }
    if (!j[key].is_string()) {
      fail(path + "." + key, "expected a string");
      return fallback;
    }
    return j[key].get<std::string>();
  }

  std::vector<double> numbers(const json& j, const std::string& path,
                              const char* key, std::size_t count,
                              std::vector<double> fallback,
                              bool required = false) {
    if (!j.contains(key)) {
      if (required) fail(path + "." + key, "required array missing");
      return fallback;
    }
    if (!j[key].is_array() || (count > 0 && j[key].size() != count)) {
      fail(path + "." + key,
           "expected an array of " + std::to_string(count) + " numbers");
      return fallback;
    }
    std::vector<double> out;
    for (const auto& v : j[key]) {
      if (!v.is_number()) {
        fail(path + "." + key, "expected numbers only");
        return fallback;
      }
      out.push_back(v.get<double>());
    }
    return out;
  }
};

Vec3 to_vec3(const std::vector<double>& v) {
  Vec3 r{};
  for (std::size_t i = 0; i < v.size() && i < 3; ++i) r[int(i)] = v[i];
  return r;
}

Mat3 to_mat3(const std::vector<double>& v) {
  Mat3 r{};
  for (std::size_t i = 0; i < v.size() && i < 9; ++i) r.a[i] = v[i];
  return r;
}

Tensor4 to_tensor4(const std::vector<double>& v) {
  Tensor4 t;
  for (std::size_t i = 0; i < v.size() && i < 81; ++i) t.a[i] = v[i];
  return t;
}

json from_vec3(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json from_mat3(const Mat3& m) {
  json a = json::array();
  for (double c : m.a) a.push_back(c);
  return a;
}
json from_tensor4(const Tensor4& t) {
  json a = json::array();
  for (double c : t.a) a.push_back(c);
  return a;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw SchemaError({std::string("schema: document: ") + e.what()});
  }
  Check ck;
  Scenario sc;

  ck.known_keys(j, "$", {"seed", "output_dir", "grid", "material", "bc",
                         "initial", "sim", "interface", "verify"});
  sc.seed = std::uint64_t(ck.integer(j, "$", "seed", 0));
  sc.outputDir = ck.str(j, "$", "output_dir", "out");

  // ---- grid -----------------------------------------------------------
  if (!j.contains("grid") || !j["grid"].is_object()) {
    ck.fail("$.grid", "required object missing");
  } else {
    const json& g = j["grid"];
    ck.known_keys(g, "$.grid", {"dim", "cells", "h", "periodic", "origin"});
    sc.grid.dim = int(ck.integer(g, "$.grid", "dim", 1, true));
    if (sc.grid.dim < 1 || sc.grid.dim > 2) {
      ck.fail("$.grid.dim", "must be 1 or 2");
      sc.grid.dim = 1;
    }
    const std::size_t d = std::size_t(sc.grid.dim);
    const auto cells = ck.numbers(g, "$.grid", "cells", d, {8}, true);
    const auto h = ck.numbers(g, "$.grid", "h", d, {0.125}, true);
    const auto per = g.contains("periodic")
                         ? ck.numbers(g, "$.grid", "periodic", d, {})
                         : std::vector<double>{};
    const auto org = g.contains("origin")
                         ? ck.numbers(g, "$.grid", "origin", d, {})
                         : std::vector<double>{};
    for (std::size_t a = 0; a < d && a < cells.size(); ++a) {
      sc.grid.cells[a] = int(cells[a]);
      if (sc.grid.cells[a] < 4) ck.fail("$.grid.cells", "needs >= 4 cells per axis");
    }
    for (std::size_t a = 0; a < d && a < h.size(); ++a) {
      sc.grid.h[a] = h[a];
      if (!(h[a] > 0.0)) ck.fail("$.grid.h", "spacing must be positive");
    }
    for (std::size_t a = 0; a < per.size() && a < d; ++a)
      sc.grid.periodic[a] = per[a] != 0.0;
    for (std::size_t a = 0; a < org.size() && a < d; ++a) sc.grid.origin[a] = org[a];
  }

  // ---- material -------------------------------------------------------
  if (!j.contains("material") || !j["material"].is_object()) {
    ck.fail("$.material", "required object missing");
  } else {
    const json& mj = j["material"];
    ck.known_keys(mj, "$.material",
                  {"kind", "rho0", "rho_bar", "preset", "moduli", "cstar",
                   "cstar_matrix", "omega"});
    const std::string kind = ck.str(mj, "$.material", "kind", "iic_quadratic", true);
    MaterialModel& m = sc.material;
    if (kind == "iic_quadratic")
      m.kind = ModelKind::IICQuadratic;
    else if (kind == "iq_quadratic")
      m.kind = ModelKind::IQQuadratic;
    else if (kind == "iic_stvenant")
      m.kind = ModelKind::IICStVenant;
    else
      ck.fail("$.material.kind",
              "expected iic_quadratic, iq_quadratic or iic_stvenant");
    m.rho0 = ck.num(mj, "$.material", "rho0", 1.0, true);
    m.rhoBar = ck.num(mj, "$.material", "rho_bar", 0.0);
    m.cstarScalar = ck.num(mj, "$.material", "cstar", 0.0);
    m.omega = ck.num(mj, "$.material", "omega", 0.0);
    if (mj.contains("cstar_matrix")) {
      m.hasCstarMatrix = true;
      m.cstarMatrix = to_mat3(ck.numbers(mj, "$.material", "cstar_matrix", 9, {}));
    }
    if (mj.contains("preset") && mj.contains("moduli"))
      ck.fail("$.material", "give either preset or moduli, not both");
    if (mj.contains("preset") && mj["preset"].is_object()) {
      const json& p = mj["preset"];
      ck.known_keys(p, "$.material.preset",
                    {"type", "lambda", "mu", "k1", "k2", "coupling", "alpha"});
      const std::string type = ck.str(p, "$.material.preset", "type", "isotropic");
      const double lambda = ck.num(p, "$.material.preset", "lambda", 1.0, true);
      const double mu = ck.num(p, "$.material.preset", "mu", 0.5, true);
      const double k1 = ck.num(p, "$.material.preset", "k1", 0.8, true);
      const double k2 = ck.num(p, "$.material.preset", "k2", 0.0);
      const double coupling = ck.num(p, "$.material.preset", "coupling", 0.0);
      m.alpha = ck.num(p, "$.material.preset", "alpha", 0.0);
      if (type == "isotropic") {
        if (k2 != 0.0 || coupling != 0.0)
          ck.fail("$.material.preset", "isotropic preset has no k2/coupling");
        m.Cph = isotropic_phonon_tensor(lambda, mu);
        m.Kph = phason_tensor_two_constants(k1, 0.0);
        if (m.kind == ModelKind::IICStVenant) {
          m.metricInvariant = true;
          m.lambdaIso = lambda;
          m.muIso = mu;
          m.k1Iso = k1;
        }
      } else if (type == "icosahedral") {
        m.Cph = isotropic_phonon_tensor(lambda, mu);
        m.Kph = phason_tensor_two_constants(k1, k2);
        m.Rc = coupling_tensor(coupling);
        if (k1 < std::abs(k2))
          ck.fail("$.material.preset", "phason moduli need k1 >= |k2|");
      } else {
        ck.fail("$.material.preset.type", "expected isotropic or icosahedral");
      }
    } else if (mj.contains("moduli") && mj["moduli"].is_object()) {
      const json& md = mj["moduli"];
      ck.known_keys(md, "$.material.moduli", {"phonon", "phason", "coupling", "alpha"});
      m.Cph = to_tensor4(ck.numbers(md, "$.material.moduli", "phonon", 81, {}, true));
      m.Kph = to_tensor4(ck.numbers(md, "$.material.moduli", "phason", 81, {}, true));
      if (md.contains("coupling"))
        m.Rc = to_tensor4(ck.numbers(md, "$.material.moduli", "coupling", 81, {}));
      m.alpha = ck.num(md, "$.material.moduli", "alpha", 0.0);
      symmetrize_moduli(m);
    } else {
      ck.fail("$.material", "needs a preset or explicit moduli");
    }
    if (is_iq(m.kind) && m.alpha != 0.0)
      ck.failUnit("$.material",
                  "icosahedral (IQ) kinds: the energy cannot depend on w, "
                  "alpha must be 0");
    if (is_iq(m.kind) && m.rhoBar != 0.0)
      ck.failUnit("$.material",
                  "icosahedral (IQ) kinds carry no phason inertia, rho_bar "
                  "must be 0");
    if (!is_iq(m.kind) && m.kind != ModelKind::Custom && m.rhoBar <= 0.0)
      ck.failUnit("$.material", "IIC kinds need rho_bar > 0");
    if (m.cstarScalar < 0.0) ck.failUnit("$.material.cstar", "must be >= 0");
    if (m.omega < 0.0) ck.failUnit("$.material.omega", "must be >= 0");
  }

  // ---- boundary conditions ---------------------------------------------
  sc.bc = BoundaryConditions::periodic_all(sc.grid);
  if (j.contains("bc")) {
    const json& bj = j["bc"];
    ck.known_keys(bj, "$.bc", {"body_force", "sides"});
    if (bj.contains("body_force"))
      sc.bc.bodyForce = to_vec3(ck.numbers(bj, "$.bc", "body_force", 3, {}));
    if (bj.contains("sides")) {
      if (!bj["sides"].is_array()) {
        ck.fail("$.bc.sides", "expected an array");
      } else {
        int idx = 0;
        for (const json& sj : bj["sides"]) {
          const std::string path = "$.bc.sides[" + std::to_string(idx++) + "]";
          ck.known_keys(sj, path, {"axis", "side", "channel", "kind", "value",
                                   "affine", "stiffness", "ref", "ref_affine"});
          const int axis = int(ck.integer(sj, path, "axis", 0, true));
          const std::string side = ck.str(sj, path, "side", "lo", true);
          const std::string channel = ck.str(sj, path, "channel", "phonon", true);
          const std::string kind = ck.str(sj, path, "kind", "traction", true);
          if (axis < 0 || axis >= sc.grid.dim) {
            ck.fail(path + ".axis", "outside the active axes");
            continue;
          }
          if (sc.grid.periodic[axis]) {
            ck.fail(path, "cannot prescribe data on a periodic axis");
            continue;
          }
          const int sd = (side == "hi") ? 1 : 0;
          if (side != "lo" && side != "hi") ck.fail(path + ".side", "lo or hi");
          const int chn = (channel == "phason") ? 1 : 0;
          if (channel != "phonon" && channel != "phason")
            ck.fail(path + ".channel", "phonon or phason");
          ChannelBc& cb = sc.bc.at(axis, sd, chn);
          if (kind == "dirichlet") {
            cb.kind = BcKind::Dirichlet;
            cb.value = to_vec3(ck.numbers(sj, path, "value", 3, {0, 0, 0}));
            cb.affine = sj.contains("affine")
                            ? to_mat3(ck.numbers(sj, path, "affine", 9, {}))
                            : (chn == 0 ? Mat3::identity() : Mat3::zero());
          } else if (kind == "traction") {
            cb.kind = BcKind::Traction;
            cb.value = to_vec3(ck.numbers(sj, path, "value", 3, {0, 0, 0}));
          } else if (kind == "potential") {
            cb.kind = BcKind::Potential;
            cb.stiffness = ck.num(sj, path, "stiffness", 0.0, true);
            cb.ref = to_vec3(ck.numbers(sj, path, "ref", 3, {0, 0, 0}));
            cb.refAffine = sj.contains("ref_affine")
                               ? to_mat3(ck.numbers(sj, path, "ref_affine", 9, {}))
                               : (chn == 0 ? Mat3::identity() : Mat3::zero());
            if (cb.stiffness < 0.0) ck.failUnit(path + ".stiffness", "must be >= 0");
          } else {
            ck.fail(path + ".kind", "dirichlet, traction or potential");
          }
        }
      }
    }
  }

  // ---- initial ----------------------------------------------------------
  if (j.contains("initial")) {
    const json& ij = j["initial"];
    ck.known_keys(ij, "$.initial", {"preset", "amplitude", "wavenumber",
                                    "component", "velocity_amplitude"});
    const std::string p = ck.str(ij, "$.initial", "preset", "natural");
    if (p == "natural")
      sc.initial.preset = InitialPreset::Natural;
    else if (p == "sine_phonon")
      sc.initial.preset = InitialPreset::SinePhonon;
    else if (p == "sine_phason")
      sc.initial.preset = InitialPreset::SinePhason;
    else if (p == "sine_both")
      sc.initial.preset = InitialPreset::SineBoth;
    else if (p == "random_phason")
      sc.initial.preset = InitialPreset::RandomPhason;
    else if (p == "bump_2d")
      sc.initial.preset = InitialPreset::Bump2D;
    else
      ck.fail("$.initial.preset", "unknown preset " + p);
    sc.initial.amplitude = ck.num(ij, "$.initial", "amplitude", 1e-3);
    sc.initial.wavenumber = int(ck.integer(ij, "$.initial", "wavenumber", 1));
    sc.initial.component = int(ck.integer(ij, "$.initial", "component", 0));
    if (sc.initial.component < 0 || sc.initial.component > 2)
      ck.fail("$.initial.component", "must be 0, 1 or 2");
    sc.initial.velocityAmplitude = ck.num(ij, "$.initial", "velocity_amplitude", 0.0);
  }

  // ---- sim ----------------------------------------------------------------
  if (j.contains("sim")) {
    const json& sj = j["sim"];
    ck.known_keys(sj, "$.sim", {"integrator", "dt", "cfl", "dt_fraction", "t_end",
                                "max_steps", "output_every"});
    const std::string integ = ck.str(sj, "$.sim", "integrator", "verlet");
    if (integ == "verlet")
      sc.sim.integrator = Integrator::Verlet;
    else if (integ == "split_verlet_friction")
      sc.sim.integrator = Integrator::SplitVerletFriction;
    else if (integ == "explicit_phason_diffusion")
      sc.sim.integrator = Integrator::ExplicitPhasonDiffusion;
    else if (integ == "semi_implicit_phason_diffusion")
      sc.sim.integrator = Integrator::SemiImplicitPhasonDiffusion;
    else
      ck.fail("$.sim.integrator", "unknown integrator " + integ);
    sc.sim.dt = ck.num(sj, "$.sim", "dt", 0.0);
    sc.sim.cfl = ck.num(sj, "$.sim", "cfl", 0.5);
    sc.sim.cflFraction = ck.num(sj, "$.sim", "dt_fraction", 0.2);
    sc.sim.tEnd = ck.num(sj, "$.sim", "t_end", 1.0);
    sc.sim.maxSteps = ck.integer(sj, "$.sim", "max_steps", -1);
    sc.sim.outputEvery = int(ck.integer(sj, "$.sim", "output_every", 0));
    if (sc.sim.dt < 0.0) ck.fail("$.sim.dt", "must be >= 0 (0 = automatic)");
    if (!(sc.sim.cfl > 0.0)) ck.fail("$.sim.cfl", "must be positive");
  }

  // ---- interface ----------------------------------------------------------
  if (j.contains("interface")) {
    const json& fj = j["interface"];
    ck.known_keys(fj, "$.interface",
                  {"center", "radius", "markers", "ftilde", "surface", "dt",
                   "t_end", "output_every", "couple_bulk", "eps_factor"});
    InterfaceSpec spec;
    spec.center = to_vec3(ck.numbers(fj, "$.interface", "center", 3,
                                     {0.5, 0.5, 0.0}));
    spec.radius = ck.num(fj, "$.interface", "radius", 0.25, true);
    spec.markers = int(ck.integer(fj, "$.interface", "markers", 200));
    spec.ftilde = ck.num(fj, "$.interface", "ftilde", 1.0, true);
    spec.dt = ck.num(fj, "$.interface", "dt", 1e-4);
    spec.tEnd = ck.num(fj, "$.interface", "t_end", 0.1);
    spec.outputEvery = int(ck.integer(fj, "$.interface", "output_every", 10));
    spec.coupleBulk = fj.contains("couple_bulk") && fj["couple_bulk"].is_boolean() &&
                      fj["couple_bulk"].get<bool>();
    spec.epsFactor = ck.num(fj, "$.interface", "eps_factor", 1.5);
    if (!(spec.ftilde > 0.0))
      ck.failUnit("$.interface.ftilde", "kinetic coefficient must be positive");
    if (spec.markers < 8) ck.fail("$.interface.markers", "needs >= 8 markers");
    if (spec.epsFactor < 1.5)
      ck.fail("$.interface.eps_factor", "jump offset must be >= 1.5 h");
    if (fj.contains("surface") && fj["surface"].is_object()) {
      const json& su = fj["surface"];
      ck.known_keys(su, "$.interface.surface",
                    {"kind", "phi0", "anisotropy_eps", "anisotropy_axis", "kf",
                     "kn", "kw"});
      const std::string sk = ck.str(su, "$.interface.surface", "kind", "constant");
      if (sk == "constant")
        spec.surface.kind = SurfaceKind::Constant;
      else if (sk == "anisotropic_quadratic")
        spec.surface.kind = SurfaceKind::AnisotropicQuadratic;
      else
        ck.fail("$.interface.surface.kind", "constant or anisotropic_quadratic");
      spec.surface.phi0 = ck.num(su, "$.interface.surface", "phi0", 0.0);
      spec.surface.anisotropyEps =
          ck.num(su, "$.interface.surface", "anisotropy_eps", 0.0);
      if (su.contains("anisotropy_axis"))
        spec.surface.anisotropyAxis =
            to_vec3(ck.numbers(su, "$.interface.surface", "anisotropy_axis", 3, {}));
      spec.surface.kF = ck.num(su, "$.interface.surface", "kf", 0.0);
      spec.surface.kN = ck.num(su, "$.interface.surface", "kn", 0.0);
      spec.surface.kW = ck.num(su, "$.interface.surface", "kw", 0.0);
      if (spec.surface.phi0 < 0.0)
        ck.failUnit("$.interface.surface.phi0", "must be >= 0");
    }
    sc.interface = spec;
  }

  // ---- verify ---------------------------------------------------------------
  if (j.contains("verify")) {
    const json& vj = j["verify"];
    ck.known_keys(vj, "$.verify", {"suites", "samples", "grid_cells"});
    if (vj.contains("suites")) {
      if (!vj["suites"].is_array()) {
        ck.fail("$.verify.suites", "expected an array of suite names");
      } else {
        for (const auto& sv : vj["suites"]) {
          if (!sv.is_string()) {
            ck.fail("$.verify.suites", "suite names must be strings");
            continue;
          }
          const std::string name = sv.get<std::string>();
          if (name != "noether" && name != "invariance" &&
              name != "universal_affine" && name != "metric" &&
              name != "eshelby" && name != "power")
            ck.fail("$.verify.suites", "unknown suite " + name);
          else
            sc.verify.suites.push_back(name);
        }
      }
    }
    sc.verify.samples = int(ck.integer(vj, "$.verify", "samples", 100));
    sc.verify.gridCells = int(ck.integer(vj, "$.verify", "grid_cells", 24));
  }

  if (!ck.violations.empty()) throw SchemaError(std::move(ck.violations));

  try {
    sc.grid.validate();
    sc.material.validate();
    sc.bc.validate(sc.grid);
  } catch (const Error& e) {
    throw SchemaError({std::string("unit: ") + e.what()});
  }
  return sc;
}

std::string serialize_scenario(const Scenario& sc) {
  json j;
  j["seed"] = sc.seed;
  j["output_dir"] = sc.outputDir;

  json g;
  g["dim"] = sc.grid.dim;
  for (int a = 0; a < sc.grid.dim; ++a) {
    g["cells"].push_back(sc.grid.cells[a]);
    g["h"].push_back(sc.grid.h[a]);
    g["periodic"].push_back(sc.grid.periodic[a] ? 1 : 0);
    g["origin"].push_back(sc.grid.origin[a]);
  }
  j["grid"] = g;

  json m;
  switch (sc.material.kind) {
    case ModelKind::IICQuadratic: m["kind"] = "iic_quadratic"; break;
    case ModelKind::IQQuadratic: m["kind"] = "iq_quadratic"; break;
    case ModelKind::IICStVenant: m["kind"] = "iic_stvenant"; break;
    case ModelKind::Custom: m["kind"] = "custom"; break;
  }
  m["rho0"] = sc.material.rho0;
  m["rho_bar"] = sc.material.rhoBar;
  m["cstar"] = sc.material.cstarScalar;
  m["omega"] = sc.material.omega;
  if (sc.material.hasCstarMatrix)
    m["cstar_matrix"] = from_mat3(sc.material.cstarMatrix);
  json md;
  md["phonon"] = from_tensor4(sc.material.Cph);
  md["phason"] = from_tensor4(sc.material.Kph);
  md["coupling"] = from_tensor4(sc.material.Rc);
  md["alpha"] = sc.material.alpha;
  m["moduli"] = md;
  j["material"] = m;

  json b;
  b["body_force"] = from_vec3(sc.bc.bodyForce);
  json sides = json::array();
  for (int a = 0; a < sc.grid.dim; ++a) {
    if (sc.grid.periodic[a]) continue;
    for (int sd = 0; sd < 2; ++sd)
      for (int ch = 0; ch < 2; ++ch) {
        const ChannelBc& cb = sc.bc.at(a, sd, ch);
        json e;
        e["axis"] = a;
        e["side"] = sd == 0 ? "lo" : "hi";
        e["channel"] = ch == 0 ? "phonon" : "phason";
        switch (cb.kind) {
          case BcKind::Dirichlet:
            e["kind"] = "dirichlet";
            e["value"] = from_vec3(cb.value);
            e["affine"] = from_mat3(cb.affine);
            break;
          case BcKind::Traction:
            e["kind"] = "traction";
            e["value"] = from_vec3(cb.value);
            break;
          case BcKind::Potential:
            e["kind"] = "potential";
            e["stiffness"] = cb.stiffness;
            e["ref"] = from_vec3(cb.ref);
            e["ref_affine"] = from_mat3(cb.refAffine);
            break;
          case BcKind::Periodic:
            break;
        }
        sides.push_back(e);
      }
  }
  b["sides"] = sides;
  j["bc"] = b;

  json ini;
  switch (sc.initial.preset) {
    case InitialPreset::Natural: ini["preset"] = "natural"; break;
    case InitialPreset::SinePhonon: ini["preset"] = "sine_phonon"; break;
    case InitialPreset::SinePhason: ini["preset"] = "sine_phason"; break;
    case InitialPreset::SineBoth: ini["preset"] = "sine_both"; break;
    case InitialPreset::RandomPhason: ini["preset"] = "random_phason"; break;
    case InitialPreset::Bump2D: ini["preset"] = "bump_2d"; break;
  }
  ini["amplitude"] = sc.initial.amplitude;
  ini["wavenumber"] = sc.initial.wavenumber;
  ini["component"] = sc.initial.component;
  ini["velocity_amplitude"] = sc.initial.velocityAmplitude;
  j["initial"] = ini;

  json sim;
  switch (sc.sim.integrator) {
    case Integrator::Verlet: sim["integrator"] = "verlet"; break;
    case Integrator::SplitVerletFriction:
      sim["integrator"] = "split_verlet_friction";
      break;
    case Integrator::ExplicitPhasonDiffusion:
      sim["integrator"] = "explicit_phason_diffusion";
      break;
    case Integrator::SemiImplicitPhasonDiffusion:
      sim["integrator"] = "semi_implicit_phason_diffusion";
      break;
  }
  sim["dt"] = sc.sim.dt;
  sim["cfl"] = sc.sim.cfl;
  sim["dt_fraction"] = sc.sim.cflFraction;
  sim["t_end"] = sc.sim.tEnd;
  sim["max_steps"] = sc.sim.maxSteps;
  sim["output_every"] = sc.sim.outputEvery;
  j["sim"] = sim;

  if (sc.interface.has_value()) {
    const InterfaceSpec& f = *sc.interface;
    json fj;
    fj["center"] = from_vec3(f.center);
    fj["radius"] = f.radius;
    fj["markers"] = f.markers;
    fj["ftilde"] = f.ftilde;
    fj["dt"] = f.dt;
    fj["t_end"] = f.tEnd;
    fj["output_every"] = f.outputEvery;
    fj["couple_bulk"] = f.coupleBulk;
    fj["eps_factor"] = f.epsFactor;
    json su;
    su["kind"] = f.surface.kind == SurfaceKind::Constant ? "constant"
                                                         : "anisotropic_quadratic";
    su["phi0"] = f.surface.phi0;
    su["anisotropy_eps"] = f.surface.anisotropyEps;
    su["anisotropy_axis"] = from_vec3(f.surface.anisotropyAxis);
    su["kf"] = f.surface.kF;
    su["kn"] = f.surface.kN;
    su["kw"] = f.surface.kW;
    fj["surface"] = su;
    j["interface"] = fj;
  }

  json v;
  v["suites"] = sc.verify.suites;
  v["samples"] = sc.verify.samples;
  v["grid_cells"] = sc.verify.gridCells;
  j["verify"] = v;

  return j.dump(2) + "\n";
}

FieldState build_initial_state(const Scenario& sc) {
  const Grid& g = sc.grid;
  FieldState s = FieldState::natural(g);
  const InitialSpec& ini = sc.initial;
  const double twoPi = 6.283185307179586477;
  const double L0 = g.length(0);
  Rng rng(sc.seed, 1);
  const int comp = ini.component;
  for (std::size_t id = 0; id < s.size(); ++id) {
    const Vec3 X = g.coord(id);
    const double ph = twoPi * ini.wavenumber * (X.x - g.origin[0]) / L0;
    switch (ini.preset) {
      case InitialPreset::Natural:
      case InitialPreset::RandomPhason:
        break;
      case InitialPreset::SinePhonon:
        s.x[id][comp] += ini.amplitude * std::sin(ph);
        s.v[id][comp] += ini.velocityAmplitude * std::cos(ph);
        break;
      case InitialPreset::SinePhason:
        s.w[id][comp] += ini.amplitude * std::sin(ph);
        s.wv[id][comp] += ini.velocityAmplitude * std::cos(ph);
        break;
      case InitialPreset::SineBoth:
        s.x[id][comp] += ini.amplitude * std::sin(ph);
        s.w[id][comp] += ini.amplitude * std::sin(ph + 0.7);
        s.v[id][comp] += ini.velocityAmplitude * std::cos(ph);
        s.wv[id][comp] += ini.velocityAmplitude * std::cos(ph + 0.7);
        break;
      case InitialPreset::Bump2D: {
        const double l1 = g.dim > 1 ? g.length(1) : 1.0;
        const double sx = std::sin(3.141592653589793 * (X.x - g.origin[0]) / L0);
        const double sy = g.dim > 1
                              ? std::sin(3.141592653589793 * (X.y - g.origin[1]) / l1)
                              : 1.0;
        const double bump = sx * sx * sy * sy;
        s.x[id][comp] += ini.amplitude * bump;
        s.w[id][(comp + 1) % 3] += 0.7 * ini.amplitude * bump;
        break;
      }
    }
  }
  if (ini.preset == InitialPreset::RandomPhason) {
    // three smooth seeded modes per component
    double a[3][3], phse[3][3];
    for (int mode = 0; mode < 3; ++mode)
      for (int c = 0; c < 3; ++c) {
        a[mode][c] = ini.amplitude * rng.normal();
        phse[mode][c] = rng.uniform(0.0, twoPi);
      }
    for (std::size_t id = 0; id < s.size(); ++id) {
      const Vec3 X = g.coord(id);
      for (int mode = 1; mode <= 3; ++mode)
        for (int c = 0; c < 3; ++c)
          s.w[id][c] += a[mode - 1][c] *
                        std::sin(twoPi * mode * (X.x - g.origin[0]) / L0 +
                                 phse[mode - 1][c]);
    }
  }
  return s;
}

}  // namespace qld
