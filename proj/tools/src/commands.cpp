#include "chiralq_cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/Core>
#include <openssl/opensslv.h>

namespace chiralq::cli {
namespace {

using json = nlohmann::ordered_json;

json num(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json vec_pi(const Vec3& k) { return {k.x() / kPi, k.y() / kPi, k.z() / kPi}; }

json vec5(const Vec5& v) {
  json a = json::array();
  for (int i = 0; i < 5; ++i) a.push_back(v[i]);
  return a;
}

std::string row(std::initializer_list<std::string> cells) {
  std::string s;
  for (const auto& c : cells) {
    if (!s.empty()) s += ',';
    s += c;
  }
  return s + '\n';
}

std::string obj_text(const TriMesh& m) {
  std::ostringstream os;
  write_obj(os, m);
  return os.str();
}

NoiseOptions noise_options(const RunConfig& cfg) {
  NoiseOptions o;
  o.count_model = cfg.poisson ? CountModel::kPoisson : CountModel::kNormal;
  o.signal = cfg.windowed_signal ? SignalModel::kWindowed : SignalModel::kDephased;
  o.n_times = cfg.n_times;
  o.window_start = cfg.window_start;
  o.window_end = cfg.window_end;
  return o;
}

PhotonCalibration calibration(const RunConfig& cfg) {
  return PhotonCalibration::draw(cfg.seed, cfg.n_lo, cfg.n_hi, cfg.repetitions);
}

json calibration_json(const PhotonCalibration& cal) {
  return {{"counts", cal.counts},
          {"repetitions", cal.repetitions},
          {"design_condition", design_condition(cal)}};
}

json mc_json(const McReport& r) {
  json j;
  j["mean"] = num(r.mean);
  j["std"] = num(r.std);
  j["median"] = num(r.median);
  j["n_trials"] = r.n_trials;
  j["n_failed"] = r.n_failed;
  j["failure_fraction"] = r.failure_fraction;
  j["seed"] = r.seed;
  j["insufficient"] = r.insufficient;
  return j;
}

ProbeOptions probe_options(const RunConfig& cfg) {
  return {cfg.probe_step * kPi, cfg.n_probe};
}

BisOptions bis_options(const RunConfig& cfg, int level) {
  BisOptions o;
  o.quench = cfg.quench;
  o.grid_step = cfg.grid_step * kPi;
  o.smooth_width = cfg.smooth_width;
  o.level = level;
  o.source = cfg.exact_field ? FieldSource::kExact : FieldSource::kGrid;
  o.triangle_seed = cfg.triangle_seed;
  return o;
}

json mesh_json(const BisResult& r) {
  json j;
  j["vertices"] = r.mesh.vertex_count();
  j["faces"] = r.mesh.face_count();
  j["euler_characteristic"] = euler_characteristic(r.mesh);
  j["closed_manifold"] = is_closed_manifold(r.mesh);
  j["max_vertex_residual [t_0]"] = r.max_residual;
  j["surface_residual_per_level [t_0]"] = r.level_residuals;
  j["flagged_vertices"] = r.flagged;
  return j;
}

std::string grid_csv(const ScalarGrid& g) {
  std::string s = row({"kx [pi]", "ky [pi]", "kz [pi]", "value [1]"});
  for (int i = 0; i < g.dims[0]; ++i)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int k = 0; k < g.dims[2]; ++k) {
        const Vec3 x = g.point(i, j, k) / kPi;
        s += row({fmt(x.x()), fmt(x.y()), fmt(x.z()), fmt(g.at(i, j, k))});
      }
  return s;
}

std::string texture_csv(const TriMesh& m, const TextureField& f,
                        const char* name) {
  std::vector<std::string> head = {"kx [pi]", "ky [pi]", "kz [pi]"};
  for (int c = 0; c < f.components; ++c)
    head.push_back(std::string(name) + std::to_string(c + 1) + " [1]");
  head.push_back("slope_norm [1/pi]");
  std::string s;
  for (std::size_t i = 0; i < head.size(); ++i) s += (i ? "," : "") + head[i];
  s += '\n';
  for (std::size_t v = 0; v < m.vertices.size(); ++v) {
    const Vec3 k = m.vertices[v] / kPi;
    s += fmt(k.x()) + ',' + fmt(k.y()) + ',' + fmt(k.z());
    for (int c = 0; c < f.components; ++c) s += ',' + fmt(f.vectors[v][c]);
    s += ',' + fmt(f.raw_norms[v] * kPi) + '\n';
  }
  return s;
}

std::optional<int> oracle_winding(const ModelParams& p) {
  if (p.h_4 != 0.0) return std::nullopt;
  try {
    return equilibrium_winding(p);
  } catch (const GapClosedError&) {
    return std::nullopt;
  }
}

double winding_value(const TriMesh& mesh, const ModelParams& p,
                     const ProbeOptions& probe, const AverageFn& avg = {}) {
  return winding_W(mesh, g_field(mesh, p, probe, avg)).value;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = (i == n - 1) ? b : a + (b - a) * i / (n - 1);
  return out;
}

}  // namespace

json cmd_polarization(const RunConfig& cfg, OutputSet& out) {
  const ModelParams& p = cfg.model;
  const Vec3 k = cfg.pol_k * kPi;
  const HVector h = h_vector(k, p);
  const PreparedState init = init_state(k, p, cfg.quench);
  const auto times = linspace(cfg.t_start, cfg.t_end, cfg.t_samples);
  const OscillationParts osc = oscillation_parts(h, init.psi);
  const DephasingModel damp{cfg.rate_fast, cfg.rate_slow, cfg.t_start, cfg.t_end};
  const bool damped = cfg.rate_fast > 0.0 || cfg.rate_slow > 0.0;

  std::optional<ReadoutEmulator> em;
  if (cfg.noise)
    em.emplace(p, calibration(cfg), noise_options(cfg), trial_seed(cfg.seed, 0));
  std::mt19937_64 gen(trial_seed(cfg.seed, 1));

  std::string csv = "t [1/t_0]";
  for (int j = 0; j < 5; ++j) csv += ",exact_g" + std::to_string(j) + " [1]";
  if (damped)
    for (int j = 0; j < 5; ++j) csv += ",damped_g" + std::to_string(j) + " [1]";
  if (em)
    for (int j = 0; j < 5; ++j) csv += ",noisy_g" + std::to_string(j) + " [1]";
  csv += '\n';
  Vec5 series_sum = Vec5::Zero();
  for (double t : times) {
    const State psi = evolve_state(h, init.psi, t);
    const PolarizationVector pv = polarization(psi);
    series_sum += pv.p;
    csv += fmt(t);
    for (int j = 0; j < 5; ++j) csv += ',' + fmt(pv[j]);
    if (damped)
      for (int j = 0; j < 5; ++j) {
        const double ph = osc.frequency * t;
        const double v = osc.constant[j] + std::exp(-damp.rate_for(j) * t) *
                                               (osc.cos_part[j] * std::cos(ph) +
                                                osc.sin_part[j] * std::sin(ph));
        csv += ',' + fmt(v);
      }
    if (em)
      for (int j = 0; j < 5; ++j)
        csv += ',' + fmt(em->read(readout_populations(psi, j), j, gen));
    csv += '\n';
  }
  out.write("polarization.csv", csv);

  const TimeAverage avg = time_avg_polarization(h, init.psi);
  json s;
  s["k [pi]"] = vec_pi(k);
  s["h [t_0]"] = vec5(h.h);
  s["energy [t_0]"] = h.energy();
  s["band_sign"] = init.band_sign;
  s["gap_closed"] = avg.gap_closed;
  s["time_average [1]"] = vec5(avg.value.p);
  s["series_mean [1]"] = vec5(series_sum / static_cast<double>(times.size()));
  s["window_average [1]"] = vec5(windowed_avg_polarization(h, init.psi, damp, cfg.t_samples).p);
  try {
    s["t_max [1/t_0]"] = t_max(p);
  } catch (const DomainError&) {
    s["t_max [1/t_0]"] = nullptr;
  }
  if (em) {
    const PhotonCalibration truth = em->truth();
    const NoiseOptions nopt = noise_options(cfg);
    json mc = json::array();
    for (int j = 0; j < 5; ++j) {
      const McReport r = mc_propagate(
          [&](std::uint64_t seed) {
            return ReadoutEmulator(p, truth, nopt, seed).measure(k, cfg.quench, j);
          },
          cfg.trials, cfg.seed);
      mc.push_back(mc_json(r));
    }
    s["calibration"] = calibration_json(truth);
    s["noisy_time_average"] = mc;
  }
  out.write_json("polarization.json", s);
  return {{"time_average_g0 [1]", avg.value[0]}};
}

json cmd_bis(const RunConfig& cfg, OutputSet& out) {
  const BisResult r = reconstruct_bis(cfg.model, bis_options(cfg, cfg.level));
  out.write("bis.obj", obj_text(r.mesh));
  out.write("bis_octant.obj", obj_text(r.octant));
  out.write("grid.csv", grid_csv(r.grid));
  json s = mesh_json(r);
  out.write_json("bis.json", s);
  return s;
}

json cmd_winding(const RunConfig& cfg, OutputSet& out) {
  const ModelParams& p = cfg.model;
  const auto oracle = oracle_winding(p);
  json s;
  s["m_z [t_0]"] = p.m_z;
  s["oracle"] = oracle ? json(*oracle) : json(nullptr);
  BisResult r;
  try {
    r = reconstruct_bis(p, bis_options(cfg, cfg.level));
  } catch (const BisAbsentError& e) {
    s["W"] = 0.0;
    s["rounded"] = 0;
    s["note"] = std::string("no BIS: ") + e.what();
    out.write_json("winding.json", s);
    return s;
  }
  const ProbeOptions probe = probe_options(cfg);
  const TextureField g = g_field(r.mesh, p, probe);
  const WindingResult w = winding_W(r.mesh, g);
  out.write("bis.obj", obj_text(r.mesh));
  out.write("texture.csv", texture_csv(r.mesh, g, "g"));
  s["W"] = w.value;
  s["rounded"] = std::lround(w.value);
  if (g.components == 4) s["W_SB"] = winding_WSB(r.mesh, g).value;
  s["mesh"] = mesh_json(r);
  s["degenerate_vertices"] = g.degenerate.size();
  s["warnings"] = w.warnings;
  if (cfg.noise) {
    const PhotonCalibration truth = calibration(cfg);
    const NoiseOptions nopt = noise_options(cfg);
    const McReport mc = mc_propagate(
        [&](std::uint64_t seed) {
          const ReadoutEmulator em(p, truth, nopt, seed);
          return winding_value(r.mesh, p, probe, em.averager());
        },
        cfg.trials, cfg.seed);
    json m = mc_json(mc);
    if (oracle && !mc.samples.empty()) {
      int hits = 0;
      for (double x : mc.samples) hits += std::lround(x) == *oracle;
      m["fraction_rounding_to_oracle"] = static_cast<double>(hits) / mc.samples.size();
    }
    s["calibration"] = calibration_json(truth);
    s["noisy"] = m;
  }
  out.write_json("winding.json", s);
  return {{"W", w.value}};
}

json cmd_charges(const RunConfig& cfg, OutputSet& out) {
  const ModelParams& p = cfg.model;
  const double depth = cfg.charge_depth;
  LocateOptions lo;
  lo.step = cfg.charge_step * kPi;
  std::vector<ChargeRecord> charges = locate_charges(p, depth, Region::full_bz(), lo);
  for (auto& c : charges) c.value = charge_value(c.location, p, depth);

  json s;
  s["depth [t_0]"] = num(depth);
  s["count"] = charges.size();
  EnclosureReport rep;
  bool bis = true;
  try {
    BisOptions bo = bis_options(cfg, cfg.charge_level);
    bo.quench = QuenchSpec::deep(0);
    const BisResult r = reconstruct_bis(p, bo);
    rep = enclosed_total(r.mesh, charges, p);
  } catch (const BisAbsentError&) {
    bis = false;
  }
  std::string csv = row({"label", "kx [pi]", "ky [pi]", "kz [pi]", "h0 [t_0]",
                         "value", "enclosed"});
  int total = 0;
  for (const auto& c : charges) {
    const Vec3 k = c.location / kPi;
    csv += row({c.label, fmt(k.x()), fmt(k.y()), fmt(k.z()),
                fmt(h_vector(c.location, p)[0]), std::to_string(c.value),
                c.enclosed ? "1" : "0"});
    total += c.value;
  }
  out.write("charges.csv", csv);
  s["total_all"] = total;
  s["enclosed_total"] = bis ? rep.total : 0;
  s["bis_present"] = bis;
  s["ambiguous"] = rep.ambiguous;
  s["raycast_total"] = rep.raycast_total ? json(*rep.raycast_total) : json(nullptr);
  if (cfg.noise) s["noise"] = "charges use exact averages; noise is not applied";
  out.write_json("charges.json", s);
  return {{"count", charges.size()}, {"enclosed_total", s["enclosed_total"]}};
}

json cmd_transition(const RunConfig& cfg, OutputSet& out) {
  const ModelParams& p = cfg.model;
  const Vec3 k0 = diagonal_bis_point(p);
  TransitionOptions ex;
  ex.n_scan = cfg.n_scan;
  ex.tolerance = cfg.m_tolerance;
  ex.probe = probe_options(cfg);
  TransitionOptions pr = ex;
  pr.method = SlopeMethod::kProbe;
  const TransitionScan se = transition_scan(p, cfg.m_lo, cfg.m_hi, k0, ex);
  const TransitionScan sp = transition_scan(p, cfg.m_lo, cfg.m_hi, k0, pr);

  std::string scan = row({"m_i [t_0]", "projection_exact [1]", "projection_probe [1]"});
  for (std::size_t i = 0; i < se.depths.size(); ++i)
    scan += row({fmt(se.depths[i]), fmt(se.projections[i]), fmt(sp.projections[i])});
  out.write("scan.csv", scan);

  json s;
  s["k0 [pi]"] = vec_pi(k0);
  s["m_c_exact [t_0]"] = se.m_c;
  s["m_c_probe [t_0]"] = sp.m_c;

  std::string track = row({"segment", "m_i [t_0]", "s [1]", "kx [pi]", "ky [pi]",
                           "kz [pi]", "h0_sign"});
  json tracks = json::object();
  for (const Segment& seg : {o1_o8_segment(), o3_o6_segment()}) {
    const TrackResult tr = track_charges(p, cfg.track_depths, seg);
    for (const auto& smp : tr.samples)
      for (std::size_t z = 0; z < smp.s.size(); ++z) {
        const Vec3 k = smp.k[z] / kPi;
        track += row({seg.name, fmt(smp.depth), fmt(smp.s[z]), fmt(k.x()),
                      fmt(k.y()), fmt(k.z()), std::to_string(smp.h0_sign[z])});
      }
    tracks[seg.name] = {{"bis_crossings [t_0]", tr.crossings},
                        {"annihilations [t_0]", tr.annihilations},
                        {"gaps", tr.gaps}};
  }
  out.write("track.csv", track);
  s["tracking"] = tracks;

  if (cfg.noise) {
    const PhotonCalibration truth = calibration(cfg);
    const NoiseOptions nopt = noise_options(cfg);
    const McReport mc = mc_propagate(
        [&](std::uint64_t seed) {
          const ReadoutEmulator em(p, truth, nopt, seed);
          return noisy_transition_estimate(p, em, cfg.noisy_depths, k0, ex.probe);
        },
        cfg.trials, cfg.seed);
    s["calibration"] = calibration_json(truth);
    s["noisy_m_c [t_0]"] = mc_json(mc);
  }
  out.write_json("transition.json", s);
  return {{"m_c_exact [t_0]", se.m_c}};
}

json cmd_phase_diagram(const RunConfig& cfg, OutputSet& out) {
  const int n = static_cast<int>(std::floor((cfg.phase_hi - cfg.phase_lo) / cfg.phase_step + 1e-9)) + 1;
  std::string csv = row({"m_z [t_0]", "W", "rounded", "oracle", "status"});
  int agree = 0, compared = 0;
  json jumps = json::array();
  std::optional<long> prev;
  double prev_m = 0.0;
  for (int i = 0; i < n; ++i) {
    ModelParams p = cfg.model;
    // Rounded to kill the drift of repeated addition; the sweep stays on
    // the configured lattice.
    p.m_z = std::round((cfg.phase_lo + i * cfg.phase_step) * 1e9) / 1e9;
    const double r = p.m_z / p.t_0;
    const bool boundary = std::abs(std::abs(r) - 1.0) < 1e-9 ||
                          std::abs(std::abs(r) - 3.0) < 1e-9;
    if (boundary) {
      csv += row({fmt(p.m_z), "", "", "", "gap_closed"});
      continue;
    }
    const auto oracle = oracle_winding(p);
    std::string status = "ok";
    double W = 0.0;
    try {
      const BisResult b = reconstruct_bis(p, bis_options(cfg, cfg.phase_level));
      W = winding_value(b.mesh, p, probe_options(cfg));
    } catch (const BisAbsentError&) {
      status = "no_bis";
    } catch (const Error& e) {
      status = std::string("failed: ") + e.what();
      for (char& c : status)
        if (c == ',') c = ';';
    }
    const bool failed = status.rfind("failed", 0) == 0;
    const long rounded = std::lround(W);
    csv += row({fmt(p.m_z), failed ? "" : fmt(W), failed ? "" : std::to_string(rounded),
                oracle ? std::to_string(*oracle) : "", status});
    if (failed) continue;
    if (oracle) {
      ++compared;
      agree += rounded == *oracle;
    }
    if (prev && *prev != rounded)
      jumps.push_back({{"between [t_0]", {prev_m, p.m_z}}, {"from", *prev}, {"to", rounded}});
    prev = rounded;
    prev_m = p.m_z;
  }
  out.write("phase.csv", csv);
  json s;
  s["points"] = n;
  s["compared"] = compared;
  s["agree_with_oracle"] = agree;
  s["jumps"] = jumps;
  out.write_json("phase.json", s);
  return {{"agree_with_oracle", agree}, {"compared", compared}};
}

std::vector<std::string> command_names() {
  return {"polarization", "bis", "winding", "charges", "transition", "phase-diagram"};
}

Command find_command(const std::string& name) {
  static const std::map<std::string, Command> table = {
      {"polarization", &cmd_polarization}, {"bis", &cmd_bis},
      {"winding", &cmd_winding},           {"charges", &cmd_charges},
      {"transition", &cmd_transition},     {"phase-diagram", &cmd_phase_diagram}};
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown command '" + name + "'");
  return it->second;
}

json run_command(const std::string& name, const RunConfig& cfg) {
  const Command cmd = find_command(name);
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  OutputSet out(cfg.out_dir);
  const json summary = cmd(cfg, out);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json m;
  m["tool"] = "chiralq";
  m["command"] = name;
  m["seed"] = cfg.seed;
  m["noise"] = cfg.noise ? "on" : "off";
  m["threads"] = thread_count();
  m["versions"] = {{"chiralq", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                 std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"openssl", OPENSSL_VERSION_TEXT},
                   {"compiler", __VERSION__}};
  m["config"] = cfg.echo();
  m["summary"] = summary;
  m["wall_time_s"] = wall;
  return out.commit(m);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const Error*>(&e)) return 3;
  return 1;
}

}  // namespace chiralq::cli
