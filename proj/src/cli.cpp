#include "hypwave/cli.hpp"

#include "hypwave/csv.hpp"
#include "hypwave/error.hpp"
#include "hypwave/fem.hpp"
#include "hypwave/mesh.hpp"
#include "hypwave/quotient.hpp"
#include "hypwave/solver.hpp"
#include "hypwave/spectral.hpp"
#include "hypwave/timestepper.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;

namespace hypwave {

std::uint64_t fnv1a_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ValidationError("cannot open '" + path.string() + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string fourier_file_name(double omega) {
  return fmt::format("fourier_{}.csv", omega);
}

namespace {

void print_quality(std::ostream &out, const MeshQuality &q) {
  fmt::print(out, "vertices      {}\n", q.n_vertices);
  fmt::print(out, "max edge      {:.6f}\n", q.max_hyp_edge);
  fmt::print(out, "min edge      {:.6f}\n", q.min_hyp_edge);
  fmt::print(out, "edge ratio    {:.4f}\n", q.max_hyp_edge / q.min_hyp_edge);
  fmt::print(out, "area / 4 pi   {:.8f}\n", q.area_ratio);
}

std::string read_file(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void ensure_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw ValidationError("cannot create output directory '" + dir.string() +
                          "'");
}

void write_atomically(const fs::path &path, const std::string &text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out)
      throw ValidationError("cannot write '" + tmp.string() + "'");
    out << text;
    if (!out)
      throw ValidationError("error while writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

// -- mesh -------------------------------------------------------------------

struct MeshGenArgs {
  double h = 0.0;
  std::string out;
};

void cmd_mesh_gen(const MeshGenArgs &a, std::ostream &out) {
  const Mesh m = generate_mesh(a.h);
  save_mesh(m, a.out);
  print_quality(out, mesh_quality(m));
  fmt::print(out, "dofs          {}\n", build_dof_map(m).n_dofs);
}

void cmd_mesh_check(const std::string &path, std::ostream &out) {
  const Mesh m = load_mesh(path);
  print_quality(out, mesh_quality(m));
  fmt::print(out, "dofs          {}\n", build_dof_map(m).n_dofs);
  fmt::print(out, "{}: ok\n", path);
}

// -- run --------------------------------------------------------------------

struct RunArgs {
  std::string mesh;
  std::string config;
  std::string preset;
  std::string out = ".";
};

void cmd_run(const RunArgs &a, std::ostream &out) {
  const auto t0 = std::chrono::steady_clock::now();
  SimConfig cfg = a.preset.empty() ? SimConfig{} : preset_config(a.preset);
  if (!a.config.empty()) {
    try {
      cfg.apply_text(read_file(a.config));
    } catch (const ValidationError &e) {
      throw ValidationError(a.config + ": " + e.what());
    }
  }
  const Mesh m = load_mesh(a.mesh);
  const DofMap dm = build_dof_map(m);
  const AssembledSystem sys = assemble(m, dm, cfg.damping());
  const SimulationResult res = run_simulation(cfg, m, dm, sys);

  const fs::path dir = a.out;
  ensure_dir(dir);
  std::vector<std::string> outputs;

  CsvTable energy{{"t", "E"}, {}};
  for (const auto &[t, e] : res.energy)
    energy.rows.push_back({t, e});
  write_csv(dir / "energy.csv", energy);
  outputs.push_back("energy.csv");

  CsvTable probes;
  probes.header.push_back("t");
  for (std::size_t p = 0; p < res.probes.dofs.size(); ++p)
    probes.header.push_back(fmt::format("probe_{}", p));
  for (std::size_t k = 0; k < res.probes.length(); ++k) {
    std::vector<double> row{(res.probes.start_step + static_cast<long>(k)) *
                            res.dt};
    for (const auto &s : res.probes.samples)
      row.push_back(s[k]);
    probes.rows.push_back(std::move(row));
  }
  write_csv(dir / "probes.csv", probes);
  outputs.push_back("probes.csv");

  for (std::size_t w = 0; w < res.fourier.omegas.size(); ++w) {
    CsvTable f{{"x", "y", "re", "im"}, {}};
    const auto &field = res.fourier.fields[w];
    for (std::size_t v = 0; v < m.n_vertices(); ++v) {
      const auto c = field[dm.vertex_to_dof[v]];
      f.rows.push_back({m.points[v].x(), m.points[v].y(), c.real(), c.imag()});
    }
    const std::string name = fourier_file_name(res.fourier.omegas[w]);
    write_csv(dir / name, f);
    outputs.push_back(name);
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  nlohmann::ordered_json j;
  nlohmann::ordered_json snap = nlohmann::ordered_json::object();
  for (const auto &[k, v] : cfg.snapshot())
    snap[k] = v;
  j["config"] = snap;
  j["preset"] = a.preset.empty() ? "none" : a.preset;
  j["mesh"] = a.mesh;
  j["mesh_checksum"] = fmt::format("{:016x}", fnv1a_file(a.mesh));
  j["n_dofs"] = dm.n_dofs;
  j["dt"] = res.dt;
  j["dt_max"] = res.dt_max;
  j["n_steps"] = res.n_steps;
  j["record_start"] = res.record_start;
  j["record_end"] = res.record_end;
  j["cg_iterations"] = res.cg_iterations;
  j["outputs"] = outputs;
  j["wall_time_s"] = wall;
  write_atomically(dir / "manifest.json", j.dump(2) + "\n");

  fmt::print(out, "dofs {}  dt {:.6g}  dt_max {:.6g}  steps {}\n", dm.n_dofs,
             res.dt, res.dt_max, res.n_steps);
  if (!res.energy.empty())
    fmt::print(out, "E(0) {:.10g}  E(end) {:.10g}\n", res.energy.front().second,
               res.energy.back().second);
  fmt::print(out, "wrote {} files to {}\n", outputs.size() + 1, dir.string());
}

// -- spectrum ---------------------------------------------------------------

struct SpectrumArgs {
  std::string probes;
  std::string column = "probe_0";
  std::string out = ".";
  int peaks = 6;
  double min_sep = 0.2;
  bool refine = false;
};

void cmd_spectrum(const SpectrumArgs &a, std::ostream &out) {
  const CsvTable t = read_csv(fs::path(a.probes));
  if (t.rows.size() < 2)
    throw ValidationError(a.probes + ": need at least two samples");
  const int tc = t.column("t");
  if (tc < 0)
    throw ValidationError(a.probes + ": no 't' column");
  int col = t.column(a.column);
  if (col < 0) {
    // Accept a bare probe index.
    std::size_t used = 0;
    int idx = -1;
    try {
      idx = std::stoi(a.column, &used);
    } catch (const std::exception &) {
    }
    if (used == a.column.size() && idx >= 0)
      col = t.column(fmt::format("probe_{}", idx));
  }
  if (col < 0 || col == tc)
    throw ValidationError(
        fmt::format("{}: no column '{}'", a.probes, a.column));

  const std::vector<double> time = t.column_values(tc);
  const double dt = (time.back() - time.front()) /
                    static_cast<double>(time.size() - 1);
  if (!(dt > 0.0))
    throw ValidationError(a.probes + ": time column is not increasing");
  const Spectrum spec = dft_power(t.column_values(col), dt);
  const std::vector<Peak> peaks = find_peaks(spec, a.peaks, a.min_sep, a.refine);

  const fs::path dir = a.out;
  ensure_dir(dir);
  CsvTable s{{"q", "power"}, {}};
  for (long j = 0; j <= spec.n / 2; ++j)
    s.rows.push_back({spec.q_of_bin(static_cast<double>(j)), spec.power[j]});
  write_csv(dir / "spectrum.csv", s);
  CsvTable p{{"q", "power", "uncertainty"}, {}};
  for (const Peak &pk : peaks)
    p.rows.push_back({pk.q, pk.power, pk.uncertainty});
  write_csv(dir / "peaks.csv", p);

  fmt::print(out, "N {}  dt {:.6g}  bin width {:.6g}\n", spec.n, dt,
             spec.bin_width());
  for (const Peak &pk : peaks)
    fmt::print(out, "q {:.4f} +- {:.4f}  power {:.6e}\n", pk.q, pk.uncertainty,
               pk.power);
}

// -- eig --------------------------------------------------------------------

struct EigArgs {
  std::string mesh;
  int count = 10;
  std::string out;
};

void cmd_eig(const EigArgs &a, std::ostream &out) {
  const Mesh m = load_mesh(a.mesh);
  const DofMap dm = build_dof_map(m);
  if (dm.n_dofs > kDenseEigenCap)
    throw UsageError(fmt::format(
        "{} dofs exceeds the dense eigensolver cap of {}; use a coarser mesh",
        dm.n_dofs, kDenseEigenCap));
  const AssembledSystem sys = assemble(m, dm);
  const auto pairs = dense_generalized_eigs(sys.stiffness, sys.mass, a.count);
  CsvTable t{{"index", "q", "eigenvalue"}, {}};
  fmt::print(out, "{:>5}  {:>12}  {:>14}\n", "index", "q", "q^2");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    fmt::print(out, "{:>5}  {:>12.6f}  {:>14.6f}\n", i, pairs[i].q,
               pairs[i].eigenvalue);
    t.rows.push_back(
        {static_cast<double>(i), pairs[i].q, pairs[i].eigenvalue});
  }
  if (!a.out.empty())
    write_csv(fs::path(a.out), t);
}

// -- eigenfunction ----------------------------------------------------------

struct EigenfunctionArgs {
  std::string mesh;
  std::string fourier;
  double omega = 0.0;
  std::string out;
};

void cmd_eigenfunction(const EigenfunctionArgs &a, std::ostream &out) {
  const Mesh m = load_mesh(a.mesh);
  const DofMap dm = build_dof_map(m);
  const CsvTable t = read_csv(fs::path(a.fourier));
  const int re_col = t.column("re");
  const int im_col = t.column("im");
  if (re_col < 0 || im_col < 0)
    throw ValidationError(a.fourier + ": expected columns re and im");
  if (t.rows.size() != m.n_vertices())
    throw ValidationError(
        fmt::format("{}: {} rows but the mesh has {} vertices", a.fourier,
                    t.rows.size(), m.n_vertices()));

  const std::vector<double> re = dm.restrict_to_dofs(t.column_values(re_col));
  const std::vector<double> im = dm.restrict_to_dofs(t.column_values(im_col));
  FourierAccumulator acc({a.omega}, dm.n_dofs, 0, 0, 0.0);
  for (int d = 0; d < dm.n_dofs; ++d)
    acc.fields[0][d] = {re[d], im[d]};

  const AssembledSystem sys = assemble(m, dm);
  const Eigenfunction ef = extract_eigenfunction(acc, sys.mass, a.omega);
  const double rayleigh = sys.stiffness.bilinear(ef.field, ef.field);

  const std::vector<double> values = dm.expand(ef.field);
  CsvTable f{{"x", "y", "value"}, {}};
  for (std::size_t v = 0; v < m.n_vertices(); ++v)
    f.rows.push_back({m.points[v].x(), m.points[v].y(), values[v]});
  write_csv(fs::path(a.out), f);

  fmt::print(out, "omega {}  norm {:.6e}  rayleigh q {:.6f}\n", a.omega,
             ef.norm, std::sqrt(std::max(rayleigh, 0.0)));
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"Damped wave equation on the genus-2 Bolza surface"};
  app.name("hypwave");
  app.require_subcommand(1);

  CLI::App *mesh = app.add_subcommand("mesh", "Generate or check meshes");
  mesh->require_subcommand(1);
  MeshGenArgs gen;
  CLI::App *gen_cmd = mesh->add_subcommand("gen", "Generate a mesh");
  gen_cmd->set_help_flag("--help", "Print this help message and exit");
  gen_cmd->add_option("--h", gen.h, "Target hyperbolic edge length")
      ->required();
  gen_cmd->add_option("--out", gen.out, "Output mesh file")->required();
  std::string check_path;
  CLI::App *check_cmd = mesh->add_subcommand("check", "Validate a mesh file");
  check_cmd->add_option("mesh", check_path, "Mesh file")->required();

  RunArgs run;
  CLI::App *run_cmd = app.add_subcommand("run", "Run a simulation");
  run_cmd->add_option("--mesh", run.mesh, "Mesh file")->required();
  run_cmd->add_option("--config", run.config, "Config file (key = value)");
  run_cmd->add_option("--preset", run.preset, "conservation | eigen | damped");
  run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();

  SpectrumArgs spec;
  CLI::App *spec_cmd = app.add_subcommand("spectrum", "DFT of a probe signal");
  spec_cmd->add_option("--probes", spec.probes, "probes.csv")->required();
  spec_cmd->add_option("--column", spec.column, "Column name or probe index")->capture_default_str();
  spec_cmd->add_option("--out", spec.out, "Output directory")->capture_default_str();
  spec_cmd->add_option("--peaks", spec.peaks, "Number of peaks")->capture_default_str()
      ->check(CLI::PositiveNumber);
  spec_cmd->add_option("--min-sep", spec.min_sep,
                       "Minimum peak separation in q")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  spec_cmd->add_flag("--refine", spec.refine, "Parabolic peak refinement");

  EigArgs eig;
  CLI::App *eig_cmd =
      app.add_subcommand("eig", "Dense generalized eigenvalues (oracle)");
  eig_cmd->add_option("--mesh", eig.mesh, "Mesh file")->required();
  eig_cmd->add_option("--count", eig.count, "Number of eigenpairs")->capture_default_str()
      ->check(CLI::PositiveNumber);
  eig_cmd->add_option("--out", eig.out, "Optional CSV output");

  EigenfunctionArgs ef;
  CLI::App *ef_cmd = app.add_subcommand(
      "eigenfunction", "Eigenfunction from an accumulated Fourier field");
  ef_cmd->add_option("--mesh", ef.mesh, "Mesh file")->required();
  ef_cmd->add_option("--fourier", ef.fourier, "fourier_<omega>.csv")
      ->required();
  ef_cmd->add_option("--omega", ef.omega, "Frequency of the field")
      ->required();
  ef_cmd->add_option("--out", ef.out, "Output CSV (x,y,value)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (*gen_cmd)
      cmd_mesh_gen(gen, out);
    else if (*check_cmd)
      cmd_mesh_check(check_path, out);
    else if (*run_cmd)
      cmd_run(run, out);
    else if (*spec_cmd)
      cmd_spectrum(spec, out);
    else if (*eig_cmd)
      cmd_eig(eig, out);
    else if (*ef_cmd)
      cmd_eigenfunction(ef, out);
    return 0;
  } catch (const UsageError &e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return 1;
  } catch (const ValidationError &e) {
    fmt::print(err, "invalid input: {}\n", e.what());
    return 2;
  } catch (const NumericalError &e) {
    fmt::print(err, "numerical failure: {}\n", e.what());
    return 3;
  } catch (const std::invalid_argument &e) {
    fmt::print(err, "invalid input: {}\n", e.what());
    return 2;
  } catch (const std::exception &e) {
    fmt::print(err, "error: {}\n", e.what());
    return 3;
  }
}

} // namespace hypwave
