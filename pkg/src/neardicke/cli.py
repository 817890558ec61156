"""Command-line experiment runner.

Subcommands: coupling, evolve, trajectories, timescales, validate.  Each run
reads a single JSON experiment spec (schema below), writes RFC-4180 CSV
artifacts plus gnuplot stubs into the output directory, and finishes with a
manifest (spec SHA-256, tool version, seed, wall time).  All randomness flows
through one seed recorded in the manifest, and re-running a spec reproduces
byte-identical CSVs.

Spec schema (schema_version 1)::

    {
      "schema_version": 1,
      "kind": "coupling" | "evolve" | "trajectories" | "timescales" | "validate",
      "geometry": {
         "type": "chain" | "triangle" | "positions",
         "n_atoms": int, "spacing_xi": float,
         "axis_parallel_to_dipole": bool,            # chain only
         "positions": [[x,y,z], ...],                # positions only (units 1/k0)
         "dipole_direction": [x,y,z]                 # positions only
      },
      "coupling": {
         "mode": "unregularized" | "regularized" | "dicke_expansion" | "none",
         "lambda_perp_over_k0": float, "lambda_par_over_k0": float,
         "gamma": float, "eta": float                # eta only for coupling scans
      },
      "numerics": { ... subcommand-specific, see _run_* below ... },
      "output": { "prefix": str }
    }

Unknown keys anywhere in the document are rejected.  Exit codes: 0 success,
2 validation failure, 1 any other error.

Output columns carry explicit unit suffixes: times are reported as
t_in_inv_gamma (units 1/gamma), rates as *_per_gamma, and energy shifts as
*_over_E0 (units of the ground-state energy scale E0).  The timescales CSV
uses the fixed column set n_atoms, spacing_lambda0, xi, t_dicke, t_rate,
ratio, min_gamma_ratio, validity_flag (all times in 1/gamma).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, acceptance, analysis, coupling, geometry, master, operators, trajectories

__all__ = ["main", "run"]

SCHEMA_VERSION = 1


class SpecError(ValueError):
    """Malformed experiment spec."""


def _require_keys(block: dict, allowed: set[str], required: set[str], where: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise SpecError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = required - set(block)
    if missing:
        raise SpecError(f"missing keys in {where}: {sorted(missing)}")


def _load_spec(path: Path) -> dict:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec is not valid JSON: line {exc.lineno}, column {exc.colno}: {exc.msg}")
    if not isinstance(doc, dict):
        raise SpecError("spec document must be a JSON object")
    _require_keys(
        doc,
        {"schema_version", "kind", "geometry", "coupling", "numerics", "output"},
        {"schema_version", "kind"},
        "spec root",
    )
    version = doc["schema_version"]
    if not isinstance(version, int) or version < 1:
        raise SpecError("schema_version must be a positive integer")
    if version > SCHEMA_VERSION:
        raise SpecError(
            f"spec schema_version {version} is newer than supported version {SCHEMA_VERSION}"
        )
    return doc


def _build_geometry(block: dict) -> geometry.AtomConfig:
    _require_keys(
        block,
        {"type", "n_atoms", "spacing_xi", "axis_parallel_to_dipole", "positions", "dipole_direction"},
        {"type"},
        "geometry",
    )
    kind = block["type"]
    if kind == "chain":
        _require_keys(block, {"type", "n_atoms", "spacing_xi", "axis_parallel_to_dipole"},
                      {"type", "n_atoms", "spacing_xi"}, "geometry(chain)")
        return geometry.linear_chain(
            int(block["n_atoms"]),
            float(block["spacing_xi"]),
            axis_parallel_to_dipole=bool(block.get("axis_parallel_to_dipole", False)),
        )
    if kind == "triangle":
        _require_keys(block, {"type", "spacing_xi"}, {"type", "spacing_xi"}, "geometry(triangle)")
        return geometry.equilateral_triangle(float(block["spacing_xi"]))
    if kind == "positions":
        _require_keys(block, {"type", "positions", "dipole_direction"},
                      {"type", "positions", "dipole_direction"}, "geometry(positions)")
        return geometry.AtomConfig(
            positions=np.asarray(block["positions"], dtype=float),
            dipole_direction=np.asarray(block["dipole_direction"], dtype=float),
        )
    raise SpecError(f"unknown geometry type {kind!r}")


def _build_params(block: dict) -> coupling.CouplingParams:
    _require_keys(
        block,
        {"mode", "lambda_perp_over_k0", "lambda_par_over_k0", "gamma", "eta"},
        set(),
        "coupling",
    )
    kwargs = {k: block[k] for k in ("mode", "lambda_perp_over_k0", "lambda_par_over_k0", "gamma") if k in block}
    return coupling.CouplingParams(**kwargs)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)  # RFC-4180: CRLF line endings, '.' decimals
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(c) for c in row])


def _format_cell(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return value


def _write_gnuplot_stub(path: Path, csv_name: str, lines: list[str]) -> None:
    text = "\n".join(
        [
            "# gnuplot stub; adjust styles as needed",
            "set datafile separator ','",
            f"# data: {csv_name}",
            *lines,
            "",
        ]
    )
    path.write_text(text, encoding="utf-8")


def _initial_state(name: str, n_atoms: int) -> np.ndarray:
    dim = 2**n_atoms
    if name in ("b", "c", "d"):
        if n_atoms != 3:
            raise SpecError(f"initial state {name!r} requires exactly 3 atoms")
        b, c, d = operators.dicke_basis_three()
        return {"b": b, "c": c, "d": d}[name]
    if name == "all_excited":
        psi = np.zeros(dim, dtype=complex)
        psi[dim - 1] = 1.0
        return psi
    if set(name) <= {"0", "1"} and len(name) == n_atoms:
        psi = np.zeros(dim, dtype=complex)
        psi[int(name, 2)] = 1.0
        return psi
    raise SpecError(
        f"initial_state must be 'b'/'c'/'d' (3 atoms), 'all_excited', or an {n_atoms}-character bit string"
    )


def _model_hamiltonian(numerics: dict, mats: coupling.CouplingMatrices) -> np.ndarray | None:
    """Optional reduced three-level mixing model instead of the full Hamiltonian."""
    model = numerics.get("model", "full")
    if model == "full":
        return None
    if model != "three_level":
        raise SpecError("model must be 'full' or 'three_level'")
    if mats.n_atoms != 3:
        raise SpecError("the three-level model requires exactly 3 atoms")
    d = mats.delta_total
    h3 = operators.three_atom_mixing_hamiltonian(d[0, 1], d[1, 2], d[0, 2], include_diagonal=False)
    return operators.embed_in_full(h3, operators.dicke_basis_three())


# ---------------------------------------------------------------------------
# Subcommand implementations; each returns a list of written files.
# ---------------------------------------------------------------------------


def _run_coupling(doc: dict, out: Path, prefix: str, seed: int) -> list[Path]:
    params = _build_params(doc.get("coupling", {}))
    numerics = dict(doc.get("numerics", {}))
    _require_keys(numerics, {"xi_min", "xi_max", "n_points", "eta_values"}, set(), "numerics")
    xi_min = float(numerics.get("xi_min", 1e-4))
    xi_max = float(numerics.get("xi_max", 10.0))
    n_points = int(numerics.get("n_points", 400))
    etas = [float(e) for e in numerics.get("eta_values", [0.0, 1.0])]
    if not (0.0 < xi_min < xi_max) or n_points < 2:
        raise SpecError("need 0 < xi_min < xi_max and n_points >= 2")
    grid = np.logspace(math.log10(xi_min), math.log10(xi_max), n_points)
    e0 = coupling.e0_over_hbar_gamma(params)

    rows = []
    for eta in etas:
        prev_sign = 0
        for x in grid:
            dpe_r = coupling.delta_perp_reg(x, eta, params)
            dpa_r = coupling.delta_par_reg(x, eta, params)
            dpe_u = coupling.delta_perp_unreg(x, eta, params)
            dpa_u = coupling.delta_par_unreg(x, eta, params)
            s_u = dpe_u + dpa_u
            sign = int(np.sign(s_u))
            marker = 1 if prev_sign != 0 and sign != 0 and sign != prev_sign else 0
            prev_sign = sign if sign != 0 else prev_sign
            rows.append(
                (
                    x,
                    eta,
                    coupling.gamma_reg(x, eta, params) / params.gamma,
                    dpe_r / e0,
                    dpa_r / e0,
                    (dpe_r + dpa_r) / e0,
                    coupling.gamma_unreg(x, eta, params) / params.gamma,
                    dpe_u / e0,
                    dpa_u / e0,
                    s_u / e0,
                    abs((dpe_r + dpa_r) / e0),
                    abs(s_u / e0),
                    marker,
                )
            )
    if not rows:
        raise SpecError("coupling scan produced no rows")
    csv_path = out / f"{prefix}coupling_scan.csv"
    _write_csv(
        csv_path,
        [
            "xi",
            "eta",
            "gamma_reg_per_gamma",
            "delta_perp_reg_over_E0",
            "delta_par_reg_over_E0",
            "sum_reg_over_E0",
            "gamma_unreg_per_gamma",
            "delta_perp_unreg_over_E0",
            "delta_par_unreg_over_E0",
            "sum_unreg_over_E0",
            "abs_sum_reg_over_E0",
            "abs_sum_unreg_over_E0",
            "sign_change_unreg_sum",
        ],
        rows,
    )
    plt_path = out / f"{prefix}coupling_scan.plt"
    _write_gnuplot_stub(
        plt_path,
        csv_path.name,
        [
            "set logscale x",
            f"plot '{csv_path.name}' using 1:6 with lines title 'regularized sum / E0', \\",
            f"     '{csv_path.name}' using 1:10 with lines title 'unregularized sum / E0'",
            "# log-log variant; sharp dips in |sum| indicate a sign change",
            "# (rows with sign_change_unreg_sum = 1 mark them)",
            "set logscale xy",
            f"replot '{csv_path.name}' using 1:12 with lines title '|unregularized sum| / E0'",
        ],
    )
    return [csv_path, plt_path]


def _run_evolve(doc: dict, out: Path, prefix: str, seed: int) -> list[Path]:
    cfg = _build_geometry(doc.get("geometry", {}))
    params = _build_params(doc.get("coupling", {}))
    numerics = dict(doc.get("numerics", {}))
    _require_keys(
        numerics,
        {"t_final", "n_out", "method", "initial_state", "model", "rtol"},
        {"t_final", "initial_state"},
        "numerics",
    )
    mats = coupling.build_coupling_matrices(cfg, params)
    psi0 = _initial_state(str(numerics["initial_state"]), cfg.n_atoms)
    rho0 = np.outer(psi0, psi0.conj())
    hamiltonian = _model_hamiltonian(numerics, mats)
    res = master.evolve(
        rho0,
        mats,
        t_final=float(numerics["t_final"]),
        n_out=int(numerics.get("n_out", 201)),
        hamiltonian=hamiltonian,
        method=str(numerics.get("method", "auto")),
        rtol=float(numerics.get("rtol", 1e-8)),
    )
    headers = ["t_in_inv_gamma"]
    columns = [res.times]
    if cfg.n_atoms == 3:
        states = operators.dicke_basis_three()
        pops = master.populations(res, list(states))
        headers += ["P_b", "P_c", "P_d"]
        columns += [pops[:, 0], pops[:, 1], pops[:, 2]]
    total_excitation = np.zeros(len(res.times))
    for i in range(res.rhos.shape[1]):
        total_excitation += bin(i).count("1") * res.rhos[:, i, i].real
    headers += ["total_excitation", "trace"]
    columns += [total_excitation, res.traces]
    rows = list(zip(*columns))
    csv_path = out / f"{prefix}populations.csv"
    _write_csv(csv_path, headers, rows)
    plt_path = out / f"{prefix}populations.plt"
    _write_gnuplot_stub(
        plt_path,
        csv_path.name,
        [f"plot for [i=2:{len(headers) - 1}] '{csv_path.name}' using 1:i with lines title columnhead"],
    )
    return [csv_path, plt_path]


def _run_trajectories(doc: dict, out: Path, prefix: str, seed: int) -> list[Path]:
    cfg = _build_geometry(doc.get("geometry", {}))
    params = _build_params(doc.get("coupling", {}))
    numerics = dict(doc.get("numerics", {}))
    _require_keys(
        numerics,
        {"n_traj", "t_max", "channels", "initial_state", "model", "bins", "photon_index", "seed"},
        {"n_traj", "t_max", "channels", "initial_state"},
        "numerics",
    )
    n_traj = int(numerics["n_traj"])
    t_max = float(numerics["t_max"])
    mats = coupling.build_coupling_matrices(cfg, params)
    psi0 = _initial_state(str(numerics["initial_state"]), cfg.n_atoms)
    hamiltonian = _model_hamiltonian(numerics, mats)
    hb = operators.build_H_between_jumps(mats)
    if hamiltonian is not None:
        hb = hamiltonian + (hb - operators.build_H_dipole(mats))

    channel_kind = str(numerics["channels"])
    if channel_kind == "source_mode":
        channels = trajectories.source_mode_jumps(mats)
    elif channel_kind == "directed":
        bins = tuple(int(v) for v in numerics.get("bins", (30, 30)))
        channels = trajectories.directed_jump_ops(cfg, bins=bins, gamma=params.gamma)
    else:
        raise SpecError("channels must be 'source_mode' or 'directed'")

    records = trajectories.ensemble(psi0, hb, channels, t_max=t_max, n_traj=n_traj, seed_base=seed)

    jump_rows = []
    for rec in records:
        for j, event in enumerate(rec.events):
            row = [rec.stream_index, j + 1, event.time, event.channel]
            if channel_kind == "directed":
                row += [int(channels.theta_bin[event.channel]), int(channels.phi_bin[event.channel])]
            jump_rows.append(row)
    headers = ["trajectory", "photon_index", "t_in_inv_gamma", "channel"]
    if channel_kind == "directed":
        headers += ["theta_bin", "phi_bin"]
    files = []
    csv_path = out / f"{prefix}jumps.csv"
    _write_csv(csv_path, headers, jump_rows)
    files.append(csv_path)

    photon_index = int(numerics.get("photon_index", 0))
    if photon_index >= 1:
        try:
            delays, counts, edges = trajectories.waiting_time_distribution(records, photon_index)
        except ValueError:
            raise SpecError(f"no trajectory contains {photon_index} photons; empty distribution")
        centers = 0.5 * (edges[:-1] + edges[1:])
        width = np.diff(edges)
        density = counts / (len(delays) * width)
        wt_path = out / f"{prefix}waiting_time.csv"
        _write_csv(
            wt_path,
            ["delay_in_inv_gamma", "count", "density_per_gamma"],
            list(zip(centers, counts.tolist(), density)),
        )
        _write_gnuplot_stub(
            out / f"{prefix}waiting_time.plt",
            wt_path.name,
            [f"plot '{wt_path.name}' using 1:3 with boxes title 'photon {photon_index} waiting density'"],
        )
        files += [wt_path, out / f"{prefix}waiting_time.plt"]

    if channel_kind == "directed":
        dist = trajectories.angular_distribution(records, channels)
        ang_path = out / f"{prefix}angular.csv"
        _write_csv(
            ang_path,
            ["theta_center_rad", "cos_theta_lo", "cos_theta_hi", "count", "sigma_per_traj_per_sr"],
            list(
                zip(
                    dist.theta_centers,
                    dist.cos_theta_edges[1:],
                    dist.cos_theta_edges[:-1],
                    dist.counts.tolist(),
                    dist.sigma,
                )
            ),
        )
        _write_gnuplot_stub(
            out / f"{prefix}angular.plt",
            ang_path.name,
            [f"plot '{ang_path.name}' using 1:5 with linespoints title 'sigma(theta)'"],
        )
        files += [ang_path, out / f"{prefix}angular.plt"]
    return files


def _run_timescales(doc: dict, out: Path, prefix: str, seed: int) -> list[Path]:
    params = _build_params(doc.get("coupling", {}))
    numerics = dict(doc.get("numerics", {}))
    _require_keys(
        numerics,
        {"n_min", "n_max", "spacings_lambda0", "eta"},
        {"n_min", "n_max", "spacings_lambda0"},
        "numerics",
    )
    n_min, n_max = int(numerics["n_min"]), int(numerics["n_max"])
    if not 1 <= n_min <= n_max:
        raise SpecError("need 1 <= n_min <= n_max")
    spacings = [float(s) for s in numerics["spacings_lambda0"]]
    eta = float(numerics.get("eta", 0.0))
    table = analysis.ratio_scan(range(n_min, n_max + 1), spacings, params, eta=eta)
    csv_path = out / f"{prefix}timescales.csv"
    _write_csv(
        csv_path,
        ["n_atoms", "spacing_lambda0", "xi", "t_dicke", "t_rate", "ratio", "min_gamma_ratio", "validity_flag"],
        [
            (r.n_atoms, r.spacing_lambda0, r.xi, r.t_dicke, r.t_rate, r.ratio, r.min_gamma_ratio, r.validity_flag)
            for r in table.rows
        ],
    )
    plt_path = out / f"{prefix}timescales.plt"
    _write_gnuplot_stub(
        plt_path,
        csv_path.name,
        [f"plot '{csv_path.name}' using 1:6 with points title 't_Dicke / t_rate'"],
    )
    return [csv_path, plt_path]


def _run_validate(doc: dict, out: Path, prefix: str, seed: int) -> tuple[list[Path], bool]:
    numerics = dict(doc.get("numerics", {})) if doc else {}
    _require_keys(numerics, {"quick"}, set(), "numerics")
    results = acceptance.run_all(quick=bool(numerics.get("quick", False)))
    all_passed = all(r.passed for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  ({r.runtime_s:.1f} s)  {r.detail}")
    json_path = out / f"{prefix}validation.json"
    json_path.write_text(
        json.dumps(
            {
                "all_passed": all_passed,
                "results": [
                    {"name": r.name, "passed": r.passed, "runtime_s": r.runtime_s, "detail": r.detail}
                    for r in results
                ],
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return [json_path], all_passed


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def run(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="neardicke",
        description="Simulations of collective emission from near-coincident two-level atoms.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, text in (
        ("coupling", "scan pairwise coupling coefficients over separation"),
        ("evolve", "integrate the master equation"),
        ("trajectories", "run a Monte Carlo trajectory ensemble"),
        ("timescales", "scan competing timescales over chain size and spacing"),
        ("validate", "run the built-in acceptance suite"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--spec", type=Path, required=(name != "validate"),
                       help="path to the JSON experiment spec")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the RNG seed")
        p.add_argument("--threads", type=int, default=1,
                       help="scheduling hint; results are identical for any value")
    args = parser.parse_args(argv)

    t0 = time.perf_counter()
    try:
        if args.spec is not None:
            doc = _load_spec(args.spec)
            if doc["kind"] != args.subcommand:
                raise SpecError(f"spec kind {doc['kind']!r} does not match subcommand {args.subcommand!r}")
            spec_hash = hashlib.sha256(args.spec.read_bytes()).hexdigest()
        else:
            doc = {"schema_version": SCHEMA_VERSION, "kind": "validate"}
            spec_hash = hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()

        output_block = dict(doc.get("output", {}))
        _require_keys(output_block, {"prefix"}, set(), "output")
        prefix = str(output_block.get("prefix", ""))
        numerics_seed = doc.get("numerics", {}).get("seed") if isinstance(doc.get("numerics"), dict) else None
        seed = args.seed if args.seed is not None else (
            int(numerics_seed) if numerics_seed is not None else acceptance.DEFAULT_SEED
        )
        args.out.mkdir(parents=True, exist_ok=True)

        validation_failed = False
        if args.subcommand == "coupling":
            files = _run_coupling(doc, args.out, prefix, seed)
        elif args.subcommand == "evolve":
            files = _run_evolve(doc, args.out, prefix, seed)
        elif args.subcommand == "trajectories":
            files = _run_trajectories(doc, args.out, prefix, seed)
        elif args.subcommand == "timescales":
            files = _run_timescales(doc, args.out, prefix, seed)
        else:
            files, all_passed = _run_validate(doc, args.out, prefix, seed)
            validation_failed = not all_passed

        manifest = {
            "tool": "neardicke",
            "version": __version__,
            "subcommand": args.subcommand,
            "schema_version": doc["schema_version"],
            "spec_sha256": spec_hash,
            "seed": seed,
            "wall_time_s": round(time.perf_counter() - t0, 3),
            "outputs": {
                f.name: hashlib.sha256(f.read_bytes()).hexdigest() for f in files
            },
        }
        (args.out / f"{prefix}manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
        return 2 if validation_failed else 0
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # numeric or I/O failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
