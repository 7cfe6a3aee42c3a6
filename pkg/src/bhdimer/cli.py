"""Command-line front end.

Subcommands produce plot-ready flat files (RFC-4180 CSV for time
series, JSON for catalogs) and never render anything themselves:

* regions       -- region map of the (g, k) parameter plane
* portrait      -- trajectory bundle on the Bloch sphere
* decay         -- population imbalance and norm decay curves
* fixed-points  -- stationary-point catalog with stability data
* compare       -- many-body vs mean-field convergence table
* lindblad      -- two-particle-loss master equation vs mean field
* verify        -- run the acceptance suite

Every data file is accompanied by a ``<name>.meta.json`` sidecar
echoing the full effective parameter set, so a rerun with the same
configuration is bit-identical.  Options may also be supplied through
``--config FILE`` holding ``key = value`` lines (``#`` comments
allowed); explicit flags win over the file.

Exit codes: 0 success, 2 invariant violation (or failed verification),
3 I/O error, 4 bad arguments.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .core import BlochState, ModelParams
from .coherent import CoherentAngles, coherent_fock
from .dynamics import IntegratorConfig, IntegrationError, integrate, detect_convergence
from .fixed_points import (
    Stability,
    discriminant,
    find_limit_cycle,
    fixed_point_catalog,
)
from .manybody import (
    DensityOperator,
    ManyBodyParams,
    evolve_lindblad,
    evolve_nonhermitian,
)

EXIT_OK = 0
EXIT_INVARIANT = 2
EXIT_IO = 3
EXIT_USAGE = 4

_SPHERE_DRIFT_LIMIT = 1e-6
_TRACE_LIMIT = 1e-8
_RESIDUAL_LIMIT = 1e-10
_LINDBLAD_N_CAP = 60


class UsageError(Exception):
    pass


class InvariantViolation(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_config(path):
    values = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _effective(args, spec):
    """Merge flag values, config-file values and defaults.

    spec maps option name -> (caster, default).  Flags not given on the
    command line fall back to the config file, then to the default.
    """
    config = _load_config(args.config) if args.config else {}
    unknown = set(config) - set(spec)
    if unknown:
        raise UsageError(
            f"unknown config keys for this command: {', '.join(sorted(unknown))}"
        )
    out = {}
    for name, (caster, default) in spec.items():
        value = getattr(args, name, None)
        if value is None and name in config:
            try:
                value = caster(config[name])
            except ValueError as exc:
                raise UsageError(f"config value for {name}: {exc}")
        if value is None:
            value = default
        out[name] = value
    return out


def _float_list(text):
    return [float(part) for part in text.split(",") if part.strip()]


def _int_list(text):
    return [int(part) for part in text.split(",") if part.strip()]


def _integrator(values) -> IntegratorConfig:
    return IntegratorConfig(
        rel_tol=values["rel_tol"],
        abs_tol=values["abs_tol"],
        max_step=values["max_step"],
    )


def _write_metadata(out_path, command, values, extra=None):
    meta = {
        "command": command,
        "package_version": __version__,
        "parameters": {
            k: (v if not isinstance(v, (list, tuple)) else list(v))
            for k, v in sorted(values.items())
        },
    }
    if extra:
        meta.update(extra)
    Path(str(out_path) + ".meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n"
    )


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _pool_map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _fibonacci_sphere(count):
    golden = math.pi * (3.0 - math.sqrt(5.0))
    seeds = []
    for i in range(count):
        sz = 0.5 * (1.0 - 2.0 * (i + 0.5) / count)
        r = math.sqrt(max(0.0, 0.25 - sz * sz))
        seeds.append(BlochState(r * math.cos(golden * i), r * math.sin(golden * i), sz))
    return seeds


def _parse_seed_grid(spec):
    """Either an integer count (points spread over the sphere) or a
    semicolon-separated list of theta,phi pairs."""
    try:
        return _fibonacci_sphere(int(spec))
    except ValueError:
        pass
    seeds = []
    for chunk in spec.split(";"):
        parts = _float_list(chunk)
        if len(parts) != 2:
            raise UsageError(f"bad seed spec chunk {chunk!r}; want theta,phi")
        seeds.append(BlochState.from_angles(parts[0], parts[1]))
    return seeds


def _record_json(rec):
    return {
        "family": rec.family.value,
        "position": {"sx": rec.position.sx, "sy": rec.position.sy, "sz": rec.position.sz},
        "y_root": rec.y_root,
        "residual": rec.residual,
        "stability": rec.stability.value,
        "tangent_eigenvalues": [
            [lam.real, lam.imag] for lam in rec.tangent_eigenvalues
        ],
        "normal_eigenvalue": [rec.normal_eigenvalue.real, rec.normal_eigenvalue.imag],
    }


# ---------------------------------------------------------------------------
# Subcommands.

def cmd_regions(values):
    res = values["resolution"]
    if res < 2:
        raise UsageError(f"resolution must be >= 2, got {res}")
    gs = np.linspace(values["g_min"], values["g_max"], res)
    ks = np.linspace(values["k_min"], values["k_max"], res)

    def row(k):
        cells = []
        for g in gs:
            g = float(g)
            cat = fixed_point_catalog(g, k, classify=False)
            cells.append((g, k, cat.region.value, len(cat), discriminant(g, k).P))
        return cells

    rows = []
    for cells in _pool_map(row, [float(k) for k in ks], values["threads"]):
        for cell in cells:
            if cell[2] != "Boundary" and cell[3] not in (2, 4, 6):
                raise InvariantViolation(
                    f"catalog size {cell[3]} at (g,k)=({cell[0]},{cell[1]})"
                )
            rows.append(cell)
    _write_csv(values["out"], ["g", "k", "region_id", "num_fixed_points", "P"], rows)
    _write_metadata(values["out"], "regions", values)
    return EXIT_OK


def cmd_portrait(values):
    p = ModelParams(
        v=values["v"], epsilon=values["epsilon"], g=values["g"], k=values["k"]
    )
    cfg = _integrator(values)
    seeds = _parse_seed_grid(values["seed_grid"])
    out_dir = Path(values["out"])
    out_dir.mkdir(parents=True, exist_ok=True)

    catalog = fixed_point_catalog(values["g"], values["k"]) if values["v"] == 1.0 else None
    sinks = (
        [rec.position for rec in catalog if rec.stability is Stability.SINK]
        if catalog
        else []
    )
    cycle = find_limit_cycle(p) if values["v"] == 1.0 else None

    index = {"seeds": [], "fixed_points": [], "limit_cycle": None}
    if catalog:
        index["fixed_points"] = [_record_json(rec) for rec in catalog]
        index["region"] = catalog.region.value
    if cycle is not None:
        pts = cycle.trajectory.bloch_array()
        _write_csv(
            out_dir / "limit_cycle.csv",
            ["t", "sx", "sy", "sz", "n"],
            [
                (float(t),) + tuple(float(x) for x in row)
                for t, row in zip(cycle.trajectory.times, pts)
            ],
        )
        index["limit_cycle"] = {
            "file": "limit_cycle.csv",
            "period": cycle.period,
            "section_state": {
                "sx": cycle.section_state.sx,
                "sy": cycle.section_state.sy,
                "sz": cycle.section_state.sz,
            },
        }

    for i, seed in enumerate(seeds):
        name = f"seed_{i:03d}.csv"
        entry = {
            "file": name,
            "initial": [seed.sx, seed.sy, seed.sz, seed.n],
            "converged_to": None,
            "error": None,
        }
        try:
            traj = integrate("mf_complex_interaction", seed, p, values["t_end"], cfg)
            pts = traj.bloch_array()
            drift = np.max(np.abs(np.sum(pts[:, :3] ** 2, axis=1) - 0.25))
            if drift > _SPHERE_DRIFT_LIMIT:
                raise InvariantViolation(
                    f"sphere drift {drift:.3e} on seed {i} exceeds {_SPHERE_DRIFT_LIMIT}"
                )
            _write_csv(
                out_dir / name,
                ["t", "sx", "sy", "sz", "n"],
                [
                    (float(t),) + tuple(float(x) for x in row)
                    for t, row in zip(traj.times, pts)
                ],
            )
            if sinks:
                hit = detect_convergence(traj, sinks, radius=0.05)
                if hit is not None:
                    entry["converged_to"] = _record_json(
                        [rec for rec in catalog if rec.stability is Stability.SINK][hit]
                    )["family"]
        except (IntegrationError, ValueError) as exc:
            # per-seed failure: record it and carry on with the rest
            entry["error"] = str(exc)
        index["seeds"].append(entry)

    (out_dir / "index.json").write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    _write_metadata(out_dir / "index.json", "portrait", values)
    return EXIT_OK


def cmd_decay(values):
    p = ModelParams(
        v=values["v"], epsilon=values["epsilon"], g=values["g"], k=values["k"]
    )
    cfg = _integrator(values)
    states = []
    for chunk in values["s0"].split(";"):
        parts = _float_list(chunk)
        if len(parts) != 3:
            raise UsageError(f"bad initial state {chunk!r}; want sx,sy,sz")
        state = BlochState(parts[0], parts[1], parts[2])
        # Accept 4-digit on-sphere inputs; never project them.
        if abs(state.radius_sq - 0.25) > 1e-4:
            raise UsageError(
                f"initial state {chunk!r} is off the radius-1/2 sphere "
                f"(r^2 = {state.radius_sq!r})"
            )
        states.append(state)

    k = values["k"]
    for i, s0 in enumerate(states):
        out = Path(values["out"])
        if len(states) > 1:
            out = out.with_name(f"{out.stem}_{i:03d}{out.suffix}")
        traj = integrate("mf_complex_interaction", s0, p, values["t_end"], cfg)
        pts = traj.bloch_array()
        drift = np.max(np.abs(np.sum(pts[:, :3] ** 2, axis=1) - 0.25))
        # Slightly off-sphere starts drift per the radius law; allow the
        # initial offset a bounded amplification before flagging.
        limit = _SPHERE_DRIFT_LIMIT + 100.0 * abs(s0.radius_sq - 0.25)
        if drift > limit:
            raise InvariantViolation(f"sphere drift {drift:.3e} on state {i}")
        rows = [
            (float(t), float(row[2]), float(row[3]), float(row[3] * math.exp(k * t)))
            for t, row in zip(traj.times, pts)
        ]
        _write_csv(out, ["t", "sz", "n", "n_reduced"], rows)
        _write_metadata(out, "decay", values, {"initial_state": [s0.sx, s0.sy, s0.sz]})
    return EXIT_OK


def cmd_fixed_points(values):
    catalog = fixed_point_catalog(values["g"], values["k"])
    for rec in catalog:
        if rec.residual > _RESIDUAL_LIMIT:
            raise InvariantViolation(
                f"{rec.family.value} residual {rec.residual:.3e} exceeds {_RESIDUAL_LIMIT}"
            )
    payload = {
        "g": values["g"],
        "k": values["k"],
        "region": catalog.region.value,
        "degenerate": catalog.degenerate,
        "fixed_points": [_record_json(rec) for rec in catalog],
    }
    Path(values["out"]).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _write_metadata(values["out"], "fixed-points", values)
    return EXIT_OK


def cmd_compare(values):
    n_list = values["n_list"]
    if sorted(n_list) != n_list:
        raise UsageError("N list must be ascending")
    if max(n_list) > 2000:
        raise UsageError(f"N capped at 2000, got {max(n_list)}")
    theta, phi = values["theta"], values["phi"]
    cfg = _integrator(values)
    p_mf = ModelParams(v=values["v"], g=values["g"], k=values["k"])
    ref = integrate(
        "mf_complex_interaction",
        BlochState.from_angles(theta, phi),
        p_mf,
        values["t_end"],
        cfg,
    ).final

    def run(N):
        p = ManyBodyParams.from_scaled(
            N=N, v=values["v"], g=values["g"], k=values["k"]
        )
        traj = evolve_nonhermitian(
            coherent_fock(N, CoherentAngles(theta, phi)), p, values["t_end"], cfg
        )
        b = traj.bloch(len(traj) - 1)
        return (
            N,
            abs(b.sx - ref.sx),
            abs(b.sy - ref.sy),
            abs(b.sz - ref.sz),
            abs(b.n - ref.n),
        )

    rows = _pool_map(run, n_list, values["threads"])
    for row in rows:
        if not all(math.isfinite(x) for x in row[1:]):
            raise InvariantViolation(f"non-finite error entry for N={row[0]}")
    _write_csv(values["out"], ["N", "err_sx", "err_sy", "err_sz", "err_n"], rows)
    errs = [max(row[1:]) for row in rows]
    slope = float(
        np.polyfit(np.log(np.array(n_list, dtype=float)), np.log(errs), 1)[0]
    )
    _write_metadata(values["out"], "compare", values, {"fitted_decay_exponent": slope})
    return EXIT_OK


def cmd_lindblad(values):
    N = values["n"]
    if N > _LINDBLAD_N_CAP:
        raise UsageError(f"N capped at {_LINDBLAD_N_CAP} for density-matrix runs")
    theta, phi = values["theta"], values["phi"]
    cfg = _integrator(values)
    p = ManyBodyParams.from_scaled(
        N=N, v=values["v"], g=values["g"], k=values["k"]
    )
    rho0 = DensityOperator.from_pure(coherent_fock(N, CoherentAngles(theta, phi)))
    traj = evolve_lindblad(rho0, p, values["t_end"], cfg)
    trace_drift = float(np.max(np.abs(traj.traces - 1.0)))
    if trace_drift > _TRACE_LIMIT:
        raise InvariantViolation(f"trace drift {trace_drift:.3e} exceeds {_TRACE_LIMIT}")

    mf = integrate(
        "mf_two_particle_loss",
        BlochState.from_angles(theta, phi),
        ModelParams(v=values["v"], g=values["g"], k=values["k"]),
        values["t_end"],
        cfg,
    )
    mf_pts = mf.bloch_array()
    # Linear interpolation of the mean-field columns onto the master
    # equation's sample times.
    mf_cols = [
        np.interp(traj.times, mf.times, mf_pts[:, j]) for j in range(4)
    ]

    rows = []
    for i, t in enumerate(traj.times):
        lx, ly, lz, n_exp, _, _ = traj.observables[i]
        n_rel = n_exp / N
        msx, msy, msz, mn = (col[i] for col in mf_cols)
        rows.append(
            (
                float(t),
                n_rel,
                lx / n_exp, ly / n_exp, lz / n_exp,
                float(mn),
                float(msx / mn), float(msy / mn), float(msz / mn),
                float(traj.traces[i]),
            )
        )
    _write_csv(
        values["out"],
        ["t", "n_lb", "sx_lb", "sy_lb", "sz_lb", "n_mf", "sx_mf", "sy_mf", "sz_mf", "trace"],
        rows,
    )
    _write_metadata(values["out"], "lindblad", values)
    return EXIT_OK


def cmd_verify(values):
    from .acceptance import run_all

    results = run_all()
    failed = 0
    for res in results:
        line = f"criterion {res.number:02d} {res.name}: {'PASS' if res.passed else 'FAIL'}"
        if res.detail:
            line += f" ({res.detail})"
        print(line)
        failed += 0 if res.passed else 1
    print(f"{len(results) - failed}/{len(results)} acceptance criteria passed")
    return EXIT_OK if failed == 0 else EXIT_INVARIANT


# ---------------------------------------------------------------------------
# Option plumbing.

_COMMON = {
    "rel_tol": (float, 1e-10),
    "abs_tol": (float, 1e-10),
    "max_step": (float, 0.01),
    "threads": (int, 1),
}

_SPECS = {
    "regions": {
        "g_min": (float, -2.0), "g_max": (float, 2.0),
        "k_min": (float, -3.0), "k_max": (float, 3.0),
        "resolution": (int, 101), "out": (str, "regions.csv"), **_COMMON,
    },
    "portrait": {
        "v": (float, 1.0), "g": (float, 0.0), "k": (float, 1.0),
        "epsilon": (float, 0.0), "t_end": (float, 50.0),
        "seed_grid": (str, "24"), "out": (str, "portrait"), **_COMMON,
    },
    "decay": {
        "v": (float, 1.0), "g": (float, 0.5), "k": (float, 0.2),
        "epsilon": (float, 0.0), "t_end": (float, 30.0),
        "s0": (str, "0.2939,0,0.4045"), "out": (str, "decay.csv"), **_COMMON,
    },
    "fixed-points": {
        "g": (float, 0.0), "k": (float, 1.0),
        "out": (str, "fixed_points.json"), **_COMMON,
    },
    "compare": {
        "v": (float, 1.0), "g": (float, 0.5), "k": (float, 0.2),
        "theta": (float, math.pi / 3), "phi": (float, 0.0),
        "n_list": (_int_list, [20, 40, 80]), "t_end": (float, 1.0),
        "out": (str, "compare.csv"), **_COMMON,
    },
    "lindblad": {
        "v": (float, 1.0), "g": (float, 0.5), "k": (float, 0.2),
        "n": (int, 20), "theta": (float, math.pi / 2), "phi": (float, 0.0),
        "t_end": (float, 5.0), "out": (str, "lindblad.csv"), **_COMMON,
    },
    "verify": {},
}

_HANDLERS = {
    "regions": cmd_regions,
    "portrait": cmd_portrait,
    "decay": cmd_decay,
    "fixed-points": cmd_fixed_points,
    "compare": cmd_compare,
    "lindblad": cmd_lindblad,
    "verify": cmd_verify,
}


def _build_parser():
    parser = _Parser(prog="bhdimer", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)
    for command, spec in _SPECS.items():
        sub = subs.add_parser(command)
        sub.add_argument("--config", default=None)
        for name, (caster, _) in spec.items():
            flag = "--" + name.replace("_", "-")
            sub.add_argument(flag, dest=name, type=caster, default=None)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        values = _effective(args, _SPECS[args.command])
        return _HANDLERS[args.command](values)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
