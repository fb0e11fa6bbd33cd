"""Run orchestration: single runs, convergence sweeps and robustness matrices."""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cases
from .config import RobustnessSpec, RunConfig, SweepSpec
from .diagnostics import entropy_rate, kinetic_energy, m_norm_error, total_entropy
from .fluxes import FluxScheme
from .gas import primitives
from .sbp import ConfigurationError
from .solver import SemiDiscretization
from .timestep import Tolerances, advance
from .viscous import ViscousConfig

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_INCOMPLETE, EXIT_BLOWUP = 0, 2, 3, 10
STATUS_EXIT = {"finished": EXIT_OK, "blowup": EXIT_BLOWUP,
               "max_steps": EXIT_INCOMPLETE, "dt_underflow": EXIT_INCOMPLETE,
               "deadline": EXIT_INCOMPLETE}
TIMESERIES_COLUMNS = ("step", "t", "dt", "err_estimate", "E_K", "total_entropy",
                      "entropy_rate", "min_rho", "min_p")
FIELD_NAMES = ("rho", "rhoU1", "rhoU2", "rhoU3", "rhoE")

_PARAMS = {"vortex": cases.VortexParams, "mms": cases.MmsParams, "tgv": cases.TgvParams,
           "chit": cases.ChitParams, "freestream": cases.FreestreamParams}


def case_params(cfg: RunConfig):
    cls = _PARAMS[cfg.case]
    names = {f.name for f in dataclasses.fields(cls)}
    kw = {}
    for k, v in cfg.case_params:
        if k not in names:
            raise ConfigurationError(f"case {cfg.case} has no parameter {k!r}")
        kw[k] = v
    if cfg.case == "chit":
        kw.setdefault("seed", cfg.seed)
    return cls(**kw)


def build(cfg: RunConfig):
    """(CaseSetup, SemiDiscretization) for a configuration."""
    params = case_params(cfg)
    K = cfg.elements
    if cfg.case in ("vortex", "freestream"):
        setup = cases.CASES[cfg.case](cfg.p, K, params)
    else:
        setup = cases.CASES[cfg.case](cfg.p, K, params, viscous=cfg.use_viscous)
    scheme = FluxScheme(cfg.scheme, cfg.dissipation, cfg.c_diss)
    visc = ViscousConfig(enabled=cfg.use_viscous, c_ip=cfg.c_ip)
    sd = SemiDiscretization(setup.grid, setup.gas, scheme, visc,
                            boundary=setup.boundary, source=setup.source)
    return setup, sd


@dataclass
class RunResult:
    config: RunConfig
    status: str
    exit_code: int
    summary: dict
    q: np.ndarray
    timeseries: list = field(default_factory=list)


def _diag_row(step, t, dt, err, q, k, setup, sd):
    rho, _, _, P, _ = primitives(q, setup.gas, check=False)
    jr = sd.grid.J * k if k is not None else None
    return {"step": step, "t": t, "dt": dt, "err_estimate": err,
            "E_K": kinetic_energy(q, sd.grid, setup.gas),
            "total_entropy": total_entropy(q, sd.grid, setup.gas),
            "entropy_rate": entropy_rate(q, jr, sd.grid, setup.gas) if jr is not None else math.nan,
            "min_rho": float(rho.min()), "min_p": float(P.min())}


def run(cfg: RunConfig, write=True, setup_sd=None) -> RunResult:
    """Integrate one configuration and (optionally) write its artifacts."""
    setup, sd = build(cfg) if setup_sd is None else setup_sd
    t_final = cfg.t_final if cfg.t_final is not None else setup.t_final
    tol = Tolerances(cfg.atol, cfg.rtol, max_steps=cfg.max_steps)
    out = Path(cfg.output)
    if write:
        out.mkdir(parents=True, exist_ok=True)
        write_field_dump(out / "grid.bin", sd.grid, sd.grid.x, 0.0, ("x1", "x2", "x3"))
    rows = [_diag_row(0, 0.0, 0.0, 0.0, setup.q0, sd.rhs(setup.q0, 0.0), setup, sd)]
    dumps = []

    def monitor(step, t, q, k):
        if write and cfg.dump_every and step % cfg.dump_every == 0:
            name = out / f"field_{step:08d}.bin"
            write_field_dump(name, sd.grid, q, t)
            dumps.append(name.name)
        return {"_row": _diag_row(step, t, None, None, q, k, setup, sd)}

    t0 = time.perf_counter()
    res = advance(sd.rhs, setup.q0, 0.0, t_final, tol, monitor=monitor,
                  log_every=cfg.log_every, deadline=t0 + cfg.max_wall if cfg.max_wall else None)
    wall = time.perf_counter() - t0
    for rec in res.log:
        row = rec.pop("_row")
        row.update(dt=rec["dt"], err_estimate=rec["err_estimate"])
        rows.append(row)

    summary = {
        "case": cfg.case, "scheme": cfg.scheme, "p": cfg.p, "elements": list(cfg.elements),
        "dofs": sd.grid.n_dofs, "viscous": cfg.use_viscous, "status": res.status,
        "exit_code": STATUS_EXIT[res.status], "t_final": t_final, "t_reached": res.t,
        "n_steps": res.n_steps, "n_rejected": res.n_rejected, "n_rhs": res.n_rhs,
        "blowup": _jsonable(res.blowup_info), "case_info": _jsonable(setup.info),
        "final": {k: rows[-1][k] for k in TIMESERIES_COLUMNS[4:]},
        "config": cfg.as_dict(),
    }
    if setup.exact is not None and res.status == "finished":
        err = m_norm_error(res.y, setup.exact(sd.grid.x, res.t), sd.grid)
        summary["errors"] = dict(zip(FIELD_NAMES, map(float, err)))
        if cfg.case == "freestream":
            summary["max_deviation"] = float(np.max(np.abs(res.y - setup.q0)))
    summary["timing"] = {"wall_clock": wall, "per_rhs": wall / max(res.n_rhs, 1)}
    if write:
        write_field_dump(out / "field_final.bin", sd.grid, res.y, res.t)
        summary["dumps"] = dumps + ["field_final.bin"]
        write_timeseries(out / "timeseries.csv", rows)
        # wall-clock goes to its own file so summary.json is reproducible byte for byte
        payload = {k: v for k, v in summary.items() if k != "timing"}
        (out / "summary.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
        (out / "timing.json").write_text(json.dumps(summary["timing"], indent=2))
        validate_outputs(out)
    return RunResult(cfg, res.status, STATUS_EXIT[res.status], summary, res.y, rows)


def _jsonable(obj):
    if obj is None:
        return None
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


# ---------------------------------------------------------------------------
# files


def write_timeseries(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TIMESERIES_COLUMNS)
        for r in rows:
            w.writerow([r["step"]] + [format(float(r[c]), ".17g") for c in TIMESERIES_COLUMNS[1:]])


def write_field_dump(path, grid, data, t, names=FIELD_NAMES):
    """Text header terminated by 'end', then little-endian float64 values in
    row-major (field, K1, K2, K3, N, N, N) order."""
    data = np.asarray(data, dtype="<f8")
    header = (f"ssdc-field 1\ndims 3\np {grid.p}\n"
              f"elements {grid.K[0]} {grid.K[1]} {grid.K[2]}\n"
              f"nodes {grid.op.n} {grid.op.n} {grid.op.n}\n"
              f"fields {' '.join(names)}\nt {t:.17g}\nend\n")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(data).tobytes())


def read_field_dump(path):
    raw = Path(path).read_bytes()
    end = raw.index(b"end\n") + 4
    meta = {}
    for line in raw[:end].decode("ascii").splitlines()[1:-1]:
        key, _, val = line.partition(" ")
        meta[key] = val
    K = tuple(int(v) for v in meta["elements"].split())
    n = tuple(int(v) for v in meta["nodes"].split())
    names = meta["fields"].split()
    data = np.frombuffer(raw[end:], dtype="<f8").reshape((len(names),) + K + n)
    return meta, data


def validate_outputs(out: Path):
    """Check the written files against their documented layout."""
    with open(out / "timeseries.csv") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != TIMESERIES_COLUMNS:
        raise RuntimeError(f"timeseries header mismatch: {rows[0]}")
    for r in rows[1:]:
        if len(r) != len(TIMESERIES_COLUMNS):
            raise RuntimeError(f"timeseries row has {len(r)} columns")
        int(r[0])
        [float(v) for v in r[1:]]
    s = json.loads((out / "summary.json").read_text())
    for key, typ in (("status", str), ("exit_code", int), ("t_reached", (int, float)),
                     ("n_steps", int), ("final", dict), ("config", dict)):
        if not isinstance(s.get(key), typ):
            raise RuntimeError(f"summary.json: {key!r} missing or of wrong type")
    if s["status"] not in STATUS_EXIT:
        raise RuntimeError(f"summary.json: unknown status {s['status']!r}")


# ---------------------------------------------------------------------------
# sweeps and matrices


def fit_order(h, err):
    """Least-squares slope of log(err) against log(h)."""
    h, err = np.asarray(h, float), np.asarray(err, float)
    ok = np.isfinite(err) & (err > 0)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(h[ok]), np.log(err[ok]), 1)[0])


def sweep(spec: SweepSpec, write=True, field_index=0):
    """Run every (p, K) member; returns (rows, orders, exit_code)."""
    out = Path(spec.base.output)
    rows = []
    for p, K in spec.grids:
        cfg = spec.base.replace(p=p, elements=(K, K, K), output=str(out / f"p{p}_K{K}"))
        try:
            r = run(cfg, write=write)
            errs = r.summary.get("errors", {})
            row = {"p": p, "K": K, "dofs": r.summary["dofs"], "status": r.status,
                   "wall_clock": r.summary["timing"]["wall_clock"]}
            row.update({f"err_{n}": errs.get(n, math.nan) for n in FIELD_NAMES})
        except Exception as exc:            # a failing member must not stop the sweep
            log.error("sweep member p=%d K=%d failed: %s", p, K, exc)
            row = {"p": p, "K": K, "dofs": K**3 * (p + 1) ** 3, "status": f"error: {exc}",
                   "wall_clock": math.nan}
            row.update({f"err_{n}": math.nan for n in FIELD_NAMES})
        rows.append(row)
    orders = {}
    for p in spec.degrees:
        sel = [r for r in rows if r["p"] == p]
        orders[p] = fit_order([1.0 / r["K"] for r in sel],
                              [r[f"err_{FIELD_NAMES[field_index]}"] for r in sel])
    failed = any(r["status"] != "finished" for r in rows)
    short = spec.expect_order and any(not (orders[p] >= p - 0.3) for p in orders)
    code = 1 if failed or short else 0
    if write:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "convergence.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            for r in rows:
                w.writerow({k: (format(v, ".17g") if isinstance(v, float) else v)
                            for k, v in r.items()})
        (out / "orders.json").write_text(json.dumps(
            {"orders": {str(p): o for p, o in orders.items()}, "exit_code": code}, indent=2))
    return rows, orders, code


def cell_cost(p, K):
    """Rough relative cost of a run: nodes times steps, steps ~ p^2 K."""
    return K**4 * (p + 1) ** 3 * p**2


def robustness(spec: RobustnessSpec, write=True, progress=None):
    """Run the (seed, scheme, p, K) matrix, cheapest cells first.

    With a budget, each run is limited to the remaining time (status
    "deadline") and cells that cannot start are marked "skipped".
    """
    out = Path(spec.base.output)
    start = time.perf_counter()
    order = sorted(((seed, scheme, p, K) for seed in spec.seeds for scheme in spec.schemes
                    for p in spec.p_list for K in spec.elements),
                   key=lambda c: (cell_cost(c[2], c[3]), c))
    done = {}
    for seed, scheme, p, K in order:
        cell = {"seed": seed, "scheme": scheme, "p": p, "K": K, "status": "skipped",
                "exit_code": None, "t_reached": math.nan, "t_final": math.nan,
                "wall_clock": 0.0}
        remaining = spec.budget - (time.perf_counter() - start) if spec.budget else 0.0
        if not spec.budget or remaining > 0:
            cfg = spec.base.replace(scheme=scheme, p=p, elements=(K, K, K), seed=seed,
                                    max_wall=remaining,
                                    output=str(out / f"s{seed}_{scheme}_p{p}_K{K}"))
            r = run(cfg, write=write)
            cell.update(status=r.status, exit_code=r.exit_code,
                        t_reached=r.summary["t_reached"], t_final=r.summary["t_final"],
                        wall_clock=r.summary["timing"]["wall_clock"])
        done[(seed, scheme, p, K)] = cell
        if progress:
            progress(cell)
    cells = [done[(seed, scheme, p, K)] for seed in spec.seeds for scheme in spec.schemes
             for p in spec.p_list for K in spec.elements]
    if write:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "robustness.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(cells[0]))
            w.writeheader()
            w.writerows(cells)
        (out / "robustness.txt").write_text(format_matrix(cells, spec))
    return cells


def format_matrix(cells, spec: RobustnessSpec):
    mark = {"finished": "ok", "blowup": "X", "skipped": "-", "deadline": "-"}
    lines = []
    for seed in spec.seeds:
        lines.append(f"seed {seed}")
        lines.append("scheme  K   " + " ".join(f"p={p:<3d}" for p in spec.p_list))
        for scheme in spec.schemes:
            for K in spec.elements:
                row = [c for c in cells if c["seed"] == seed and c["scheme"] == scheme
                       and c["K"] == K]
                marks = [mark.get(c["status"], "?") for c in sorted(row, key=lambda c: c["p"])]
                lines.append(f"{scheme:<7s} {K:<3d} " + " ".join(f"{m:<5s}" for m in marks))
    return "\n".join(lines) + "\n"
