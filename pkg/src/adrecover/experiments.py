"""Sweeps and canonical figure/table runs, producing plain row dictionaries."""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence

from .channel import damp_two_closed_form
from .errors import AdRecoverError
from .metrics import concurrence, fidelity
from .recovery import ExtendedConfig, recovered_closed_form, run_extended
from .robust import (DEFAULT_SAMPLES, DEFAULT_SEED, ThetaGrid, UncertaintySpec,
                     ensemble_curve, fixed_theta_crossing, mismatch_study, optimize_theta)
from .states import NAMED_STATES, TwoQubitParams

NAN = float("nan")
FIGURE_X = (0.1, 0.5, 0.8)
MISMATCH_P_HAT = 0.7
TARGETS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "table2")


def frange(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid; values are rounded to 12 decimals to keep CSV output stable."""
    if step <= 0:
        raise ValueError("step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + k * step, 12) for k in range(n + 1)]


def _x_label(x: float) -> str:
    return f"x{x:g}"


def sweep_rows(params: TwoQubitParams, p_grid: Iterable[float],
               xs: Sequence[float] = ()) -> list[dict]:
    """Damped, recovered and (optionally) extended-scheme metrics along a p grid.

    Recovered and extended columns are NaN at p = 1 where the matched
    recovery angle does not exist.
    """
    rho = params.matrix()
    rows = []
    for p in p_grid:
        damped = damp_two_closed_form(params, p)
        row = {"p": float(p), "F_d": fidelity(rho, damped)}
        if p < 1.0:
            rec = recovered_closed_form(params, p)
            row["F_r"] = fidelity(rho, rec.state)
            row["C_d"] = concurrence(damped)
            row["C_r"] = concurrence(rec.state)
            row["P_r"] = rec.success_probability
        else:
            row.update(F_r=NAN, C_d=concurrence(damped), C_r=NAN, P_r=NAN)
        for x in xs:
            lab = _x_label(x)
            if p < 1.0:
                ext = run_extended(params, ExtendedConfig(x=x, p=p))
                row[f"F_ext_{lab}"] = fidelity(rho, ext.state)
                row[f"C_ext_{lab}"] = concurrence(ext.state)
                row[f"P_ext_{lab}"] = ext.success_probability
            else:
                row[f"F_ext_{lab}"] = row[f"C_ext_{lab}"] = row[f"P_ext_{lab}"] = NAN
        rows.append(row)
    return rows


def rows_to_csv(rows: list[dict], meta: dict | None = None,
                columns: Sequence[str] | None = None) -> str:
    buf = io.StringIO()
    for key, value in (meta or {}).items():
        buf.write(f"# {key}={value}\n")
    columns = list(columns or (rows[0].keys() if rows else []))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return repr(float(v))


def rows_to_json(rows: list[dict], meta: dict | None = None) -> str:
    def clean(v):
        if isinstance(v, float) and math.isnan(v):
            return None
        return v

    payload = dict(meta or {})
    payload["rows"] = [{k: clean(v) for k, v in r.items()} for r in rows]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _figure_sweep(xs=()) -> list[dict]:
    rows = []
    for name in ("rho1", "rho2"):
        for row in sweep_rows(NAMED_STATES[name], frange(0.0, 0.99, 0.01), xs):
            rows.append({"state": name, **row})
    return rows


def reproduce(target: str, fmt: str = "csv", n_samples: int = DEFAULT_SAMPLES,
              seed: int = DEFAULT_SEED) -> str:
    """Canonical data file for a figure or table, serialized as ``fmt``."""
    meta = {"target": target, "seed": seed}
    if target == "table2":
        report = optimize_theta(ThetaGrid(), UncertaintySpec(n_samples=n_samples, master_seed=seed))
        return report.to_json() if fmt == "json" else report.to_csv()

    if target in ("fig2", "fig4"):
        rows = _figure_sweep()
        cols = ["state", "p"] + (["F_d", "F_r"] if target == "fig2" else ["C_d", "C_r"])
    elif target in ("fig5", "fig6"):
        rows = _figure_sweep(FIGURE_X)
        key = "C" if target == "fig5" else "F"
        cols = ["state", "p", f"{key}_d", f"{key}_r"]
        cols += [f"{key}_ext_{_x_label(x)}" for x in FIGURE_X]
        cols += [f"P_ext_{_x_label(x)}" for x in FIGURE_X]
    elif target == "fig3":
        meta["n_samples"] = n_samples
        rows = ensemble_curve(frange(0.05, 0.95, 0.05), n_samples=n_samples, master_seed=seed)
        cols = ["p", "F_d", "F_d_stderr", "F_r", "F_r_stderr"]
    elif target in ("fig7", "fig8"):
        params = NAMED_STATES["rho1" if target == "fig7" else "rho2"]
        meta["state"] = "rho1" if target == "fig7" else "rho2"
        meta["p_hat"] = MISMATCH_P_HAT
        meta["crossing"] = repr(fixed_theta_crossing(params, MISMATCH_P_HAT))
        rows = [r._asdict() for r in mismatch_study(params, MISMATCH_P_HAT,
                                                    frange(0.0, 0.99, 0.01))]
        rows = [{"p": r["p"], "F_fixed": r["f_fixed"], "F_adaptive": r["f_adaptive"],
                 "F_damped": r["f_damped"]} for r in rows]
        cols = ["p", "F_fixed", "F_adaptive", "F_damped"]
    else:
        raise AdRecoverError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")

    if fmt == "json":
        return rows_to_json([{c: r[c] for c in cols} for r in rows], meta)
    return rows_to_csv(rows, meta, cols)

