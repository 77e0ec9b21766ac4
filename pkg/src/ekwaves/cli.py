"""Configuration-driven command line entry point.

Every subcommand reads a single JSON config, writes CSV/JSON artifacts
into the output directory, and records a manifest echoing the fully
defaulted configuration together with package and library versions and the
computed diagnostics, so a run is reproducible from its manifest alone.
Exit codes: 2 for configuration errors, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .discretization import (FieldState, Grid, discrete_H, discrete_P,
                             norm_h0, simulate)
from .errors import ConfigError, EKError
from .models import FluidModel, builtin_model, consistency_report
from .profiles import (EndState, WaveProfile, kink_profile, saddle_check,
                       solve_kink_endstates, soliton_profile)
from .stability import (assemble_d2E, spectrum_d2E, stability_report,
                        transonic_stability_scan)

SUBCOMMANDS = ("model", "profile", "stability-scan", "spectrum", "simulate",
               "newton", "multisoliton-demo")


# --------------------------------------------------------------------------
# configuration plumbing


@dataclass
class RunConfig:
    """Validated view over the JSON config with defaults echoed back."""

    raw: dict
    resolved: dict = field(default_factory=dict)

    def get(self, path: str, default=None, required=False, kind=None,
            positive=False):
        node = self.raw
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                if required:
                    raise ConfigError(f"missing config field '{path}'",
                                      field=path)
                node = default
                break
            node = node[part]
        if node is not None and kind is not None:
            try:
                node = kind(node) if not isinstance(node, kind) else node
            except (TypeError, ValueError):
                raise ConfigError(f"field '{path}' has invalid type",
                                  field=path) from None
        if positive and node is not None and not (isinstance(node, (int, float))
                                                  and node > 0):
            raise ConfigError(f"field '{path}' must be positive", field=path)
        cursor = self.resolved
        parts = path.split(".")
        for part in parts[:-1]:
            cursor = cursor.setdefault(part, {})
        cursor[parts[-1]] = node
        return node

    @staticmethod
    def load(path: str) -> "RunConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}", field="config")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}",
                              field="config")
        if not isinstance(raw, dict):
            raise ConfigError("config root must be an object", field="config")
        return RunConfig(raw=raw)


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path: Path, header, columns) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def load_model(cfg: RunConfig) -> FluidModel:
    name = cfg.get("model.name", required=True, kind=str)
    kval = cfg.get("model.kval", default=None)
    coeffs = cfg.get("model.g_coeffs", default=None)
    anchor = cfg.get("model.rho_anchor", default=1.0, kind=float)
    return builtin_model(name, kval=kval, g_coeffs=coeffs, rho_anchor=anchor)


def _endstate(cfg: RunConfig) -> EndState:
    rho = cfg.get("profile.rho_plus", default=1.0, kind=float, positive=True)
    v = cfg.get("profile.v_plus", default=0.0, kind=float)
    return EndState(rho=rho, v=v)


def build_profile(model: FluidModel, cfg: RunConfig) -> WaveProfile:
    kind = cfg.get("profile.kind", default="soliton", kind=str)
    half_width = cfg.get("profile.half_width", default=40.0, kind=float,
                         positive=True)
    n = cfg.get("profile.n", default=8193, kind=int, positive=True)
    c = cfg.get("profile.c", required=True, kind=float)
    if kind == "soliton":
        return soliton_profile(model, _endstate(cfg), c, half_width, n)
    if kind == "kink":
        guess = cfg.get("profile.guess", required=True)
        if not (isinstance(guess, (list, tuple)) and len(guess) == 3):
            raise ConfigError("profile.guess must be [rho-, rho+, v+]",
                              field="profile.guess")
        spec = solve_kink_endstates(model, c, tuple(float(x) for x in guess))
        return kink_profile(model, spec, half_width, n)
    raise ConfigError(f"unknown profile kind '{kind}'", field="profile.kind")


def grid_from_config(cfg: RunConfig, default_boundary="periodic",
                     left=None, right=None) -> Grid:
    n = cfg.get("grid.n", default=1024, kind=int)
    width = cfg.get("grid.width", default=80.0, kind=float, positive=True)
    x0 = cfg.get("grid.x0", default=-width / 2.0, kind=float)
    boundary = cfg.get("grid.boundary", default=default_boundary, kind=str)
    if n <= 0:
        raise ConfigError("grid.n must be positive", field="grid.n")
    if boundary == "periodic":
        return Grid.periodic_grid(x0, width, n)
    if boundary == "clamped":
        if left is None or right is None:
            raise ConfigError("clamped grid needs wave endstates",
                              field="grid.boundary")
        return Grid.clamped_grid(x0, width, n, left, right)
    raise ConfigError(f"unknown boundary '{boundary}'", field="grid.boundary")


def write_manifest(out: Path, subcommand: str, cfg: RunConfig, norms: dict):
    import scipy
    manifest = {
        "subcommand": subcommand,
        "config": cfg.resolved,
        "versions": {
            "ekwaves": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "kernel_backend": kernels.BACKEND,
        },
        "norms": norms,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


# --------------------------------------------------------------------------
# subcommands


def cmd_model(cfg: RunConfig, out: Path, verbosity: int) -> dict:
    model = load_model(cfg)
    lo = cfg.get("model.check_lo", default=0.2, kind=float)
    hi = cfg.get("model.check_hi", default=4.0, kind=float)
    rng = np.random.default_rng(cfg.get("model.seed", default=0, kind=int))
    samples = rng.uniform(lo, hi, size=1000)
    report = consistency_report(model, samples)
    rho_tab = np.linspace(lo, hi, 41)
    write_csv(out / "model.csv", ["rho", "g", "K", "sound_speed_sq"],
              [rho_tab, model.g(rho_tab), model.K(rho_tab),
               rho_tab * model.g1(rho_tab)])
    with open(out / "model_report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"max_derivative_mismatch": max(report["g1"], report["K1"])}


def cmd_profile(cfg: RunConfig, out: Path, verbosity: int) -> dict:
    model = load_model(cfg)
    prof = build_profile(model, cfg)
    write_csv(out / "profile.csv", ["xi", "rho", "v"],
              [prof.xi, prof.rho, prof.v])
    spec = prof.spec
    lam_p, lam_m = saddle_check(model, spec.right.rho, spec.j)
    sidecar = {
        "kind": spec.kind,
        "c": spec.c, "j": spec.j, "q": spec.q,
        "rho_m": prof.rho_min,
        "endstates": {
            "right": {"rho": spec.right.rho, "v": spec.right.v},
            "left": ({"rho": spec.left.rho, "v": spec.left.v}
                     if spec.left else None),
        },
        "tail_rates": {"left": prof.tail_rate_left,
                       "right": prof.tail_rate_right},
        "saddle_lambda_plus": (lam_p.real if isinstance(lam_p, complex)
                               else lam_p),
        "residual_norms": {"ode_sup": prof.ode_residual},
    }
    with open(out / "profile.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"ode_residual": prof.ode_residual, "rho_m": prof.rho_min}


def cmd_stability_scan(cfg: RunConfig, out: Path, verbosity: int) -> dict:
    model = load_model(cfg)
    right = _endstate(cfg)
    kind = cfg.get("scan.kind", default="speed", kind=str)
    h_c = cfg.get("scan.h_c", default=1e-3, kind=float, positive=True)
    if kind == "speed":
        c_values = cfg.get("scan.c_values", required=True)
        rows = [stability_report(model, right, float(c), h_c)
                for c in c_values]
        write_csv(out / "stability_scan.csv", ["c", "P", "dPdc", "stable"],
                  [[r.c for r in rows], [r.P for r in rows],
                   [r.dPdc for r in rows],
                   [1.0 if r.verdict == "stable" else 0.0 for r in rows]])
        return {"all_stable": all(r.verdict == "stable" for r in rows)}
    if kind == "transonic":
        eps = cfg.get("scan.eps", required=True)
        scan = transonic_stability_scan(model, right, [float(e) for e in eps])
        write_csv(out / "transonic_scan.csv",
                  ["eps", "c", "delta", "P", "dPddelta"],
                  [scan.eps, scan.c, scan.delta, scan.P, scan.dPddelta])
        return {"slope": scan.slope, "dP_positive": scan.dP_positive,
                "hypothesis_ok": scan.hypothesis_ok}
    raise ConfigError(f"unknown scan kind '{kind}'", field="scan.kind")


def cmd_spectrum(cfg: RunConfig, out: Path, verbosity: int) -> dict:
    model = load_model(cfg)
    prof = build_profile(model, cfg)
    grid = grid_from_config(cfg, left=prof.spec.left or prof.spec.right,
                            right=prof.spec.right)
    matrix = assemble_d2E(model, prof, grid)
    h_c = cfg.get("spectrum.h_c", default=1e-3, kind=float, positive=True)
    rep = spectrum_d2E(matrix, prof, model, grid, h_c)
    payload = {
        "n_negative": rep.n_negative,
        "kernel_residual": rep.kernel_residual,
        "jordan_residual": (None if math.isnan(rep.jordan_residual)
                            else rep.jordan_residual),
        "grid_spacing": rep.grid_spacing,
        "lowest_eigenvalues": rep.eigenvalues[:16].tolist(),
        "max_abs_eigenvalue": float(max(abs(rep.eigenvalues[0]),
                                        abs(rep.eigenvalues[-1]))),
    }
    with open(out / "spectrum.json", "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"n_negative": rep.n_negative,
            "kernel_residual": rep.kernel_residual}


def cmd_simulate(cfg: RunConfig, out: Path, verbosity: int) -> dict:
    model = load_model(cfg)
    prof = build_profile(model, cfg)
    grid = grid_from_config(cfg, left=prof.spec.left or prof.spec.right,
                            right=prof.spec.right)
    endstate = prof.spec.right
    rho, _ = prof(grid.x)
    v = prof.spec.c + prof.spec.j / rho
    amp = cfg.get("simulate.perturbation.amplitude", default=0.0, kind=float)
    if amp:
        rng = np.random.default_rng(
            cfg.get("simulate.perturbation.seed", default=0, kind=int))
        spec = np.fft.rfft(rng.standard_normal(grid.n))
        spec *= np.exp(-(np.arange(len(spec)) / 40.0) ** 2)
        bump = np.fft.irfft(spec, grid.n)
        rho = rho + amp * bump / np.max(np.abs(bump))
    state = FieldState(rho, v, 0.0)
    T = cfg.get("simulate.T", default=1.0, kind=float, positive=True)
    scheme = cfg.get("simulate.scheme", default="rk4_primitive", kind=str)
    order = cfg.get("simulate.order", default=4, kind=int)
    stride = cfg.get("simulate.snapshot_stride", default=None)
    tail = abs(rho[0] - endstate.rho) + abs(rho[-1] - endstate.rho)
    if grid.periodic and tail > 1e-10 and verbosity >= 0:
        print(f"warning: profile tails {tail:.2e} at the periodic seam; "
              "widen the grid", file=sys.stderr)
    log = simulate(model, state, grid, T, endstate, scheme=scheme, order=order,
                   log_every=cfg.get("simulate.log_every", default=0.5,
                                     kind=float),
                   snapshot_every=stride)
    write_csv(out / "conservation.csv", ["t", "H", "P", "min_rho"],
              [log.t, log.H, log.P, log.min_rho])
    for k, (t, snap) in enumerate(log.snapshots):
        write_csv(out / f"snapshot_{k:04d}.csv", ["x", "rho", "v"],
                  [grid.x, snap.rho, snap.v])
    H_drift = float(np.max(np.abs(log.H - log.H[0])) / max(1.0, abs(log.H[0])))
    P_drift = float(np.max(np.abs(log.P - log.P[0])) / max(1.0, abs(log.P[0])))
    return {"H_drift": H_drift, "P_drift": P_drift,
            "min_rho": float(np.min(log.min_rho))}


def _multisoliton_setup(cfg: RunConfig, model: FluidModel):
    from .multisoliton import MultiSolitonConfig
    right = _endstate(cfg)
    speeds = cfg.get("newton.speeds", required=True)
    if not isinstance(speeds, (list, tuple)) or len(speeds) < 1:
        raise ConfigError("newton.speeds must be a non-empty list",
                          field="newton.speeds")
    A = cfg.get("newton.A", default=30.0, kind=float, positive=True)
    offsets = cfg.get("newton.offsets", default=None)
    if offsets is None:
        offsets = [A] * (len(speeds) - 1)
    T_end = cfg.get("newton.T_end", default=6.0, kind=float, positive=True)
    margin = cfg.get("newton.margin", default=None)
    if margin is None:
        kmin = min(
            math.sqrt(max(right.rho * float(model.g1(right.rho))
                          - (float(c) - right.v) ** 2, 1e-12)) /
            math.sqrt(float(model.K(right.rho)) * right.rho)
            for c in speeds)
        margin = min(30.0 / kmin, 150.0)
    margin = float(margin)
    h = cfg.get("newton.h", default=0.02, kind=float, positive=True)
    hw = sum(offsets) + max(float(s) for s in speeds) * T_end + margin + 5.0
    n_tab = int(2 * hw / min(0.015, h)) + 1
    waves = [soliton_profile(model, right, float(c), hw, n_tab)
             for c in speeds]
    config = MultiSolitonConfig(waves=waves, offsets=[float(a) for a in offsets])
    x0 = -margin
    x1 = sum(offsets) + max(float(s) for s in speeds) * T_end + margin
    n = int(math.ceil((x1 - x0) / h))
    grid = Grid.periodic_grid(x0, x1 - x0, n)
    return config, grid, T_end


def cmd_newton(cfg: RunConfig, out: Path, verbosity: int) -> dict:
    from .multisoliton import newton_iterate
    model = load_model(cfg)
    config, grid, T_end = _multisoliton_setup(cfg, model)
    sol = newton_iterate(
        model, config, grid, T_end,
        k_iters=cfg.get("newton.iterations", default=3, kind=int),
        store_stride=cfg.get("newton.store_stride", default=0.05, kind=float,
                             positive=True),
        dt_fd=cfg.get("newton.dt_fd", default=1e-4, kind=float, positive=True),
        floor_factor=cfg.get("newton.floor_factor", default=3.0, kind=float),
        f0_max=cfg.get("newton.f0_max", default=1e-2, kind=float))
    records = []
    for j, hist in enumerate(sol.residual_history):
        csv_path = out / f"residual_iter{j}.csv"
        write_csv(csv_path, ["t", "norm"], [sol.times, hist])
        records.append({"iteration": j, "sup_residual": float(np.max(hist)),
                        "residual_csv": csv_path.name})
    with open(out / "newton.json", "w") as fh:
        json.dump({"iterations": records, "floor": sol.floor,
                   "stopped_at_floor": sol.stopped_at_floor},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    sups = sol.sup_residuals()
    return {"floor": sol.floor,
            "sup_residuals": [float(s) for s in sups],
            "contraction": (float(sups[1] / sups[0]) if len(sups) > 1
                            else None)}


def cmd_multisoliton_demo(cfg: RunConfig, out: Path, verbosity: int) -> dict:
    from .multisoliton import assemble_S, newton_iterate
    from .discretization import cfl_dt, step_nonlinear
    model = load_model(cfg)
    config, grid, T_end = _multisoliton_setup(cfg, model)
    sol = newton_iterate(
        model, config, grid, T_end,
        k_iters=cfg.get("newton.iterations", default=2, kind=int),
        store_stride=cfg.get("newton.store_stride", default=0.05, kind=float,
                             positive=True),
        dt_fd=cfg.get("newton.dt_fd", default=1e-4, kind=float, positive=True))
    T_sim = cfg.get("newton.T_sim", default=5.0, kind=float, positive=True)
    state = sol.provider(0.0)
    d0 = None
    dt = cfl_dt(model, state, grid)
    nsteps = int(math.ceil(T_sim / dt))
    dt = T_sim / nsteps
    stride = max(1, nsteps // 50)
    ts, dists = [], []
    for k in range(nsteps + 1):
        if k % stride == 0 or k == nsteps:
            S = assemble_S(config, state.t, grid)
            d = norm_h0(grid, state.rho - S.rho, state.v - S.v)
            if d0 is None:
                d0 = d
            ts.append(state.t)
            dists.append(d)
        if k < nsteps:
            state = step_nonlinear(model, state, grid, dt)
    write_csv(out / "distance_to_S.csv", ["t", "distance"], [ts, dists])
    return {"d0": d0, "d_max": float(np.max(dists)),
            "sup_residuals": [float(s) for s in sol.sup_residuals()]}


HANDLERS = {
    "model": cmd_model,
    "profile": cmd_profile,
    "stability-scan": cmd_stability_scan,
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "newton": cmd_newton,
    "multisoliton-demo": cmd_multisoliton_demo,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ekwaves",
        description="Traveling waves, stability diagnostics and multi-soliton "
                    "construction for the 1-D capillary Euler system.")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default="ekwaves_out", help="output directory")
    parser.add_argument("--verbosity", type=int, default=0)
    args = parser.parse_args(argv)

    try:
        cfg = RunConfig.load(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        norms = HANDLERS[args.subcommand](cfg, out, args.verbosity)
        write_manifest(out, args.subcommand, cfg, norms)
    except ConfigError as exc:
        field_note = f" (field: {exc.field})" if exc.field else ""
        print(f"configuration error: {exc}{field_note}", file=sys.stderr)
        return 2
    except EKError as exc:
        print(f"numerical error ({type(exc).__name__}): {exc}",
              file=sys.stderr)
        return 3
    if args.verbosity > 0:
        print(json.dumps(norms, indent=2, sort_keys=True, default=float))
    return 0


if __name__ == "__main__":
    sys.exit(main())
