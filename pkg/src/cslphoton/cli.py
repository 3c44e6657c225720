"""Command-line scenario runner.

    cslphoton --config vulcan.cfg --out vulcan.csv [--seed N] [--strict]
              [--tol X] [--samples N]

The scenario kind comes from the config's ``[kind]`` header.  ``--config``
also accepts the name of a bundled scenario (``vulcan``, ``lcls``,
``cw-megawatt``, ``cmb-default``, ``superposition-demo``, ``fock-demo``).
Results go to a CSV with a ``#`` metadata header; a summary block goes to
standard output.  With ``--strict`` any validity flag makes the exit status 2.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, cosmology, energy_gain, laser, lindblad_fock, superposition, validation
from .config import ConfigError, ScenarioConfig, parse_config
from .units import CollapseParams, nm_to_cm

EXIT_OK, EXIT_CONFIG, EXIT_FLAGGED, EXIT_IO = 0, 1, 2, 3


@dataclass
class RunResult:
    columns: list            # (name, unit)
    rows: list
    summary: list            # (key, value)
    flags: list = field(default_factory=list)       # validity problems; fail --strict
    warnings: list = field(default_factory=list)    # caveats; reported only


@dataclass
class RunOptions:
    seed: int = 0
    tol: float | None = None
    samples: int | None = None


def _params(cfg: ScenarioConfig) -> CollapseParams:
    return CollapseParams(
        lambda_rate=cfg.get("lambda_rate"),
        a=cfg.get("a_cm"),
        lambda_bar_N=cfg.get("lambda_bar_N_cm"),
        override=cfg.get("override"),
    )


def _pulse(cfg: ScenarioConfig) -> laser.LaserPulseSpec:
    if cfg.is_set("k0_cm_inv"):
        lam = 2.0 * math.pi / cfg.get("k0_cm_inv")
    elif cfg.is_set("lambda0_cm"):
        lam = cfg.get("lambda0_cm")
    else:
        lam = float(nm_to_cm(cfg.get("lambda0_nm")))
    kw = {"n_mean0": cfg.get("n0")} if cfg.is_set("n0") else {"energy": cfg.get("energy_J")}
    return laser.LaserPulseSpec.from_wavelength(lam, cfg.get("sigma_cm"), t=cfg.get("t_s"), **kw)


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x)) if math.isfinite(x) else str(float(x))
    return str(x)


# -- scenario kinds ----------------------------------------------------------------

def run_energy_gain(cfg, opts):
    p = _params(cfg)
    M, a = cfg.get("M_cm_inv"), p.a
    tol = opts.tol or 1e-10
    ka = np.geomspace(cfg.get("k1a_min"), cfg.get("k1a_max"), cfg.get("points"))
    rows = []
    for x in ka:
        k1 = float(x / a)
        fe = energy_gain.f_exact(k1, M, a, tol)
        other = energy_gain.f_low_ka_photon(k1, a) if M == 0 else energy_gain.f_nonrel(k1, M, a)
        rate = energy_gain.rate_per_particle(k1, M, p, "exact", tol).rate
        rows.append([k1, float(x), fe, energy_gain.f_high_ka(k1, M, a), other, rate])
    other_name = "f_low_ka_photon" if M == 0 else "f_nonrel"
    cols = [("k1_cm_inv", "cm^-1"), ("k1a", "1"), ("f_exact", "cm^-6"), ("f_high_ka", "cm^-6"),
            (other_name, "cm^-6"), ("rate_per_particle", "cm^-1 s^-1")]
    summary = [("growth_exponent_per_s", energy_gain.growth_exponent(p, 1.0))]
    if M > 0:
        summary.append(("note", energy_gain.FREE_PARTICLE_NOTE))
    return RunResult(cols, rows, summary)


def run_laser_loss(cfg, opts):
    p = _params(cfg)
    spec = _pulse(cfg)
    rows, flags = [], []
    for regime in laser.LOSS_REGIMES:
        r = laser.mean_photons(spec, p, regime=regime)
        rows.append([regime, r.loss_coefficient, r.n_mean_t, r.loss_fraction, r.valid])
        if not r.valid:
            flags.append(f"{regime}: loss fraction {r.loss_fraction:.3g} outside first-order validity")
    cols = [("regime", ""), ("loss_coefficient", "per unit lambda t"), ("n_mean_t", "photons"),
            ("loss_fraction", "1"), ("valid", "")]
    summary = [
        ("k0_cm_inv", spec.k0), ("k0a", spec.k0 * p.a), ("n_mean0", spec.n_mean0),
        ("loss_coefficient_low_k0a", rows[0][1]), ("loss_coefficient_high_k0a", rows[1][1]),
        ("loss_coefficient_exact", rows[2][1]),
        ("appendixB_ratio", laser.appendixB_ratio(spec.k0, spec.sigma, p.a)),
    ]
    return RunResult(cols, rows, summary, flags)


def run_excitation(cfg, opts):
    p = _params(cfg)
    spec = _pulse(cfg)
    k = laser.default_grid(spec, p.a, cfg.get("points"))
    sp = laser.excitation_density(k, spec, p, form=cfg.get("form"))
    rows = [[float(a), float(b), float(c)] for a, b, c in zip(sp.k, sp.density, sp.cumulative_fraction)]
    rate = laser.total_excitation_rate(spec, p)
    cols = [("k_cm_inv", "cm^-1"), ("P_per_d3k", "cm^3"), ("cumulative_fraction", "1")]
    summary = [
        ("k0a", spec.k0 * p.a), ("total_excitation", sp.total),
        ("gamma_per_photon_per_s", rate.gamma), ("gamma_n0_per_s", rate.gamma_n0),
        ("expected_in_t", rate.expected), ("yield_per_t_year", rate.gamma_n0 * cfg.get("t_year_s")),
        ("trace_check", laser.trace_check(spec, p)),
        ("energy_balance_check", laser.energy_balance_check(spec, p)),
    ]
    notes = []
    if spec.k0 * p.a > 0.3:
        notes.append(f"k0a = {spec.k0 * p.a:.3g}: the total-rate closed form assumes k0a << 1")
    return RunResult(cols, rows, summary, warnings=notes)


def run_cosmology(cfg, opts):
    sc = cosmology.CosmologyScenario(cfg.get("T0_K"), cfg.get("t0_s"), cfg.get("Z0"), _params(cfg),
                                     cfg.get("delta"))
    lam = cosmology.default_wavelengths(cfg.get("lambda_min_cm"), cfg.get("lambda_max_cm"),
                                        cfg.get("points_per_decade"))
    pts = cosmology.distorted_spectrum(lam, sc)
    rows = [[q.lambda0, q.planck, q.distorted, q.fractional_loss, q.valid] for q in pts]
    cols = [("lambda0_cm", "cm"), ("planck_occupancy", "cm^-3 Hz^-1"),
            ("distorted_occupancy", "cm^-3 Hz^-1"), ("fractional_loss", "1"), ("validity_flag", "")]
    verdict = cosmology.temperature_degeneracy(1.0, sc)
    peak = cosmology.spectral_peak_wavelength(sc)
    summary = [
        ("redshift_time_integral", cosmology.redshift_time_integral(sc)),
        ("loss_coefficient_cm", cosmology.loss_coefficient(sc)),
        ("fractional_loss_per_lambda_at_0.1cm", cosmology.loss_coefficient(sc) / 0.1),
        ("lambda_bound_at_1cm_per_s", verdict.lambda_bound),
        ("loss_gain_ratio_at_peak", cosmology.gain_term(peak, sc).ratio),
        ("lambda_th0_cm", sc.lambda_th0),
    ]
    flags = [f"lambda0 = {q.lambda0:.3g} cm: loss {q.fractional_loss:.3g} >= 1" for q in pts
             if not q.first_order]
    return RunResult(cols, rows, summary, flags)


def run_superposition(cfg, opts):
    p = _params(cfg)
    spec = superposition.SuperpositionSpec(cfg.get("N"), cfg.get("sigma_cm"), cfg.get("k0_cm_inv"),
                                           cfg.get("M_cm_inv"), cfg.get("d_cm"), p.a)
    d = superposition.offdiag_decay(spec, p, cfg.get("t_s"))
    closed = (d.I1, d.I2, d.I3)
    rows = []
    if cfg.get("oracle"):
        samples = opts.samples or cfg.get("samples")
        orc = superposition.integrals_oracle(spec, samples=samples, seed=opts.seed)
        for name, c, o in zip(("I1", "I2", "I3"), closed, orc):
            rows.append([name, c, o.value, o.error_estimate])
    else:
        for name, c in zip(("I1", "I2", "I3"), closed):
            rows.append([name, c, "", ""])
    cols = [("integral", ""), ("integrals_closed", "cm^-2"), ("integrals_oracle", "cm^-2"),
            ("standard_error", "cm^-2")]
    summary = [("offdiag", d.offdiag), ("bracket", d.bracket), ("decay", d.decay),
               ("overlap", spec.overlap)]
    flags = [] if d.valid else [f"decay {d.decay:.3g} >= 1/2: outside first order"]
    return RunResult(cols, rows, summary, flags)


def _ints(text, K=None):
    vals = [int(v) for v in text.replace(",", " ").split()]
    if K is not None and len(vals) != K:
        raise ValueError(f"expected {K} integers, got {text!r}")
    return vals


def run_fock(cfg, opts):
    modes = [_ints(m, 3) for m in cfg.get("modes").split(";") if m.strip()]
    grid = lindblad_fock.ModeGrid(modes, cfg.get("L_cm"), cfg.get("M_cm_inv"))
    nmax = cfg.get("nmax")
    if cfg.is_set("c0"):
        model = lindblad_fock.FockModel(grid, cfg.get("c0"), cfg.get("a_cm"), nmax)
    else:
        model = lindblad_fock.FockModel.from_params(grid, _params(cfg), nmax)
    kind = cfg.get("state")
    pairs = []
    if kind == "thermal":
        st = lindblad_fock.thermal_state(model, cfg.get("beta_cm"))
    elif kind == "number":
        st = lindblad_fock.number_state(model, _ints(cfg.get("occupations"), grid.K))
    elif kind == "superposition":
        oa = _ints(cfg.get("occupations"), grid.K)
        ob = _ints(cfg.get("occupations_b"), grid.K)
        st = lindblad_fock.superposition_state(model, oa, ob)
        pairs = [(model.basis_index(oa), model.basis_index(ob))]
    else:
        st = lindblad_fock.coherent_state(model, [float(x) for x in cfg.get("alphas").replace(",", " ").split()])
    times = np.linspace(0.0, cfg.get("t_end_s"), cfg.get("points"))
    ts = lindblad_fock.evolve_series(st, model, times, pairs)
    rows = []
    for i, t in enumerate(ts.t):
        rows.append([float(t), ts.trace[i], ts.number[i], ts.energy[i]]
                    + [float(abs(ts.coherences[p][i])) for p in map(tuple, pairs)])
    cols = [("t", "s"), ("trace", "1"), ("N", "photons"), ("E", "cm^-1")] + [
        (f"abs_coherence_{i}_{j}", "1") for i, j in pairs]
    summary = [("dimension", model.dim), ("c0", model.c0),
               ("trace_drift", float(np.max(np.abs(ts.trace - ts.trace[0])))),
               ("number_drift", float(np.max(np.abs(ts.number - ts.number[0])))),
               ("energy_change", float(ts.energy[-1] - ts.energy[0])),
               ("truncation_flag", ts.truncation_flag)]
    flags = ["top Fock layer occupancy >= 1e-6: raise nmax"] if ts.truncation_flag else []
    return RunResult(cols, rows, summary, flags)


def run_validate(cfg, opts):
    checks = validation.run_suite(samples=opts.samples or cfg.get("samples"), quick=cfg.get("quick"))
    rows = [[c.name, c.value, c.reference, c.tolerance, c.passed] for c in checks]
    cols = [("check", ""), ("value", ""), ("reference", ""), ("tolerance", ""), ("passed", "")]
    summary = [("checks", len(checks)), ("passed", sum(c.passed for c in checks))]
    flags = [f"FAIL {c.name}" for c in checks if not c.passed]
    return RunResult(cols, rows, summary, flags)


DISPATCH = {
    "energy-gain": run_energy_gain,
    "laser-loss": run_laser_loss,
    "excitation": run_excitation,
    "cosmology": run_cosmology,
    "superposition": run_superposition,
    "fock-sim": run_fock,
    "validate": run_validate,
}


def run(cfg: ScenarioConfig, opts: RunOptions | None = None) -> RunResult:
    """Compute a scenario; no I/O."""
    opts = opts or RunOptions()
    return DISPATCH[cfg.kind](cfg, opts)


def render_csv(cfg: ScenarioConfig, result: RunResult, opts: RunOptions) -> str:
    buf = io.StringIO()
    buf.write(f"# tool: cslphoton {__version__}\n")
    buf.write(f"# kind: {cfg.kind}\n")
    buf.write(f"# seed: {opts.seed}\n")
    for line in cfg.echo():
        buf.write(f"# config: {line}\n")
    buf.write("# units: " + ", ".join(f"{n} [{u}]" if u else n for n, u in result.columns) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([n for n, _ in result.columns])
    for row in result.rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def render_summary(cfg: ScenarioConfig, result: RunResult) -> str:
    lines = [f"[{cfg.kind}] summary"]
    lines += [f"  {k}: {_fmt(v)}" for k, v in result.summary]
    if cfg.kind == "validate":
        lines += [f"  {'PASS' if r[4] else 'FAIL'}  {r[0]}" for r in result.rows]
    lines += [f"  WARNING: {w}" for w in result.warnings]
    lines += [f"  FLAG: {f}" for f in result.flags]
    return "\n".join(lines) + "\n"


def _read_config(arg: str) -> tuple[str, str]:
    path = Path(arg)
    if path.exists():
        return path.read_text(encoding="utf-8"), str(path)
    name = arg if arg.endswith(".cfg") else arg + ".cfg"
    res = resources.files("cslphoton") / "scenarios" / name
    if res.is_file():
        return res.read_text(encoding="utf-8"), f"scenarios/{name}"
    raise FileNotFoundError(arg)


def bundled_scenarios() -> list[str]:
    return sorted(p.name[:-4] for p in (resources.files("cslphoton") / "scenarios").iterdir()
                  if p.name.endswith(".cfg"))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="cslphoton", description="Run a collapse-model scenario.")
    ap.add_argument("--config", required=True, help="config path or bundled scenario name")
    ap.add_argument("--out", help="CSV output path (default: standard output)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--strict", action="store_true", help="exit 2 on any validity flag")
    ap.add_argument("--tol", type=float, help="relative quadrature tolerance override")
    ap.add_argument("--samples", type=int, help="Monte-Carlo sample count override")
    args = ap.parse_args(argv)

    try:
        text, source = _read_config(args.config)
    except (OSError, FileNotFoundError) as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text, source)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"{source}: {e}", file=sys.stderr)
        return EXIT_CONFIG

    opts = RunOptions(seed=args.seed, tol=args.tol, samples=args.samples)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            result = run(cfg, opts)
        except ValueError as exc:
            print(f"{source}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    result.warnings.extend(str(w.message) for w in caught)

    body = render_csv(cfg, result, opts)
    try:
        if args.out:
            Path(args.out).write_text(body, encoding="utf-8")
        else:
            sys.stdout.write(body)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    sys.stdout.write(render_summary(cfg, result))
    if args.strict and result.flags:
        return EXIT_FLAGGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
