"""Command-line front-end: ``lgdopo <command> [options]``.

Data goes to files under ``--out``; stdout carries short summaries and
stderr diagnostics. Exit codes: 0 success, 2 invalid input, 3 numerical
failure (divergence, singular spectrum).
"""
from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .classical import excited_solution, signal_profile, stability
from .config import CONFIG_SCHEMA, RunConfig, load_config
from .coupling import kappa_ladder
from .errors import NumericalError, ValidationError
from .io import profile_rows, write_csv, write_json, write_pgm
from .linear_quantum import (QuadratureSelector, SpectrumResult, analytic_spectrum,
                             bright_mode_system, empty_mode_system, squeezing_table)
from .modes import (CavityGeometry, RationalSpacingWarning, check_rational_spacing, family_members,
                    transverse_shift)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
SPECTRUM_COLUMNS = ["omega_over_gamma", "S", "V", "source", "ci_halfwidth"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _out_dir(args, cfg: RunConfig | None = None) -> Path:
    d = Path(args.out if args.out is not None else (cfg.out_dir if cfg else "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _load(args) -> RunConfig:
    return load_config(args.config) if args.config else RunConfig()


def _table(rows, cols):
    widths = [max(len(c), *(len(str(r[c])) for r in rows)) for c in cols]
    lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(str(r[c]).rjust(w) for c, w in zip(cols, widths)) for r in rows]
    return "\n".join(lines)


# -- families -----------------------------------------------------------------

def cmd_families(args) -> int:
    if args.family < 0:
        raise ValidationError(f"family must be >= 0, got {args.family}")
    geom = load_config(args.geometry).geometry if args.geometry else None
    members = family_members(args.family)
    rows = []
    for l in sorted({abs(m.oam) for m in members}, reverse=True):
        n = (args.family - l) // 2
        dw = "" if geom is None else transverse_shift(geom, n, l)
        rows.append({"family": args.family, "l": l, "n": n, "members": 1 if l == 0 else 2,
                     "degeneracy": args.family + 1, "delta_omega_over_c_per_L": dw})
    out = _out_dir(args) / f"families_f{args.family}.csv"
    write_csv(out, rows)
    show = [{**r, "delta_omega_over_c_per_L": (f"{r['delta_omega_over_c_per_L']:.6f}" if geom else "-")}
            for r in rows]
    print(_table(show, list(rows[0])))
    print(f"wrote {out}")
    return EXIT_OK


# -- kappa --------------------------------------------------------------------

def cmd_kappa(args) -> int:
    if args.max_family < 0:
        raise ValidationError("max-family must be >= 0")
    rows = [r for f in range(args.max_family + 1) for r in kappa_ladder(f).rows()]
    table = squeezing_table(args.max_family)
    d = _out_dir(args)
    write_csv(d / "kappa.csv", rows)
    write_csv(d / "squeezing_table.csv", table)
    show = [{"family": r["family"], "l": r["l"], "kappa": f"{r['kappa']:.6f}",
             "reduction_%": f"{r['noise_reduction_percent']:.2f}"} for r in table]
    if show:
        print(_table(show, list(show[0])))
    print(f"wrote {d / 'kappa.csv'} and {d / 'squeezing_table.csv'}")
    return EXIT_OK


# -- profile ------------------------------------------------------------------

def cmd_profile(args) -> int:
    cfg = _load(args)
    p = cfg.params
    sol = excited_solution(p, p.l0, args.theta if args.theta is not None else 0.0)
    if not sol.exists:
        raise ValidationError(f"sigma = {p.sigma:g} is below the threshold of the l0 = {p.l0} pair")
    _, stable = stability(sol, p)
    x, y, inten = signal_profile(sol, p, n_points=args.grid, extent=args.extent, theta=args.theta)
    d = _out_dir(args, cfg)
    stem = f"profile_f{p.family}"
    write_pgm(d / f"{stem}.pgm", inten)
    write_csv(d / f"{stem}.csv", profile_rows(x, y, inten), ["x", "y", "value"])
    print(f"family {p.family}, sigma {p.sigma:g}: rho = {sol.rho:.6g}, stable = {stable}, "
          f"peak |A_s|^2 = {inten.max():.6g}")
    print(f"wrote {d / stem}.pgm/.csv")
    return EXIT_OK


# -- spectrum -----------------------------------------------------------------

def _selector(args, l0) -> QuadratureSelector:
    kind = args.kind or ("0" if args.mode == 0 else "c")
    return QuadratureSelector(args.mode, kind, args.quadrature, args.beta)


def analytic_for(cfg: RunConfig, sel: QuadratureSelector, omega) -> SpectrumResult:
    p = cfg.params
    if sel.l not in p.oams:
        raise ValidationError(f"l = {sel.l} is not in family {p.family}")
    if sel.l == p.l0:
        system = bright_mode_system(p.l0, p.sigma, p.g)
    else:
        system = empty_mode_system(p.ladder.kappa(sel.l), 1.0, sel.l)
    return analytic_spectrum(system, sel, omega)


def _write_spectrum(path, res: SpectrumResult):
    write_csv(path, res.rows(), SPECTRUM_COLUMNS)


def cmd_spectrum(args) -> int:
    cfg = _load(args)
    p = cfg.params
    sel = _selector(args, p.l0)
    if sel.l not in p.oams:
        raise ValidationError(f"l = {sel.l} is not in family {p.family}")
    d = _out_dir(args, cfg)
    tag = f"f{p.family}_l{sel.l}_{sel.kind}_{sel.quadrature}_{args.source}"
    if args.source == "analytic":
        omega = np.linspace(0.0, args.omega_max, args.n_omega)
        res = analytic_for(cfg, sel, omega)
    else:
        from .stochastic.ensemble import simulate_spectra

        sim = cfg.sim_config()
        omega = np.arange(0.0, args.omega_max + 1e-9, args.omega_step)
        spectra, ens = simulate_spectra(sim, [sel], omega=omega)
        res = spectra[sel.name]
        write_json(d / f"spectrum_{tag}_divergence.json", ens.report.as_dict())
    out = d / f"spectrum_{tag}.csv"
    _write_spectrum(out, res)
    i0 = int(np.argmin(res.omega))
    print(f"{res.label} ({res.source}): V(omega={res.omega[i0]:g}) = {res.V[i0]:.6g}")
    print(f"wrote {out}")
    return EXIT_OK


# -- resonances ---------------------------------------------------------------

def _g_range(text: str):
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise ValidationError(f"--g-range expects a:b:n, got {text!r}") from None
    if n < 1:
        raise ValidationError("--g-range needs n >= 1")
    return np.linspace(a, b, n)


def cmd_resonances(args) -> int:
    gs = _g_range(args.g_range)
    if args.families < 1:
        raise ValidationError("--families must be >= 1")
    try:
        qs = [int(q) for q in args.q.split(",")]
    except ValueError:
        raise ValidationError(f"--q expects comma-separated integers, got {args.q!r}") from None
    if any(q < 1 for q in qs):
        raise ValidationError("longitudinal orders must be >= 1")
    rows, flagged = [], []
    for g in gs:
        geom = CavityGeometry.symmetric(float(g), 1.0)
        geom.check_stable()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RationalSpacingWarning)
            check_rational_spacing(geom.g_product)
        if caught:
            flagged.append(float(g))
            print(f"warning: g = {g:g}: {caught[0].message}", file=sys.stderr)
        for f in range(args.families):
            shift = transverse_shift(geom, 0, f)
            for q in qs:
                rows.append({"g": float(g), "family": f, "q": q,
                             "omega_over_c_per_L": q * math.pi + shift,
                             "transverse_over_c_per_L": shift})
    d = _out_dir(args)
    out = d / "resonances.csv"
    write_csv(out, rows)
    print(f"{len(gs)} g values x {args.families} families x {len(qs)} longitudinal orders; "
          f"{len(flagged)} with rational spacing")
    print(f"wrote {out}")
    return EXIT_OK


# -- simulate -----------------------------------------------------------------

def cmd_simulate(args) -> int:
    from .stochastic.ensemble import default_selectors, simulate_spectra
    from .stochastic.export import RawSeriesWriter

    cfg = _load(args)
    sim = cfg.sim_config()
    d = _out_dir(args, cfg)
    sels = default_selectors(cfg.family)
    raw = None
    if "raw" in cfg.formats:
        raw = RawSeriesWriter(d / "series.f64", sim.sample_dt,
                              {"config": sim.summary(), "units": "time in 1/gamma_s"})
    omega = np.arange(0.0, args.omega_max + 1e-9, args.omega_step)
    try:
        spectra, ens = simulate_spectra(sim, sels, omega=omega, extra_sink=raw)
    finally:
        if raw is not None:
            raw.close()
    for sel in sels:
        res = spectra[sel.name]
        tag = f"l{sel.l}_{sel.kind}_{sel.quadrature}"
        _write_spectrum(d / f"spectrum_mc_{tag}.csv", res)
        try:
            _write_spectrum(d / f"spectrum_analytic_{tag}.csv", analytic_for(cfg, sel, omega))
        except NumericalError as exc:  # Goldstone-overlapping selector
            print(f"note: no analytic curve for {sel.name}: {exc}", file=sys.stderr)
        except ValidationError:
            pass
    summary = {
        "config": sim.summary(),
        "divergence": ens.report.as_dict(),
        "mean_state": {lab: [v.real, v.imag] for lab, v in zip(ens.layout.labels(), ens.mean_state)},
        "mean_pump_factor": [ens.mean_gain[0].real, ens.mean_gain[0].imag],
        "V0": {k: float(v.V[0]) for k, v in spectra.items()},
        "V0_ci_halfwidth": {k: float(v.ci_halfwidth[0]) for k, v in spectra.items()},
    }
    write_json(d / "simulation_summary.json", summary)
    write_json(d / "divergence_report.json", ens.report.as_dict())
    for k, v in spectra.items():
        print(f"{k:>12}: V(0) = {v.V[0]:.5f} +- {v.ci_halfwidth[0]:.5f}")
    print(f"diverged {ens.report.n_diverged}/{ens.report.n_traj}; wrote outputs to {d}")
    return EXIT_OK


def cmd_schema(args) -> int:
    import json

    print(json.dumps(CONFIG_SCHEMA, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lgdopo", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--out", help="output directory (default: config output.dir or .)")
        return sp

    sp = add("families", cmd_families, "list the members of a transverse family")
    sp.add_argument("--family", type=int, required=True)
    sp.add_argument("--geometry", help="config file with a geometry section (adds the frequency shift)")

    sp = add("kappa", cmd_kappa, "coupling ladders and empty-mode noise-reduction table")
    sp.add_argument("--max-family", type=int, default=6)

    sp = add("profile", cmd_profile, "transverse intensity profile of the emitted signal")
    sp.add_argument("--config")
    sp.add_argument("--grid", type=int, default=201)
    sp.add_argument("--extent", type=float, default=3.0, help="half width in waist units")
    sp.add_argument("--theta", type=float, default=None, help="orientation for odd families (default pi/4)")

    sp = add("spectrum", cmd_spectrum, "squeezing spectrum of one quadrature")
    sp.add_argument("--config")
    sp.add_argument("--mode", type=int, required=True, help="OAM l >= 0")
    sp.add_argument("--kind", choices=["c", "s", "+", "-", "0"], default=None)
    sp.add_argument("--quadrature", choices=["x", "y"], default="y")
    sp.add_argument("--beta", type=float, default=0.0, help="hybrid orientation angle")
    sp.add_argument("--source", choices=["analytic", "mc"], default="analytic")
    sp.add_argument("--omega-max", type=float, default=5.0)
    sp.add_argument("--n-omega", type=int, default=101)
    sp.add_argument("--omega-step", type=float, default=0.25, help="output spacing for mc")

    sp = add("resonances", cmd_resonances, "resonance frequencies versus symmetric mirror g")
    sp.add_argument("--g-range", default="0.05:0.95:19")
    sp.add_argument("--families", type=int, default=4)
    sp.add_argument("--q", default="1,2,3", help="comma-separated longitudinal orders")

    sp = add("simulate", cmd_simulate, "positive-P ensemble run with spectra and divergence report")
    sp.add_argument("--config")
    sp.add_argument("--omega-max", type=float, default=5.0)
    sp.add_argument("--omega-step", type=float, default=0.25)

    sp = add("schema", cmd_schema, "print the JSON schema of config files")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
