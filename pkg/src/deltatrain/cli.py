"""Command line harness: sweeps over the two models and the diagram expansion.

All inputs are dimensionless; JC runs measure time in ``1/Lambda`` and QLE
runs in ``1/Omega``.  Every output file starts with ``#`` lines echoing the
full configuration, followed by one header row of column names.

Exit status: 0 on success, 1 for configuration errors, 2 for numerical errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .diagrams import MAX_ENUMERATION_NODES, classify, enumerate_diagrams, sum_check, weight
from .errors import ConfigurationError, NumericalError
from .jaynes_cummings import JCParams, decay_rates, exact_amplitude, jc_kernel, rhp_measure, transfer
from .kernel_core import DeltaSolver, DeltaTrain, FreePropagator
from .qle import OscillatorParams, QLESolver, qle_kernel
from .reference import green_constant, reference_Q2
from .spectral import LorentzDrude, noise_nu

COMMANDS = ("jc-converge", "jc-decay", "qle-converge", "qle-covariance", "diagrams")
FLOAT_FMT = "%.15e"

_DEFAULTS = {
    "jc-converge": dict(kappa_ratio=0.1, scale_T=1.0, N="10,30,100,300,1000"),
    "jc-decay": dict(kappa_ratio=2.5, scale_T=30.0, N="40", j="1,2,3,4"),
    "qle-converge": dict(kappa_ratio=0.1, lambda_ratio=2.0, scale_T=1.0, N="10..2000"),
    "qle-covariance": dict(kappa_ratio=0.1, lambda_ratio=2.0, scale_T=1.0, N="2000"),
    "diagrams": dict(kappa_ratio=0.1, scale_T=1.0, N="4"),
}


@dataclass
class RunConfig:
    command: str
    kappa_ratio: float = 0.1  # kappa/Lambda (JC) or kappa/Omega (QLE)
    lambda_ratio: float = 2.0  # Lambda/Omega, QLE only
    scale_T: float = 1.0  # Lambda T (JC) or Omega T (QLE)
    N: List[int] = field(default_factory=lambda: [100])
    j: List[Optional[int]] = field(default_factory=lambda: [None])
    beta: float = 1.0  # in units of 1/Omega
    thermal_units: str = "physical"
    q0: float = 1.0
    p0: float = 0.0
    points: int = 21
    chi: str = "constant"
    output: Optional[str] = None
    format: str = "csv"

    @property
    def model(self):
        return {"jc-converge": "jc", "jc-decay": "jc", "qle-converge": "qle",
                "qle-covariance": "qle", "diagrams": "diagrams"}.get(self.command)

    def echo(self):
        d = asdict(self)
        d["model"] = self.model
        d["units"] = "Lambda = 1" if self.model in ("jc", "diagrams") else "Omega = 1"
        d["version"] = __version__
        return d


def parse_sweep(text):
    """``"10,30,100"`` or ``"a..b"`` (1-3 steps per decade plus both ends)."""
    text = str(text).strip()
    if not text:
        return []
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
        if lo < 1 or hi < lo:
            raise ConfigurationError(f"N: bad range {text!r}")
        vals = {lo, hi}
        decade = 1
        while decade <= hi:
            for m in (1, 3):
                if lo <= m * decade <= hi:
                    vals.add(m * decade)
            decade *= 10
        return sorted(vals)
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"N: not an integer list: {text!r}") from None


def parse_j(text):
    out = []
    for v in str(text).split(","):
        v = v.strip().lower()
        if not v:
            continue
        if v in ("none", "inf", "all"):
            out.append(None)
        else:
            try:
                out.append(int(v))
            except ValueError:
                raise ConfigurationError(f"j: not an integer: {v!r}") from None
    return out


def read_config_file(path):
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = val
    return values


def _load_chi(config: RunConfig, N):
    if config.chi == "constant":
        return np.ones(N)
    amps = np.loadtxt(config.chi, dtype=float).reshape(-1)
    if amps.shape[0] != N:
        raise ConfigurationError(f"chi: table has {amps.shape[0]} entries, N = {N}")
    return amps


def validate(config: RunConfig):
    """List of violations; empty iff ``run`` would start."""
    bad = []
    if config.command not in COMMANDS:
        bad.append(f"command: must be one of {', '.join(COMMANDS)}")
    for name in ("kappa_ratio", "lambda_ratio", "scale_T", "beta"):
        v = getattr(config, name)
        if not (isinstance(v, (int, float)) and np.isfinite(v) and v > 0):
            bad.append(f"{name}: must be a positive finite number, got {v!r}")
    if not config.N:
        bad.append("N: sweep must not be empty")
    elif any(n < 1 for n in config.N):
        bad.append("N: every entry must be a positive integer")
    elif list(config.N) != sorted(set(config.N)):
        bad.append("N: sweep must be sorted without repeats")
    if not config.j:
        bad.append("j: restriction list must not be empty")
    elif any(v is not None and v < 1 for v in config.j):
        bad.append("j: restrictions must be positive integers or 'none'")
    elif [v for v in config.j if v is not None] != sorted({v for v in config.j if v is not None}):
        bad.append("j: restriction list must be sorted without repeats")
    if config.thermal_units not in ("physical", "literal"):
        bad.append("thermal_units: must be 'physical' or 'literal'")
    if config.format not in ("csv", "json"):
        bad.append("format: must be 'csv' or 'json'")
    if not (isinstance(config.points, int) and config.points >= 1):
        bad.append("points: must be a positive integer")
    if config.command == "diagrams" and config.N and max(config.N) > MAX_ENUMERATION_NODES:
        bad.append(f"N: diagram enumeration is limited to N <= {MAX_ENUMERATION_NODES}")
    if config.chi != "constant":
        if not Path(config.chi).is_file():
            bad.append(f"chi: must be 'constant' or a readable table, got {config.chi!r}")
        elif len(config.N) != 1:
            bad.append("chi: a tabulated profile needs a single N")
    return bad


# ---------------------------------------------------------------------------
# commands; each returns (columns, rows, extra) with extra a dict for metadata


def _cmd_jc_converge(cfg: RunConfig):
    params = JCParams(cfg.kappa_ratio, 1.0)
    T = cfg.scale_T
    exact = complex(exact_amplitude(T, params.kappa, params.lam))
    rows = []
    for N in cfg.N:
        train = DeltaTrain(T, N, _load_chi(cfg, N))
        val = transfer(train, params, cfg.j[0])(T)
        rows.append([N, val.real, exact.real, abs(val - exact)])
    return ["N", "T_delta", "T_exact", "abs_err"], rows, {}


def _cmd_jc_decay(cfg: RunConfig):
    params = JCParams(cfg.kappa_ratio, 1.0)
    T = cfg.scale_T
    rows, rhp = [], {}
    for N in cfg.N:
        train = DeltaTrain(T, N, _load_chi(cfg, N))
        for j in cfg.j:
            g = decay_rates(train, params, j)
            measure = rhp_measure(g, train.spacing)
            rhp[f"N={N},j={j}"] = measure
            for k, gk in enumerate(g, 1):
                rows.append([N, "none" if j is None else j, k, train.node_time(k), gk, measure])
    return ["N", "j", "k", "t_k", "gamma_k", "rhp_I"], rows, {"rhp_I": rhp}


def _cmd_qle_converge(cfg: RunConfig):
    kappa, lam, T = cfg.kappa_ratio, cfg.lambda_ratio, cfg.scale_T
    ref = float(green_constant(T, 1.0, kappa, lam))
    kernel = qle_kernel(LorentzDrude(kappa, lam), max_arc_span=cfg.j[0])
    rows = []
    for N in cfg.N:
        train = DeltaTrain(T, N, _load_chi(cfg, N))
        g = QLESolver(train, kernel, 1.0).script_G(T)
        rows.append([N, g, ref, abs(g - ref) / abs(ref)])
    return ["N", "G_fP_delta", "G_reference", "rel_err"], rows, {}


def _cmd_qle_covariance(cfg: RunConfig):
    kappa, lam, T = cfg.kappa_ratio, cfg.lambda_ratio, cfg.scale_T
    spectral = LorentzDrude(kappa, lam)
    params = OscillatorParams(1.0, cfg.q0, cfg.p0)
    kernel = qle_kernel(spectral, max_arc_span=cfg.j[0])
    times = np.linspace(0.0, T, cfg.points)
    rows = []
    ref = [reference_Q2(t, params, spectral, cfg.beta) for t in times]
    for N in cfg.N:
        train = DeltaTrain(T, N, _load_chi(cfg, N))
        nu = noise_nu(train, spectral, cfg.beta, cfg.thermal_units)
        solver = QLESolver(train, kernel, 1.0)
        for t, r in zip(times, ref):
            q2 = solver.second_moment_Q(t, params, nu)
            rows.append([N, t, q2, r, abs(q2 - r) / abs(r)])
    return ["N", "t", "Q2_delta", "Q2_reference", "rel_err"], rows, {}


def _cmd_diagrams(cfg: RunConfig):
    params = JCParams(cfg.kappa_ratio, 1.0)
    T = cfg.scale_T
    prop = FreePropagator.first_order_unit()
    rows, checks = [], {}
    for N in cfg.N:
        train = DeltaTrain(T, N, _load_chi(cfg, N))
        for j in cfg.j:
            kernel = jc_kernel(params, j)
            f = DeltaSolver(train, kernel, prop).source_nodes([1.0])
            for d in enumerate_diagrams(N, j):
                w = weight(d, T, train, kernel, prop, f)
                rows.append([N, "none" if j is None else j, d.label(), classify(d).value, w.real, w.imag])
            checks[f"N={N},j={j}"] = sum_check(T, train, kernel, None, [1.0], prop)[2]
    return ["N", "j", "arcs", "class", "weight_re", "weight_im"], rows, {"sum_check_abs_diff": checks}


_RUNNERS = {
    "jc-converge": _cmd_jc_converge,
    "jc-decay": _cmd_jc_decay,
    "qle-converge": _cmd_qle_converge,
    "qle-covariance": _cmd_qle_covariance,
    "diagrams": _cmd_diagrams,
}


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % v
    return str(v)


def render(cfg: RunConfig, columns, rows, extra):
    if cfg.format == "json":
        doc = {"config": cfg.echo(), "columns": columns,
               "rows": [[float(v) if isinstance(v, (float, np.floating)) else v for v in r] for r in rows]}
        doc.update(extra)
        return json.dumps(doc, indent=1, default=str) + "\n"
    buf = io.StringIO()
    buf.write(f"# deltatrain {cfg.command}\n")
    for key, val in cfg.echo().items():
        buf.write(f"# {key} = {val}\n")
    for key, val in extra.items():
        for sub, v in val.items():
            buf.write(f"# {key}[{sub}] = {_fmt(float(v))}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows([[_fmt(v) for v in r] for r in rows])
    return buf.getvalue()


def run(config: RunConfig, stdout=None):
    """Run one configuration; returns the exit status."""
    stdout = stdout or sys.stdout
    problems = validate(config)
    if problems:
        for p in problems:
            print(f"deltatrain: config error: {p}", file=sys.stderr)
        return 1
    try:
        text = render(config, *_RUNNERS[config.command](config))
    except ConfigurationError as exc:
        print(f"deltatrain {config.command}: config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"deltatrain {config.command}: numerical error: {exc}", file=sys.stderr)
        return 2
    if config.output:
        Path(config.output).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def build_parser():
    parser = _Parser(prog="deltatrain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--output", "-o")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--N", dest="N", help="list '10,30,100' or range '10..2000'")
        p.add_argument("--j", dest="j", help="arc-span restrictions, e.g. '1,2,3,4' or 'none'")
        p.add_argument("--chi", help="'constant' or a file with N amplitudes")
        if name.startswith("qle"):
            p.add_argument("--kappa-over-omega", dest="kappa_ratio", type=float)
            p.add_argument("--lambda-over-omega", dest="lambda_ratio", type=float)
            p.add_argument("--omega-T", dest="scale_T", type=float)
        else:
            p.add_argument("--kappa-over-lambda", dest="kappa_ratio", type=float)
            p.add_argument("--lambda-T", dest="scale_T", type=float)
        if name == "qle-covariance":
            p.add_argument("--beta", type=float, help="inverse temperature in units of 1/Omega")
            p.add_argument("--thermal-units", choices=("physical", "literal"))
            p.add_argument("--q0", type=float)
            p.add_argument("--p0", type=float)
            p.add_argument("--points", type=int)
    return parser


# config-file keys accepted in addition to the field names
_ALIASES = {"kappa_over_lambda": "kappa_ratio", "kappa_over_omega": "kappa_ratio",
            "lambda_over_omega": "lambda_ratio", "lambda_t": "scale_T", "omega_t": "scale_T"}


def config_from_args(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    values = dict(_DEFAULTS[ns.command])
    if ns.config:
        try:
            file_vals = read_config_file(ns.config)
        except OSError as exc:
            raise ConfigurationError(f"config: cannot read {ns.config}: {exc.strerror}") from None
        for key, val in file_vals.items():
            key = _ALIASES.get(key.lower(), key)
            if key not in {f.name for f in fields(RunConfig)} or key == "command":
                raise ConfigurationError(f"config: unknown key {key!r}")
            values[key] = val
    for key, val in vars(ns).items():
        if key not in ("command", "config") and val is not None:
            values[key] = val
    cfg = RunConfig(ns.command)
    casts = {f.name: f.type for f in fields(RunConfig)}
    for key, val in values.items():
        if key == "N":
            cfg.N = parse_sweep(val)
        elif key == "j":
            cfg.j = parse_j(val)
        elif casts[key] in ("float",):
            try:
                setattr(cfg, key, float(val))
            except ValueError:
                raise ConfigurationError(f"{key}: not a number: {val!r}") from None
        elif casts[key] in ("int",):
            try:
                setattr(cfg, key, int(val))
            except ValueError:
                raise ConfigurationError(f"{key}: not an integer: {val!r}") from None
        else:
            setattr(cfg, key, val)
    return cfg


def main(argv=None):
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
    except ConfigurationError as exc:
        print(f"deltatrain: config error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
