"""Command-line interface: tables as CSV/JSON, Green-function figures as SVG."""

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import green as gr
from . import kernel as kn
from . import moments as mo
from . import simulator as sim
from . import specfun as sf
from .errors import AccuracyError, DivergenceError, DomainError, FracSPDEError, UnsupportedDistributionError

EXIT_OK = 0
EXIT_FAILED_CHECKS = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

OUTPUT_DIR_ENV = "FRACSPDE_OUTPUT_DIR"

DEFAULT_PLOT_BETAS = (1 / 8, 1 / 2, 1.0, 3 / 2, 5 / 3, 15 / 8)
DEFAULT_SPACE_TIME_BETAS = (6 / 5, 3 / 2, 15 / 8)


class UsageError(FracSPDEError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def _number(text):
    text = text.strip()
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def parse_grid(text):
    """'start:stop:count' -> linspace, 'a,b,c' -> list, 'a' -> [a]; must be strictly increasing."""
    text = str(text)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid spec {text!r} must look like start:stop:count")
        start, stop = _number(parts[0]), _number(parts[1])
        count = int(parts[2])
        if count < 1:
            raise UsageError(f"grid count must be >= 1 in {text!r}")
        values = np.linspace(start, stop, count)
    else:
        values = np.array([_number(p) for p in text.split(",") if p.strip()])
    if values.size == 0:
        raise UsageError(f"empty grid {text!r}")
    if np.any(np.diff(values) <= 0):
        raise UsageError(f"grid {text!r} is not strictly increasing")
    return values


def _list(text):
    return [_number(p) for p in str(text).split(",") if p.strip()]


def _measure(text):
    """'constant:c', 'dirac:loc[:mass]', 'box:a:b[:height]' or 'zero'."""
    parts = str(text).split(":")
    kind = parts[0]
    try:
        vals = [_number(p) for p in parts[1:]]
        if kind == "zero" and not vals:
            return mo.InitialMeasure.zero()
        if kind == "constant" and len(vals) == 1:
            return mo.InitialMeasure.constant(vals[0])
        if kind == "dirac" and len(vals) in (1, 2):
            return mo.InitialMeasure.dirac(vals[0], vals[1] if len(vals) == 2 else 1.0)
        if kind == "box" and len(vals) in (2, 3):
            return mo.InitialMeasure(breakpoints=(vals[0], vals[1]), density_values=(vals[2] if len(vals) == 3 else 1.0,))
    except ValueError as exc:
        raise UsageError(f"bad measure spec {text!r}: {exc}") from exc
    raise UsageError(f"bad measure spec {text!r}; use zero, constant:c, dirac:loc[:mass] or box:a:b[:height]")


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def format_number(v):
    """17 significant digits: parsing the text gives back the same double."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


class OutputRecord:
    def __init__(self, command, params, columns, rows):
        self.command = command
        self.params = params
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([format_number(v) for v in r])
        return buf.getvalue()

    def to_json(self):
        # numbers go through the same 17-digit text so both renderings carry identical values
        rows = [[json.loads(format_number(v)) if math.isfinite(float(v)) else format_number(v) for v in r] for r in self.rows]
        doc = {"command": self.command, "params": self.params, "columns": self.columns, "rows": rows}
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def read_csv(text):
    """Parse CSV emitted by :class:`OutputRecord` back into (columns, float rows)."""
    reader = csv.reader(io.StringIO(text))
    columns = next(reader)
    return columns, [[float(v) for v in row] for row in reader]


def _resolve(path):
    if path is None or path == "-":
        return None
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    return path


def _emit(text, out, stdout):
    path = _resolve(out)
    if path is None:
        stdout.write(text)
    else:
        d = os.path.dirname(path)
        if d:
            os.makedirs(d, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def _write_record(rec, args, stdout):
    fmt = args.format
    if fmt == "svg":
        raise UsageError(f"{rec.command}: svg output is only available for plot-green")
    _emit(rec.to_json() if fmt == "json" else rec.to_csv(), args.out, stdout)


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------


def _policy(args):
    return sf.EvalPolicy(rel_tol=args.rel_tol) if getattr(args, "rel_tol", None) else sf.DEFAULT_POLICY


def cmd_ml(args):
    pol = _policy(args)
    z = parse_grid(args.z)
    rows = [[zi, sf.mittag_leffler((args.alpha, args.beta2), float(zi), pol)] for zi in z]
    return OutputRecord("ml", {"alpha": args.alpha, "beta2": args.beta2}, ["z", "value"], rows)


def cmd_mainardi(args):
    z = parse_grid(args.z)
    if np.any(z < 0):
        raise DomainError("mainardi: z must be nonnegative")
    vals = np.atleast_1d(sf.mainardi((args.lam, args.mu), z, _policy(args)))
    return OutputRecord("mainardi", {"lam": args.lam, "mu": args.mu}, ["z", "value"], zip(z, vals))


def cmd_green(args):
    ts, xs = parse_grid(args.t), parse_grid(args.x)
    pol = _policy(args)
    rows = []
    for t in ts:
        vals = np.atleast_1d(gr.green(args.beta, args.kind, float(t), xs, pol))
        rows.extend([t, x, v] for x, v in zip(xs, vals))
    return OutputRecord("green", {"beta": args.beta, "kind": args.kind}, ["t", "x", "value"], rows)


def cmd_kernel(args):
    ts, xs = parse_grid(args.t), parse_grid(args.x)
    rows = []
    if args.method == "heat-exact":
        for t in ts:
            rows.extend([t, x, float(kn.kernel_heat_exact(args.nu, args.lam, float(t), float(x)))] for x in xs)
        return OutputRecord("kernel", {"method": "heat-exact", "nu": args.nu, "lam": args.lam}, ["t", "x", "value"], rows)
    if args.method == "series":
        handle = kn.GreenHandle.heat(args.nu) if args.beta == 1.0 else kn.GreenHandle.fractional(args.beta, gr.GreenKind.PRIMARY)
        for t in ts:
            for x in xs:
                sums, tail = kn.kernel_series_numeric(handle, args.lam, float(t), float(x), args.n_max)
                rows.append([t, x, sums[-1], tail])
        params = {"method": "series", "beta": args.beta, "lam": args.lam, "n_max": args.n_max}
        return OutputRecord("kernel", params, ["t", "x", "value", "tail_bound"], rows)
    fn = kn.kernel_upper if args.method == "upper" else kn.kernel_lower
    for t in ts:
        for x in xs:
            rep = fn(args.beta, args.lam, float(t), float(x))
            rows.append([t, x, rep.mittag_form, rep.exp_form])
    params = {"method": args.method, "beta": args.beta, "lam": args.lam}
    return OutputRecord("kernel", params, ["t", "x", "mittag_form", "exp_form"], rows)


def _rho_spec(args):
    return mo.RhoSpec(args.lip, args.vip, args.lip_lower, args.vip_lower)


def cmd_moments(args):
    fi = gr.as_index(args.beta)
    rho = _rho_spec(args)
    mu = _measure(args.mu)
    nu = None if fi.slow else _measure(args.nu)
    ts, xs = parse_grid(args.t), parse_grid(args.x)
    rows = []
    for t in ts:
        for x in xs:
            up = mo.moment_upper(fi, args.p, rho, mu, nu, float(t), float(x))
            lo = math.nan
            if fi.beta < 1.0 and args.p == 2 and rho.lip_lower > 0:
                lo = mo.second_moment_lower(fi, rho, mu, float(t), float(x))
            rows.append([t, x, float(mo.j0(fi, mu, nu, float(t), float(x))), up, lo])
    params = {"beta": args.beta, "p": args.p, "mu": args.mu, "nu": None if nu is None else args.nu}
    return OutputRecord("moments", params, ["t", "x", "j0", "upper", "lower"], rows)


def cmd_lyapunov(args):
    rho = _rho_spec(args)
    rows = []
    for p in _list(args.p):
        if int(p) != p:
            raise UsageError("lyapunov: p values must be integers")
        up, lo = mo.lyapunov_bounds(args.beta, int(p), rho)
        rows.append([int(p), up, math.nan if lo is None else lo])
    exp = mo.lyapunov_p_exponent(Fraction(args.beta).limit_denominator(10**6))
    params = {"beta": args.beta, "p_exponent": str(exp)}
    return OutputRecord("lyapunov", params, ["p", "upper", "lower"], rows)


def cmd_simulate(args):
    fi = gr.as_index(args.beta)
    cfg = sim.SimConfig(
        beta=fi.beta,
        t_max=args.t_max,
        n_time=args.n_time,
        x_half_width=args.x_half_width,
        n_space=args.n_space,
        rho=sim.AffineRho(args.lam, args.intercept),
        initial=_measure(args.mu),
        nu=None if fi.slow else _measure(args.nu),
        replicates=args.replicates,
        seed=args.seed,
        probes=tuple(_list(args.probes)),
        lag_rule=args.lag_rule,
    )
    res = sim.simulate(cfg)
    est = sim.estimate_moments(res, args.p)
    rows = []
    for n, t in enumerate(est.t_grid):
        for k, x in enumerate(est.x_probe):
            rows.append([t, x, est.mean_power[n, k], est.std_err[n, k]])
    params = {
        "beta": fi.beta, "p": args.p, "t_max": args.t_max, "n_time": args.n_time, "n_space": args.n_space,
        "x_half_width": args.x_half_width, "lam": args.lam, "intercept": args.intercept, "mu": args.mu,
        "replicates": args.replicates, "seed": args.seed, "lag_rule": args.lag_rule,
    }
    return OutputRecord("simulate", params, ["t", "x", "mean_power", "std_err"], rows)


# ---------------------------------------------------------------------------
# SVG figures
# ---------------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")


def wave_box_distance(beta, t, x):
    """L1 distance on the grid ``x`` between G_beta(t, .) and 1/2 1{|x| <= t}."""
    g = np.asarray(gr.green(beta, gr.GreenKind.PRIMARY, t, x), dtype=float)
    box = np.where(np.abs(x) <= t, 0.5, 0.0)
    return float(np.trapezoid(np.abs(g - box), x))


def _nice_ticks(lo, hi, n=5):
    span = hi - lo
    if span <= 0:
        return [lo]
    step = 10 ** math.floor(math.log10(span / n))
    for m in (1, 2, 5, 10):
        if span / (m * step) <= n:
            step *= m
            break
    first = math.ceil(lo / step) * step
    return [first + k * step for k in range(int((hi - first) / step + 1e-9) + 1)]


def _fmt_tick(v):
    return format(v, ".6g")


def _beta_label(b):
    fr = Fraction(b).limit_denominator(16)
    return str(fr) if abs(float(fr) - b) < 1e-12 else format(b, ".6g")


def svg_curves(series, x_label, y_label, title, width=720, height=480):
    """Line chart; ``series`` is a list of (label, x, y)."""
    ml, mr, mt, mb = 70, 190, 40, 50
    pw, ph = width - ml - mr, height - mt - mb
    xs = np.concatenate([s[1] for s in series])
    ys = np.concatenate([s[2][np.isfinite(s[2])] for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def py(v):
        return mt + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{ml + pw / 2:.2f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in _nice_ticks(x0, x1):
        out.append(f'<line x1="{px(v):.2f}" y1="{mt + ph}" x2="{px(v):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(
            f'<text x="{px(v):.2f}" y="{mt + ph + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{_fmt_tick(v)}</text>'
        )
    for v in _nice_ticks(y0, y1):
        out.append(f'<line x1="{ml - 5}" y1="{py(v):.2f}" x2="{ml}" y2="{py(v):.2f}" stroke="black"/>')
        out.append(
            f'<text x="{ml - 8}" y="{py(v) + 4:.2f}" text-anchor="end" font-family="sans-serif" font-size="11">{_fmt_tick(v)}</text>'
        )
    out.append(
        f'<text x="{ml + pw / 2:.2f}" y="{height - 10}" text-anchor="middle" font-family="sans-serif" font-size="13">{x_label}</text>'
    )
    out.append(
        f'<text x="16" y="{mt + ph / 2:.2f}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 16 {mt + ph / 2:.2f})">{y_label}</text>'
    )
    for i, (label, x, y) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        ok = np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"><title>{label}</title></polyline>')
        ly = mt + 16 + 18 * i
        out.append(f'<line x1="{ml + pw + 12}" y1="{ly - 4}" x2="{ml + pw + 36}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 42}" y="{ly}" font-family="sans-serif" font-size="11">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _heat_color(v):
    # white -> dark blue
    v = min(max(v, 0.0), 1.0)
    r = int(round(255 * (1 - 0.9 * v)))
    g = int(round(255 * (1 - 0.7 * v)))
    b = int(round(255 * (1 - 0.3 * v)))
    return f"#{r:02x}{g:02x}{b:02x}"


def svg_space_time(panels, t_grid, x_grid, title, cell=4):
    """Side-by-side heat maps of G_beta(t, x); ``panels`` is a list of (label, values[t, x])."""
    nt, nx = len(t_grid), len(x_grid)
    pw, ph = nx * cell, nt * cell
    gap, ml, mt = 40, 50, 50
    width = ml + len(panels) * (pw + gap)
    height = mt + ph + 50
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{width / 2:.2f}" y="20" text-anchor="middle" font-family="sans-serif" font-size="15">{title}</text>',
    ]
    for p, (label, vals) in enumerate(panels):
        ox = ml + p * (pw + gap)
        top = float(np.nanmax(vals)) or 1.0
        out.append(f'<text x="{ox + pw / 2:.2f}" y="{mt - 10}" text-anchor="middle" font-family="sans-serif" font-size="12">{label}</text>')
        for i in range(nt):
            y = mt + (nt - 1 - i) * cell
            for j in range(nx):
                out.append(f'<rect x="{ox + j * cell}" y="{y}" width="{cell}" height="{cell}" fill="{_heat_color(vals[i, j] / top)}"/>')
        out.append(f'<rect x="{ox}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
        out.append(
            f'<text x="{ox}" y="{mt + ph + 16}" font-family="sans-serif" font-size="11">x={_fmt_tick(x_grid[0])}</text>'
        )
        out.append(
            f'<text x="{ox + pw}" y="{mt + ph + 16}" text-anchor="end" font-family="sans-serif" font-size="11">x={_fmt_tick(x_grid[-1])}</text>'
        )
        out.append(
            f'<text x="{ox - 4}" y="{mt + ph}" text-anchor="end" font-family="sans-serif" font-size="11">t={_fmt_tick(t_grid[0])}</text>'
        )
        out.append(f'<text x="{ox - 4}" y="{mt + 10}" text-anchor="end" font-family="sans-serif" font-size="11">t={_fmt_tick(t_grid[-1])}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_green(beta_list=DEFAULT_PLOT_BETAS, t=1.0, x_grid=None, scale="linear", out=None):
    """SVG of G_beta(t, .) for each beta; returns (svg_text, data) with per-curve diagnostics."""
    x = np.linspace(-5.0, 5.0, 401) if x_grid is None else np.asarray(x_grid, dtype=float)
    series, data = [], []
    for b in beta_list:
        fi = gr.as_index(b)
        if scale == "log10":
            y = np.asarray(gr.log_green(fi, gr.GreenKind.PRIMARY, t, x), dtype=float) / math.log(10.0)
        else:
            y = np.asarray(gr.green(fi, gr.GreenKind.PRIMARY, t, x), dtype=float)
        if not np.all(np.isfinite(y) | (np.isneginf(y) & (scale == "log10"))):
            raise AccuracyError(f"plot-green: non-finite Green values for beta={b}")
        label = f"beta={_beta_label(fi.beta)}"
        if fi.beta < 2.0:
            label += f" c={gr.asymptotic_params(fi).c:.3g}"
        series.append((label, x, y))
        data.append({"beta": fi.beta, "l1_to_wave_box": wave_box_distance(fi, t, x)})
    ylab = "log10 G(t, x)" if scale == "log10" else "G(t, x)"
    svg = svg_curves(series, "x", ylab, f"Green functions at t = {_fmt_tick(t)}")
    if out is not None:
        _emit(svg, out, sys.stdout)
    return svg, data


def plot_green_space_time(beta_list=DEFAULT_SPACE_TIME_BETAS, t_max=5.0, x_half=5.0, nt=50, nx=80, out=None):
    t = np.linspace(t_max / nt, t_max, nt)
    x = np.linspace(-x_half, x_half, nx)
    panels = []
    for b in beta_list:
        fi = gr.as_index(b)
        vals = np.array([np.asarray(gr.green(fi, gr.GreenKind.PRIMARY, float(ti), x), dtype=float) for ti in t])
        panels.append((f"beta={_beta_label(fi.beta)}", vals))
    svg = svg_space_time(panels, t, x, "G(t, x) over space and time")
    if out is not None:
        _emit(svg, out, sys.stdout)
    return svg, panels


def cmd_plot_green(args):
    if args.format not in ("svg", None):
        raise UsageError("plot-green writes SVG only")
    if args.panel == "space-time":
        betas = _list(args.betas) if args.betas else DEFAULT_SPACE_TIME_BETAS
        svg, _ = plot_green_space_time(betas, t_max=args.t_max)
    else:
        betas = _list(args.betas) if args.betas else DEFAULT_PLOT_BETAS
        x = parse_grid(args.x) if args.x else None
        svg, _ = plot_green(betas, t=args.t, x_grid=x, scale=args.scale)
    return svg


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------


def _check(name, measured, expected, tol, relative=True, kind="close"):
    if kind == "le":
        ok = measured <= expected * (1.0 + tol)
    elif kind == "between":
        lo, hi = expected
        ok = lo * (1 - tol) <= measured <= hi * (1 + tol)
    else:
        err = abs(measured - expected)
        ok = err <= tol * (abs(expected) if relative else 1.0)
    if isinstance(expected, tuple):
        expected = list(expected)
    return {"check": name, "measured": measured, "expected": expected, "tol": tol, "passed": bool(ok)}


def suite_specfun(opts):
    tol = opts.get("rel_tol", 1e-10)
    out = []
    z = np.linspace(-5, 5, 41)
    worst = max(abs(sf.mittag_leffler((1, 1), v) / math.exp(v) - 1) for v in z)
    out.append(_check("E_{1,1}(z) = exp(z), |z| <= 5", worst, 0.0, max(tol, 1e-12), relative=False))
    x = np.linspace(0, 10, 41)
    worst = max(abs(sf.mittag_leffler((2, 1), -v * v) - math.cos(v)) for v in x)
    out.append(_check("E_{2,1}(-x^2) = cos x", worst, 0.0, tol, relative=False))
    worst = max(abs(v * sf.mittag_leffler((2, 2), -v * v) - math.sin(v)) for v in x)
    out.append(_check("x E_{2,2}(-x^2) = sin x", worst, 0.0, tol, relative=False))
    from scipy import special

    x = np.linspace(0, 3, 31)
    worst = max(
        abs(sf.mittag_leffler((0.5, 0.5), v) - (1 / math.sqrt(math.pi) + v * math.exp(v * v) * special.erfc(-v)))
        / (1 / math.sqrt(math.pi) + v * math.exp(v * v) * special.erfc(-v))
        for v in x
    )
    out.append(_check("E_{1/2,1/2}(x) erfc identity", worst, 0.0, max(tol, 1e-9), relative=False))
    return out


def suite_green(opts):
    tol = opts.get("quad_tol", 1e-6)
    out = []
    for b in (0.25, 0.5, 1.0, 1.5):
        for a in (0, 1, 2):
            val, _ = gr.quad_green_even(b, gr.GreenKind.PRIMARY, 1.3, lambda x, a=a: abs(x) ** a)
            out.append(_check(f"moment beta={b} a={a}", val, gr.green_moment(b, gr.GreenKind.PRIMARY, a, 1.3), tol))
        for xi in (0.5, 3.0):
            val, _ = gr.quad_green_even(b, gr.GreenKind.PRIMARY, 0.7, lambda x, xi=xi: math.cos(xi * x))
            out.append(_check(f"fourier beta={b} xi={xi}", val, gr.green_fourier(b, gr.GreenKind.PRIMARY, 0.7, xi), tol, relative=False))
        out.append(_check(f"peak beta={b}", gr.green(b, gr.GreenKind.PRIMARY, 0.9, 0.0), gr.green_peak(b, gr.GreenKind.PRIMARY, 0.9), 1e-12))
    x = np.linspace(-2, 2, 2001)
    dists = [wave_box_distance(b, 1.0, x) for b in (1.5, 1.75, 1.9, 1.95)]
    out.append({"check": "L1 distance to the wave box decreases", "measured": dists, "expected": "decreasing", "tol": 0.0,
                "passed": bool(all(d2 < d1 for d1, d2 in zip(dists, dists[1:])))})
    return out


def suite_kernel(opts):
    tol = opts.get("series_tol", 0.02)
    out = []
    out.append(_check("hat C_2 = 2 e^-1/2", kn.hat_c(2.0), 2 * math.exp(-0.5), 1e-12))
    out.append(_check("hat C_1", round(kn.hat_c(1.0), 5), 1.68344, 0.0, relative=False))
    out.append(_check("Psi_1 = (4 pi)^-1/2", kn.psi(1.0), (4 * math.pi) ** -0.5, 1e-8))
    handle = kn.GreenHandle.heat(2.0)
    for t in (0.25, 0.5, 1.0):
        for x in (0.0, 0.5, 1.0):
            sums, _ = kn.kernel_series_numeric(handle, 1.0, t, x, 8)
            out.append(_check(f"heat series vs exact t={t} x={x}", sums[-1], kn.kernel_heat_exact(2.0, 1.0, t, x), tol))
    return out


def suite_moments(opts):
    out = []
    for k in (1, 2, 3):
        b = Fraction(1) - Fraction(1, 10**k)
        out.append(_check(f"slow p-exponent near 1 (beta={b})", float(mo.lyapunov_p_exponent(b)), 3.0, 10.0 ** -k * 2))
    out.append({"check": "slow p-exponent at beta=1", "measured": str(mo.lyapunov_p_exponent(Fraction(1))), "expected": "3",
                "tol": 0, "passed": mo.lyapunov_p_exponent(Fraction(1)) == 3})
    out.append({"check": "fast p-exponent at beta=2", "measured": str(mo.lyapunov_p_exponent(Fraction(2))), "expected": "3/2",
                "tol": 0, "passed": mo.lyapunov_p_exponent(Fraction(2)) == Fraction(3, 2)})
    mu = mo.InitialMeasure.dirac()
    out.append(_check("J0 of a Dirac equals G", mo.j0(0.5, mu, None, 0.8, 0.3), gr.green(0.5, "primary", 0.8, 0.3), 1e-14))
    out.append(_check("fast J0 with constant data = c t + c'", mo.j0(1.5, mo.InitialMeasure.constant(2.0),
                                                                       mo.InitialMeasure.constant(3.0), 2.0, 0.1), 8.0, 1e-12))
    rho = mo.RhoSpec(1.0, 0.0, 1.0, 0.0)
    one = mo.InitialMeasure.constant(1.0)
    for t in (0.25, 0.5, 1.0):
        lo = mo.second_moment_lower(0.5, rho, one, t, 0.0)
        up = mo.moment_upper(0.5, 2, rho, one, None, t, 0.0)
        out.append(_check(f"lower <= upper at t={t}", lo, up, 0.0, kind="le"))
    return out


def suite_simulator(opts):
    reps = int(opts.get("replicates", 400))
    seed = int(opts.get("seed", 42))
    band = opts.get("mc_band", 0.05)
    from scipy import special

    out = []
    cfg = sim.SimConfig(beta=1.0, t_max=0.5, n_time=128, x_half_width=8.0, n_space=256, replicates=reps, seed=seed)
    res = sim.simulate(cfg)
    est = sim.estimate_moments(res, 2)
    g = 1.0 / math.sqrt(8.0)
    for t in (0.1, 0.25, 0.5):
        n = int(round(t / cfg.dt)) - 1
        exact = math.exp(g * g * t) * special.erfc(-g * math.sqrt(t))
        slack = 3 * est.std_err[n, 0] + band * exact
        out.append(_check(f"heat E[u^2] at t={t}", float(est.mean_power[n, 0]), exact, slack / exact))
    cfg = sim.SimConfig(beta=0.5, t_max=0.5, n_time=64, x_half_width=10.0, n_space=256, replicates=reps, seed=seed)
    est = sim.estimate_moments(sim.simulate(cfg), 2)
    rho = mo.RhoSpec(1.0, 0.0, 1.0, 0.0)
    one = mo.InitialMeasure.constant(1.0)
    for t in (0.25, 0.5):
        n = int(round(t / cfg.dt)) - 1
        lo = mo.second_moment_lower(0.5, rho, one, t, 0.0)
        up = mo.moment_upper(0.5, 2, rho, one, None, t, 0.0)
        m, se = float(est.mean_power[n, 0]), float(est.std_err[n, 0])
        ok = lo * (1 - band) - 3 * se <= m <= up * (1 + band) + 3 * se
        out.append({"check": f"beta=0.5 envelope at t={t}", "measured": m, "expected": [lo, up], "tol": band,
                    "passed": bool(ok)})
    return out


SUITES = {
    "specfun": suite_specfun,
    "green": suite_green,
    "kernel": suite_kernel,
    "moments": suite_moments,
    "simulator": suite_simulator,
}


def verify(suite, **opts):
    """Run one or all invariant suites; returns a report dict with a top-level ``passed`` flag."""
    names = list(SUITES) if suite == "all" else [suite]
    report = {"suite": suite, "results": {}}
    for name in names:
        report["results"][name] = SUITES[name](opts)
    report["passed"] = all(c["passed"] for checks in report["results"].values() for c in checks)
    return report


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def cmd_verify(args):
    opts = {}
    for key in ("rel_tol", "quad_tol", "series_tol", "mc_band", "replicates", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    return verify(args.suite, **opts)


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------


def _common(p, default_format="csv"):
    p.add_argument("--format", choices=["csv", "json", "svg"], default=default_format)
    p.add_argument("--out", default=None, help=f"output file (relative paths resolve against ${OUTPUT_DIR_ENV})")


def build_parser():
    parser = _Parser(prog="fracspde", description="Special functions, Green functions, moment bounds and Monte Carlo for time-fractional SPDEs.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("ml", help="Mittag-Leffler function E_{alpha,beta}(z)")
    p.add_argument("--alpha", type=_number, required=True)
    p.add_argument("--beta2", type=_number, default=1.0, help="second Mittag-Leffler parameter")
    p.add_argument("--z", required=True, help="grid start:stop:count, list or single value")
    p.add_argument("--rel-tol", type=float, default=None)
    _common(p)

    p = sub.add_parser("mainardi", help="two-parameter Mainardi function M_{lam,mu}(z)")
    p.add_argument("--lam", type=_number, required=True)
    p.add_argument("--mu", type=_number, required=True)
    p.add_argument("--z", required=True)
    p.add_argument("--rel-tol", type=float, default=None)
    _common(p)

    p = sub.add_parser("green", help="Green function G_beta(t, x) or G*_beta(t, x)")
    p.add_argument("--beta", type=_number, required=True)
    p.add_argument("--kind", choices=["primary", "star"], default="primary")
    p.add_argument("--t", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--rel-tol", type=float, default=None)
    _common(p)

    p = sub.add_parser("kernel", help="kernel K(t, x; lambda): bounds, numeric series or heat closed form")
    p.add_argument("--beta", type=_number, default=1.0)
    p.add_argument("--lam", type=_number, default=1.0)
    p.add_argument("--nu", type=_number, default=2.0, help="heat diffusivity for heat-exact / beta=1 series")
    p.add_argument("--method", choices=["upper", "lower", "series", "heat-exact"], default="upper")
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--t", required=True)
    p.add_argument("--x", required=True)
    _common(p)

    p = sub.add_parser("moments", help="moment upper bound and second-moment lower bound")
    p.add_argument("--beta", type=_number, required=True)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--lip", type=_number, default=1.0)
    p.add_argument("--vip", type=_number, default=0.0)
    p.add_argument("--lip-lower", type=_number, default=0.0)
    p.add_argument("--vip-lower", type=_number, default=0.0)
    p.add_argument("--mu", default="constant:1")
    p.add_argument("--nu", default="zero")
    p.add_argument("--t", required=True)
    p.add_argument("--x", default="0")
    _common(p)

    p = sub.add_parser("lyapunov", help="bounds on the moment Lyapunov exponents")
    p.add_argument("--beta", type=_number, required=True)
    p.add_argument("--p", default="2")
    p.add_argument("--lip", type=_number, default=1.0)
    p.add_argument("--vip", type=_number, default=0.0)
    p.add_argument("--lip-lower", type=_number, default=0.0)
    p.add_argument("--vip-lower", type=_number, default=0.0)
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo p-th moments at probe points")
    p.add_argument("--beta", type=_number, required=True)
    p.add_argument("--t-max", type=_number, default=0.5)
    p.add_argument("--n-time", type=int, default=64)
    p.add_argument("--x-half-width", type=_number, default=10.0)
    p.add_argument("--n-space", type=int, default=256)
    p.add_argument("--lam", type=_number, default=1.0, help="rho(u) = lam u + intercept")
    p.add_argument("--intercept", type=_number, default=0.0)
    p.add_argument("--mu", default="constant:1")
    p.add_argument("--nu", default="zero")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--probes", default="0")
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lag-rule", choices=[r.value for r in sim.LagRule], default=sim.LagRule.VARIANCE_MATCHED.value)
    _common(p)

    p = sub.add_parser("verify", help="run invariant suites and print a JSON report")
    p.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    p.add_argument("--rel-tol", type=float, default=None)
    p.add_argument("--quad-tol", type=float, default=None)
    p.add_argument("--series-tol", type=float, default=None)
    p.add_argument("--mc-band", type=float, default=None)
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("plot-green", help="SVG figure of Green functions")
    p.add_argument("--betas", default=None, help="comma list; fractions like 5/3 allowed")
    p.add_argument("--t", type=_number, default=1.0)
    p.add_argument("--x", default=None, help="x grid (default -5:5:401)")
    p.add_argument("--scale", choices=["linear", "log10"], default="linear")
    p.add_argument("--panel", choices=["curves", "space-time"], default="curves")
    p.add_argument("--t-max", type=_number, default=5.0, help="time range of the space-time panel")
    _common(p, default_format="svg")
    return parser


HANDLERS = {
    "ml": cmd_ml,
    "mainardi": cmd_mainardi,
    "green": cmd_green,
    "kernel": cmd_kernel,
    "moments": cmd_moments,
    "lyapunov": cmd_lyapunov,
    "simulate": cmd_simulate,
}


def run(argv=None, stdout=None, stderr=None):
    """Entry point returning the exit code (0 ok, 1 failed checks, 2 usage, 3 numerical failure)."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.verb == "verify":
            report = _jsonable(cmd_verify(args))
            _emit(json.dumps(report, indent=1, sort_keys=True) + "\n", args.out, stdout)
            return EXIT_OK if report["passed"] else EXIT_FAILED_CHECKS
        if args.verb == "plot-green":
            _emit(cmd_plot_green(args), args.out, stdout)
            return EXIT_OK
        rec = HANDLERS[args.verb](args)
        _write_record(rec, args, stdout)
        return EXIT_OK
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except (DomainError, UnsupportedDistributionError) as exc:
        verb = argv[0] if argv else "fracspde"
        stderr.write(f"{verb}: precondition violated: {exc}\n")
        return EXIT_USAGE
    except (AccuracyError, DivergenceError) as exc:
        verb = argv[0] if argv else "fracspde"
        stderr.write(f"{verb}: numerical failure: {exc}\n")
        return EXIT_NUMERIC


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
