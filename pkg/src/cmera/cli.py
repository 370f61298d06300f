"""Command-line front end.

Every subcommand writes a table (CSV or JSON) that starts with a metadata
header: configuration echo, tool version, entropy unit and schema version.
Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines, then explicit flags (flags win).

Exit codes: 0 ok, 2 configuration error, 3 numerical non-convergence.
"""

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from . import __version__
from . import analysis, gaussian_entropy, polar2d, profiles
from .correlators import THEORIES, TheoryConfig, correlator
from .transforms import QuadratureError

SCHEMA = "cmera/v1"
FLOAT_FMT = "{:.12e}"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

# per-theory defaults for region sizes and spacing (units of 1/Lambda)
THEORY_DEFAULTS = {
    "boson1d": {"spacing": 0.01, "xmin": 1.0, "xmax": 10.0},
    "fermion1d": {"spacing": 0.1, "xmin": 10.0, "xmax": 100.0},
    "boson2d": {"spacing": 0.01, "xmin": 0.25, "xmax": 2.0},
    "fermion2d": {"spacing": 0.01, "xmin": 0.25, "xmax": 2.0},
}

BASE_DEFAULTS = {
    "theory": "boson1d",
    "state": "cmera",
    "lambda": 1.0,
    "sigma": profiles.SIGMA_DEFAULT,
    "j": 0,
    "epsilon": 1e-6,
    "lmax": polar2d.L_MAX_DEFAULT,
    "points": 12,
    "output": "csv",
    "workers": 1,
    "x0": 1.28,
    "spacings": "0.01,0.02,0.04,0.08,0.16",
    "kind": "central_charge",
}

_FLOAT_KEYS = {"lambda", "sigma", "epsilon", "spacing", "xmin", "xmax", "x0"}
_INT_KEYS = {"j", "lmax", "points", "workers"}


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


def read_config_file(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _coerce(key, val):
    try:
        if key in _FLOAT_KEYS:
            return float(val)
        if key in _INT_KEYS:
            return int(val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {val!r}") from exc
    return val


def resolve(args):
    """Merge defaults, config file and explicit flags into one dict."""
    explicit = {k: v for k, v in vars(args).items()
                if v is not None and k not in ("command", "config", "func")}
    filecfg = read_config_file(args.config) if getattr(args, "config", None) else {}
    theory = explicit.get("theory", filecfg.get("theory", BASE_DEFAULTS["theory"]))
    if theory not in THEORIES:
        raise ConfigError(f"theory must be one of {', '.join(THEORIES)}")
    merged = dict(BASE_DEFAULTS)
    merged.update(THEORY_DEFAULTS[theory])
    merged.update(filecfg)
    merged.update(explicit)
    merged = {k: _coerce(k, v) for k, v in merged.items()}
    given = set(explicit) | set(filecfg)
    if "epsilon" in given and theory != "boson1d":
        raise ConfigError("epsilon applies to boson1d only")
    if "lmax" in given and not theory.endswith("2d"):
        raise ConfigError("lmax applies to 2D theories only")
    if "sigma" in given and not theory.startswith("boson"):
        raise ConfigError("sigma applies to boson theories only")
    if "j" in given and not theory.startswith("fermion"):
        raise ConfigError("j applies to fermion theories only")
    if merged["output"] not in ("csv", "json"):
        raise ConfigError("output must be csv or json")
    if merged["points"] < 1:
        raise ConfigError("points must be positive")
    if merged["workers"] < 1:
        raise ConfigError("workers must be positive")
    return merged


def theory_config(c):
    try:
        return TheoryConfig(theory=c["theory"], lam=c["lambda"], sigma=c["sigma"], j=c["j"],
                            epsilon=c["epsilon"], state=c["state"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _grid(c, lo_key="xmin", hi_key="xmax"):
    lo, hi, n = c[lo_key], c[hi_key], c["points"]
    if not (lo > 0 and hi >= lo):
        raise ConfigError(f"empty or invalid range [{lo}, {hi}]")
    if n == 1 or hi == lo:
        return np.array([lo])
    return np.geomspace(lo, hi, n)


def _window(c):
    w = c.get("window")
    if w is None:
        return None
    if isinstance(w, str):
        parts = w.replace(",", " ").split()
    else:
        parts = list(w)
    if len(parts) != 2:
        raise ConfigError("window takes two numbers")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"bad window {w!r}") from exc
    if not lo < hi:
        raise ConfigError("window must satisfy lo < hi")
    return lo, hi


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT.format(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def metadata(c, command, extra=None):
    meta = {"schema": SCHEMA, "tool": "cmera", "version": __version__, "command": command,
            "entropy_unit": "nats (divide by ln 2 = 0.693147 for bits)"}
    keys = ["theory", "state", "lambda"]
    if c["theory"].startswith("boson"):
        keys.append("sigma")
    else:
        keys.append("j")
    if c["theory"] == "boson1d":
        keys.append("epsilon")
    meta["config"] = {k: c[k] for k in keys}
    meta["tolerances"] = {"rel_tol": 1e-10, "abs_tol": 1e-13,
                          "tol_eig_rel": gaussian_entropy.TOL_EIG_REL}
    if extra:
        meta.update(extra)
    return meta


def render(meta, columns, rows, fmt):
    """Serialise a table.  CSV lines starting with '#' carry the metadata."""
    if fmt == "json":
        doc = {"metadata": meta, "columns": columns,
               "rows": [[float(v) if isinstance(v, (float, np.floating)) else
                         (int(v) if isinstance(v, np.integer) else v) for v in r] for r in rows]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    for key in sorted(meta):
        buf.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def emit(text, c):
    path = c.get("out_file")
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_profile(c):
    cfg = theory_config(c)
    ks = _grid(c)
    cols = ["k"]
    data = []
    for st in profiles.State:
        p = profiles.SpectralProfile(cfg.particle, st, cfg.lam, cfg.sigma, cfg.j)
        f = profiles.alpha if cfg.particle is profiles.Theory.BOSON else profiles.theta
        cols.append(f"{'alpha' if cfg.particle is profiles.Theory.BOSON else 'theta'}_{st.value}")
        data.append(np.atleast_1d(f(p, ks)))
    rows = [[k] + [d[i] for d in data] for i, k in enumerate(ks)]
    return metadata(c, "profile"), cols, rows


def cmd_correlator(c):
    cfg = theory_config(c)
    xs = _grid(c)
    rows = []
    for ch in cfg.channels:
        for x in xs:
            v = correlator(cfg, ch, float(x))
            rows.append([x, v.delta_coeff, v.smooth, ch.value])
    return metadata(c, "correlator"), ["separation", "delta_coeff", "smooth", "channel"], rows


def _region_sizes(c):
    a = c["spacing"]
    xs = np.unique(np.round(_grid(c) / a) * a)
    if xs.size == 0 or xs[0] < 2 * a:
        raise ConfigError("region sizes must be at least two spacings")
    return xs


def cmd_entropy(c):
    cfg = theory_config(c)
    a = c["spacing"]
    xs = _region_sizes(c)
    l_max = c["lmax"] if cfg.dim == 2 else None
    prof = gaussian_entropy.entropy_profile(xs, a, cfg, l_max=l_max, workers=c["workers"])
    eps = c["epsilon"] if cfg.theory == "boson1d" else ""
    rows = [[x, s, a, eps, "" if l_max is None else l_max, d] for x, s, a, d in prof.rows()]
    extra = {"spacing": a}
    win = _window(c)
    if win is not None:
        if cfg.theory == "boson1d":
            # the IR regulator bends S(x) beyond ~0.1/epsilon
            win = (win[0], min(win[1], 0.1 / (c["epsilon"] * c["lambda"])))
        extra["fit"] = json.loads(analysis.fit_central_charge(xs, prof.S, win).to_json())
    cols = ["x", "S", "a", "epsilon", "l_max", "discarded_fraction"]
    return metadata(c, "entropy", extra), cols, rows


def cmd_convergence(c):
    cfg = theory_config(c)
    try:
        spacings = [float(s) for s in str(c["spacings"]).replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError("spacings must be numbers") from exc
    if not spacings or min(spacings) <= 0:
        raise ConfigError("spacings must be positive")
    l_max = c["lmax"] if cfg.dim == 2 else None
    sweep = gaussian_entropy.convergence_sweep(c["x0"], spacings, cfg, l_max=l_max,
                                               workers=c["workers"])
    extra = {"x0": c["x0"], "a_ref": min(spacings)}
    try:
        extra["slope"] = gaussian_entropy.convergence_slope(sweep)
    except ValueError:
        extra["slope"] = None
    return metadata(c, "convergence", extra), ["a", "abs_diff"], [[a, d] for a, d in sweep]


def cmd_estimate(c):
    cfg = theory_config(c)
    consts = analysis.short_distance_constants(cfg)
    xs = _grid(c)
    numeric = c.get("numeric")
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for x in xs:
            est = analysis.short_entropy(cfg.theory, x, consts)
            lam_e = analysis.short_eigenvalue(cfg.theory, x, consts)
            row = [x, lam_e, est]
            if numeric:
                a = x / 32.0
                row.append(gaussian_entropy.entropy_profile([x], a, cfg,
                                                            l_max=c["lmax"] if cfg.dim == 2 else None).S[0])
            rows.append(row)
    cols = ["x", "eigenvalue", "S_estimate"] + (["S_numeric"] if numeric else [])
    extra = {"A": consts.A, "B": consts.B}
    if c["lambda"] * float(np.max(xs)) > analysis.SHORT_DISTANCE_LIMIT:
        extra["warning"] = "estimate used above Lambda x = 0.3"
    return metadata(c, "estimate", extra), cols, rows


def read_table(path):
    """Read a CSV written by this tool (or any headed CSV) into columns."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh if not ln.startswith("#") and ln.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read input table: {exc}") from exc
    if not lines:
        raise ConfigError("input table is empty")
    reader = csv.reader(lines)
    header = next(reader)
    cols = {h: [] for h in header}
    for row in reader:
        for h, v in zip(header, row):
            cols[h].append(v)
    return cols


def cmd_fit(c):
    path = c.get("input")
    if not path:
        raise ConfigError("fit needs an input table")
    table = read_table(path)
    xcol, ycol = c.get("xcol") or "x", c.get("ycol") or "S"
    if xcol not in table or ycol not in table:
        raise ConfigError(f"columns {xcol!r}/{ycol!r} not in table ({', '.join(table)})")
    try:
        xs = np.array([float(v) for v in table[xcol]])
        ys = np.array([float(v) for v in table[ycol]])
    except ValueError as exc:
        raise ConfigError("non-numeric entries in the fit columns") from exc
    kind = c["kind"]
    win = _window(c)
    if kind == "power":
        res = analysis.fit_power(xs, np.abs(ys), win)
    elif kind == "log":
        res = analysis.fit_log(xs, ys, win)
    elif kind == "central_charge":
        res = analysis.fit_central_charge(xs, ys, win)
    else:
        raise ConfigError("kind must be power, log or central_charge")
    return json.loads(res.to_json())


COMMANDS = {"profile": cmd_profile, "correlator": cmd_correlator, "entropy": cmd_entropy,
            "convergence": cmd_convergence, "estimate": cmd_estimate}


def build_parser():
    parser = argparse.ArgumentParser(prog="cmera", description=(
        "Gaussian cMERA states of free bosons and Dirac fermions: profiles, "
        "correlators, entanglement entropy and fits."))
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="file of 'key = value' lines; flags override it")
        p.add_argument("--theory", choices=THEORIES)
        p.add_argument("--state", choices=[s.value for s in profiles.State])
        p.add_argument("--lambda", dest="lambda", type=float, help="cutoff scale Lambda")
        p.add_argument("--sigma", type=float, help="boson shape parameter (default e^gamma)")
        p.add_argument("--j", type=int, help="fermion cutoff index")
        p.add_argument("--epsilon", type=float, help="IR regulator (boson1d)")
        p.add_argument("--spacing", type=float, help="sampling spacing a")
        p.add_argument("--lmax", type=int, help="angular truncation (2D): |l| or |j|-1/2")
        p.add_argument("--xmin", type=float)
        p.add_argument("--xmax", type=float)
        p.add_argument("--points", type=int)
        p.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"))
        p.add_argument("--output", choices=("csv", "json"))
        p.add_argument("--out-file", dest="out_file")
        p.add_argument("--workers", type=int, help="threads for independent regions")

    helps = {
        "profile": "alpha(k) or theta(k) for the target, product and cMERA states "
                   "(--xmin/--xmax give the k range)",
        "correlator": "delta coefficient and smooth part of every channel",
        "entropy": "entanglement entropy profile S(x)",
        "convergence": "|S(x0, a) - S(x0, a_ref)| over spacings",
        "estimate": "short-distance entropy estimate",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        common(p)
        if name == "convergence":
            p.add_argument("--x0", type=float, help="region size")
            p.add_argument("--spacings", help="comma-separated spacings")
        if name == "estimate":
            p.add_argument("--numeric", action="store_true", default=None,
                           help="also compute the sampled entropy at a = x/32")
    p = sub.add_parser("fit", help="fit a table column: power law, log or central charge")
    p.add_argument("input", help="CSV table")
    p.add_argument("--config")
    p.add_argument("--xcol")
    p.add_argument("--ycol")
    p.add_argument("--kind", choices=("power", "log", "central_charge"))
    p.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"))
    p.add_argument("--out-file", dest="out_file")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "fit":
            filecfg = read_config_file(args.config) if args.config else {}
            c = dict(BASE_DEFAULTS)
            c.update(filecfg)
            c.update({k: v for k, v in vars(args).items() if v is not None})
            report = cmd_fit(c)
            emit(json.dumps(report, indent=2, sort_keys=True) + "\n", c)
            return EXIT_OK
        c = resolve(args)
        meta, cols, rows = COMMANDS[args.command](c)
        emit(render(meta, cols, rows, c["output"]), c)
        return EXIT_OK
    except (ConfigError, gaussian_entropy.MemoryBudgetError) as exc:
        print(f"cmera: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"cmera: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, polar2d.AngularQuadratureError, np.linalg.LinAlgError) as exc:
        print(f"cmera: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
