"""Command-line front end: config resolution, experiment execution, JSON
and CSV emission.

Option values resolve in three layers: built-in defaults, then an optional
TOML file (--config), then explicit flags; later layers win, unknown file
keys are rejected. Every JSON artifact embeds the fully resolved
configuration, and a rerun with equal config and seed emits equal bytes.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 tolerance violation.
"""

import argparse
import sys
from pathlib import Path

import numpy as np
import scipy.linalg as sla

try:
    import tomllib
except ModuleNotFoundError:         # Python 3.10
    import tomli as tomllib

from ._json import canonical_dumps, write_canonical
from .green import coeff_table
from .laurent import LaurentCocycle
from .prodist import SMOOTH_FIELDS, evaluate, format_prodist, parse_prodist
from .selftest import run_all
from .spectral import assemble_family, eigen_spectrum, variation_trace_terms
from .surface import build_surface, bump_function
from .symplectic import harmonic_reduce, omega_contour_oracle, omega_series
from .zeta import theta_from_spectrum, zeta_prime_zero

__all__ = ["ExperimentConfig", "ConfigError", "ToleranceError",
           "export_curve", "main"]


class ConfigError(ValueError):
    """Bad flags, a bad config file, or invalid parameter values."""


class ToleranceError(RuntimeError):
    """A requested tolerance was not met; carries the result payload."""

    def __init__(self, message, payload):
        super().__init__(message)
        self.payload = payload


_KIND = {"rank1": "rank1_exponential", "rankn": "rankn_hermitian"}

# command -> ordered option spec: (flag, type, default, help)
_OPTIONS = {
    "spectrum": [
        ("model", str, "disc", "surface model: disc or torus"),
        ("resolution", int, 48, "grid resolution"),
        ("resolutions", str, None,
         "comma list of resolutions; sweeps the smallest eigenvalue"),
        ("family", str, "rank1", "family kind: rank1 or rankn"),
        ("generator", str, "zero", "multiplier generator spec"),
        ("s", float, 0.0, "family parameter"),
        ("count", int, 6, "number of eigenvalues to report"),
        ("curve-out", str, None, "CSV path for the sweep curve"),
        ("out", str, None, "also write the JSON artifact here"),
    ],
    "det": [
        ("model", str, "disc", "surface model: disc or torus"),
        ("resolution", int, 24, "grid resolution"),
        ("family", str, "rank1", "family kind: rank1 or rankn"),
        ("generator", str, "zero", "multiplier generator spec"),
        ("s", float, 0.0, "family parameter"),
        ("window", str, "0.01,0.1", "asymptotic fit window lo,hi"),
        ("exponents", str, "-1,-0.5,0", "asymptotic exponents, comma list"),
        ("eps", float, None, "heat cutoff; defaults to the window top"),
        ("curve-out", str, None, "CSV path for a theta(t) curve"),
        ("curve-grid", str, "0.005,0.5,40", "theta curve grid lo,hi,points"),
        ("out", str, None, "also write the JSON artifact here"),
    ],
    "variation": [
        ("model", str, "disc", "surface model: disc or torus"),
        ("resolution", int, 32, "grid resolution"),
        ("family", str, "rank1", "family kind: rank1 or rankn"),
        ("generator", str, "gaussian:0.5", "multiplier generator spec"),
        ("s", float, 0.0, "family parameter"),
        ("eps", str, "0.01,0.05", "heat cutoffs, comma list"),
        ("out", str, None, "also write the JSON artifact here"),
    ],
    "green-coeffs": [
        ("model", str, "disc", "kernel model: disc or torus"),
        ("order", int, 4, "maximum coefficient index"),
        ("radius", float, 0.35, "extraction circle radius"),
        ("samples", int, None, "angle count; defaults per order"),
        ("out", str, None, "CSV path for the coefficient table"),
    ],
    "omega": [
        ("f1", str, None, "cocycle JSON file, first slot"),
        ("f2", str, None, "cocycle JSON file, second slot"),
        ("green", str, "disc", "kernel model: disc or torus"),
        ("order", int, 8, "coefficient table order"),
        ("radius", float, 0.35, "coefficient extraction radius"),
        ("samples", int, 256, "contour quadrature angle count"),
        ("scale", float, None, "contour kernel radius; defaults per model"),
        ("tol", float, 1e-6, "series/contour agreement tolerance"),
        ("out", str, None, "also write the JSON artifact here"),
    ],
    "reduce": [
        ("f", str, None, "cocycle JSON file"),
        ("resolution", int, 48, "torus grid resolution"),
        ("r1", float, 0.12, "bump plateau radius"),
        ("r2", float, 0.30, "bump support radius"),
        ("out", str, None, "also write the JSON artifact here"),
    ],
    "prodist-eval": [
        ("expr", str, None, "formal sum in the canonical text form"),
        ("tests", str, None,
         "comma list of test functions: field names or complex constants"),
        ("out", str, None, "also write the JSON artifact here"),
    ],
    "selftest": [
        ("profile", str, "full", "check sizes: full or quick"),
        ("seed", int, 20260815, "seed for the randomized suites"),
        ("out-dir", str, ".", "directory for selftest_report.json"),
        ("out", str, None, "also write the JSON artifact here"),
    ],
}

_REQUIRED = {
    "omega": ("f1", "f2"),
    "reduce": ("f",),
    "prodist-eval": ("expr", "tests"),
}


def _floats(text, key):
    try:
        vals = [float(x) for x in str(text).split(",") if x.strip() != ""]
    except ValueError:
        raise ConfigError(f"{key}: expected a comma list of numbers, "
                          f"got {text!r}") from None
    if not vals:
        raise ConfigError(f"{key}: empty list")
    return vals


def _ints(text, key):
    vals = _floats(text, key)
    out = [int(v) for v in vals]
    if any(v != int(v) for v in vals):
        raise ConfigError(f"{key}: expected integers, got {text!r}")
    return out


def _coerce(key, typ, value):
    if value is None or isinstance(value, typ) and not isinstance(value, bool):
        return value
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    raise ConfigError(f"config key {key!r} should be {typ.__name__}, "
                      f"got {value!r}")


class ExperimentConfig:
    """Resolved options for one command; validated before any computation."""

    def __init__(self, command, values):
        self.command = command
        self.values = values
        self._validate()

    @classmethod
    def resolve(cls, command, cli_values, config_path=None):
        spec = _OPTIONS[command]
        merged = {name.replace("-", "_"): default
                  for name, _, default, _ in spec}
        types = {name.replace("-", "_"): typ for name, typ, _, _ in spec}
        if config_path:
            try:
                with open(config_path, "rb") as fh:
                    data = tomllib.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config file: {exc}") from None
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"bad TOML in {config_path!r}: {exc}") \
                    from None
            section = data.pop(command, None)
            if isinstance(section, dict):
                data.update(section)
            for key, value in data.items():
                dest = str(key).replace("-", "_")
                if dest not in merged or isinstance(value, dict):
                    raise ConfigError(
                        f"unknown config key {key!r} for command {command}")
                merged[dest] = _coerce(key, types[dest], value)
        for key, value in cli_values.items():
            if value is not None:
                merged[key] = value
        return cls(command, merged)

    def resolved(self):
        """The full option mapping, for embedding into artifacts."""
        return dict(self.values)

    def __getitem__(self, key):
        return self.values[key]

    # -- validation ----------------------------------------------------------

    def _require(self, cond, message):
        if not cond:
            raise ConfigError(message)

    def _validate(self):
        v = self.values
        for key in _REQUIRED.get(self.command, ()):
            self._require(v.get(key), f"--{key} is required")
        if "model" in v:
            self._require(v["model"] in ("disc", "torus"),
                          f"model must be disc or torus, got {v['model']!r}")
        if "green" in v:
            self._require(v["green"] in ("disc", "torus"),
                          f"green must be disc or torus, got {v['green']!r}")
        if "resolution" in v:
            self._require(v["resolution"] >= 8, "resolution must be >= 8")
        if "family" in v:
            self._require(v["family"] in _KIND,
                          f"family must be rank1 or rankn, got {v['family']!r}")
        if "count" in v:
            self._require(v["count"] >= 1, "count must be >= 1")
        if "order" in v:
            self._require(0 <= v["order"] <= 16, "order must be in 0..16")
        if "radius" in v:
            model = v.get("green", v.get("model", "disc"))
            limit = 1.0 if model == "disc" else 0.5
            self._require(0.0 < v["radius"] < limit,
                          f"radius must be in (0, {limit}) on the {model}")
        if "samples" in v and v["samples"] is not None:
            self._require(v["samples"] >= 8 and v["samples"] % 2 == 0,
                          "samples must be even and >= 8")
        if "tol" in v:
            self._require(v["tol"] > 0, "tol must be positive")
        if "scale" in v and v["scale"] is not None:
            limit = 1.0 if v.get("green", "disc") == "disc" else 0.5
            self._require(0.0 < v["scale"] < limit,
                          f"scale must be in (0, {limit})")
        if self.command == "spectrum" and v["resolutions"] is not None:
            self._require(all(n >= 8 for n in _ints(v["resolutions"],
                                                    "resolutions")),
                          "every resolution must be >= 8")
        if self.command == "det":
            lo, *rest = _floats(v["window"], "window")
            self._require(len(rest) == 1 and 0 < lo < rest[0],
                          "window must be lo,hi with 0 < lo < hi")
            if v["eps"] is not None:
                self._require(lo <= v["eps"] <= rest[0],
                              "eps must lie inside the window")
            _floats(v["exponents"], "exponents")
            grid = _floats(v["curve_grid"], "curve-grid")
            self._require(len(grid) == 3 and 0 < grid[0] < grid[1]
                          and grid[2] >= 2, "curve-grid must be lo,hi,points")
        if self.command == "variation":
            self._require(all(e > 0 for e in _floats(v["eps"], "eps")),
                          "every eps must be positive")
        if self.command == "reduce":
            self._require(0.0 < v["r1"] < v["r2"] < 0.5,
                          "need 0 < r1 < r2 < 0.5 inside the torus chart")
        if self.command == "prodist-eval" and v["tests"] is not None:
            for item in str(v["tests"]).split(","):
                item = item.strip()
                if item in SMOOTH_FIELDS:
                    continue
                try:
                    complex(item)
                except ValueError:
                    raise ConfigError(
                        f"test {item!r} is neither a smooth field name "
                        f"({', '.join(sorted(SMOOTH_FIELDS))}) nor a complex "
                        f"constant") from None
        if self.command == "selftest":
            self._require(v["profile"] in ("quick", "full"),
                          "profile must be quick or full")


def export_curve(path, samples):
    """Write (x, y) samples as a two-column CSV with an "x,y" header.

    Numbers carry 17 significant digits so they round-trip exactly.
    Empty sample lists and unwritable paths are errors.
    """
    rows = list(samples)
    if not rows:
        raise ConfigError("export_curve needs at least one sample")
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("x,y\n")
            for x, y in rows:
                fh.write(f"{float(x):.17g},{float(y):.17g}\n")
    except OSError as exc:
        raise ConfigError(f"cannot write curve file {path!r}: {exc}") \
            from None


def _load_cocycle(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read cocycle file {path!r}: {exc}") \
            from None
    try:
        return LaurentCocycle.from_json(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad cocycle file {path!r}: {exc}") from None


def _positive_spectrum(family):
    """All eigenvalues of the family Laplacian, zero modes dropped."""
    if family.kind == "rank1_exponential":
        ts = family.hat_sparse()
        dense = (ts.getH() @ ts).toarray()
    else:
        dense = family.laplacian()
    lam = sla.eigvalsh(np.asarray(dense), check_finite=False)
    scale = max(float(lam[-1]), 1.0)
    keep = lam > 1e-10 * scale
    return lam[keep], int(lam.size - np.count_nonzero(keep))


# ---------------------------------------------------------------------------
# command handlers
# ---------------------------------------------------------------------------

def _cmd_spectrum(cfg):
    if cfg["resolutions"] is not None:
        rows = []
        for n in _ints(cfg["resolutions"], "resolutions"):
            surf = build_surface(cfg["model"], n)
            fam = assemble_family(surf, _KIND[cfg["family"]],
                                  cfg["generator"], cfg["s"])
            ts = fam.hat_sparse()
            dec = eigen_spectrum((ts.getH() @ ts).tocsc(), count=1)
            rows.append((float(n), float(dec.values[0])))
        if cfg["curve_out"]:
            export_curve(cfg["curve_out"], rows)
        return {"sweep": [{"resolution": int(x), "lambda_min": y}
                          for x, y in rows]}
    surf = build_surface(cfg["model"], cfg["resolution"])
    fam = assemble_family(surf, _KIND[cfg["family"]],
                          cfg["generator"], cfg["s"])
    count = cfg["count"]
    if fam.kind == "rank1_exponential" and count <= fam.dim // 2:
        ts = fam.hat_sparse()
        dec = eigen_spectrum((ts.getH() @ ts).tocsc(), count=count)
    else:
        dec = eigen_spectrum(fam.laplacian(), count=min(count, fam.dim))
    return {"eigenvalues": [float(x) for x in dec.values[:count]]}


def _cmd_det(cfg):
    surf = build_surface(cfg["model"], cfg["resolution"])
    fam = assemble_family(surf, _KIND[cfg["family"]],
                          cfg["generator"], cfg["s"])
    lam, dropped = _positive_spectrum(fam)
    window = tuple(_floats(cfg["window"], "window"))
    exponents = tuple(_floats(cfg["exponents"], "exponents"))
    result = zeta_prime_zero(spectrum=lam, exponents=exponents,
                             window=window, eps=cfg["eps"])
    if cfg["curve_out"]:
        lo, hi, pts = _floats(cfg["curve_grid"], "curve-grid")
        theta = theta_from_spectrum(lam)
        grid = np.geomspace(lo, hi, int(pts))
        export_curve(cfg["curve_out"], [(t, theta(t)) for t in grid])
    return {"zeta": result.as_dict(), "spectrum_size": int(lam.size),
            "dropped_zero_modes": dropped}


def _cmd_variation(cfg):
    surf = build_surface(cfg["model"], cfg["resolution"])
    fam = assemble_family(surf, _KIND[cfg["family"]],
                          cfg["generator"], cfg["s"])
    dec = eigen_spectrum(fam.laplacian())
    eps = _floats(cfg["eps"], "eps")
    values = variation_trace_terms(fam, dec, eps)
    return {"eps": eps, "variation_trace": values}


def _cmd_green_coeffs(cfg):
    table = coeff_table(cfg["model"], cfg["order"], radius=cfg["radius"],
                        samples=cfg["samples"])
    if cfg["out"]:
        table.to_csv(cfg["out"])
    entries = []
    for n in range(cfg["order"] + 1):
        for m in range(cfg["order"] + 1):
            a = table.entry(n, m)
            entries.append({"n": n, "m": m,
                            "re": float(a.real), "im": float(a.imag)})
    return {"entries": entries,
            "diagonal": [float(table.entry(n, n).real)
                         for n in range(cfg["order"] + 1)]}


def _cmd_omega(cfg):
    f1 = _load_cocycle(cfg["f1"])
    f2 = _load_cocycle(cfg["f2"])
    table = coeff_table(cfg["green"], cfg["order"], radius=cfg["radius"])
    series = omega_series(f1, f2, table)
    oracle = omega_contour_oracle(f1, f2, green=cfg["green"],
                                  samples=cfg["samples"], scale=cfg["scale"])
    rel = abs(series - oracle) / max(abs(series), abs(oracle), 1e-300)
    payload = {"omega_series": float(series), "omega_oracle": float(oracle),
               "rel_diff": float(rel)}
    if rel > cfg["tol"]:
        raise ToleranceError(
            f"series and contour disagree: rel_diff {rel:.3e} "
            f"> tol {cfg['tol']:.3e}", payload)
    return payload


def _cmd_reduce(cfg):
    surf = build_surface("torus", cfg["resolution"])
    f = _load_cocycle(cfg["f"])
    rho = bump_function(surf, cfg["r1"], cfg["r2"])
    form = harmonic_reduce(f, surf, rho)
    return {"norm": float(form.norm()), "residual": float(form.residual),
            "rank": int(form.rank), "grid_tol": float(surf.h ** 2)}


def _cmd_prodist_eval(cfg):
    try:
        dist = parse_prodist(cfg["expr"])
    except ValueError as exc:
        raise ConfigError(f"bad expression: {exc}") from None
    tests = []
    for item in str(cfg["tests"]).split(","):
        item = item.strip()
        tests.append(SMOOTH_FIELDS[item] if item in SMOOTH_FIELDS
                     else complex(item))
    if len(tests) != dist.level:
        raise ConfigError(f"expression has level {dist.level}; "
                          f"{len(tests)} test functions given")
    value = evaluate(dist, tests)
    return {"echo": format_prodist(dist), "level": int(dist.level),
            "value_re": float(value.real), "value_im": float(value.imag)}


def _cmd_selftest(cfg):
    report = run_all(cfg["profile"], seed=cfg["seed"],
                     out_dir=cfg["out_dir"])
    payload = {"report": report,
               "report_path": str(Path(cfg["out_dir"])
                                  / "selftest_report.json")}
    if not report["all_passed"]:
        failed = [c["name"] for c in report["checks"] if not c["passed"]]
        raise ToleranceError("failed checks: " + ", ".join(failed), payload)
    return payload


_HANDLERS = {
    "spectrum": _cmd_spectrum,
    "det": _cmd_det,
    "variation": _cmd_variation,
    "green-coeffs": _cmd_green_coeffs,
    "omega": _cmd_omega,
    "reduce": _cmd_reduce,
    "prodist-eval": _cmd_prodist_eval,
    "selftest": _cmd_selftest,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="detgreen",
        description="Regularized determinants, kernel pairings and formal "
                    "distribution algebra on disc and torus models.")
    parser.add_argument("--config", metavar="FILE",
                        help="TOML file with option values; flags win")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, options in _OPTIONS.items():
        p = sub.add_parser(command)
        for name, typ, default, help_text in options:
            p.add_argument(f"--{name}", type=typ, default=None,
                           help=f"{help_text} (default: {default})")
    return parser


def main(argv=None):
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:   # argparse already printed the message
        return int(exc.code or 0)
    try:
        cli_values = {k: v for k, v in vars(args).items()
                      if k not in ("command", "config")}
        cfg = ExperimentConfig.resolve(args.command, cli_values, args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    code = 0
    try:
        payload = _HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ToleranceError as exc:
        print(f"tolerance violation: {exc}", file=sys.stderr)
        payload = exc.payload
        code = 4
    except Exception as exc:    # numeric failure inside a compute module
        print(f"numeric failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 3
    doc = {"command": cfg.command, "config": cfg.resolved()}
    doc.update(payload)
    print(canonical_dumps(doc))
    if cfg.values.get("out") and cfg.command != "green-coeffs":
        try:
            write_canonical(cfg.values["out"], doc)
        except OSError as exc:
            print(f"config error: cannot write {cfg.values['out']!r}: {exc}",
                  file=sys.stderr)
            return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
