"""Command-line front end.

Usage::

    qdecay survival --config run.cfg --out survival.csv
    qdecay lifetime --config run.cfg --threads 4
    qdecay dilation-scan --config scan.cfg --out scan.csv
    qdecay tail --config tail.cfg --tol 1e-7

Configs are flat UTF-8 ``key = value`` files. ``#`` starts a comment and a
repeated key forms a list; vectors (``k0``, ``weights``) are comma
separated on one line. Recognised keys:

========== ==========================================================
shape      ``truncated`` (default) or ``analytic``
M, Gamma   peak mass and width; ``Gamma`` may repeat in ``dilation-scan``
mu_min     threshold (default ``M/2``)
alpha      threshold exponent (default 1); may repeat in scans
tail_tol   Lorentzian mass left above ``mu_max`` (default 1e-8)
kind       survival kind: ``momentum``, ``wavepacket`` or ``boosted``
k          momentum magnitudes (or packet centres along z), repeated
u          boost speeds along z, repeated
t, xi      sample times, repeated; ``t_grid = start, stop, n`` for linspace
k0         packet centre ``kx, ky, kz``
width      packet width; its presence selects wavepacket mode
spin_s     spin (default 0)
weights    spin-component weights
halfintegral  ``true`` adds the half-integral column to ``lifetime``
n_t        samples per tail fit (default 60)
tol        tolerance (overridden by ``--tol``)
seed       jitter seed for tail-fit windows (default: no jitter)
hbar       factor applied to time-valued output columns (default 1)
========== ==========================================================

Exit status is 0 on success, 2 for configuration errors and 3 for numerical
failures; in the last case the rows finished so far are written and the
message goes to ``<out>.err``.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import __version__, kinematics
from .errors import DomainError, NumericalError
from .lifetime import (default_tail_window, deviation_report, lifetime_boosted, lifetime_halfintegral_oracle,
                       lifetime_momentum_closed, lifetime_momentum_timedomain, tail_exponent_fit)
from .lifetime import _boosted_momentum_lifetime
from .spectral import make_analytic_breit_wigner, make_truncated_breit_wigner
from .states import make_gaussian_state
from .survival import BOOSTED, MOMENTUM, WAVEPACKET, survival_curve

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

COMMANDS = ("survival", "lifetime", "dilation-scan", "tail")
HEADERS = {
    "survival": ["t", "P", "kind", "k", "u", "xi", "accuracy"],
    "lifetime": ["k", "u", "T_closed", "T_timedomain", "T_halfintegral", "T_classical", "ratio", "err"],
    "dilation-scan": ["M", "Gamma", "alpha", "k", "u", "T_quantum", "T_classical", "ratio",
                      "spread_ratio", "boost_ratio", "err"],
    "tail": ["alpha", "fit_slope", "expected_slope", "abs_err"],
}
KIND_NAMES = {"momentum": MOMENTUM, "wavepacket": WAVEPACKET, "boosted": BOOSTED}

_SCALARS = {"shape", "M", "mu_min", "tail_tol", "kind", "width", "spin_s", "halfintegral", "n_t",
            "tol", "seed", "t_grid", "k0", "weights", "hbar"}
# time-valued columns; only these are multiplied by hbar on output
TIME_COLUMNS = {
    "survival": {"t", "xi"},
    "lifetime": {"T_closed", "T_timedomain", "T_halfintegral", "T_classical", "err"},
    "dilation-scan": {"T_quantum", "T_classical", "err"},
    "tail": set(),
}
_LISTS = {"k", "u", "t", "xi", "Gamma", "alpha"}


class ConfigError(Exception):
    """Invalid configuration; carries a ``line: field: message`` text."""


@dataclass
class RunConfig:
    """Validated run configuration."""

    shape: str = "truncated"
    M: float = 1.0
    Gamma: list = field(default_factory=lambda: [0.1])
    mu_min: float | None = None
    alpha: list = field(default_factory=lambda: [1.0])
    tail_tol: float = 1e-8
    kind: str = MOMENTUM
    k: list = field(default_factory=lambda: [0.0])
    u: list = field(default_factory=lambda: [0.0])
    t: list = field(default_factory=list)
    k0: tuple | None = None
    width: float | None = None
    spin_s: float = 0.0
    weights: tuple | None = None
    halfintegral: bool = False
    n_t: int = 60
    tol: float = 1e-6
    seed: int | None = None
    hbar: float = 1.0
    digest: str = ""

    @property
    def wavepacket_mode(self) -> bool:
        return self.width is not None

    def spectral(self, Gamma=None, alpha=None):
        G = self.Gamma[0] if Gamma is None else Gamma
        if self.shape == "analytic":
            return make_analytic_breit_wigner(self.M, G)
        a = self.alpha[0] if alpha is None else alpha
        return make_truncated_breit_wigner(self.M, G, self.mu_min, a, self.tail_tol)

    def state(self, k=None):
        if k is None and self.k0 is None:
            k = self.k[0]
        centre = self.k0 if k is None else (0.0, 0.0, float(k))
        return make_gaussian_state(centre, self.width, self.spin_s, self.weights)


# ---------------------------------------------------------------------------
# parsing


def parse_config_text(text: str, source: str = "config") -> dict:
    """``{key: [(line, value), ...]}`` from flat ``key = value`` text."""
    raw = {}
    for n, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in _SCALARS | _LISTS:
            raise ConfigError(f"{source}:{n}: {key}: unknown key")
        if not value:
            raise ConfigError(f"{source}:{n}: {key}: empty value")
        raw.setdefault(key, []).append((n, value))
    return raw


def _num(src, n, key, value, kind=float):
    try:
        x = kind(value)
    except ValueError:
        raise ConfigError(f"{src}:{n}: {key}: not a number: {value!r}") from None
    if not np.isfinite(x):
        raise ConfigError(f"{src}:{n}: {key}: must be finite")
    return x


def _vector(src, n, key, value):
    return tuple(_num(src, n, key, v.strip()) for v in value.split(","))


def build_config(raw: dict, source: str = "config", tol_override: float | None = None) -> RunConfig:
    """Validate parsed entries into a :class:`RunConfig`."""
    cfg = RunConfig()
    src = source

    def single(key):
        entries = raw.get(key, [])
        if len(entries) > 1:
            raise ConfigError(f"{src}:{entries[1][0]}: {key}: given more than once")
        return entries[0] if entries else None

    def scalar(key, kind=float, check=None, msg=""):
        e = single(key)
        if e is None:
            return None
        x = _num(src, e[0], key, e[1], kind)
        if check is not None and not check(x):
            raise ConfigError(f"{src}:{e[0]}: {key}: {msg}")
        return x

    def listed(key, check=None, msg=""):
        out = []
        for n, v in raw.get(key, []):
            x = _num(src, n, key, v)
            if check is not None and not check(x):
                raise ConfigError(f"{src}:{n}: {key}: {msg}")
            out.append(x)
        return out

    e = single("shape")
    if e is not None:
        if e[1] not in ("truncated", "analytic"):
            raise ConfigError(f"{src}:{e[0]}: shape: expected 'truncated' or 'analytic'")
        cfg.shape = e[1]
    M = scalar("M", check=lambda x: x > 0, msg="must be positive")
    cfg.M = 1.0 if M is None else M
    cfg.Gamma = listed("Gamma", lambda x: x > 0, "must be positive") or [0.1]
    mu_min = scalar("mu_min", check=lambda x: 0 <= x < cfg.M, msg="need 0 <= mu_min < M")
    cfg.mu_min = 0.5 * cfg.M if mu_min is None else mu_min
    cfg.alpha = listed("alpha", lambda x: x >= 0, "must be >= 0") or [1.0]
    if cfg.shape == "analytic" and "alpha" in raw:
        raise ConfigError(f"{src}:{raw['alpha'][0][0]}: alpha: not used by the analytic shape")
    tt = scalar("tail_tol", check=lambda x: 0 < x < 1, msg="must lie in (0, 1)")
    cfg.tail_tol = 1e-8 if tt is None else tt
    e = single("kind")
    if e is not None:
        if e[1] not in KIND_NAMES:
            raise ConfigError(f"{src}:{e[0]}: kind: expected one of {', '.join(KIND_NAMES)}")
        cfg.kind = KIND_NAMES[e[1]]
    cfg.k = listed("k", lambda x: x >= 0, "must be >= 0") or [0.0]
    cfg.u = listed("u", lambda x: 0 <= x < kinematics.SPEED_LIMIT, "need 0 <= u < 1") or [0.0]
    times = listed("t") + listed("xi")
    e = single("t_grid")
    if e is not None:
        v = _vector(src, e[0], "t_grid", e[1])
        if len(v) != 3 or v[2] < 2 or v[2] != int(v[2]) or not v[1] > v[0]:
            raise ConfigError(f"{src}:{e[0]}: t_grid: expected 'start, stop, n' with stop > start, n >= 2")
        times += list(np.linspace(v[0], v[1], int(v[2])))
    cfg.t = sorted(set(times))
    e = single("k0")
    if e is not None:
        v = _vector(src, e[0], "k0", e[1])
        if len(v) != 3:
            raise ConfigError(f"{src}:{e[0]}: k0: expected three components")
        cfg.k0 = v
    cfg.width = scalar("width", check=lambda x: x > 0, msg="must be positive")
    s = scalar("spin_s", check=lambda x: x >= 0 and (2 * x) == int(2 * x), msg="must be a half-integer >= 0")
    cfg.spin_s = 0.0 if s is None else s
    e = single("weights")
    if e is not None:
        w = _vector(src, e[0], "weights", e[1])
        if len(w) != int(2 * cfg.spin_s + 1) or min(w) < 0 or sum(w) <= 0:
            raise ConfigError(f"{src}:{e[0]}: weights: need {int(2 * cfg.spin_s + 1)} "
                              "non-negative values, not all zero")
        cfg.weights = w
    e = single("halfintegral")
    if e is not None:
        if e[1].lower() not in ("true", "false"):
            raise ConfigError(f"{src}:{e[0]}: halfintegral: expected true or false")
        cfg.halfintegral = e[1].lower() == "true"
    n_t = scalar("n_t", kind=int, check=lambda x: x >= 16, msg="need at least 16 samples")
    cfg.n_t = 60 if n_t is None else n_t
    tol = scalar("tol", check=lambda x: 0 < x < 1, msg="must lie in (0, 1)")
    cfg.tol = tol_override if tol_override is not None else (1e-6 if tol is None else tol)
    if not 0 < cfg.tol < 1:
        raise ConfigError("--tol: must lie in (0, 1)")
    cfg.seed = scalar("seed", kind=int)
    hbar = scalar("hbar", check=lambda x: x > 0, msg="must be positive")
    cfg.hbar = 1.0 if hbar is None else hbar
    if (cfg.k0 is not None or cfg.weights is not None) and cfg.width is None:
        raise ConfigError(f"{src}: width: required when k0 or weights are given")
    if cfg.kind in (WAVEPACKET, BOOSTED) and cfg.width is None:
        raise ConfigError(f"{src}: width: required for kind {cfg.kind}")
    if cfg.kind == BOOSTED and cfg.shape == "analytic":
        raise ConfigError(f"{src}: shape: boosted survival needs a truncated spectrum")
    if cfg.kind == BOOSTED and not cfg.mu_min > 0:
        raise ConfigError(f"{src}: mu_min: boosted survival needs mu_min > 0")
    # trial construction surfaces downstream domain errors at parse time
    try:
        for G, a in product(cfg.Gamma, cfg.alpha):
            if cfg.shape == "truncated":
                make_truncated_breit_wigner(cfg.M, G, cfg.mu_min, a, cfg.tail_tol)
        if cfg.wavepacket_mode:
            cfg.state()
    except DomainError as exc:
        raise ConfigError(f"{src}: {exc}") from None
    return cfg


def load_config(path: str, tol_override: float | None = None) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read: {exc.strerror}") from None
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise ConfigError(f"{path}: not valid UTF-8") from None
    cfg = build_config(parse_config_text(text, path), path, tol_override)
    cfg.digest = hashlib.sha256(data).hexdigest()
    return cfg


# ---------------------------------------------------------------------------
# commands; each returns a list of zero-argument cell jobs yielding row lists


def _survival_jobs(cfg: RunConfig):
    if not cfg.t:
        raise ConfigError("t: survival needs sample times (t, xi or t_grid)")
    sf = cfg.spectral()
    kind_short = {v: k for k, v in KIND_NAMES.items()}[cfg.kind]
    t = np.array(cfg.t)

    def momentum(k):
        c = survival_curve(MOMENTUM, dict(spectral=sf, k=k), t, cfg.tol)
        return [(x, p, kind_short, k, 0.0, None, c.accuracy) for x, p in zip(t, c.values)]

    def packet(k):
        wp = cfg.state(None if cfg.k0 is not None else k)
        c = survival_curve(WAVEPACKET, dict(spectral=sf, state=wp), t, cfg.tol)
        kc = float(np.linalg.norm(wp.components[0][1].center))
        return [(x, p, kind_short, kc, 0.0, None, c.accuracy) for x, p in zip(t, c.values)]

    def boosted(k, u):
        wp = cfg.state(None if cfg.k0 is not None else k)
        c = survival_curve(BOOSTED, dict(spectral=sf, state=wp, u=u), t, cfg.tol)
        kc = float(np.linalg.norm(wp.components[0][1].center))
        return [(x, p, kind_short, kc, u, x, c.accuracy) for x, p in zip(t, c.values)]

    ks = [None] if cfg.k0 is not None else cfg.k
    if cfg.kind == MOMENTUM:
        return [lambda k=k: momentum(k) for k in cfg.k]
    if cfg.kind == WAVEPACKET:
        return [lambda k=k: packet(k) for k in ks]
    return [lambda k=k, u=u: boosted(k, u) for k, u in product(ks, cfg.u)]


def _classical(T0, M, k, u):
    """Rest lifetime dilated by the composed velocity of momentum ``k`` after boost ``u``."""
    v = kinematics.momentum_velocity(M, (0.0, 0.0, k))
    w = kinematics.compose_velocities((0.0, 0.0, u), v)
    return kinematics.classical_lifetime_velocity(T0, w)


def _lifetime_jobs(cfg: RunConfig):
    sf = cfg.spectral()

    def cell(k):
        T0 = lifetime_momentum_closed(sf, 0.0, cfg.tol).value
        if cfg.wavepacket_mode:
            wp = cfg.state(None if cfg.k0 is not None else k)
            k = float(np.linalg.norm(wp.components[0][1].center))
            base = lifetime_boosted(sf, wp, 0.0, cfg.tol).value
        else:
            base = lifetime_momentum_closed(sf, k, cfg.tol).value
        rows = []
        for u in sorted(cfg.u):
            td = hi = None
            if cfg.wavepacket_mode:
                r = lifetime_boosted(sf, wp, u, cfg.tol)
                closed, err = r.value, r.error_estimate
                if cfg.halfintegral:
                    h = lifetime_halfintegral_oracle(sf, wp, u, cfg.tol)
                    hi, err = h.value, err + h.error_estimate
            else:
                closed, err, _ = _boosted_momentum_lifetime(sf, k, np.array([0.0, 0.0, u]), cfg.tol)
                if u == 0:
                    d = lifetime_momentum_timedomain(sf, k, cfg.tol)
                    td, err = d.value, err + d.error_estimate
            rows.append((k, u, closed, td, hi, _classical(T0, sf.M, k, u), closed / base, err))
        return rows

    ks = [None] if cfg.wavepacket_mode and cfg.k0 is not None else cfg.k
    return [lambda k=k: cell(k) for k in ks]


def _dilation_jobs(cfg: RunConfig):
    if cfg.shape == "analytic":
        raise ConfigError("shape: dilation-scan needs a truncated spectrum")

    def cell(k, u, G, a):
        sf = cfg.spectral(G, a)
        state = cfg.state(k) if cfg.wavepacket_mode else k
        r = deviation_report(sf, state, u, cfg.tol)
        return [(sf.M, G, a, k, u, r.quantum_lifetime, r.classical_lifetime, r.ratio,
                 r.spread_ratio, r.boost_ratio, r.error_estimate)]

    return [lambda c=c: cell(*c) for c in product(cfg.k, cfg.u, cfg.Gamma, cfg.alpha)]


def _tail_jobs(cfg: RunConfig):
    if cfg.shape == "analytic":
        raise ConfigError("shape: tail fits need a truncated spectrum")
    rng = np.random.default_rng(cfg.seed) if cfg.seed is not None else None
    jitter = [1.0 if rng is None else float(np.exp(rng.uniform(-0.1, 0.1))) for _ in cfg.alpha]

    def cell(a, j):
        sf = cfg.spectral(alpha=a)
        k = cfg.k[0]
        lo, hi = default_tail_window(sf, k)
        lo, hi = lo * j, hi * j
        t = np.geomspace(lo, hi, cfg.n_t)
        c = survival_curve(MOMENTUM, dict(spectral=sf, k=k), t, cfg.tol)
        slope = tail_exponent_fit(c, (lo, hi))
        expected = -2.0 * (1.0 + a)
        return [(a, slope, expected, abs(slope - expected))]

    return [lambda a=a, j=j: cell(a, j) for a, j in zip(cfg.alpha, jitter)]


JOBS = {"survival": _survival_jobs, "lifetime": _lifetime_jobs,
        "dilation-scan": _dilation_jobs, "tail": _tail_jobs}


# ---------------------------------------------------------------------------
# output


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def render(command: str, cfg: RunConfig, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# qdecay {__version__} command={command} config_sha256={cfg.digest} "
              f"tol={format(cfg.tol, '.17g')}")
    if cfg.hbar != 1.0:
        buf.write(f" hbar={format(cfg.hbar, '.17g')}")
    buf.write("\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADERS[command])
    scaled = [h in TIME_COLUMNS[command] and cfg.hbar != 1.0 for h in HEADERS[command]]
    for r in rows:
        w.writerow([_fmt(x * cfg.hbar if s and x is not None else x) for x, s in zip(r, scaled)])
    return buf.getvalue()


def _threads(arg) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("QDECAY_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"QDECAY_THREADS: not an integer: {env!r}") from None
        if n < 1:
            raise ConfigError("QDECAY_THREADS: must be >= 1")
        return n
    return 1


def run(command: str, cfg: RunConfig, threads: int = 1):
    """Rows for ``command``; stops at the first failing cell.

    Returns ``(rows, error)`` where ``error`` is ``None`` or the
    :class:`~qdecay.errors.NumericalError` of the first failing cell in
    index order; ``rows`` holds every row of the cells before it.
    """
    jobs = JOBS[command](cfg)
    rows, error = [], None
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(j) for j in jobs]
        for f in futures:
            try:
                rows.extend(f.result())
            except NumericalError as exc:
                error = exc
                break
        for f in futures:
            f.cancel()
    if command == "survival" and error is None:
        rows.sort(key=lambda r: r[0])
    return rows, error


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdecay", description="Survival probabilities and lifetimes "
                                "of unstable states with a Breit-Wigner mass spectrum.")
    p.add_argument("--version", action="version", version=f"qdecay {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="flat key = value configuration file")
        s.add_argument("--out", help="CSV output path (default: standard output)")
        s.add_argument("--threads", type=int, help="worker threads (default: $QDECAY_THREADS or 1)")
        s.add_argument("--tol", type=float, help="tolerance override")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config, args.tol)
        threads = _threads(args.threads)
        if threads < 1:
            raise ConfigError("--threads: must be >= 1")
        rows, error = run(args.command, cfg, threads)
    except ConfigError as exc:
        print(f"qdecay: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"qdecay: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(args.command, cfg, rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if error is not None:
        msg = f"qdecay: numerical error: {error}\n"
        if args.out:
            with open(args.out + ".err", "w", encoding="utf-8") as fh:
                fh.write(msg)
        sys.stderr.write(msg)
        return EXIT_NUMERICAL
    if args.out and os.path.exists(args.out + ".err"):
        os.remove(args.out + ".err")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
