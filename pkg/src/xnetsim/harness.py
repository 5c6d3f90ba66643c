"""Seeded Monte-Carlo BER experiments, verification suites and plot data.

Trials are grouped into fixed-size blocks. Block ``b`` of SNR point ``k``
draws everything from ``SeedSequence([seed, k, b])``, so a block's content
does not depend on which worker ran it. Blocks are consumed in order and
early stopping happens at the trial that reaches the error target, which
makes the curve independent of the worker count.
"""

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analysis, schemes, stbc, trials
from .channel import derived_rng, make_rng, crandn, sample_channels
from .constellation import NAMES, PHI_CPD, by_name
from .decoders import RealLinearModel, SymbolSlot, ml_enumerate, sphere_decode
from .exceptions import ConfigInvalid, XNetError
from .numerics import numeric_rank

BLOCK_SIZE = 512
SUITES = ("cancellation", "certificates", "rank-search", "alignment", "decoder-equivalence")


@dataclass
class SimConfig:
    """One BER experiment.

    ``phi`` and ``theta`` are ignored for ``"ar"``, which always runs the
    unrotated alphabet with ``theta = 0``.
    """

    scheme: str = "ljj3"
    constellation: str = "qpsk"
    phi: float = PHI_CPD
    theta: float = math.pi / 4
    p_db_list: list = field(default_factory=lambda: [16.0, 20.0, 24.0, 28.0])
    target_bit_errors: int = 200
    max_trials_per_point: int = 1_000_000
    seed: int = 0
    workers: int = 1
    block_size: int = BLOCK_SIZE

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.scheme not in schemes.SCHEMES:
            raise ConfigInvalid(f"unknown scheme {self.scheme!r}; choose from {schemes.SCHEMES}")
        if self.constellation not in NAMES:
            raise ConfigInvalid(f"unknown constellation {self.constellation!r}")
        try:
            self.p_db_list = [float(p) for p in np.atleast_1d(self.p_db_list)]
            self.phi, self.theta = float(self.phi), float(self.theta)
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(str(exc)) from None
        if not self.p_db_list:
            raise ConfigInvalid("p_db_list must be nonempty")
        if any(b <= a for a, b in zip(self.p_db_list, self.p_db_list[1:])):
            raise ConfigInvalid("p_db_list must be strictly ascending")
        if not all(map(math.isfinite, self.p_db_list + [self.phi, self.theta])):
            raise ConfigInvalid("p_db_list, phi and theta must be finite")
        for name in ("target_bit_errors", "max_trials_per_point", "workers", "block_size"):
            val = getattr(self, name)
            if isinstance(val, bool) or int(val) != val or val < 1:
                raise ConfigInvalid(f"{name} must be a positive integer")
            setattr(self, name, int(val))
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigInvalid("seed must be an integer in [0, 2^64)")
        self.seed = int(self.seed)

    @property
    def effective_phi(self):
        return 0.0 if self.scheme == "ar" else self.phi

    @property
    def effective_theta(self):
        return 0.0 if self.scheme == "ar" else self.theta

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigInvalid(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class BerPoint:
    p_db: float
    trials: int
    bit_errors: int
    bits: int

    @property
    def ber(self):
        return self.bit_errors / self.bits if self.bits else float("nan")


@dataclass
class BerCurve:
    scheme: str
    constellation: str
    theta: float
    phi: float
    seed: int
    points: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    def p_db(self):
        return np.array([p.p_db for p in self.points])

    def ber(self):
        return np.array([p.ber for p in self.points])


def _run_block(args):
    scheme, cname, phi, theta, p_db, seed, k, b, n = args
    const = by_name(cname, phi)
    rng = derived_rng(seed, k, b)
    return trials.BLOCKS[scheme](rng, n, 10.0 ** (p_db / 10.0), const, theta)


def _point(cfg, k, p_db, pool):
    const = by_name(cfg.constellation, cfg.effective_phi)
    per_trial = trials.bits_per_trial(cfg.scheme, const)
    n_trials = n_errors = 0
    b = 0
    wave = max(cfg.workers, 1)
    while n_trials < cfg.max_trials_per_point and n_errors < cfg.target_bit_errors:
        jobs = []
        planned = n_trials
        for _ in range(wave):
            n = min(cfg.block_size, cfg.max_trials_per_point - planned)
            if n <= 0:
                break
            jobs.append((cfg.scheme, cfg.constellation, cfg.effective_phi, cfg.effective_theta,
                         p_db, cfg.seed, k, b, n))
            planned += n
            b += 1
        results = pool.map(_run_block, jobs) if pool is not None else map(_run_block, jobs)
        for errs in results:
            if n_errors >= cfg.target_bit_errors:
                break
            cum = np.cumsum(errs)
            hit = np.flatnonzero(n_errors + cum >= cfg.target_bit_errors)
            used = int(hit[0]) + 1 if hit.size else errs.size
            n_trials += used
            n_errors += int(cum[used - 1])
    return BerPoint(float(p_db), n_trials, n_errors, n_trials * per_trial)


def run_ber(cfg, progress=None):
    """BER curve of ``cfg``; identical for every worker count.

    ``progress`` is an optional callable receiving each finished
    :class:`BerPoint`.
    """
    if not isinstance(cfg, SimConfig):
        raise ConfigInvalid("run_ber expects a SimConfig")
    cfg.validate()
    curve = BerCurve(cfg.scheme, cfg.constellation, cfg.effective_theta,
                     cfg.effective_phi, cfg.seed)
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for k, p_db in enumerate(cfg.p_db_list):
            pt = _point(cfg, k, p_db, pool)
            curve.points.append(pt)
            if progress is not None:
                progress(pt)
    finally:
        if pool is not None:
            pool.shutdown()
    return curve


# Plot data ------------------------------------------------------------------

CSV_COLUMNS = ("p_db", "trials", "bit_errors", "ber")


def format_plot_data(curve, reference_slope=None, reference_anchor=None):
    """CSV text for ``curve``; optional ``a P^-d`` companion column.

    The reference line passes through the last point unless
    ``reference_anchor`` gives the coefficient ``a`` directly.
    """
    if not curve.points:
        raise ValueError("curve is empty")
    buf = io.StringIO()
    buf.write(f"# scheme={curve.scheme}\n")
    buf.write(f"# constellation={curve.constellation}\n")
    buf.write(f"# theta={curve.theta!r}\n")
    buf.write(f"# phi={curve.phi!r}\n")
    buf.write(f"# seed={curve.seed}\n")
    cols = list(CSV_COLUMNS)
    ref = None
    if reference_slope is not None:
        d = float(reference_slope)
        cols.append(f"ref_p{int(d) if d == int(d) else d}")
        p_lin = 10.0 ** (curve.p_db() / 10.0)
        if reference_anchor is None:
            last = curve.points[-1]
            a = last.ber * (10.0 ** (last.p_db / 10.0)) ** d
        else:
            a = float(reference_anchor)
        ref = a * p_lin ** (-d)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for i, p in enumerate(curve.points):
        row = [repr(p.p_db), p.trials, p.bit_errors, repr(p.ber)]
        if ref is not None:
            row.append(repr(float(ref[i])))
        w.writerow(row)
    return buf.getvalue()


def emit_plot_data(curve, path, reference_slope=None, reference_anchor=None):
    text = format_plot_data(curve, reference_slope, reference_anchor)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _split_plot_text(path_or_text):
    text = path_or_text
    if "\n" not in text:
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key] = val
        elif line.strip():
            body.append(line)
    return meta, list(csv.DictReader(body))


def read_ber_pairs(path_or_text):
    """``(p_db, ber)`` pairs exactly as written in a plot-data CSV."""
    _, rows = _split_plot_text(path_or_text)
    return [(float(r["p_db"]), float(r["ber"])) for r in rows]


def read_plot_data(path_or_text, bits_per_trial=None):
    """Parse emitted CSV (a path or the text itself) back into a :class:`BerCurve`.

    Bit counts are ``trials * bits_per_trial``; without ``bits_per_trial``
    they follow from the scheme and constellation named in the header.
    """
    meta, rows = _split_plot_text(path_or_text)
    curve = BerCurve(meta.get("scheme", ""), meta.get("constellation", ""),
                     float(meta.get("theta", "nan")), float(meta.get("phi", "nan")),
                     int(meta.get("seed", 0)))
    for r in rows:
        n, e = int(r["trials"]), int(r["bit_errors"])
        if bits_per_trial is None:
            bits_per_trial = trials.bits_per_trial(curve.scheme, by_name(curve.constellation))
        bits = n * bits_per_trial
        curve.points.append(BerPoint(float(r["p_db"]), n, e, bits))
    return curve


# Verification suites -------------------------------------------------------

def check_code_cancellation(thetas=None):
    """Column-cancellation verdicts for both cancellation codes plus a mutant."""
    thetas = np.linspace(0, 2 * np.pi, 16, endpoint=False) if thetas is None else thetas
    checks = []
    for th in thetas:
        for make in (stbc.proposed_3tx_code, stbc.sr_4tx_code):
            v = stbc.verify_column_cancellation(make(th))
            checks.append({"check": f"{make.__name__}(theta={th:.6f})", "passed": v.passed,
                           "max_residual": v.max_residual})
    code = stbc.proposed_3tx_code(0.3)
    mutant = stbc.LinearDispersionCode(code.name + "-mutant", code.a_re.copy(),
                                       code.a_im.copy(), code.cancel_spec, code.theta)
    mutant.a_re[0, 0, 0] += 0.5
    v = stbc.verify_column_cancellation(mutant)
    checks.append({"check": "mutated code is rejected", "passed": not v.passed,
                   "max_residual": v.max_residual})
    return checks


def pipeline_residuals(rng, scheme, n, p=100.0, theta=math.pi / 4):
    """Worst noiseless residuals of the LJJ receive chains over ``n`` draws.

    Returns ``(interference, mismatch)``: the largest Frobenius norm of the
    processed output when only interfering symbols are sent, and the largest
    distance between the processed output and its desired-signal model.
    """
    if scheme == "ljj3":
        code, m, c = stbc.proposed_3tx_code(theta), 3, schemes.C_LJJ3
    elif scheme == "ljj2":
        code, m, c = stbc.alamouti_code(), 2, schemes.C_LJJ2
    else:
        raise ValueError(f"no cancellation pipeline for {scheme!r}")
    h = sample_channels(rng, m, n)
    s = crandn(rng, (n, 2, 2, code.l))
    gain = np.sqrt(c * p)
    interference = mismatch = 0.0
    for dest in (0, 1):
        only_int = s.copy()
        only_int[:, :, dest, :] = 0
        for sym, which in ((s, "full"), (only_int, "int")):
            x = schemes.ljj_transmit(h, sym, code, c)
            y = schemes.propagate(h, x, p)
            hm, gm = schemes.desired_effective(h, dest)
            if scheme == "ljj2" and dest == 0:
                out = schemes.ljj2_y2(y[:, 0]) @ schemes.ZF_F.T
                want = gain * np.einsum("nij,nj->ni", schemes.ljj2_effective(hm, gm),
                                        sym[:, :, 0, :].reshape(n, 4))
            else:
                out = stbc.cancel_interference(y[:, dest], code, ("rx1", "rx2")[dest])
                xp = code.encode(sym[:, :, dest, :])
                want = gain * (hm @ xp[:, 0] + gm @ xp[:, 1])
            if which == "int":
                interference = max(interference, float(np.max(np.linalg.norm(
                    out.reshape(n, -1), axis=1))))
            else:
                mismatch = max(mismatch, float(np.max(np.linalg.norm(
                    (out - want).reshape(n, -1), axis=1))))
    return interference, mismatch


def js_alignment(rng, n):
    """Worst alignment residual, interference ranks and desired-space ranks.

    Returns ``(max_residual, interference_ranks, full_ranks)`` over ``n``
    channel draws; ``interference_ranks`` are numeric ranks of
    ``[H'_11 V_12, H'_21 V_22]`` at Rx-1.
    """
    h = sample_channels(rng, 3, n)
    worst = 0.0
    int_ranks = np.zeros(n, dtype=int)
    full_ranks = np.zeros((n, 2), dtype=int)
    for t in range(n):
        v = schemes.js3_precoders(h[t])
        hp = schemes.extend(h[t])
        for dest in (0, 1):
            other = 1 - dest
            a = hp[0, dest] @ v[0, other]
            b = hp[1, dest] @ v[1, other]
            worst = max(worst, np.linalg.norm(a - b) / max(np.linalg.norm(a), 1e-300))
            a1, a2, bb, _ = schemes.js3_rx_terms(h[t], v, dest)
            full_ranks[t, dest] = numeric_rank(np.concatenate([a1, a2, bb], axis=1))
        int_ranks[t] = numeric_rank(np.concatenate(
            [hp[0, 0] @ v[0, 1], hp[1, 0] @ v[1, 1]], axis=1))
    return float(worst), int_ranks, full_ranks


def decoder_equivalence(rng, n, n_symbols=4, const=None, snr_db=6.0):
    """Compare sphere decoding with exhaustive ML on random reduced models.

    Returns ``(decision_mismatches, max_metric_gap)``.
    """
    const = by_name("qpsk", PHI_CPD) if const is None else const
    k = n_symbols
    slots = tuple(SymbolSlot.of(const, (2 * i, 2 * i + 1)) for i in range(k))
    mismatches = 0
    gap = 0.0
    sigma = 10.0 ** (-snr_db / 20.0)
    for _ in range(n):
        g = rng.standard_normal((2 * k, 2 * k))
        idx = rng.integers(0, len(const), k)
        u = np.zeros(2 * k)
        u[0::2], u[1::2] = const.points[idx].real, const.points[idx].imag
        y = g @ u + sigma * rng.standard_normal(2 * k)
        model = RealLinearModel(y, g, slots)
        a, b = sphere_decode(model), ml_enumerate(model)
        mismatches += int(not np.array_equal(a.indices, b.indices))
        gap = max(gap, abs(a.metric - b.metric))
    return mismatches, gap


def run_verify(suite="all", seed=0, quick=True):
    """Machine-readable pass/fail report for one suite or all of them."""
    if suite != "all" and suite not in SUITES:
        raise ConfigInvalid(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
    wanted = SUITES if suite == "all" else (suite,)
    rng = make_rng(seed)
    n = 100 if quick else 1000
    report = {"suite": suite, "seed": seed, "checks": []}
    add = report["checks"].append
    for name in wanted:
        try:
            if name == "cancellation":
                for c in check_code_cancellation():
                    add({"suite": name, **c})
                for scheme in ("ljj3", "ljj2"):
                    i, m = pipeline_residuals(rng, scheme, n)
                    add({"suite": name, "check": f"{scheme} pipeline residuals",
                         "interference": i, "mismatch": m,
                         "passed": i <= 1e-10 and m <= 1e-9})
            elif name == "certificates":
                for th in np.linspace(0, 2 * np.pi, 64, endpoint=False):
                    c = analysis.appendix_c_certificates(th, strict=False)
                    add({"suite": name, "check": f"determinants(theta={th:.6f})", **c})
                w = min(abs(analysis.s_witness_det(th))
                        for th in np.linspace(0, 2 * np.pi, 64, endpoint=False))
                add({"suite": name, "check": "alternative S witness", "min_abs_det": w,
                     "passed": w > 1.0})
            elif name == "rank-search":
                code = stbc.proposed_3tx_code(math.pi / 4)
                const = by_name("qpsk", PHI_CPD)
                if quick:
                    deltas, ranks = analysis.rank_check_pairs(code, const, 20000, rng)
                    add({"suite": name, "check": "sampled codeword pairs (qpsk, cpd, pi/4)",
                         "pairs": int(ranks.size), "passed": bool(np.all(ranks == code.m))})
                else:
                    rep = analysis.rank_search(code, const)
                    add({"suite": name, "check": "exhaustive (qpsk, cpd, pi/4)",
                         **rep.to_dict(), "passed": rep.passed})
            elif name == "alignment":
                worst, int_r, full_r = js_alignment(rng, n)
                add({"suite": name, "check": "js alignment", "max_residual": worst,
                     "interference_rank_max": int(int_r.max()),
                     "full_rank_min": int(full_r.min()),
                     "passed": worst <= 1e-8 and bool(np.all(int_r == 3))
                     and bool(np.all(full_r == 9))})
            elif name == "decoder-equivalence":
                mism, gap = decoder_equivalence(rng, n)
                add({"suite": name, "check": "sphere vs enumeration", "mismatches": mism,
                     "max_metric_gap": gap, "passed": mism == 0 and gap <= 1e-9})
        except XNetError as exc:
            add({"suite": name, "check": "suite raised", "error": repr(exc), "passed": False})
    report["passed"] = all(c["passed"] for c in report["checks"])
    return report
