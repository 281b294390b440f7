"""Monte Carlo quasi-static Rayleigh MAC with uncoded QAM and sphere decoding.

Every user sends one QAM symbol per block (``T = 1``), ``N``-PAM per real
dimension with ``N = ceil(SNR^(r/2))``.  The receiver lifts the channel to
real form, applies MMSE preprocessing when ``K > n_r``, and runs a
node-counting Schnorr-Euchner sphere decoder with radius
``sqrt(z log SNR)`` and an optional ``SNR^c`` node budget.

Randomness is drawn per chunk of trials from a stream keyed by
``(seed, snr index, chunk index)``, so results do not depend on how chunks
are spread over worker processes.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy import stats

from . import _kernels
from .curves import MacConfig, mac_dmt
from .errors import DomainError, SingularityError
from .jv_selection import select_users_batch

DEFAULT_CHUNK = 4096
MIN_ERRORS_FOR_SLOPE = 10


def draw_channel(K: int, n_r: int, rng, size=None) -> np.ndarray:
    """i.i.d. CN(0, 1) entries, shape ``(n_r, K)`` or ``(size, n_r, K)``."""
    if K < 1 or n_r < 1:
        raise DomainError("dimensions must be positive")
    shape = (n_r, K) if size is None else (size, n_r, K)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)


def real_lift(H_eq, T: int = 1) -> np.ndarray:
    """Real form of a complex matrix (stacks allowed on leading axes).

    Each complex entry ``h`` becomes the block ``[[Re h, -Im h], [Im h, Re h]]``,
    so ``real_lift(H) @ lift_vector(v) == lift_vector(H @ v)``; ``T > 1``
    repeats the result block-diagonally.
    """
    H = np.asarray(H_eq, dtype=complex)
    m, n = H.shape[-2:]
    out = np.empty(H.shape[:-2] + (2 * m, 2 * n))
    out[..., 0::2, 0::2] = H.real
    out[..., 0::2, 1::2] = -H.imag
    out[..., 1::2, 0::2] = H.imag
    out[..., 1::2, 1::2] = H.real
    if T > 1:
        if H.ndim != 2:
            raise DomainError("T > 1 lifting takes a single matrix")
        out = np.kron(np.eye(T), out)
    return out


def lift_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    out = np.empty(v.shape[:-1] + (2 * v.shape[-1],))
    out[..., 0::2] = v.real
    out[..., 1::2] = v.imag
    return out


def pam_size(snr: float, r: float, min_levels: int = 2) -> int:
    """Levels per real dimension, ``max(min_levels, ceil(SNR^(r/2)))``."""
    return max(int(min_levels), int(math.ceil(snr ** (r / 2) - 1e-9)))


def pam_scale(N: int) -> float:
    """Amplitude making centered ``N^2``-QAM unit-energy per complex symbol."""
    if N < 2:
        return 0.0
    return math.sqrt(3.0 / (2.0 * (N * N - 1)))


@dataclass
class MmseQR:
    """QR factor of the (possibly MMSE-augmented) code-channel matrix.

    When ``K > n_r`` the matrix ``[M; alpha I]`` with ``alpha = SNR^(-r/2)``
    is factored, which makes ``R`` square and invertible and gives
    ``sigma_i(R) = sqrt(alpha^2 + sigma_i(M^T M))``.  ``deficit`` counts the
    ``2 (K - n_r) T`` singular values that sit at the ``alpha`` floor.
    """

    R: np.ndarray
    Q: np.ndarray
    alpha: float
    deficit: int

    def project(self, y):
        """Target ``Q^T [y; 0]`` for the triangular search."""
        y = np.asarray(y, dtype=float)
        return self.Q[..., : y.shape[-1], :].swapaxes(-1, -2) @ y[..., None] if y.ndim > 1 \
            else self.Q[: y.shape[0]].T @ y


def mmse_qr(M, K: int, n_r: int, T: int, r: float, snr: float) -> MmseQR:
    M = np.asarray(M, dtype=float)
    if snr <= 1:
        raise DomainError("snr must exceed 1")
    n = M.shape[-1]
    if K > n_r:
        alpha = snr ** (-r / 2)
        eye = np.broadcast_to(alpha * np.eye(n), M.shape[:-2] + (n, n))
        Q, R = np.linalg.qr(np.concatenate([M, eye], axis=-2))
        deficit = 2 * (K - n_r) * T
    else:
        alpha = 0.0
        Q, R = np.linalg.qr(M)
        deficit = 0
    diag = np.abs(np.diagonal(R, axis1=-2, axis2=-1))
    if np.any(diag <= 1e-13 * max(1.0, float(np.abs(M).max(initial=0.0)))):
        raise SingularityError("code-channel matrix is rank deficient and unregularized")
    return MmseQR(R, Q, alpha, deficit)


@dataclass
class SphereDecodeOutcome:
    s_hat: np.ndarray | None
    nodes_visited: int
    halted: bool
    in_radius: bool


def sphere_decode(R, target, n_levels, delta: float, node_budget: int | None = None
                  ) -> SphereDecodeOutcome:
    """Closest centered-PAM vector to ``target`` under ``R`` within radius ``delta``.

    Coordinate ``k`` ranges over ``{-(N_k-1), -(N_k-3), ..., N_k-1}``.
    ``s_hat`` is returned in those (odd/even integer) values.
    """
    R = np.ascontiguousarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1] or np.any(np.tril(R, -1) != 0):
        raise ValueError("R must be square upper triangular")
    if np.any(np.diag(R) == 0):
        raise SingularityError("R has a zero diagonal entry")
    if not delta > 0:
        raise DomainError("delta must be positive")
    n = R.shape[0]
    levels = np.broadcast_to(np.asarray(n_levels, dtype=np.int64), (n,)).copy()
    budget = -1 if node_budget is None else int(node_budget)
    idx, nodes, halted, found = _kernels.sphere_decode_kernel(
        R, np.ascontiguousarray(target, dtype=float), levels, float(delta) ** 2, budget)
    s_hat = (2 * idx - (levels - 1)) if (found and not halted) else None
    return SphereDecodeOutcome(s_hat, int(nodes), bool(halted), bool(found))


# ---------------------------------------------------------------------------
# configuration and reports


class ConfigError(DomainError):
    """Invalid simulation setting; ``field`` names the offending key."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class SimConfig:
    K: int
    n_r: int
    r: float
    snr_db: tuple
    trials_per_snr: int
    seed: int = 0
    radius_z: float | None = None  # None -> target diversity + 1; inf allowed
    halt_exponent: float | None = None
    halt_multiplier: float = 1.0
    selection_L: int | None = None
    selection_jv: bool = True
    min_pam: int = 2
    decoder: str = "sphere"  # "sphere" | "ml" (exhaustive)
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if not isinstance(self.K, int) or self.K < 1:
            raise ConfigError("K", "must be a positive integer")
        if not isinstance(self.n_r, int) or self.n_r < 1:
            raise ConfigError("n_r", "must be a positive integer")
        try:
            MacConfig(self.K, self.n_r, self.r)
        except DomainError as exc:
            raise ConfigError("r", str(exc)) from None
        if not self.snr_db:
            raise ConfigError("snr_db", "needs at least one point")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ConfigError("snr_db", "must be strictly ascending")
        if self.snr_db[0] <= 0:
            raise ConfigError("snr_db", "points must be above 0 dB")
        if not isinstance(self.trials_per_snr, int) or self.trials_per_snr < 1:
            raise ConfigError("trials_per_snr", "must be a positive integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed", "must be an integer in [0, 2^64)")
        if self.radius_z is not None and not self.radius_z > 0:
            raise ConfigError("radius_z", "must be positive")
        if self.halt_exponent is not None and self.halt_exponent < 0:
            raise ConfigError("halt_exponent", "must be >= 0")
        if not self.halt_multiplier > 0:
            raise ConfigError("halt_multiplier", "must be positive")
        if self.selection_L is not None:
            if not 1 <= self.selection_L <= min(self.K, self.n_r):
                raise ConfigError("selection_L", f"must lie in [1, {min(self.K, self.n_r)}]")
            if self.r > self.selection_L / self.K + 1e-9:
                raise ConfigError("r", "exceeds L/K for the chosen selection size")
        if self.min_pam < 2:
            raise ConfigError("min_pam", "must be >= 2")
        if self.decoder not in ("sphere", "ml"):
            raise ConfigError("decoder", "must be 'sphere' or 'ml'")
        if self.chunk_size < 1:
            raise ConfigError("chunk_size", "must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        missing = [n for n in ("K", "n_r", "r", "snr_db", "trials_per_snr") if n not in data]
        if missing:
            raise ConfigError(missing[0], "required field missing")
        data = dict(data)
        if data.get("radius_z") in ("inf", "Infinity"):
            data["radius_z"] = math.inf
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError("config", str(exc)) from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_db"] = list(self.snr_db)
        if d["radius_z"] is not None and math.isinf(d["radius_z"]):
            d["radius_z"] = "inf"
        return d

    @property
    def users(self) -> int:
        return self.selection_L or self.K

    @property
    def per_user_rate(self) -> float:
        return self.K * self.r / self.users

    def target_diversity(self) -> float:
        if self.selection_L is None:
            return mac_dmt(MacConfig(self.K, self.n_r, self.r))
        from .selection_bounds import _dbar
        return _dbar(self.K, self.n_r, self.selection_L, self.r)

    def resolved_radius_z(self) -> float:
        return self.target_diversity() + 1.0 if self.radius_z is None else self.radius_z


@dataclass
class SnrRecord:
    snr_db: float
    pam_levels: int
    trials: int
    errors: int
    halt_events: int
    empty_sphere_events: int
    out_of_sphere_events: int
    error_rate: float
    error_rate_ci: tuple
    nodes_q50: float
    nodes_q90: float
    nodes_q99: float
    nodes_max: int
    nodes_mean: float
    node_budget: int | None
    mean_symbol_energy: float
    selection_counts: list | None = None


@dataclass
class ExponentEstimate:
    slope: float | None
    stderr: float | None
    points_used: int
    flagged: bool
    reason: str = ""


@dataclass
class MonteCarloReport:
    config: SimConfig
    records: list
    estimated_diversity: ExponentEstimate
    estimated_complexity: ExponentEstimate
    target_diversity: float
    radius_z: float

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "target_diversity": self.target_diversity,
            "radius_z": "inf" if math.isinf(self.radius_z) else self.radius_z,
            "records": [asdict(r) for r in self.records],
            "estimated_diversity": asdict(self.estimated_diversity),
            "estimated_complexity": asdict(self.estimated_complexity),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    CSV_COLUMNS = ("snr_db", "pam_levels", "trials", "errors", "error_rate", "error_rate_lo",
                   "error_rate_hi", "halt_events", "empty_sphere_events", "out_of_sphere_events",
                   "nodes_q50", "nodes_q90", "nodes_q99", "nodes_max")

    def csv_rows(self):
        for rec in self.records:
            d = asdict(rec)
            d["error_rate_lo"], d["error_rate_hi"] = rec.error_rate_ci
            yield [d[c] for c in self.CSV_COLUMNS]


# ---------------------------------------------------------------------------
# simulation


def _chunk_rng(seed, snr_index, chunk_index):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(snr_index, chunk_index)))


def _run_chunk(cfg: SimConfig, snr_index: int, chunk_index: int, n_trials: int) -> dict:
    rng = _chunk_rng(cfg.seed, snr_index, chunk_index)
    snr = 10.0 ** (cfg.snr_db[snr_index] / 10.0)
    U = cfg.users
    H = draw_channel(cfg.K, cfg.n_r, rng, size=n_trials)
    counts = None
    if cfg.selection_L is not None:
        if cfg.selection_jv:
            chosen = select_users_batch(H, U)[1][:, :U]
        else:
            chosen = np.argsort(rng.random((n_trials, cfg.K)), axis=1)[:, :U]
        H = np.take_along_axis(H, chosen[:, None, :], axis=2)
        counts = np.bincount(chosen.ravel(), minlength=cfg.K)

    N = pam_size(snr, cfg.per_user_rate, cfg.min_pam)
    scale = pam_scale(N)
    dim = 2 * U
    j_true = rng.integers(0, N, size=(n_trials, dim))
    v = 2.0 * j_true - (N - 1)
    w = rng.standard_normal((n_trials, 2 * cfg.n_r)) * math.sqrt(0.5)
    M = math.sqrt(snr) * scale * real_lift(H)
    y = np.einsum("bij,bj->bi", M, v) + w
    energy = float(np.sum(v ** 2) * scale ** 2 / (n_trials * U))

    levels = np.full(dim, N, dtype=np.int64)
    z = cfg.resolved_radius_z()
    radius2 = math.inf if math.isinf(z) else z * math.log(snr)
    budget = None
    if cfg.halt_exponent is not None:
        budget = int(math.ceil(cfg.halt_multiplier * snr ** cfg.halt_exponent - 1e-9))

    if cfg.decoder == "ml":
        j_hat = _kernels.exhaustive_ml_batch(M, y, levels)
        nodes = np.full(n_trials, N ** dim, dtype=np.int64)
        halted = np.zeros(n_trials, dtype=bool)
        found = np.ones(n_trials, dtype=bool)
        outside = np.zeros(n_trials, dtype=bool)
    else:
        qr = mmse_qr(M, U, cfg.n_r, 1, cfg.per_user_rate, snr)
        target = np.einsum("bji,bj->bi", qr.Q[:, : 2 * cfg.n_r, :], y)
        R = np.ascontiguousarray(qr.R)
        j_hat, nodes, halted, found = _kernels.sphere_decode_batch(
            R, np.ascontiguousarray(target), levels, radius2, -1 if budget is None else budget)
        resid = target - np.einsum("bij,bj->bi", R, v)
        outside = np.sum(resid ** 2, axis=1) > radius2

    wrong = np.any(j_hat != j_true, axis=1)
    errors = wrong | halted | ~found
    return {
        "pam_levels": N,
        "errors": errors,
        "halted": halted,
        "empty": ~found & ~halted,
        "outside": outside,
        "nodes": nodes,
        "energy": energy,
        "n": n_trials,
        "counts": counts,
        "budget": budget,
    }


def _chunk_plan(cfg: SimConfig):
    plan = []
    for s in range(len(cfg.snr_db)):
        full, rest = divmod(cfg.trials_per_snr, cfg.chunk_size)
        sizes = [cfg.chunk_size] * full + ([rest] if rest else [])
        plan.extend((s, c, n) for c, n in enumerate(sizes))
    return plan


def _run_job(args):
    cfg, s, c, n = args
    return _run_chunk(cfg, s, c, n)


def run_trials(cfg: SimConfig, workers: int = 1) -> MonteCarloReport:
    """Run the configured SNR sweep; bit-identical for any ``workers``."""
    if cfg.trials_per_snr < 1:
        raise DomainError("trials_per_snr must be positive")
    plan = _chunk_plan(cfg)
    jobs = [(cfg, s, c, n) for s, c, n in plan]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]

    records = []
    for s, snr_db in enumerate(cfg.snr_db):
        parts = [res for (si, _, _), res in zip(plan, results) if si == s]
        records.append(_summarize(snr_db, parts, cfg))
    div, comp = estimate_exponents(records)
    return MonteCarloReport(cfg, records, div, comp, cfg.target_diversity(), cfg.resolved_radius_z())


def _summarize(snr_db, parts, cfg) -> SnrRecord:
    errors = np.concatenate([p["errors"] for p in parts])
    nodes = np.concatenate([p["nodes"] for p in parts])
    n = errors.size
    k = int(errors.sum())
    ci = stats.binomtest(k, n).proportion_ci(0.95, method="wilson")
    q50, q90, q99 = np.quantile(nodes, [0.5, 0.9, 0.99])
    energy = sum(p["energy"] * p["n"] for p in parts) / n
    counts = None
    if parts[0]["counts"] is not None:
        counts = np.sum([p["counts"] for p in parts], axis=0).tolist()
    return SnrRecord(
        snr_db=snr_db,
        pam_levels=parts[0]["pam_levels"],
        trials=n,
        errors=k,
        halt_events=int(sum(p["halted"].sum() for p in parts)),
        empty_sphere_events=int(sum(p["empty"].sum() for p in parts)),
        out_of_sphere_events=int(sum(p["outside"].sum() for p in parts)),
        error_rate=k / n,
        error_rate_ci=(float(ci.low), float(ci.high)),
        nodes_q50=float(q50),
        nodes_q90=float(q90),
        nodes_q99=float(q99),
        nodes_max=int(nodes.max()),
        nodes_mean=float(nodes.mean()),
        node_budget=parts[0]["budget"],
        mean_symbol_energy=float(energy),
        selection_counts=counts,
    )


def _fit(x, y, reason_if_short):
    if len(x) < 3:
        return ExponentEstimate(None, None, len(x), True, reason_if_short)
    fit = stats.linregress(x, y)
    return ExponentEstimate(float(fit.slope), float(fit.stderr), len(x), False)


def estimate_exponents(records) -> tuple[ExponentEstimate, ExponentEstimate]:
    """Least-squares slopes of ``-log10 P_e`` and ``log10 q99(nodes)``
    against ``log10 SNR``.

    Only SNR points with at least ``MIN_ERRORS_FOR_SLOPE`` errors enter the
    diversity fit; fewer than three such points yields a flagged estimate.
    """
    recs = [r if isinstance(r, SnrRecord) else SnrRecord(**r) for r in records]
    good = [r for r in recs if r.errors >= MIN_ERRORS_FOR_SLOPE and r.errors < r.trials]
    div = _fit([r.snr_db / 10 for r in good], [-math.log10(r.error_rate) for r in good],
               f"fewer than 3 SNR points with >= {MIN_ERRORS_FOR_SLOPE} errors")
    pos = [r for r in recs if r.nodes_q99 > 0]
    comp = _fit([r.snr_db / 10 for r in pos], [math.log10(r.nodes_q99) for r in pos],
                "fewer than 3 SNR points with positive node quantiles")
    return div, comp
