"""Structure search: fit the single-qubit slots of SQiSW structures to a target.

The learner is a seeded multi-start L-BFGS on the circuit error with an
analytic gradient (environment tensors contracted down to each slot).
Every job draws its own RNG stream from ``(seed, N, structure index,
restart)``, so reports do not depend on the order jobs finish in.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from . import matcore as mc
from .circuit import Circuit, Structure, embed, instantiate, num_params, slot_layout
from .errors import NotFound


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 10
    max_iterations: int = 3000
    epsilon: float = 1e-6
    seed: int = 0
    haar_samples: int = 100
    threads: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


def u1_batch(params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stacked u1 matrices ``(S, 2, 2)`` and partials ``(S, 3, 2, 2)`` for rows (theta, phi, lam)."""
    th, ph, la = np.asarray(params, dtype=float).reshape(-1, 3).T
    c, s = np.cos(th / 2), np.sin(th / 2)
    ep, em = np.exp(0.5j * (ph + la)), np.exp(0.5j * (ph - la))
    m = np.empty((len(th), 2, 2), dtype=complex)
    m[:, 0, 0], m[:, 0, 1] = c / ep, -s * em.conj()
    m[:, 1, 0], m[:, 1, 1] = s * em, c * ep
    d = np.empty((len(th), 3, 2, 2), dtype=complex)
    d[:, 0, 0, 0], d[:, 0, 0, 1] = -0.5 * s / ep, -0.5 * c * em.conj()
    d[:, 0, 1, 0], d[:, 0, 1, 1] = 0.5 * c * em, -0.5 * s * ep
    # phi and lam act as phases: d/dphi multiplies rows by (-i/2, i/2), d/dlam columns
    rows = np.array([-0.5j, 0.5j])
    d[:, 1] = m * rows[None, :, None]
    d[:, 2] = m * rows[None, None, :]
    return m, d


class StructureModel:
    """E(theta) = 1 - |tr(T† S(theta))| / d for one structure and target, with its gradient."""

    def __init__(self, structure: Structure, target: np.ndarray, n_qubits: int = 3):
        target = np.asarray(target, dtype=complex)
        if target.shape != (2 ** n_qubits,) * 2:
            raise mc.DimensionError(f"target {target.shape} does not fit {n_qubits} qubits")
        self.structure = tuple(tuple(int(q) for q in p) for p in structure)
        self.n = n_qubits
        self.dim = 2 ** n_qubits
        self.target_dag = target.conj().T
        self.slots = slot_layout(self.structure, n_qubits)
        self.n_params = num_params(self.structure, n_qubits)
        self.slot_qubit = np.array([q for _, q in self.slots])
        sq = {p: embed(mc.SQISW, p, n_qubits) for p in set(self.structure)}
        # op sequence: slot index (int) or a fixed embedded SQiSW
        ops: list = list(range(n_qubits))
        k = n_qubits
        for p in self.structure:
            ops += [sq[p], k, k + 1]
            k += 2
        self._ops = ops
        self._slot_pos = [i for i, o in enumerate(ops) if isinstance(o, int)]
        # lift[q][a, b] = embedding of |a><b| on qubit q
        self._lift_basis = np.array([
            [[embed(np.outer(np.eye(2)[a], np.eye(2)[b]), (q,), n_qubits) for b in (0, 1)]
             for a in (0, 1)] for q in range(n_qubits)])
        self._groups = [np.flatnonzero(self.slot_qubit == q) for q in range(n_qubits)]
        self._traces = [_partial_trace_spec(q, n_qubits) for q in range(n_qubits)]

    def _lifted(self, gates: np.ndarray) -> np.ndarray:
        out = np.empty((len(gates), self.dim, self.dim), dtype=complex)
        for q, idx in enumerate(self._groups):
            if len(idx):
                out[idx] = np.einsum("sab,abij->sij", gates[idx], self._lift_basis[q])
        return out

    def _matrices(self, gates: np.ndarray) -> list:
        lifted = self._lifted(gates)
        return [lifted[o] if isinstance(o, int) else o for o in self._ops]

    def trace_and_grad(self, params: np.ndarray) -> tuple[complex, np.ndarray]:
        """``t = tr(T† S(theta))`` and ``dt/dtheta``."""
        gates, grads = u1_batch(params)
        mats = self._matrices(gates)
        prefix = [np.eye(self.dim, dtype=complex)]
        for m in mats:
            prefix.append(m @ prefix[-1])
        t = np.trace(self.target_dag @ prefix[-1])
        back = [None] * len(mats)
        b = self.target_dag
        for i in range(len(mats) - 1, -1, -1):
            back[i] = b
            b = b @ mats[i]
        # t = tr(env_k · lift(G_k)) with env_k = (ops before k) · T† · (ops after k)
        pos = self._slot_pos
        env = np.matmul(np.array([prefix[i] for i in pos]), np.array([back[i] for i in pos]))
        env = env.reshape((len(pos),) + (2,) * (2 * self.n))
        red = np.empty((len(pos), 2, 2), dtype=complex)
        for q, idx in enumerate(self._groups):
            if len(idx):
                red[idx] = np.einsum("s" + self._traces[q].replace("->", "->s"), env[idx])
        dt = np.einsum("sjab,sba->sj", grads, red).ravel()
        return t, dt

    def error(self, params: np.ndarray) -> float:
        t = np.trace(self.target_dag @ self.unitary(params))
        return float(min(1.0, max(0.0, 1 - abs(t) / self.dim)))

    def error_and_grad(self, params: np.ndarray) -> tuple[float, np.ndarray]:
        t, dt = self.trace_and_grad(params)
        a = abs(t)
        g = -np.real(np.conj(t) * dt) / (max(a, 1e-300) * self.dim)
        return float(1 - a / self.dim), g

    def objective(self, params: np.ndarray) -> tuple[float, np.ndarray]:
        """Smooth surrogate 1 - |t|^2 / d^2 (about 2E near a solution)."""
        t, dt = self.trace_and_grad(params)
        f = 1 - abs(t) ** 2 / self.dim ** 2
        return float(f), -2 * np.real(np.conj(t) * dt) / self.dim ** 2

    def unitary(self, params: np.ndarray) -> np.ndarray:
        m = np.eye(self.dim, dtype=complex)
        for op in self._matrices(u1_batch(params)[0]):
            m = op @ m
        return m

    def circuit(self, params: np.ndarray) -> Circuit:
        return instantiate(self.structure, params, self.n)


def _partial_trace_spec(q: int, n: int) -> str:
    """einsum spec keeping row and column index of qubit ``q`` and tracing the rest."""
    rows = [chr(ord("a") + i) for i in range(n)]
    cols = list(rows)
    rows[q], cols[q] = "X", "Y"
    return "".join(rows + cols) + "->XY"


# restart slot reserved for drawing a structure's Haar targets
TARGET_STREAM = 2 ** 32 - 1


def job_rng(seed: int, n_gates: int, structure_index: int, restart: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(n_gates), int(structure_index), int(restart)])


def fit_parameters(structure: Structure, target: np.ndarray, cfg: OptimizerConfig,
                   restart_index: int = 0, structure_index: int = 0,
                   model: StructureModel | None = None) -> tuple[np.ndarray, float]:
    """One seeded restart: uniform init in [-pi, pi), then L-BFGS. Never worse than the init."""
    n = mc.num_qubits(np.shape(target)[0])
    model = model or StructureModel(structure, target, n)
    rng = job_rng(cfg.seed, len(model.structure), structure_index, restart_index)
    x0 = rng.uniform(-np.pi, np.pi, model.n_params)
    e0 = model.error(x0)
    if model.n_params == 0:
        return x0, e0
    res = minimize(model.objective, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": cfg.max_iterations, "ftol": 1e-16, "gtol": 1e-12,
                            "maxcor": 30})
    e = model.error(res.x)
    return (res.x, e) if e <= e0 else (x0, e0)


# -- searches ---------------------------------------------------------------

@dataclass
class StructureRecord:
    n_gates: int
    structure_index: int
    structure: Structure
    best_error: float
    best_params: list
    restarts_used: int
    history: list = field(default_factory=list)   # best-so-far error after each restart / target

    def to_json(self) -> str:
        d = asdict(self)
        d["structure"] = [list(p) for p in self.structure]
        return json.dumps(d, sort_keys=True)


@dataclass
class SearchReport:
    kind: str
    config: OptimizerConfig
    records: list = field(default_factory=list)
    found: StructureRecord | None = None

    def summary(self) -> dict[int, float]:
        """Minimum best error over structures, per N."""
        out: dict[int, float] = {}
        for r in self.records:
            out[r.n_gates] = min(out.get(r.n_gates, np.inf), r.best_error)
        return out

    def table(self) -> str:
        lines = ["   N  structures  best E        log10 E"]
        counts: dict[int, int] = {}
        for r in self.records:
            counts[r.n_gates] = counts.get(r.n_gates, 0) + 1
        for n, e in sorted(self.summary().items()):
            lg = np.log10(e) if e > 0 else -np.inf
            lines.append(f"{n:4d}  {counts[n]:10d}  {e:.6e}  {lg:8.3f}")
        return "\n".join(lines)

    def json_lines(self) -> str:
        return "\n".join(r.to_json() for r in self.records)


StructureSource = Callable[[int], Sequence[Structure]]


def _pruned(n: int) -> Sequence[Structure]:
    from .prune import enumerate_pruned
    return enumerate_pruned(n)


def _toffoli_job(n: int, idx: int, s: Structure, target: np.ndarray,
                 cfg: OptimizerConfig) -> StructureRecord:
    model = StructureModel(s, target)
    best, best_x, history = np.inf, None, []
    used = 0
    for r in range(cfg.restarts):
        x, e = fit_parameters(s, target, cfg, r, idx, model=model)
        used = r + 1
        if e < best:
            best, best_x = e, x
        history.append(best)
        if best <= cfg.epsilon:
            break
    return StructureRecord(n, idx, tuple(s), float(best), [float(v) for v in best_x], used, history)


def _average_job(n: int, idx: int, s: Structure, targets, cfg: OptimizerConfig) -> StructureRecord:
    if targets is None:
        # fresh Haar targets per structure, from their own stream
        rng = job_rng(cfg.seed, n, idx, TARGET_STREAM)
        targets = [mc.haar_random_unitary(8, rng) for _ in range(cfg.haar_samples)]
    errors, history = [], []
    for t_idx, u in enumerate(targets):
        model = StructureModel(s, u)
        min_d = np.inf
        for r in range(cfg.restarts):
            # the restart stream is offset by the target so targets do not share inits
            _, e = fit_parameters(s, u, cfg, t_idx * cfg.restarts + r, idx, model=model)
            if e < min_d:
                min_d = e
        errors.append(min_d)
        history.append(float(np.mean(errors)))
    avg = float(np.mean(errors))
    return StructureRecord(n, idx, tuple(s), avg, [float(e) for e in errors], cfg.restarts, history)


def _run(kind: str, job, n_min: int, n_max: int, target, cfg: OptimizerConfig,
         structures: StructureSource | None, progress) -> SearchReport:
    if n_min < 1 or n_max < n_min:
        raise ValueError("need 1 <= n_min <= n_max")
    structures = structures or _pruned
    report = SearchReport(kind, cfg)
    for n in range(n_min, n_max + 1):
        items = list(enumerate(structures(n)))
        if cfg.threads > 1:
            with ThreadPoolExecutor(cfg.threads) as pool:
                recs = list(pool.map(lambda it: job(n, it[0], it[1], target, cfg), items))
        else:
            recs = []
            for idx, s in items:
                recs.append(job(n, idx, s, target, cfg))
                if recs[-1].best_error <= cfg.epsilon:
                    break
        # keep everything up to the first success in structure order
        for rec in recs:
            report.records.append(rec)
            if progress:
                progress(rec)
            if rec.best_error <= cfg.epsilon:
                report.found = rec
                return report
    raise NotFound(report)


def toffoli_search(n_min: int, n_max: int, cfg: OptimizerConfig = OptimizerConfig(),
                   structures: StructureSource | None = None, progress=None) -> SearchReport:
    """First structure (N ascending, pruned order) with a restart reaching ``E <= epsilon`` for Toffoli.

    Raises :class:`NotFound` carrying the full report when ``n_max`` is exhausted.
    """
    return _run("toffoli", _toffoli_job, n_min, n_max, mc.TOFFOLI, cfg, structures, progress)


def average_error_search(n_min: int, n_max: int, cfg: OptimizerConfig = OptimizerConfig(),
                         structures: StructureSource | None = None, progress=None,
                         targets: Sequence[np.ndarray] | None = None) -> SearchReport:
    """First structure whose mean best-of-restarts error over Haar targets is ``<= epsilon``.

    ``targets`` replaces the ``cfg.haar_samples`` Haar draws made per structure.
    """
    return _run("average", _average_job, n_min, n_max, targets, cfg, structures, progress)


def fixed_structures(*structures: Structure) -> StructureSource:
    """Restrict a search to the given structures at their own gate counts."""
    by_n: dict[int, list] = {}
    for s in structures:
        by_n.setdefault(len(s), []).append(tuple(tuple(p) for p in s))
    return lambda n: by_n.get(n, [])


def gradient_check(model: StructureModel, points: Iterable[np.ndarray], step: float = 1e-6) -> float:
    """Worst relative gap between the analytic gradient of E and central differences."""
    worst = 0.0
    for x in points:
        _, g = model.error_and_grad(x)
        fd = np.empty_like(g)
        for i in range(len(x)):
            e = np.zeros_like(x)
            e[i] = step
            fd[i] = (model.error(x + e) - model.error(x - e)) / (2 * step)
        worst = max(worst, float(np.max(np.abs(g - fd)) / max(np.max(np.abs(fd)), 1e-12)))
    return worst
