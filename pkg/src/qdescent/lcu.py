"""One descent iteration as a linear-combination-of-unitaries circuit.

Registers are laid out flag (1 qubit), select (t1 qubits), working
(ceil(log2 N) qubits), most significant first.  A step runs prepare,
select-controlled factor application, un-prepare, and post-selection of the
all-zero ancillas; the surviving working state is (x - eta*D*x) normalized,
which the classical oracle in :mod:`qdescent.poly` reproduces exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import poly, sim
from .errors import DegenerateStepError, PostselectionError
from .poly import CoefficientSet, Point, TensorDecomposition


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit budget for a problem: select width t1 and working width n_work."""

    t1: int
    n_work: int

    @property
    def total_qubits(self) -> int:
        return 1 + self.t1 + self.n_work

    @classmethod
    def for_problem(cls, flat_count: int, dim: int) -> "RegisterLayout":
        t1 = max(0, math.ceil(math.log2(flat_count))) if flat_count > 1 else 0
        n_work = max(0, math.ceil(math.log2(dim))) if dim > 1 else 0
        return cls(t1=t1, n_work=n_work)


@dataclass(frozen=True)
class PrepareSpec:
    """The prepare stage: beta, the flag rotation v0, the select unitary v,
    and the per-branch signs absorbed into the selected unitaries."""

    beta: float
    v0: np.ndarray
    v: np.ndarray
    signs: np.ndarray


@dataclass(frozen=True)
class IterationOutcome:
    """Result of one circuit iteration."""

    next_point: Point
    success_prob: float
    expected_bernoulli_reps: float
    aa_reps_estimate: int
    raw_state: sim.QState
    label: str  # "continue" | "converged"


@dataclass(frozen=True)
class IterationRecord:
    """One optimizer step: the accepted point plus its diagnostics."""

    iteration: int
    point: Point
    f_value: float
    success_prob: float
    overlap: float | None
    fidelity: float | None
    label: str


def complete_from_first_column(col: np.ndarray) -> np.ndarray:
    """Deterministic unitary completion of a unit first column.

    Gram-Schmidt over the seed sequence (col, e0, e1, ...), dropping seeds
    whose residual falls below 1e-10.
    """
    col = np.asarray(col, dtype=float)
    d = col.shape[0]
    cols = [col / np.linalg.norm(col)]
    for k in range(d):
        if len(cols) == d:
            break
        seed = np.zeros(d)
        seed[k] = 1.0
        # orthogonalize twice: a single pass can leave ~1e-9 residuals when
        # the first column carries entries near sqrt(machine eps)
        for _ in range(2):
            for c in cols:
                seed = seed - (c @ seed) * c
        norm = np.linalg.norm(seed)
        if norm < 1e-10:
            continue
        cols.append(seed / norm)
    if len(cols) != d:
        raise ValueError("could not complete the unitary from its first column")
    return np.column_stack(cols)


def build_prepare(coeffs: CoefficientSet, eta: float) -> PrepareSpec:
    """v0, v, signs, and beta for the prepare stage at a given step size."""
    return _prepare_from_weights(coeffs.c, eta)


def _prepare_from_weights(c: np.ndarray, eta: float) -> PrepareSpec:
    if eta <= 0:
        raise ValueError("eta must be positive")
    c = np.asarray(c, dtype=float)
    weights = eta * np.abs(c)
    total = float(weights.sum())
    beta = 1.0 + total
    a = 1.0 / math.sqrt(beta)
    v0 = complete_from_first_column(np.array([a, math.sqrt((beta - 1.0) / beta)]))
    t1 = RegisterLayout.for_problem(len(c), 1).t1
    dim = 2**t1
    if total == 0.0:
        v = np.eye(dim)
    else:
        first = np.zeros(dim)
        first[: len(c)] = np.sqrt(weights / total)
        v = complete_from_first_column(first)
    signs = np.where(eta * c > 0, -1.0, 1.0)
    return PrepareSpec(beta=beta, v0=v0, v=v, signs=signs)


def _pad_vector(x: np.ndarray, dim: int) -> np.ndarray:
    out = np.zeros(dim, dtype=complex)
    out[: x.shape[0]] = x
    return out


def _pad_operator(a: np.ndarray, dim: int) -> np.ndarray:
    out = np.eye(dim, dtype=complex)
    n = a.shape[0]
    out[:n, :n] = a
    return out


def run_lcu_step(factors: list[np.ndarray], c: np.ndarray, x_vec: np.ndarray,
                 eta: float) -> tuple[np.ndarray, float, sim.QState, PrepareSpec]:
    """Execute one circuit step for explicit factors and weights.

    Returns (post-selected working vector of len(x_vec), success probability,
    pre-post-selection state, prepare spec).  The weights c may come from a
    CoefficientSet or any other real linear combination of the factors.
    """
    x_vec = np.asarray(x_vec, dtype=float)
    n = x_vec.shape[0]
    layout = RegisterLayout.for_problem(len(factors), n)
    dim_work = 2**layout.n_work
    prep = _prepare_from_weights(np.asarray(c, dtype=float), eta)

    q = layout.total_qubits
    full = np.zeros(2**q, dtype=complex)
    full[:dim_work] = _pad_vector(x_vec, dim_work)  # flag=0, select=0 block
    state = sim.QState(q, full)

    select_qubits = list(range(1, 1 + layout.t1))
    work_qubits = list(range(1 + layout.t1, q))

    state = sim.apply_unitary(state, prep.v0, [0])
    if layout.t1 > 0:
        state = sim.apply_controlled(state, prep.v, [0], [1], select_qubits)
    for m, a in enumerate(factors):
        pattern = [1] + [(m >> (layout.t1 - 1 - j)) & 1 for j in range(layout.t1)]
        padded = prep.signs[m] * _pad_operator(np.asarray(a, dtype=complex), dim_work)
        state = sim.apply_controlled(state, padded, [0] + select_qubits, pattern, work_qubits)
    if layout.t1 > 0:
        state = sim.apply_controlled(state, prep.v.conj().T, [0], [1], select_qubits)
    state = sim.apply_unitary(state, prep.v0.conj().T, [0])

    raw = state
    kept, prob = sim.postselect(state, [0] + select_qubits, [0] * (1 + layout.t1))
    prob = min(prob, 1.0)  # rounding can leave the subspace weight a few ulp above 1
    amps = kept.amps
    if np.max(np.abs(amps.imag)) > 1e-10:
        raise ValueError("post-selected state is not real; factors must be real-valued")
    vec = amps.real[:n]
    vec = vec / np.linalg.norm(vec)
    return vec, prob, raw, prep


def _aa_estimate(prob: float) -> int:
    return math.ceil(math.pi / (4.0 * math.asin(math.sqrt(prob))))


def run_iteration(decomp: TensorDecomposition, x: Point, eta: float = 1.0,
                  mode: str = "exact", shots: int | None = None,
                  seed: int | None = None, threshold: float | None = None) -> IterationOutcome:
    """One full circuit iteration from x.

    Exact mode post-selects analytically.  Sampled mode draws the number of
    post-selection successes among ``shots`` Bernoulli repetitions and fails
    when none occur; the collapsed state itself is exact either way.
    """
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "sampled" and (shots is None or shots < 1):
        raise ValueError("sampled mode needs shots >= 1")
    step = x.coords - eta * poly.classical_gradient(decomp, x)
    if np.linalg.norm(step) < 1e-14:
        raise DegenerateStepError("descent step annihilated the point (x == eta*D*x)")
    coeffs = poly.coefficients(decomp, x)
    mats = [f.matrix for f in decomp.flattened_factors()]
    vec, prob, raw, _ = run_lcu_step(mats, coeffs.c, x.coords, eta)
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        successes = rng.binomial(shots, prob)
        if successes == 0:
            raise PostselectionError(f"no post-selection success in {shots} shots (p={prob:.3e})")
    next_point = Point(vec)
    aligned = vec if float(vec @ x.coords) >= 0 else -vec
    label = "converged" if threshold is not None and np.linalg.norm(aligned - x.coords) <= threshold else "continue"
    return IterationOutcome(
        next_point=next_point,
        success_prob=prob,
        expected_bernoulli_reps=1.0 / prob,
        aa_reps_estimate=_aa_estimate(prob),
        raw_state=raw,
        label=label,
    )


def estimate_b(decomp: TensorDecomposition, x: Point, mode: str = "exact",
               shots: int | None = None, seed: int | None = None) -> np.ndarray:
    """Estimate every b_j^a = <x|A_m|x> through the expectation circuit.

    Hadamards put the select register in uniform superposition, each branch
    applies its factor to |x>, and the working register is read against the
    |x><x| projector per select outcome.  Sampled mode draws projector
    frequencies at the given shot count and takes each sign from the exact
    overlap, which the magnitude-only projector cannot provide.
    """
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "sampled" and (shots is None or shots < 1):
        raise ValueError("sampled mode needs shots >= 1")
    kp = decomp.flat_count
    layout = RegisterLayout.for_problem(kp, decomp.dim)
    dim_work = 2**layout.n_work
    xp = _pad_vector(x.coords, dim_work)

    q = layout.t1 + layout.n_work
    full = np.zeros(2**q, dtype=complex)
    full[:dim_work] = xp
    state = sim.QState(q, full)
    select_qubits = list(range(layout.t1))
    work_qubits = list(range(layout.t1, q))
    for s in select_qubits:
        state = sim.apply_unitary(state, sim.HADAMARD, [s])
    mats = [f.matrix for f in decomp.flattened_factors()]
    for m, a in enumerate(mats):
        pattern = [(m >> (layout.t1 - 1 - j)) & 1 for j in range(layout.t1)]
        state = sim.apply_controlled(state, _pad_operator(a, dim_work), select_qubits, pattern, work_qubits)

    rng = np.random.default_rng(seed) if mode == "sampled" else None
    out = np.empty(kp)
    for m in range(kp):
        pattern = [(m >> (layout.t1 - 1 - j)) & 1 for j in range(layout.t1)]
        branch, _ = sim.postselect(state, select_qubits, pattern)
        overlap = complex(xp.conj() @ branch.amps)
        if abs(overlap.imag) > 1e-10:
            raise ValueError("expectation has a non-negligible imaginary part")
        exact = overlap.real
        if mode == "exact":
            out[m] = exact
        else:
            p = min(max(exact * exact, 0.0), 1.0)
            k = rng.binomial(shots, p)
            out[m] = math.copysign(math.sqrt(k / shots), exact)
    return out.reshape(decomp.num_terms, decomp.order_p)


def optimize(decomp: TensorDecomposition, x0: Point, eta: float = 1.0,
             threshold: float = 1e-3, max_iters: int = 100, mode: str = "exact",
             shots: int | None = None, seed: int | None = None,
             noise_eps: float = 0.0, reference: Point | None = None) -> list[IterationRecord]:
    """Iterate the circuit until the sign-aligned step falls below threshold.

    One record per executed iteration.  With noise_eps > 0 the post-selected
    working state is depolarized, purified back to a pure point, and the
    purified point carries the iteration; its fidelity against the exact state
    is recorded.  Overlap columns are filled when a reference point is given.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    records: list[IterationRecord] = []
    x = x0
    layout = RegisterLayout.for_problem(decomp.flat_count, decomp.dim)
    for t in range(1, max_iters + 1):
        step_seed = None if seed is None else seed + t
        outcome = run_iteration(decomp, x, eta, mode, shots, step_seed, threshold)
        y = outcome.next_point.coords
        if float(y @ x.coords) < 0:
            y = -y
        fid = None
        if noise_eps > 0:
            pure = sim.QState(layout.n_work, _pad_vector(y, 2**layout.n_work))
            rho = sim.to_density(pure)
            noisy = sim.depolarize(rho, noise_eps)
            fid = sim.fidelity(rho, noisy)
            recovered = sim.purify(noisy)[: decomp.dim]
            y = recovered / np.linalg.norm(recovered)
            if float(y @ x.coords) < 0:
                y = -y
        moved = float(np.linalg.norm(y - x.coords))
        point = Point(y)
        converged = moved <= threshold
        records.append(IterationRecord(
            iteration=t,
            point=point,
            f_value=poly.evaluate_objective(decomp, point),
            success_prob=outcome.success_prob,
            overlap=None if reference is None else float(y @ reference.coords),
            fidelity=fid,
            label="converged" if converged else "continue",
        ))
        x = point
        if converged:
            break
    return records
