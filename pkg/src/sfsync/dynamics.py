"""Coupled node-state dynamics.

Each node carries a state vector ``x_i`` in R^n and evolves as

    dx_i/dt = f(x_i) + sum_j c_ij * A @ x_j

where the coupling matrix ``C`` has zero row sums (``c_ii = -sum_{j!=i} c_ij``)
and ``A`` is the inner coupling matrix.  ``C`` is either diffusive over the
network edges or built from a node centrality, in which case every entry of
row ``i`` carries ``Cen(i)``.

Integration is forward Euler.  Scalar states with a registry ``f`` run through
the compiled kernel; anything else uses numpy.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from sfsync import kernels
from sfsync.centrality import (betweenness_centrality, closeness_centrality,
                               degree_centrality, pagerank_centrality)
from sfsync.errors import DimensionMismatch, InvalidCoupling, NonFiniteState
from sfsync.graph import Graph, PhaseSnapshot

COUPLING_MODES = ("explicit", "degree", "pagerank", "betweenness", "closeness")
ROW_SUM_TOL = 1e-12


@dataclass
class StateVector:
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[1] < 1:
            raise DimensionMismatch(f"states must be (N, n) with n >= 1, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise NonFiniteState("initial states contain non-finite values")
        self.values = v

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def copy(self) -> "StateVector":
        return StateVector(self.values.copy(), self.t)


def random_states(n_nodes: int, rng: np.random.Generator, dim: int = 1) -> StateVector:
    """I.i.d. uniform states on [-1, 1]."""
    return StateVector(rng.uniform(-1.0, 1.0, size=(n_nodes, dim)))


def sync_error(values: np.ndarray) -> float:
    """``max_{i,j} ||x_i - x_j||_inf``."""
    if values.shape[0] == 0:
        return 0.0
    return float((values.max(axis=0) - values.min(axis=0)).max())


# -- local dynamics --------------------------------------------------------

@dataclass(frozen=True)
class LocalDynamics:
    name: str
    params: dict = field(default_factory=dict)

    # compiled-kernel codes for the scalar fast path
    _KIND = {"zero": 0, "linear_decay": 1, "logistic": 2}

    def __call__(self, x: np.ndarray) -> np.ndarray:
        p = self.params
        if self.name == "zero":
            return np.zeros_like(x)
        if self.name == "linear_decay":
            return -p.get("a", 0.0) * x
        if self.name == "logistic":
            return p.get("r", 1.0) * x * (1.0 - x)
        if self.name == "lorenz":
            if x.shape[1] != 3:
                raise DimensionMismatch("lorenz dynamics need 3-dimensional states")
            s, rho, b = p.get("sigma", 10.0), p.get("rho", 28.0), p.get("beta", 8.0 / 3.0)
            out = np.empty_like(x)
            out[:, 0] = s * (x[:, 1] - x[:, 0])
            out[:, 1] = x[:, 0] * (rho - x[:, 2]) - x[:, 1]
            out[:, 2] = x[:, 0] * x[:, 1] - b * x[:, 2]
            return out
        raise KeyError(self.name)

    @property
    def kernel_code(self):
        return self._KIND.get(self.name)

    @property
    def kernel_param(self) -> float:
        if self.name == "linear_decay":
            return float(self.params.get("a", 0.0))
        if self.name == "logistic":
            return float(self.params.get("r", 1.0))
        return 0.0

    def is_linear(self) -> bool:
        return self.name in ("zero", "linear_decay")


LOCAL_DYNAMICS = ("zero", "linear_decay", "logistic", "lorenz")


def local_dynamics(name: str, **params) -> LocalDynamics:
    if name not in LOCAL_DYNAMICS:
        raise KeyError(f"unknown local dynamics {name!r}; choose from {LOCAL_DYNAMICS}")
    return LocalDynamics(name, dict(params))


# -- coupling --------------------------------------------------------------

@dataclass
class CouplingSpec:
    """Coupling matrix ``C`` (CSR, diagonal included) plus inner matrix ``A``.

    ``literal`` drops the diagonal at integration time, i.e. sums only over
    ``j != i`` after the diagonal has been fixed; the default keeps it, which
    is the form equivalent to diffusive ``sum_j c_ij A (x_j - x_i)``.
    """

    mode: str
    matrix: sp.csr_matrix
    inner: np.ndarray = field(default_factory=lambda: np.eye(1))
    edge_masked: bool = True
    strength: float = 1.0
    literal: bool = False

    def __post_init__(self):
        if self.mode not in COUPLING_MODES:
            raise InvalidCoupling(f"unknown coupling mode {self.mode!r}")
        self.matrix = sp.csr_matrix(self.matrix, dtype=float)
        self.matrix.sort_indices()
        self.inner = np.atleast_2d(np.asarray(self.inner, dtype=float))
        n, m = self.matrix.shape
        if n != m:
            raise DimensionMismatch(f"coupling matrix must be square, got {self.matrix.shape}")
        if self.inner.shape[0] != self.inner.shape[1]:
            raise DimensionMismatch(f"inner coupling must be square, got {self.inner.shape}")
        worst = max_row_sum(self.matrix)
        if worst > ROW_SUM_TOL:
            raise InvalidCoupling(f"row sums must vanish (max |row sum| = {worst:.3e})")

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]

    def effective_matrix(self) -> sp.csr_matrix:
        if not self.literal:
            return self.matrix
        m = self.matrix.tolil(copy=True)
        m.setdiag(0.0)
        return sp.csr_matrix(m)


def max_row_sum(matrix) -> float:
    m = sp.csr_matrix(matrix)
    if m.shape[0] == 0:
        return 0.0
    return float(np.abs(np.asarray(m.sum(axis=1))).max())


def with_zero_row_sums(offdiag) -> sp.csr_matrix:
    """Return ``offdiag`` (diagonal ignored) with ``c_ii = -sum_{j != i} c_ij``."""
    m = sp.csr_matrix(offdiag, dtype=float).tolil(copy=True)
    m.setdiag(0.0)
    m = sp.csr_matrix(m)
    m.eliminate_zeros()
    diag = -np.asarray(m.sum(axis=1)).ravel()
    out = sp.csr_matrix(m + sp.diags(diag))
    out.sort_indices()
    return out


def explicit_coupling(matrix, inner=None, fix_diagonal: bool = False,
                      literal: bool = False) -> CouplingSpec:
    """Wrap a user-supplied ``c_ij`` matrix.  Rows must already sum to zero
    unless ``fix_diagonal`` is set."""
    m = with_zero_row_sums(matrix) if fix_diagonal else sp.csr_matrix(matrix, dtype=float)
    return CouplingSpec("explicit", m, np.eye(1) if inner is None else inner,
                        edge_masked=False, strength=1.0, literal=literal)


def _row_weighted(g: Graph, row_weight: np.ndarray, edge_masked: bool) -> sp.csr_matrix:
    n = g.n_nodes
    if edge_masked:
        indptr, indices = g.undirected_csr()
        data = np.repeat(row_weight, np.diff(indptr))
        off = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    else:
        dense = np.repeat(row_weight[:, None], n, axis=1)
        np.fill_diagonal(dense, 0.0)
        off = sp.csr_matrix(dense)
    return with_zero_row_sums(off)


def build_coupling_from_graph(g: Graph, strength: float = 1.0, inner=None,
                              literal: bool = False) -> CouplingSpec:
    """Diffusive coupling: ``c_ij = strength`` on every undirected edge."""
    if strength <= 0:
        raise InvalidCoupling("strength must be positive")
    m = _row_weighted(g, np.full(g.n_nodes, float(strength)), edge_masked=True)
    return CouplingSpec("explicit", m, np.eye(1) if inner is None else inner,
                        edge_masked=True, strength=strength, literal=literal)


def centrality_vector(g: Graph, mode: str, pagerank_damping: float = 1.0,
                      pagerank_tol: float = 1e-10) -> np.ndarray:
    if mode == "degree":
        return degree_centrality(g)
    if mode == "pagerank":
        return pagerank_centrality(g, damping=pagerank_damping, tol=pagerank_tol)
    if mode == "betweenness":
        return betweenness_centrality(g)
    if mode == "closeness":
        return closeness_centrality(g)
    raise InvalidCoupling(f"unknown centrality mode {mode!r}")


def build_centrality_coupling(g: Graph, mode: str, strength: float = 1.0,
                              edge_masked: bool = True, inner=None,
                              pagerank_damping: float = 1.0,
                              literal: bool = False) -> CouplingSpec:
    """``c_ij = strength * Cen(i)`` for ``j != i`` (on edges only if ``edge_masked``).

    Pagerank defaults to damping 1, the undamped form.
    """
    if strength <= 0:
        raise InvalidCoupling("strength must be positive")
    cen = centrality_vector(g, mode, pagerank_damping=pagerank_damping)
    m = _row_weighted(g, strength * cen, edge_masked)
    return CouplingSpec(mode, m, np.eye(1) if inner is None else inner,
                        edge_masked=edge_masked, strength=strength, literal=literal)


def cap_for_euler(spec: CouplingSpec, h: float, limit: float = 1.0) -> CouplingSpec:
    """Scale the coupling down so that ``h * max_i |c_ii| <= limit``.

    With ``limit = 1`` every Euler update of the coupling term is a convex
    combination of neighbour states (for non-negative off-diagonals), so the
    iteration cannot blow up.  Returns ``spec`` unchanged when already within
    the limit.
    """
    diag = np.abs(spec.matrix.diagonal())
    worst = float(diag.max()) if diag.size else 0.0
    if h * worst <= limit:
        return spec
    factor = limit / (h * worst)
    return dataclasses.replace(spec, matrix=spec.matrix * factor, strength=spec.strength * factor)


# -- integration -----------------------------------------------------------

def _check_dims(states: StateVector, spec: CouplingSpec):
    if states.n_nodes != spec.n_nodes:
        raise DimensionMismatch(f"{states.n_nodes} states for {spec.n_nodes}-node coupling")
    if spec.inner.shape[0] != states.dim:
        raise DimensionMismatch(f"inner coupling is {spec.inner.shape}, states have dim {states.dim}")


def _rhs(x, c, inner, f):
    return f(x) + (c @ x) @ inner.T


def step(states: StateVector, spec: CouplingSpec, f: LocalDynamics, h: float) -> StateVector:
    """One forward-Euler step."""
    if h <= 0:
        raise ValueError("step size must be positive")
    _check_dims(states, spec)
    x = states.values
    new = x + h * _rhs(x, spec.effective_matrix(), spec.inner, f)
    _raise_if_nonfinite(new, 0)
    return StateVector(new, states.t + h)


def _raise_if_nonfinite(x, st):
    bad = ~np.isfinite(x)
    if bad.any():
        node = int(np.argwhere(bad)[0][0])
        raise NonFiniteState(f"state diverged at step {st}, node {node}", step=st, node=node)


@dataclass
class SyncResult:
    final: StateVector
    step: np.ndarray
    time: np.ndarray
    sync_error: np.ndarray
    state_mean: np.ndarray
    state_min: np.ndarray
    state_max: np.ndarray

    def rows(self):
        """Trajectory summary rows ``(step, time, sync_error, mean, min, max)``."""
        return list(zip(self.step.tolist(), self.time.tolist(), self.sync_error.tolist(),
                        self.state_mean.tolist(), self.state_min.tolist(), self.state_max.tolist()))


def _use_kernel(states, spec, f):
    return states.dim == 1 and f.kernel_code is not None


def integrate(states: StateVector, spec: CouplingSpec, f: LocalDynamics, h: float,
              steps: int, record_every: int = 50) -> SyncResult:
    """Run ``steps`` Euler steps, sampling summary statistics every ``record_every``."""
    if h <= 0:
        raise ValueError("step size must be positive")
    if steps < 0 or record_every < 1:
        raise ValueError("steps must be >= 0 and record_every >= 1")
    _check_dims(states, spec)
    c = spec.effective_matrix()
    x = states.values.copy()
    t0 = states.t
    fast = _use_kernel(states, spec, f)
    if fast:
        xs = x[:, 0].copy()
        indptr = c.indptr.astype(np.int64)
        indices = c.indices.astype(np.int64)
        data = c.data.astype(float)
        inner = float(spec.inner[0, 0])
    samples = [(0, x)]
    done = 0
    while done < steps:
        chunk = min(record_every, steps - done)
        if fast:
            bad_step, bad_node = kernels.euler_csr(indptr, indices, data, xs, float(h), chunk,
                                                   f.kernel_code, f.kernel_param, inner)
            if bad_step >= 0:
                st = done + bad_step
                raise NonFiniteState(f"state diverged at step {st}, node {bad_node}",
                                     step=st, node=int(bad_node))
            x = xs[:, None].copy()
        else:
            for k in range(chunk):
                x = x + h * _rhs(x, c, spec.inner, f)
                _raise_if_nonfinite(x, done + k)
        done += chunk
        samples.append((done, x))
    steps_arr = np.array([s for s, _ in samples], dtype=np.int64)
    return SyncResult(
        final=StateVector(x, t0 + steps * h),
        step=steps_arr,
        time=t0 + steps_arr * h,
        sync_error=np.array([sync_error(v) for _, v in samples]),
        state_mean=np.array([float(v.mean()) for _, v in samples]),
        state_min=np.array([float(v.min()) for _, v in samples]),
        state_max=np.array([float(v.max()) for _, v in samples]),
    )


def run_sync(snapshot: PhaseSnapshot, spec: CouplingSpec, f: LocalDynamics, h: float = 0.01,
             steps: int = 5000, record_every: int = 50) -> SyncResult:
    """Synchronize the states held by ``snapshot`` over its frozen topology."""
    if snapshot.states is None:
        raise DimensionMismatch("snapshot carries no states")
    states = snapshot.states
    if not isinstance(states, StateVector):
        states = StateVector(states)
    if states.n_nodes != snapshot.graph.n_nodes:
        raise DimensionMismatch(f"{states.n_nodes} states for {snapshot.graph.n_nodes} nodes")
    return integrate(states, spec, f, h, steps, record_every)
