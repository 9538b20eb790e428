"""Core model objects: parameters, population partition, random environment,
trajectories, and the single-site transition probability.

The system is a collection of ``n`` binary chains evolving in discrete time.
Chain ``i`` fires at time ``t`` with probability

    mu + (1 - lam) * ( sum_{j excitatory} theta[i, j] * x[j]
                     + sum_{j inhibitory} theta[i, j] * (1 - x[j]) ) / n

given the previous configuration ``x``, where ``theta`` is a fixed directed
graph whose edges are i.i.d. Bernoulli(p).  Sites are 0-based throughout the
code; the excitatory population is always the prefix ``0 .. size_plus - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .rng import Stream, derive_key


@dataclass(frozen=True)
class ModelParams:
    """Parameter vector (mu, lam, p, r_plus) plus system size n.

    Constructible parameters satisfy the relaxed constraints
    ``0 <= mu <= lam <= 1``, ``lam > 0``, ``0 <= p <= 1``, ``0 < r_plus < 1``;
    degenerate corners (p in {0, 1}, mu = 0 or mu = lam) are legal fixtures
    for simulation but are rejected by inference entry points, which call
    :meth:`require_admissible`.
    """

    mu: float
    lam: float
    p: float
    r_plus: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.r_plus < 1.0:
            raise ValueError(f"r_plus must lie in (0, 1), got {self.r_plus}")
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"lam must lie in (0, 1], got {self.lam}")
        if not 0.0 <= self.mu <= self.lam:
            raise ValueError(f"mu must lie in [0, lam], got mu={self.mu}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    @property
    def beta(self) -> float:
        """Spontaneous firing probability mu / lam, in [0, 1]."""
        return self.mu / self.lam

    @property
    def r_minus(self) -> float:
        return 1.0 - self.r_plus

    @property
    def admissible(self) -> bool:
        """True when the parameters lie in the open set where inference works."""
        return 0.0 < self.mu < self.lam < 1.0 and 0.0 < self.p < 1.0

    def require_admissible(self) -> None:
        if not self.admissible:
            raise ValueError(
                "parameters are not admissible: need 0 < mu < lam < 1 and 0 < p < 1, "
                f"got mu={self.mu}, lam={self.lam}, p={self.p}"
            )


@dataclass(frozen=True)
class Partition:
    """Split of the n chains into an excitatory prefix and inhibitory suffix.

    Sites 0 .. size_plus-1 are excitatory, the rest inhibitory.  The realized
    fractions deviate from the target by at most 1/n (ceiling rule).
    """

    n: int
    size_plus: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.size_plus <= self.n:
            raise ValueError(f"size_plus out of range: {self.size_plus}")

    @property
    def size_minus(self) -> int:
        return self.n - self.size_plus

    def is_excitatory(self, j: int) -> bool:
        return j < self.size_plus

    def sign_vector(self) -> np.ndarray:
        """+1 on excitatory sites, -1 on inhibitory sites."""
        s = np.ones(self.n)
        s[self.size_plus:] = -1.0
        return s


def build_partition(n: int, r_plus: float) -> Partition:
    """Canonical prefix partition with ceil(r_plus * n) excitatory chains."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 < r_plus < 1.0:
        raise ValueError(f"r_plus must lie in (0, 1), got {r_plus}")
    return Partition(n=n, size_plus=ceil(r_plus * n))


@dataclass(frozen=True)
class Environment:
    """Realized directed interaction graph together with its partition.

    ``theta[i, j] = 1`` means the directed edge j -> i is present, i.e. chain
    j influences chain i.  ``p`` and ``seed`` record how the matrix was
    sampled (for serialization); they are NaN / 0 for hand-built fixtures.
    """

    theta: np.ndarray
    partition: Partition
    p: float = float("nan")
    seed: int = 0

    def __post_init__(self):
        theta = np.ascontiguousarray(self.theta, dtype=np.uint8)
        n = self.partition.n
        if theta.shape != (n, n):
            raise ValueError(f"theta must be {n}x{n}, got {theta.shape}")
        if theta.max(initial=0) > 1:
            raise ValueError("theta entries must be 0 or 1")
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)

    @property
    def n(self) -> int:
        return self.partition.n


def sample_environment(params: ModelParams, seed: int) -> Environment:
    """Draw theta with i.i.d. Bernoulli(p) entries, row-major draw order.

    Identical (params, seed) pairs produce bit-identical matrices.
    """
    n = params.n
    stream = Stream(derive_key(seed, "environment"))
    u = stream.uniforms(n * n)
    theta = (u < params.p).astype(np.uint8).reshape(n, n)
    return Environment(
        theta=theta,
        partition=build_partition(n, params.r_plus),
        p=params.p,
        seed=seed,
    )


def transition_probability(env: Environment, params: ModelParams,
                           x, i: int) -> float:
    """Firing probability of site i given the previous configuration x."""
    n = env.n
    if not 0 <= i < n:
        raise IndexError(f"site index {i} out of range for n={n}")
    x = np.asarray(x)
    if x.shape != (n,):
        raise ValueError(f"x must have length {n}, got shape {x.shape}")
    sp = env.partition.size_plus
    row = env.theta[i]
    active_plus = int(row[:sp] @ x[:sp])
    silent_minus = int(row[sp:].sum()) - int(row[sp:] @ x[sp:])
    return params.mu + (1.0 - params.lam) * ((active_plus + silent_minus) / n)


def interaction_kernel(env: Environment, params: ModelParams):
    """Affine form of the transition probabilities: p(x) = base + coef * (B @ x).

    ``B`` is theta with inhibitory columns negated; ``base`` absorbs mu and
    the constant inhibitory contribution.  Entries of ``B @ x`` are exact
    small integers for binary x, so the result does not depend on summation
    order.
    """
    sp = env.partition.size_plus
    theta = env.theta.astype(np.float64)
    coef = (1.0 - params.lam) / env.n
    base = params.mu + coef * theta[:, sp:].sum(axis=1)
    signed = theta
    signed[:, sp:] *= -1.0
    return base, signed, coef


def transition_probabilities(env: Environment, params: ModelParams,
                             x) -> np.ndarray:
    """Vector of firing probabilities for all sites given configuration x."""
    base, signed, coef = interaction_kernel(env, params)
    return base + coef * (signed @ np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class Trajectory:
    """Binary observation matrix, sites along rows and time along columns.

    Column ``t`` (0-based) holds the configuration at observation time t+1.
    """

    x: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.uint8)
        if x.ndim != 2:
            raise ValueError(f"trajectory must be 2-D, got shape {x.shape}")
        if x.max(initial=0) > 1:
            raise ValueError("trajectory entries must be 0 or 1")
        x.flags.writeable = False
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def t_len(self) -> int:
        return self.x.shape[1]

    def counts(self) -> np.ndarray:
        """Cumulative per-site signal counts Z, int64, shape (n, t_len)."""
        return np.cumsum(self.x, axis=1, dtype=np.int64)

    def prefix(self, t_len: int) -> "Trajectory":
        """View of the first t_len observation times."""
        if not 1 <= t_len <= self.t_len:
            raise ValueError(f"prefix length {t_len} out of range")
        return Trajectory(self.x[:, :t_len])


def save_environment(env: Environment, path) -> None:
    """Write an environment in the text format `n size_plus p seed` + 0/1 rows."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{env.n} {env.partition.size_plus} {env.p!r} {env.seed}\n")
        for row in env.theta:
            fh.write("".join("1" if v else "0" for v in row))
            fh.write("\n")


def save_trajectory(traj: Trajectory, path_or_file) -> None:
    """Write a trajectory as sparse CSV: only x = 1 cells, columns t,i,x.

    Times and sites are 1-based in the file.  A leading comment line records
    the matrix dimensions, which the sparse rows alone cannot recover.
    """
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", encoding="ascii") if own else path_or_file
    try:
        fh.write(f"# n={traj.n} t_len={traj.t_len}\n")
        fh.write("t,i,x\n")
        sites, times = np.nonzero(traj.x)
        for t, i in sorted(zip(times.tolist(), sites.tolist())):
            fh.write(f"{t + 1},{i + 1},1\n")
    finally:
        if own:
            fh.close()


def load_trajectory(path) -> Trajectory:
    """Read a trajectory written by :func:`save_trajectory`."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if not header.startswith("# n="):
            raise ValueError(f"missing dimension header in {path}")
        parts = dict(kv.split("=") for kv in header[2:].split())
        n, t_len = int(parts["n"]), int(parts["t_len"])
        if fh.readline().strip() != "t,i,x":
            raise ValueError(f"missing column header in {path}")
        x = np.zeros((n, t_len), dtype=np.uint8)
        for line in fh:
            line = line.strip()
            if not line:
                continue
            t, i, value = (int(v) for v in line.split(","))
            if value:
                x[i - 1, t - 1] = 1
    return Trajectory(x)


def load_environment(path) -> Environment:
    """Read an environment written by :func:`save_environment`."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ValueError(f"bad environment header in {path}")
        n, size_plus = int(header[0]), int(header[1])
        p, seed = float(header[2]), int(header[3])
        theta = np.zeros((n, n), dtype=np.uint8)
        for i in range(n):
            line = fh.readline().strip()
            if len(line) != n or set(line) - {"0", "1"}:
                raise ValueError(f"bad environment row {i} in {path}")
            theta[i] = np.frombuffer(line.encode("ascii"), dtype=np.uint8) - ord("0")
    return Environment(theta=theta, partition=Partition(n, size_plus), p=p, seed=seed)
