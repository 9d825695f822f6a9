"""Executable checks of the core inequalities.

Discrete checks are exact-arithmetic statements (failures indicate bugs, not
numerics); continuous checks carry explicit quadrature error bars and use the
three-verdict scheme pass / pass-within-error / fail, where fail means a
margin fell below minus its own error estimate.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .constant import LiYauConstantResult, SearchSpec, constant_for
from .fields import Extension, GridField, QuadratureSpec
from .fraclap import dt_log_u, frac_laplacian_point, solve_fractional
from .markov import MarkovChain, neg_L_log, solve_markov, transition_matrix
from .ops import JumpKernel, psi_upsilon_continuous, psi_upsilon_discrete, upsilon
from .singular import QuadResult
from .stable import StableDensityProfile

REPORT_SCHEMA = "liyau-report v1"

# exact discrete inequalities are allowed this much rounding slack
EXACT_TOL = 1e-12
REDUCTION_TOL = 1e-10


@dataclass
class VerificationReport:
    """Append-only margin collection with a three-way verdict."""

    name: str
    params: dict = dc_field(default_factory=dict)
    seed: int | None = None
    samples: list = dc_field(default_factory=list)  # (margin, error) pairs
    runtime: float = 0.0

    def add_sample(self, margin: float, error: float = 0.0):
        self.samples.append((float(margin), float(error)))

    @property
    def min_margin(self) -> float | None:
        if not self.samples:
            return None
        return min(m for m, _ in self.samples)

    @property
    def verdict(self) -> str:
        worst = "pass"
        for m, e in self.samples:
            if m < -e:
                return "fail"
            if m < 0:
                worst = "pass-within-error"
        return worst

    def to_json_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "check": self.name,
            "params": self.params,
            "seed": self.seed,
            "n_samples": len(self.samples),
            "min_margin": self.min_margin,
            "verdict": self.verdict,
            "runtime_s": self.runtime,
        }


# ---- discrete: the key inequality and the reduction principle --------------

def key_inequality_margin_discrete(H, f, kernel: JumpKernel, nu_weights,
                                   x: int) -> float:
    """LHS - RHS of the averaging inequality at state x.

    With Pf(z) = sum_y H(z,y) f(y) nu_y, the inequality bounds
    Psi_Upsilon(log Pf)(x) Pf(x) by the nu-average of
    Psi_Upsilon(log H(., y))(x) H(x,y) f(y). Exact in exact arithmetic.
    """
    if kernel.kind != "discrete":
        raise ValueError("discrete kernel required")
    H = np.asarray(H, dtype=float)
    f = np.asarray(f, dtype=float)
    nu = np.asarray(nu_weights, dtype=float)
    if np.any(H <= 0) or np.any(f <= 0) or np.any(nu <= 0):
        raise ValueError("H, f, and nu_weights must be positive")
    n = kernel.n_states
    if H.ndim != 2 or H.shape[0] != n:
        raise ValueError(f"H must have {n} rows")
    if f.shape != (H.shape[1],) or nu.shape != (H.shape[1],):
        raise ValueError("f and nu_weights must match H's atom count")
    if not 0 <= x < n:
        raise IndexError(f"state {x} outside 0..{n - 1}")

    w = kernel.rates[x].copy()
    w[x] = 0.0
    logH = np.log(H)
    per_atom = w @ upsilon(logH - logH[x])  # Psi_Upsilon(log H(., y))(x)
    lhs = float(np.dot(per_atom, H[x] * f * nu))
    Pf = H @ (f * nu)
    rhs = psi_upsilon_discrete(np.log(Pf), kernel, x) * Pf[x]
    return lhs - rhs


def reduction_theorem_check_discrete(chain: MarkovChain, u0,
                                     t: float) -> VerificationReport:
    """Envelope check: -L log u <= max_y -L log p(t,.,y), state by state."""
    start = time.perf_counter()
    P = transition_matrix(chain, t)
    if np.any(P <= 0):
        raise ValueError("zero transition probabilities; chain not irreducible")
    u0 = np.asarray(u0, dtype=float)
    if np.any(u0 <= 0):
        raise ValueError("u0 must be positive")
    # column y of -Q log P is -L log p(t, ., y)
    envelope = np.max(-(chain.Q @ np.log(P)), axis=1)
    sol_quantity = neg_L_log(chain, P @ u0)
    report = VerificationReport(
        name="reduction", params={"n": chain.n, "t": t})
    for m in envelope - sol_quantity:
        report.add_sample(m, REDUCTION_TOL)
    report.runtime = time.perf_counter() - start
    return report


# ---- randomized instance generators ----------------------------------------

def log_uniform(rng: np.random.Generator, lo: float, hi: float, size=None):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


def random_rate_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    """Dense positive rates (complete weighted graph): uniform [0.1, 2]."""
    R = rng.uniform(0.1, 2.0, size=(n, n))
    np.fill_diagonal(R, 0.0)
    return R


def random_connected_chain(rng: np.random.Generator, n: int) -> MarkovChain:
    """Sparse connected chain: random tree plus a few extra edges."""
    R = np.zeros((n, n))
    for i in range(1, n):
        j = int(rng.integers(0, i))
        R[i, j] = rng.uniform(0.1, 2.0)
        R[j, i] = rng.uniform(0.1, 2.0)
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        i, j = rng.integers(0, n, size=2)
        if i != j and R[i, j] == 0:
            R[i, j] = rng.uniform(0.1, 2.0)
            R[j, i] = rng.uniform(0.1, 2.0)
    return MarkovChain.from_rates(R)


def random_key_instance(rng: np.random.Generator, max_states: int = 8,
                        max_atoms: int = 6):
    """(H, f, kernel, nu, x) tuple for one averaging-inequality trial."""
    n = int(rng.integers(2, max_states + 1))
    m = int(rng.integers(1, max_atoms + 1))
    H = log_uniform(rng, 1e-2, 1e2, size=(n, m))
    f = log_uniform(rng, 1e-2, 1e2, size=m)
    nu = rng.uniform(0.1, 2.0, size=m)
    kernel = JumpKernel.discrete(random_rate_matrix(rng, n))
    x = int(rng.integers(0, n))
    return H, f, kernel, nu, x


def sweep_key_inequality(n_samples: int = 1000, seed: int = 0) -> VerificationReport:
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    report = VerificationReport(name="key-inequality",
                                params={"n_samples": n_samples}, seed=seed)
    for _ in range(n_samples):
        H, f, kernel, nu, x = random_key_instance(rng)
        report.add_sample(key_inequality_margin_discrete(H, f, kernel, nu, x),
                          EXACT_TOL)
    report.runtime = time.perf_counter() - start
    return report


def sweep_reduction(n_samples: int = 500, seed: int = 0) -> VerificationReport:
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    report = VerificationReport(name="reduction-sweep",
                                params={"n_samples": n_samples}, seed=seed)
    for _ in range(n_samples):
        n = int(rng.integers(2, 7))
        chain = random_connected_chain(rng, n)
        u0 = log_uniform(rng, 1e-2, 1e2, size=n)
        t = float(log_uniform(rng, 1e-2, 10.0))
        sub = reduction_theorem_check_discrete(chain, u0, t)
        report.add_sample(sub.min_margin, REDUCTION_TOL)
    report.runtime = time.perf_counter() - start
    return report


# ---- continuous: fractional Li-Yau and differential Harnack ----------------

def random_positive_field(rng: np.random.Generator, spacing: float = 0.02,
                          extent: float = 100.0) -> GridField:
    """Positive base level plus 1-3 smooth bumps; constant extension.

    Bump widths stay >= 0.5 so the samples are effectively band-limited on
    the grids used by the solver.
    """
    k = int(round(extent / spacing))
    x = (np.arange(2 * k + 1) - k) * spacing
    vals = np.full(x.shape, float(log_uniform(rng, 1e-2, 1e2)))
    for _ in range(int(rng.integers(1, 4))):
        a = float(log_uniform(rng, 1e-2, 1e2))
        center = rng.uniform(-extent / 4.0, extent / 4.0)
        width = float(log_uniform(rng, 0.5, 5.0))
        vals = vals + a * np.exp(-((x - center) / width) ** 2)
    return GridField(spacing, vals, Extension("constant"), positive=True)


def spike_field(spacing: float, extent: float, x0: float = 0.0,
                floor: float = 1e-12, mass: float = 1.0) -> GridField:
    """Near-delta initial datum: one loaded cell on a tiny positive floor."""
    k = int(round(extent / spacing))
    vals = np.full(2 * k + 1, floor)
    i0 = k + int(round(x0 / spacing))
    vals[i0] += mass / spacing
    return GridField(spacing, vals, Extension("constant"), positive=True)


def liyau_margin_on_solution(u: GridField, beta: float, t: float, x: float,
                             profile: StableDensityProfile,
                             quad: QuadratureSpec | None = None,
                             constant: LiYauConstantResult | None = None,
                             u_log: GridField | None = None) -> QuadResult:
    const = constant if constant is not None else constant_for(profile)
    logu = u_log if u_log is not None else u.log()
    lap = frac_laplacian_point(logu, beta, x, quad=quad)
    return QuadResult(const.value / t - lap.value,
                      const.error / t + lap.error, lap.diverged)


def fractional_liyau_margin(u0: GridField, beta: float, t: float, x: float,
                            profile: StableDensityProfile,
                            quad: QuadratureSpec | None = None,
                            constant: LiYauConstantResult | None = None) -> QuadResult:
    """C_LY/t minus the fractional Laplacian of log u(t, .) at x."""
    u = solve_fractional(u0, beta, t, profile)
    return liyau_margin_on_solution(u, beta, t, x, profile, quad, constant)


def differential_harnack_margin(u0: GridField, beta: float, t: float, x: float,
                                profile: StableDensityProfile,
                                quad: QuadratureSpec | None = None,
                                constant: LiYauConstantResult | None = None) -> QuadResult:
    """d/dt log u - Psi_Upsilon(log u) + C_LY/t at (t, x)."""
    const = constant if constant is not None else constant_for(profile)
    dt_field = dt_log_u(u0, beta, t, profile)
    dt_val = float(dt_field.eval(x))
    i = int(round(x / dt_field.spacing)) + (dt_field.values.size - 1) // 2
    derr = dt_field.meta["dt_error"]
    dt_err = float(np.max(derr[max(0, i - 1):i + 2]))
    u = solve_fractional(u0, beta, t, profile)
    kernel = JumpKernel.continuous(beta, 1)
    psi = psi_upsilon_continuous(u.log(), kernel, x, quad=quad)
    value = dt_val - psi.value + const.value / t
    error = dt_err + psi.error + const.error / t
    return QuadResult(value, error, psi.diverged)


def sweep_fractional_liyau(profile: StableDensityProfile, n_fields: int,
                           t_grid, x_grid, seed: int = 0,
                           spacing: float = 0.02, extent: float = 100.0,
                           quad: QuadratureSpec | None = None) -> VerificationReport:
    """Margins over seeded initial data and a (t, x) product grid."""
    start = time.perf_counter()
    beta = profile.beta
    const = constant_for(profile)
    rng = np.random.default_rng(seed)
    report = VerificationReport(
        name="fractional-liyau",
        params={"beta": beta, "n_fields": n_fields,
                "t_grid": [float(t) for t in t_grid],
                "x_grid": [float(x) for x in x_grid]},
        seed=seed)
    for _ in range(n_fields):
        u0 = random_positive_field(rng, spacing=spacing, extent=extent)
        for t in t_grid:
            u = solve_fractional(u0, beta, float(t), profile)
            logu = u.log()
            for x in x_grid:
                m = liyau_margin_on_solution(u, beta, float(t), float(x),
                                             profile, quad, const, u_log=logu)
                report.add_sample(m.value, m.error)
    report.runtime = time.perf_counter() - start
    return report


def sweep_dh_consistency(profile: StableDensityProfile, n_points: int = 20,
                         seed: int = 0, spacing: float = 0.02,
                         extent: float = 100.0,
                         t_range: tuple = (0.5, 5.0)) -> VerificationReport:
    """|DH margin - Li-Yau margin| <= combined error at random (t, x).

    The two margins are connected by the logarithmic chain rule; their gap
    measures the stacked quadrature and time-differencing errors, so the
    sample margin recorded here is (combined error) - |gap|.
    """
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    const = constant_for(profile)
    u0 = random_positive_field(rng, spacing=spacing, extent=extent)
    report = VerificationReport(
        name="dh-consistency", params={"beta": profile.beta,
                                       "n_points": n_points}, seed=seed)
    for _ in range(n_points):
        t = float(log_uniform(rng, *t_range))
        x = float(rng.uniform(-0.4 * extent, 0.4 * extent))
        ly = fractional_liyau_margin(u0, profile.beta, t, x, profile,
                                     constant=const)
        dh = differential_harnack_margin(u0, profile.beta, t, x, profile,
                                         constant=const)
        gap = abs(dh.value - ly.value)
        combined = dh.error + ly.error
        report.add_sample(combined - gap, 0.0)
    report.runtime = time.perf_counter() - start
    return report
