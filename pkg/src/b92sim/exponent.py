"""Large-deviation exponent for sampling with two nonorthogonal qubit bases.

The estimation problem: M = M0 + M1 qubits in an arbitrary permuted joint
state, the first M0 measured in one orthonormal basis and the rest in
another; the probability of observing "1"-outcome fractions (delta0, delta1)
decays as poly(M) * exp(-M * min R) unless a single-qubit state sigma
reproduces both outcome means.  R is a sum of relative entropies over a
candidate decomposition of the qubits into singlet pairs (fraction 2*k_frac)
and a pure-product remainder |n>.

R is computed in nats (so exp(-M*R) is literal) and convertible to bits.
For fixed (k_frac, n) the candidate distributions minimizing R solve a
convex program whose entropic dual is a smooth concave function of four
multipliers; min_exponent scans (k_frac, n) and solves that dual by damped
Newton, then polishes with local simplex search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError, ParameterError

LN2 = math.log(2.0)


def _as_basis(mat) -> np.ndarray:
    """Validate a 2x2 array whose rows are an orthonormal ket pair."""
    b = np.asarray(mat, dtype=complex)
    if b.shape != (2, 2):
        raise ParameterError("a basis is a 2x2 array of row kets")
    gram = b @ b.conj().T
    if np.max(np.abs(gram - np.eye(2))) > 1e-12:
        raise ParameterError("basis rows are not orthonormal to 1e-12")
    out = b.copy()
    out.setflags(write=False)
    return out


def basis_from_bloch(theta: float, phi: float = 0.0) -> np.ndarray:
    """Basis whose outcome-1 ket points along Bloch angles (theta, phi)."""
    one = np.array([math.cos(theta / 2.0), math.sin(theta / 2.0) * np.exp(1j * phi)])
    zero = np.array([-math.sin(theta / 2.0) * np.exp(-1j * phi), math.cos(theta / 2.0)])
    return np.stack([zero, one])


def bloch_vector(ket: np.ndarray) -> np.ndarray:
    a0, a1 = complex(ket[0]), complex(ket[1])
    cross = a0.conjugate() * a1
    return np.array([2.0 * cross.real, 2.0 * cross.imag, abs(a0) ** 2 - abs(a1) ** 2])


def ket_from_bloch(n: np.ndarray) -> np.ndarray:
    nx, ny, nz = (float(v) for v in n)
    theta = math.acos(max(-1.0, min(1.0, nz)))
    phi = math.atan2(ny, nx)
    return np.array([math.cos(theta / 2.0), math.sin(theta / 2.0) * np.exp(1j * phi)])


@dataclass(frozen=True)
class TwoBasisSampling:
    """Instance of the two-basis estimation problem.

    ``basis0``/``basis1`` are 2x2 arrays whose rows are the outcome kets
    |b,0>, |b,1>.  ``m0``/``m1`` count qubits measured in each basis and
    ``delta0``/``delta1`` are the observed "1" fractions (real-valued; only
    the exact i.i.d. oracle requires integral counts).
    """

    basis0: np.ndarray
    basis1: np.ndarray
    m0: int
    m1: int
    delta0: float
    delta1: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "basis0", _as_basis(self.basis0))
        object.__setattr__(self, "basis1", _as_basis(self.basis1))
        if self.m0 < 1 or self.m1 < 1:
            raise ParameterError("m0 and m1 must be positive")
        for d in (self.delta0, self.delta1):
            if not 0.0 <= d <= 1.0:
                raise ParameterError("outcome fractions must lie in [0, 1]")

    @property
    def m_total(self) -> int:
        return self.m0 + self.m1

    def kets(self) -> np.ndarray:
        """(2, 2, 2) array of kets indexed [b, j]."""
        return np.stack([self.basis0, self.basis1])

    def count_fractions(self) -> np.ndarray:
        """(2, 2) array m[b, j] of observed count fractions n_{b,j} / M."""
        m = self.m_total
        w0, w1 = self.m0 / m, self.m1 / m
        return np.array(
            [
                [w0 * (1.0 - self.delta0), w0 * self.delta0],
                [w1 * (1.0 - self.delta1), w1 * self.delta1],
            ]
        )

    def weight_entropy(self) -> float:
        """Entropy of the basis-choice weights, in nats."""
        m = self.m_total
        out = 0.0
        for mb in (self.m0, self.m1):
            w = mb / m
            out -= w * math.log(w)
        return out


@dataclass(frozen=True)
class ExponentPoint:
    """Candidate decomposition entering the exponent.

    ``q`` is the joint distribution of paired outcomes indexed
    [b, b', j, j']; ``p`` the remainder outcome distribution [b, j];
    ``k_frac`` the paired fraction k/M and ``bloch_n`` the remainder
    direction.  The singlet weights are (1 - 2 k_frac, k_frac, k_frac).
    """

    k_frac: float
    bloch_n: np.ndarray
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self) -> None:
        if not 0.0 <= self.k_frac <= 0.5:
            raise ParameterError("k_frac must lie in [0, 1/2]")
        n = np.asarray(self.bloch_n, dtype=float)
        if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ParameterError("bloch_n must be a unit 3-vector")
        q = np.asarray(self.q, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if q.shape != (2, 2, 2, 2) or p.shape != (2, 2):
            raise ParameterError("q must be (2,2,2,2) and p (2,2)")
        for arr, name in ((q, "q"), (p, "p")):
            if np.any(arr < -1e-15):
                raise ParameterError(f"{name} has negative entries")
            if abs(arr.sum() - 1.0) > 1e-12:
                raise ParameterError(f"{name} does not sum to 1")
        for arr, name in ((n, "bloch_n"), (q, "q"), (p, "p")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def xi1(self) -> float:
        return 1.0 - 2.0 * self.k_frac

    def pair_marginal_first(self) -> np.ndarray:
        return self.q.sum(axis=(1, 3))

    def pair_marginal_second(self) -> np.ndarray:
        return self.q.sum(axis=(0, 2))

    def implied_count_fractions(self) -> np.ndarray:
        xi2 = self.k_frac
        return (
            self.xi1 * self.p
            + xi2 * self.pair_marginal_first()
            + xi2 * self.pair_marginal_second()
        )


@dataclass(frozen=True)
class ExponentSolution:
    point: ExponentPoint
    r_nats: float
    r_bits: float
    converged: bool


@dataclass(frozen=True)
class SolverOptions:
    k_grid: int = 50
    sphere_points: int = 200
    restarts: int = 5
    seed: int = 0
    newton_iters: int = 80
    grad_tol: float = 1e-11


def singlet_pair_probs(problem: TwoBasisSampling) -> np.ndarray:
    """Reference pair distribution beta[b, b', j, j'] = S / 4, where S is the
    probability of outcomes (j, j') when a singlet pair is measured in bases
    (b, b')."""
    kets = problem.kets()
    out = np.empty((2, 2, 2, 2))
    for b in (0, 1):
        for bp in (0, 1):
            for j in (0, 1):
                for jp in (0, 1):
                    u = kets[b, j].conj()
                    v = kets[bp, jp].conj()
                    amp = (u[0] * v[1] - u[1] * v[0]) / math.sqrt(2.0)
                    out[b, bp, j, jp] = abs(amp) ** 2 / 4.0
    return out


def remainder_probs(problem: TwoBasisSampling, bloch_n: np.ndarray) -> np.ndarray:
    """Reference remainder distribution alpha[b, j] = |<b,j|n>|^2 / 2."""
    ket_n = ket_from_bloch(np.asarray(bloch_n, dtype=float))
    kets = problem.kets()
    amps = np.einsum("bjk,k->bj", kets.conj(), ket_n)
    return np.abs(amps) ** 2 / 2.0


def _rel_entropy_nats(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0.0
    if np.any(mask & (q <= 0.0)):
        return math.inf
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def _check_count_matching(point: ExponentPoint, problem: TwoBasisSampling) -> None:
    gapv = point.implied_count_fractions() - problem.count_fractions()
    if np.max(np.abs(gapv)) > 1e-8:
        raise DomainError(
            "point does not reproduce the observed counts "
            f"(max deviation {np.max(np.abs(gapv)):.3e})"
        )


def exponent_direct(point: ExponentPoint, problem: TwoBasisSampling) -> float:
    """Exponent in its raw type-counting form, in nats.

    Weight entropy plus the paired and remainder relative-entropy blocks,
    each offset by the log-size of its reference alphabet.
    """
    _check_count_matching(point, problem)
    xi2 = point.k_frac
    xi1 = point.xi1
    r = problem.weight_entropy()
    if xi2 > 0.0:
        r += xi2 * (_rel_entropy_nats(point.q, singlet_pair_probs(problem)) - 2.0 * LN2)
    if xi1 > 0.0:
        alpha_ref = remainder_probs(problem, point.bloch_n)
        r += xi1 * (_rel_entropy_nats(point.p, alpha_ref) - LN2)
    return r


def exponent_decomposed(point: ExponentPoint, problem: TwoBasisSampling) -> float:
    """Exponent regrouped into manifestly nonnegative terms, in nats.

    Algebraically equal to exponent_direct on every count-matching point:
    pair basis-index mutual information, conditional outcome divergences,
    remainder conditional divergence, and the mutual information between
    the decomposition label and the basis index.
    """
    _check_count_matching(point, problem)
    xi2 = point.k_frac
    xi1 = point.xi1
    q = point.q
    p = point.p
    r = 0.0

    if xi2 > 0.0:
        beta_ref = singlet_pair_probs(problem)
        q_bb = q.sum(axis=(2, 3))
        q_b = q_bb.sum(axis=1)
        q_bp = q_bb.sum(axis=0)
        r += xi2 * _rel_entropy_nats(q_bb, np.outer(q_b, q_bp))
        beta_bb = beta_ref.sum(axis=(2, 3))
        for b in (0, 1):
            for bp in (0, 1):
                if q_bb[b, bp] <= 0.0:
                    continue
                cond_q = q[b, bp] / q_bb[b, bp]
                cond_beta = beta_ref[b, bp] / beta_bb[b, bp]
                r += xi2 * q_bb[b, bp] * _rel_entropy_nats(cond_q, cond_beta)

    if xi1 > 0.0:
        alpha_ref = remainder_probs(problem, point.bloch_n)
        p_b = p.sum(axis=1)
        alpha_b = alpha_ref.sum(axis=1)
        for b in (0, 1):
            if p_b[b] <= 0.0:
                continue
            r += xi1 * p_b[b] * _rel_entropy_nats(p[b] / p_b[b], alpha_ref[b] / alpha_b[b])

    # decomposition-label vs basis-index mutual information
    gamma = np.stack(
        [
            xi1 * p.sum(axis=1),
            xi2 * point.pair_marginal_first().sum(axis=1),
            xi2 * point.pair_marginal_second().sum(axis=1),
        ]
    )
    gamma_a = gamma.sum(axis=1)
    gamma_b = gamma.sum(axis=0)
    r += _rel_entropy_nats(gamma, np.outer(gamma_a, gamma_b))
    return r


def bloch_fit_radius(problem: TwoBasisSampling) -> float:
    """Norm of the smallest Bloch vector reproducing both outcome means.

    Infinite when the two outcome kets are collinear on the Bloch sphere but
    the observed fractions disagree (no state can produce two different
    means of one observable).
    """
    u0 = bloch_vector(problem.basis0[1])
    u1 = bloch_vector(problem.basis1[1])
    c0 = 2.0 * problem.delta0 - 1.0
    c1 = 2.0 * problem.delta1 - 1.0
    cos_w = float(np.clip(np.dot(u0, u1), -1.0, 1.0))
    sin_sq = 1.0 - cos_w * cos_w
    if sin_sq < 1e-12:
        aligned = cos_w > 0.0
        mismatch = abs(c0 - c1) if aligned else abs(c0 + c1)
        if mismatch > 1e-9:
            return math.inf
        return abs(c0)
    norm_sq = (c0 * c0 + c1 * c1 - 2.0 * c0 * c1 * cos_w) / sin_sq
    return math.sqrt(max(norm_sq, 0.0))


def zero_region_contains(problem: TwoBasisSampling) -> bool:
    """Whether a single-qubit state reproduces both observed fractions."""
    return bloch_fit_radius(problem) <= 1.0 + 1e-9


def b92_angle_bounds(theta_l: float, theta: float, eps7: float = 0.0, eps8: float = 0.0) -> tuple[float, float]:
    """Allowed window for a check-side outcome fraction sin^2(phi_l), given
    the data-side angle theta_l and the basis angle theta."""
    for ang in (theta_l, theta):
        if not 0.0 <= ang <= math.pi / 2.0 + 1e-12:
            raise DomainError("angles must lie in [0, pi/2]")
    lo = max(0.0, math.sin(theta_l - theta) ** 2 - eps7)
    hi = min(1.0, math.sin(theta_l + theta) ** 2 + eps8)
    return lo, hi


def iid_probability(sigma: np.ndarray, problem: TwoBasisSampling) -> float:
    """Exact probability of the observed fractions for i.i.d. inputs
    sigma^(x)M: a product of two binomial point masses."""
    if problem.m_total > 60:
        raise DomainError("exact oracle limited to m0 + m1 <= 60")
    s = np.asarray(sigma, dtype=complex)
    if s.shape != (2, 2):
        raise DomainError("sigma must be a 2x2 density matrix")
    total = 1.0
    for basis, m_b, delta in (
        (problem.basis0, problem.m0, problem.delta0),
        (problem.basis1, problem.m1, problem.delta1),
    ):
        k_float = m_b * delta
        k = round(k_float)
        if abs(k_float - k) > 1e-9:
            raise DomainError("m_b * delta_b must be integral for the exact oracle")
        ket1 = basis[1]
        succ = float(np.real(np.vdot(ket1, s @ ket1)))
        succ = min(max(succ, 0.0), 1.0)
        pk = succ**k if k > 0 else 1.0
        pq = (1.0 - succ) ** (m_b - k) if m_b - k > 0 else 1.0
        total *= math.comb(m_b, k) * pk * pq
    return total


# ---------------------------------------------------------------------------
# dual solver for the inner convex problem
# ---------------------------------------------------------------------------


def _log_refs(problem: TwoBasisSampling, bloch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(log beta as 4x4 over pair indices, log alpha as (P,4)) for a batch of
    remainder directions ``bloch`` of shape (P, 3)."""
    beta = singlet_pair_probs(problem)
    bmat = beta.transpose(0, 2, 1, 3).reshape(4, 4)
    with np.errstate(divide="ignore"):
        log_beta = np.log(bmat)

    kets = problem.kets().reshape(4, 2)
    theta = np.arccos(np.clip(bloch[:, 2], -1.0, 1.0))
    phi = np.arctan2(bloch[:, 1], bloch[:, 0])
    ket_n = np.stack(
        [np.cos(theta / 2.0), np.sin(theta / 2.0) * np.exp(1j * phi)], axis=1
    )
    amps = ket_n @ kets.conj().T
    alpha = np.abs(amps) ** 2 / 2.0
    with np.errstate(divide="ignore"):
        log_alpha = np.log(alpha)
    return log_beta, log_alpha


def _dual_solve(
    xi1: np.ndarray,
    log_beta: np.ndarray,
    log_alpha: np.ndarray,
    m_flat: np.ndarray,
    iters: int,
    grad_tol: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Maximize the entropic dual for a batch of (xi1, alpha) rows.

    Returns (dual value g*, pair joint q (P,4,4), remainder p (P,4)).  The
    dual is concave and gauge-invariant under a common shift of the four
    multipliers; a rank-one term pins the gauge in the Newton solve.
    """
    n_pts = xi1.shape[0]
    xi2 = 0.5 * (1.0 - xi1)
    lam = np.zeros((n_pts, 4))

    def parts(lam_):
        w = -lam_
        eq = log_beta[None, :, :] + w[:, :, None] + w[:, None, :]
        mq = eq.max(axis=(1, 2), keepdims=True)
        zq = np.exp(eq - mq)
        sq = zq.sum(axis=(1, 2))
        ln_zq = np.log(sq) + mq[:, 0, 0]
        q = zq / sq[:, None, None]

        ep = log_alpha + w
        mp = ep.max(axis=1, keepdims=True)
        zp = np.exp(ep - mp)
        sp = zp.sum(axis=1)
        ln_zp = np.log(sp) + mp[:, 0]
        p = zp / sp[:, None]
        return ln_zq, q, ln_zp, p

    def value(lam_):
        ln_zq, q, ln_zp, p = parts(lam_)
        g = -xi2 * ln_zq - np.where(xi1 > 0.0, xi1 * ln_zp, 0.0) - lam_ @ m_flat
        return g, q, p

    g, q, p = value(lam)
    eye = np.eye(4)
    ones = np.full((4, 4), 0.25)
    for _ in range(iters):
        q1 = q.sum(axis=2)
        q2 = q.sum(axis=1)
        grad = xi2[:, None] * (q1 + q2) + xi1[:, None] * p - m_flat[None, :]
        if np.max(np.abs(grad)) < grad_tol:
            break
        v = q1 + q2
        cov_q = (
            np.einsum("pi,ij->pij", q1 + q2, eye)
            + q
            + q.transpose(0, 2, 1)
            - np.einsum("pi,pj->pij", v, v)
        )
        cov_p = np.einsum("pi,ij->pij", p, eye) - np.einsum("pi,pj->pij", p, p)
        hess = xi2[:, None, None] * cov_q + xi1[:, None, None] * cov_p
        scale = np.trace(hess, axis1=1, axis2=2)[:, None, None] / 4.0 + 1e-12
        hess = hess + scale * ones[None, :, :] + 1e-13 * eye[None, :, :]
        try:
            step = np.linalg.solve(hess, grad[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.einsum("pij,pj->pi", np.linalg.pinv(hess), grad)

        # backtracking on the concave dual
        t = np.ones(n_pts)
        improved = np.zeros(n_pts, dtype=bool)
        lam_new = lam.copy()
        for _ in range(30):
            trial = lam + t[:, None] * step
            trial -= trial.mean(axis=1, keepdims=True)
            np.clip(trial, -200.0, 200.0, out=trial)
            g_t, _, _ = value(trial)
            better = (g_t >= g - 1e-15) & ~improved
            lam_new[better] = trial[better]
            improved |= better
            if improved.all():
                break
            t[~improved] *= 0.5
        lam = lam_new
        g, q, p = value(lam)

    return g, q, p


def _fibonacci_sphere(n: int) -> np.ndarray:
    idx = np.arange(n, dtype=float) + 0.5
    z = 1.0 - 2.0 * idx / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    golden = math.pi * (3.0 - math.sqrt(5.0))
    ang = golden * idx
    return np.stack([r * np.cos(ang), r * np.sin(ang), z], axis=1)


def _rate_batch(
    problem: TwoBasisSampling,
    k_fracs: np.ndarray,
    blochs: np.ndarray,
    iters: int,
    grad_tol: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exponent value for each (k_frac, bloch) row, plus optimal (q, p)."""
    m_flat = problem.count_fractions().reshape(4)
    h_b = problem.weight_entropy()
    log_beta, log_alpha = _log_refs(problem, blochs)
    xi1 = 1.0 - 2.0 * k_fracs
    g, q, p = _dual_solve(xi1, log_beta, log_alpha, m_flat, iters, grad_tol)
    return h_b - LN2 + g, q, p


def _point_from_solution(
    k_frac: float, bloch: np.ndarray, q_flat: np.ndarray, p_flat: np.ndarray
) -> ExponentPoint:
    q = q_flat.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3)
    q = np.clip(q, 0.0, None)
    q = q / q.sum()
    p = np.clip(p_flat.reshape(2, 2), 0.0, None)
    p = p / p.sum()
    n = np.asarray(bloch, dtype=float)
    n = n / np.linalg.norm(n)
    return ExponentPoint(k_frac=float(k_frac), bloch_n=n, q=q, p=p)


def min_exponent(problem: TwoBasisSampling, options: SolverOptions | None = None) -> ExponentSolution:
    """Approximate global minimum of the exponent over all decompositions.

    Coarse stage: a (k_frac grid) x (Fibonacci sphere) scan with the batched
    dual solver.  Refinement: local simplex searches over (k_frac, sphere
    angles) from the best scan cells, a jittered start, and a smart start at
    the minimum-norm Bloch fit (which is the exact optimum whenever the
    observations sit inside the zero region).
    """
    opts = options or SolverOptions()
    rng = np.random.default_rng(opts.seed)

    k_vals = np.linspace(0.0, 0.5, opts.k_grid)
    sphere = _fibonacci_sphere(opts.sphere_points)
    kk = np.repeat(k_vals, sphere.shape[0])
    nn = np.tile(sphere, (k_vals.size, 1))
    # a short Newton budget suffices to rank the coarse cells
    rates, _, _ = _rate_batch(problem, kk, nn, 25, 1e-9)
    finite = np.where(np.isfinite(rates), rates, np.inf)
    order = np.argsort(finite)

    starts: list[tuple[float, np.ndarray]] = []
    for idx in order[:3]:
        starts.append((float(kk[idx]), nn[idx].copy()))

    radius = bloch_fit_radius(problem)
    if math.isfinite(radius):
        # the minimum-norm Bloch fit r: k_frac = (1 - |r|)/2 with direction
        # r/|r| is the exact optimum whenever |r| <= 1
        u0 = bloch_vector(problem.basis0[1])
        u1 = bloch_vector(problem.basis1[1])
        c = np.array([2.0 * problem.delta0 - 1.0, 2.0 * problem.delta1 - 1.0])
        basis_mat = np.stack([u0, u1])
        coef = np.linalg.lstsq(basis_mat @ basis_mat.T, c, rcond=None)[0]
        r_vec = coef @ basis_mat
        nrm = np.linalg.norm(r_vec)
        direction = r_vec / nrm if nrm > 1e-12 else u0
        starts.append(((1.0 - min(radius, 1.0 - 1e-12)) / 2.0, direction))

    while len(starts) < opts.restarts:
        v = rng.normal(size=3)
        starts.append((float(rng.uniform(0.0, 0.5)), v / np.linalg.norm(v)))

    def eval_single(k_frac: float, bloch: np.ndarray) -> float:
        r, _, _ = _rate_batch(
            problem,
            np.array([k_frac]),
            bloch[None, :],
            opts.newton_iters,
            opts.grad_tol,
        )
        return float(r[0])

    def objective(vec: np.ndarray) -> float:
        k_frac = float(np.clip(vec[0], 0.0, 0.5))
        th, ph = vec[1], vec[2]
        n = np.array(
            [math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)]
        )
        return eval_single(k_frac, n)

    refined: list[tuple[float, float, np.ndarray]] = []
    for k0, n0 in starts[: opts.restarts]:
        th0 = math.acos(max(-1.0, min(1.0, n0[2])))
        ph0 = math.atan2(n0[1], n0[0])
        res = optimize.minimize(
            objective,
            np.array([k0, th0, ph0]),
            method="Nelder-Mead",
            options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 200},
        )
        k_best = float(np.clip(res.x[0], 0.0, 0.5))
        n_best = np.array(
            [
                math.sin(res.x[1]) * math.cos(res.x[2]),
                math.sin(res.x[1]) * math.sin(res.x[2]),
                math.cos(res.x[1]),
            ]
        )
        refined.append((float(res.fun), k_best, n_best))

    refined.sort(key=lambda t: t[0])
    best_val, best_k, best_n = refined[0]
    near = sum(1 for v, _, _ in refined if v - best_val <= max(1e-6, 0.01 * abs(best_val)))
    converged = near >= 2

    _, q, p = _rate_batch(
        problem, np.array([best_k]), best_n[None, :], opts.newton_iters, opts.grad_tol
    )
    point = _point_from_solution(best_k, best_n, q[0], p[0])
    r_nats = max(best_val, 0.0) if best_val > -1e-9 else best_val
    if r_nats < 0.0:
        raise DomainError(f"negative exponent {best_val!r}; solver failure")
    return ExponentSolution(
        point=point, r_nats=r_nats, r_bits=r_nats / LN2, converged=converged
    )
