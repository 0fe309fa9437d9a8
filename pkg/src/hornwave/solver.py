"""Marching numerical solver used as the independent oracle.

Solves either evolution form on a periodic grid:

    q-form   q_z = a (q_tau)^2 + mu(z) q_tautau
    u-form   u_z = a u u_tau   + mu(z) u_tautau     (u = 2 q_tau)

The marching coordinate z is the stretched axial coordinate; diffusion is
removed from the step-size problem by an exact integrating factor.  The
key identity is that the accumulated diffusion integral of mu over z
equals nu times the physical distance x, so every stage transfer factor
is exp(-nu k^2 dx) with dx >= 0 taken straight from the profile's
coordinate map: always a decay, never an overflow.

The nonlinear term is advanced with the Dormand-Prince 5(4) embedded
pair, PI step control, and 2/3-rule dealiasing of the quadratic product.
The additive gauge freedom of the q potential is fixed to zero; the mean
of q then evolves by the (q_tau)^2 average, which the k = 0 mode of the
nonlinear term supplies automatically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .errors import ConfigError, ResolutionError, SpacingError
from .grid import TauGrid
from .kernel import InitialCondition
from .profiles import Profile
from .rg import PhysParams

# Dormand-Prince 5(4) tableau; row 7 equals the 5th-order weights (FSAL)
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
]
_ERR = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
                 -17253 / 339200, 22 / 525, -1 / 40])

_SAFETY = 0.9
_FAC_MIN, _FAC_MAX = 0.2, 5.0
_PI_ALPHA, _PI_BETA = 0.17, 0.08


@dataclass(frozen=True)
class SolverConfig:
    n: int = 256
    tol: float = 1e-8
    stations: Sequence[float] = (1.0,)
    form: str = "q"
    max_steps: int = 200_000

    def __post_init__(self):
        if self.form not in ("q", "u"):
            raise ConfigError(f"form must be 'q' or 'u', got {self.form!r}")
        if self.tol <= 0.0:
            raise ConfigError("marching tolerance must be positive")
        st = np.asarray(self.stations, dtype=float)
        if st.size == 0 or st[0] < 0.0 or np.any(np.diff(st) <= 0.0):
            raise ConfigError("stations must increase from 0")
        object.__setattr__(self, "stations", tuple(float(s) for s in st))


@dataclass(frozen=True)
class SolverResult:
    grid: TauGrid
    form: str
    x_stations: Tuple[float, ...]
    zeta_stations: Tuple[float, ...]
    fields: List[np.ndarray] = field(default_factory=list)
    steps: int = 0


def spectral_derivative(values, grid: TauGrid):
    spec = np.fft.rfft(values)
    return np.fft.irfft(1j * grid.wavenumbers() * spec, n=grid.n)


def u_from_q(values, grid: TauGrid):
    """u = 2 dq/dtau, spectrally."""
    return 2.0 * spectral_derivative(values, grid)


def p_from_u(values, profile: Profile, x):
    """Physical pressure p = u / sqrt(S(x))."""
    return np.asarray(values, dtype=float) / np.sqrt(profile.area(x))


def solve(ic: InitialCondition, params: PhysParams, profile: Profile,
          config: SolverConfig) -> SolverResult:
    grid = TauGrid.periodic_default(config.n)
    kap = grid.wavenumbers()
    kap2 = kap * kap
    mask = np.ones(kap.size)
    mask[kap.size - (grid.n // 2 - grid.n // 3):] = 0.0   # 2/3-rule cutoff

    a = params.a
    if config.form == "q":
        def nonlinear(spec):
            grad = np.fft.irfft(1j * kap * spec * mask, n=grid.n)
            return np.fft.rfft(a * grad * grad) * mask
    else:
        def nonlinear(spec):
            vals = np.fft.irfft(spec * mask, n=grid.n)
            grad = np.fft.irfft(1j * kap * spec * mask, n=grid.n)
            return np.fft.rfft(a * vals * grad) * mask

    w = ic.sample(grid)
    state = np.fft.rfft(w if config.form == "q" else u_from_q(w, grid))

    x_st = config.stations
    z_st = [float(profile.zeta_of_x(x)) for x in x_st]
    result_fields: List[np.ndarray] = []

    zeta = 0.0
    nxt = 0
    if z_st[0] == 0.0:
        result_fields.append(np.fft.irfft(state, n=grid.n))
        nxt = 1

    span = z_st[-1] if z_st[-1] > 0.0 else 1.0
    h = min(1e-4 * max(span, 1.0), span / 100.0)
    h_floor = max(1e-13, 1e-11 * span)
    err_prev = 1.0
    n_tail = nonlinear(state)     # FSAL seed
    steps = 0

    while nxt < len(z_st):
        if steps >= config.max_steps:
            raise ResolutionError(
                f"step budget {config.max_steps} exhausted at zeta = {zeta:g}",
                suggested_n=2 * grid.n)
        hitting = z_st[nxt] - zeta <= h
        if hitting:
            h = z_st[nxt] - zeta

        # physical x at the stage points; differences feed the decay factors
        zs = zeta + _C * h
        zs[-1] = zeta + h
        xs = np.asarray(profile.x_of_zeta(zs), dtype=float)

        def decay(j, i):
            return np.exp(-params.nu * kap2 * (xs[i] - xs[j]))

        n_stage = [n_tail]
        for i in range(1, 7):
            acc = decay(0, i) * state
            for j, aij in enumerate(_A[i]):
                if aij != 0.0:
                    acc = acc + (h * aij) * decay(j, i) * n_stage[j]
            n_stage.append(nonlinear(acc))
            if i == 6:
                proposal = acc

        err_spec = h * sum(_ERR[j] * decay(j, 6) * n_stage[j] for j in range(7))
        err = np.max(np.abs(np.fft.irfft(err_spec, n=grid.n)))
        scale = config.tol * (1.0 + np.max(np.abs(np.fft.irfft(proposal, n=grid.n))))
        ratio = err / scale
        steps += 1

        if ratio <= 1.0:
            zeta += h
            state = proposal
            n_tail = n_stage[6]
            if hitting:
                result_fields.append(np.fft.irfft(state, n=grid.n))
                nxt += 1
            fac = _SAFETY * max(ratio, 1e-10) ** -_PI_ALPHA * err_prev ** _PI_BETA
            err_prev = max(ratio, 1e-10)
        else:
            fac = _SAFETY * ratio ** -_PI_ALPHA
        h *= min(_FAC_MAX, max(_FAC_MIN, fac))
        if h < h_floor:
            raise ResolutionError(
                f"step size collapsed to {h:.3e} at zeta = {zeta:g}; "
                "the solution is too sharp for this grid",
                suggested_n=2 * grid.n)

    return SolverResult(grid=grid, form=config.form,
                        x_stations=tuple(x_st), zeta_stations=tuple(z_st),
                        fields=result_fields, steps=steps)


def residual(fields, zetas, params: PhysParams, profile: Profile,
             grid: TauGrid, *, form="q"):
    """Max-norm equation defect of a uniformly spaced station sequence.

    Central differences along the march, spectral tau derivatives on
    periodic grids and central differences on windowed ones; only
    interior stations (and interior tau points, if windowed) count.
    """
    zetas = np.asarray(zetas, dtype=float)
    if zetas.size < 3:
        raise SpacingError("need at least three stations")
    dz = np.diff(zetas)
    if np.max(np.abs(dz - dz[0])) > 1e-9 * abs(dz[0]):
        raise SpacingError("stations are not uniformly spaced")
    step = dz[0]

    stack = np.asarray(fields, dtype=float)
    if stack.shape != (zetas.size, grid.n):
        raise ConfigError(
            f"expected {zetas.size} fields of {grid.n} samples, "
            f"got {stack.shape}")

    if grid.periodic:
        kap = grid.wavenumbers()
        spec = np.fft.rfft(stack, axis=1)
        d_tau = np.fft.irfft(1j * kap * spec, n=grid.n, axis=1)
        d_tautau = np.fft.irfft(-kap * kap * spec, n=grid.n, axis=1)
        sl = slice(None)
    else:
        dt = grid.dtau
        d_tau = np.gradient(stack, dt, axis=1, edge_order=2)
        d_tautau = (stack[:, :-2] - 2.0 * stack[:, 1:-1] + stack[:, 2:]) / dt ** 2
        d_tau = d_tau[:, 1:-1]
        sl = slice(1, -1)

    d_z = (stack[2:, sl] - stack[:-2, sl]) / (2.0 * step)
    mu = np.asarray(profile.mu_of_zeta(params.nu, zetas[1:-1]), dtype=float)
    mu = mu[:, None]
    mid = stack[1:-1, sl]
    if form == "q":
        defect = d_z - params.a * d_tau[1:-1] ** 2 - mu * d_tautau[1:-1]
    elif form == "u":
        defect = d_z - params.a * mid * d_tau[1:-1] - mu * d_tautau[1:-1]
    else:
        raise ConfigError(f"form must be 'q' or 'u', got {form!r}")
    return float(np.max(np.abs(defect)))
