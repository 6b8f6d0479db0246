"""Three-neuron Hopfield network with tanh activation.

The system integrated throughout this package is

    dx_i/dt (of fractional order q) = -x_i + sum_j w_ij tanh(x_j)

with a fixed 3x3 weight matrix.  The default weights place the network in
its chaotic parameter region; w11 doubles as a sweep parameter.  The field
is odd, so every attractor and equilibrium comes in a +/- pair, and all
three equilibria are collinear.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DEFAULT_W",
    "NOMINAL_EQUILIBRIA",
    "HnnParams",
    "HnnField",
    "Equilibrium",
    "hnn_rhs",
    "hnn_jacobian",
    "sech2",
    "find_equilibria",
]

DEFAULT_W = np.array([
    [1.995, -1.2, 0.0],
    [2.0, 1.71, 1.15],
    [-4.75, 0.0, 1.1],
])

# Nominal (three-decimal) equilibrium coordinates of the default network.
# Used for labeling Newton results and as conventional initial conditions.
NOMINAL_EQUILIBRIA = {
    "X0": np.zeros(3),
    "X1": np.array([0.493, 0.366, -3.267]),
    "X2": np.array([-0.493, -0.366, 3.267]),
}

DEFAULT_GUESSES = (
    np.zeros(3),
    np.array([0.5, 0.4, -3.3]),
    np.array([-0.5, -0.4, 3.3]),
)


@dataclass
class HnnParams:
    """Weight matrix of the network; treat as immutable during a run."""

    W: np.ndarray = field(default_factory=lambda: DEFAULT_W.copy())

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=float)
        if self.W.shape != (3, 3):
            raise ValueError(f"weight matrix must be 3x3, got {self.W.shape}")

    def updated(self, **entries):
        """Copy with named entries replaced, e.g. ``params.updated(w11=1.8)``."""
        W = self.W.copy()
        for name, value in entries.items():
            if len(name) != 3 or name[0] != "w" or not name[1:].isdigit():
                raise ValueError(f"unknown weight entry {name!r}")
            i, j = int(name[1]) - 1, int(name[2]) - 1
            if not (0 <= i < 3 and 0 <= j < 3):
                raise ValueError(f"unknown weight entry {name!r}")
            W[i, j] = float(value)
        return HnnParams(W=W)


class HnnField:
    """Right-hand side of the network as a picklable (t, x) callable."""

    __slots__ = ("W",)

    def __init__(self, params: HnnParams | None = None):
        self.W = (params or HnnParams()).W

    def __call__(self, t, x):
        return -x + self.W @ np.tanh(x)


def hnn_rhs(x, params: HnnParams | None = None):
    """Network field -x + W tanh(x); odd in x."""
    x = np.asarray(x, dtype=float)
    W = (params or HnnParams()).W
    return -x + W @ np.tanh(x)


def sech2(x):
    """Squared hyperbolic secant, flushing to zero where cosh overflows."""
    with np.errstate(over="ignore"):
        c = np.cosh(x)
        return np.where(np.isinf(c), 0.0, 1.0 / (c * c))


def hnn_jacobian(x, params: HnnParams | None = None):
    """Jacobian J_ij = w_ij sech^2(x_j) - delta_ij; even in x."""
    x = np.asarray(x, dtype=float)
    W = (params or HnnParams()).W
    return W * sech2(x)[np.newaxis, :] - np.eye(3)


@dataclass
class Equilibrium:
    """A root of the network field with a nearest-anchor label."""

    point: np.ndarray
    label: str  # "X0", "X1", "X2" or "other"


def _label(point):
    for name, anchor in NOMINAL_EQUILIBRIA.items():
        if np.max(np.abs(point - anchor)) <= 0.1:
            return name
    return "other"


def find_equilibria(params: HnnParams | None = None, guesses=None,
                    tol=1e-10, max_iter=100):
    """Damped Newton search for equilibria of the network.

    Each guess is iterated with full Newton steps, halving the step up to 20
    times whenever the residual max-norm fails to decrease.  Converged roots
    (residual below ``tol``) are de-duplicated within 1e-6 and labeled by the
    nearest nominal equilibrium (within 0.1; otherwise "other").  Guesses
    with a singular Jacobian or without convergence are skipped with a
    warning.
    """
    params = params or HnnParams()
    if guesses is None:
        guesses = DEFAULT_GUESSES
    roots = []
    for guess in guesses:
        x = np.asarray(guess, dtype=float).copy()
        r = hnn_rhs(x, params)
        rnorm = np.max(np.abs(r))
        converged = False
        for _ in range(max_iter):
            if rnorm < tol:
                converged = True
                break
            try:
                step = np.linalg.solve(hnn_jacobian(x, params), r)
            except np.linalg.LinAlgError:
                warnings.warn(f"singular Jacobian at {x}, guess skipped")
                break
            scale = 1.0
            for _ in range(20):
                x_new = x - scale * step
                r_new = hnn_rhs(x_new, params)
                if np.max(np.abs(r_new)) < rnorm:
                    break
                scale *= 0.5
            x, r = x_new, r_new
            rnorm = np.max(np.abs(r))
        else:
            converged = rnorm < tol
        if not converged:
            warnings.warn(f"no convergence from guess {guess}, skipped")
            continue
        if any(np.max(np.abs(x - p)) <= 1e-6 for p in roots):
            continue
        roots.append(x)
    return [Equilibrium(point=p, label=_label(p)) for p in roots]
