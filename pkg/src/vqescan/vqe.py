"""Variational energy minimization and nuclear energy gradients.

The optimizer loop evaluates <psi(theta)|H|psi(theta)> on the statevector
simulator (exactly, or shot-sampled when a ShotPlan is configured) and
feeds a classical optimizer: a derivative-free downhill simplex by default,
or gradient descent driven by exact parameter-shift gradients.

Nuclear gradients come in two flavors: central finite differences of the
total energy, and a Hellmann-Feynman form where the Hamiltonian coefficient
derivatives are taken by finite differences while the state is held fixed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .ansatz import AnsatzCircuit, prepare
from .geometry import MolecularGeometry
from .pauli import PauliSum
from .simulator import ShotPlan, Statevector, expectation_exact, expectation_sampled

SIMPLEX = "simplex"
PARAMETER_SHIFT = "parameter_shift_descent"


class VqeError(RuntimeError):
    pass


@dataclass(frozen=True)
class VqeConfig:
    max_iterations: int = 2000  # evaluation cap for the simplex
    energy_tolerance: float = 1e-8
    optimizer: str = SIMPLEX
    initial_theta: np.ndarray | None = None
    restarts: int = 1
    shot_plan: ShotPlan | None = None  # absent -> exact expectations
    simplex_edge: float = 0.1  # radians, initial simplex size
    descent_step: float = 0.5  # initial parameter-shift descent step
    seed: int = 0  # restart-perturbation seed

    def __post_init__(self):
        if self.energy_tolerance <= 0:
            raise ValueError("energy tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.optimizer not in (SIMPLEX, PARAMETER_SHIFT):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class VqeResult:
    energy: float
    theta: np.ndarray
    iterations: int
    trace: list[tuple[np.ndarray, float]] = field(default_factory=list)
    converged: bool = False
    evaluations: int = 0


def _energy_fn(hamiltonian: PauliSum, circuit: AnsatzCircuit, cfg: VqeConfig):
    def energy(theta, gate_offsets=None):
        state = prepare(circuit, theta, gate_offsets)
        if cfg.shot_plan is None:
            value = expectation_exact(state, hamiltonian)
        else:
            value, _ = expectation_sampled(state, hamiltonian, cfg.shot_plan)
        if not np.isfinite(value):
            raise VqeError(f"non-finite energy {value} at theta={theta}")
        return value
    return energy


def _run_simplex(energy, theta0, cfg: VqeConfig, trace):
    best = {"e": np.inf, "theta": None}

    def wrapped(theta):
        value = energy(theta)
        if value < best["e"] - 1e-15:
            best["e"] = value
            best["theta"] = np.array(theta)
            trace.append((np.array(theta), value))
        return value

    if len(theta0) == 0:
        value = wrapped(theta0)
        return VqeResult(value, theta0, iterations=0, trace=trace,
                         converged=True, evaluations=1)
    simplex = np.vstack([theta0] + [theta0 + cfg.simplex_edge * e
                                    for e in np.eye(len(theta0))])
    res = scipy.optimize.minimize(
        wrapped, theta0, method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "fatol": cfg.energy_tolerance,
            "xatol": 1e-6,
            "maxfev": cfg.max_iterations,
            "adaptive": True,
        })
    return VqeResult(float(res.fun), np.array(res.x), iterations=int(res.nit),
                     trace=trace, converged=bool(res.success),
                     evaluations=int(res.nfev))


def parameter_shift_gradient(energy, circuit: AnsatzCircuit, theta) -> np.ndarray:
    """Exact dE/dtheta via the +-pi/2 shift rule, one shift per gate
    occurrence, summed over the gates sharing each parameter."""
    grad = np.zeros(circuit.n_parameters)
    for position, gate in enumerate(circuit.gates):
        if gate.parameter is None:
            continue
        e_plus = energy(theta, {position: +np.pi / 2})
        e_minus = energy(theta, {position: -np.pi / 2})
        grad[gate.parameter] += gate.coefficient * 0.5 * (e_plus - e_minus)
    return grad


def _run_parameter_shift(energy, circuit, theta0, cfg: VqeConfig, trace):
    theta = np.array(theta0, dtype=float)
    current = energy(theta)
    trace.append((theta.copy(), current))
    evaluations = 1
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        grad = parameter_shift_gradient(energy, circuit, theta)
        evaluations += 2 * sum(1 for g in circuit.gates if g.parameter is not None)
        step = cfg.descent_step
        improved = False
        for _ in range(20):  # backtracking line search
            candidate = theta - step * grad
            value = energy(candidate)
            evaluations += 1
            if value < current:
                improved = True
                break
            step *= 0.5
        if not improved:
            converged = True
            break
        theta, previous, current = candidate, current, value
        trace.append((theta.copy(), current))
        if previous - current < cfg.energy_tolerance:
            converged = True
            break
    return VqeResult(current, theta, iterations=iterations, trace=trace,
                     converged=converged, evaluations=evaluations)


def minimize(hamiltonian: PauliSum, circuit: AnsatzCircuit,
             cfg: VqeConfig | None = None) -> VqeResult:
    """Minimize the trial-state energy over circuit parameters.

    Runs cfg.restarts independent starts (the first from cfg.initial_theta
    or zero, later ones from seeded random perturbations) and returns the
    best. Hitting the iteration cap returns converged=False rather than
    raising.
    """
    cfg = cfg or VqeConfig()
    if hamiltonian.n_qubits != circuit.n_qubits:
        raise VqeError("Hamiltonian and circuit qubit counts differ")
    if not hamiltonian.is_hermitian():
        raise VqeError("Hamiltonian must have real coefficients")
    energy = _energy_fn(hamiltonian, circuit, cfg)
    if cfg.initial_theta is not None:
        theta0 = np.asarray(cfg.initial_theta, dtype=float)
        if theta0.shape != (circuit.n_parameters,):
            raise VqeError(f"initial theta must have length {circuit.n_parameters}")
    else:
        theta0 = np.zeros(circuit.n_parameters)

    base_seed = cfg.seed
    best: VqeResult | None = None
    for restart in range(cfg.restarts):
        if restart == 0:
            start = theta0
        else:
            rng = np.random.Generator(
                np.random.Philox(np.random.SeedSequence([base_seed, restart])))
            start = theta0 + rng.uniform(-0.5, 0.5, size=circuit.n_parameters)
        trace: list[tuple[np.ndarray, float]] = []
        if cfg.optimizer == SIMPLEX or circuit.n_parameters == 0:
            result = _run_simplex(energy, start, cfg, trace)
        else:
            result = _run_parameter_shift(energy, circuit, start, cfg, trace)
        if best is None or result.energy < best.energy:
            best = result
    return best


def displace(geom: MolecularGeometry, coordinate: int, amount: float) -> MolecularGeometry:
    """Shift one flattened Cartesian coordinate (atom*3 + axis) by `amount` Bohr."""
    coords = geom.coordinates
    n_coords = coords.size
    if not 0 <= coordinate < n_coords:
        raise ValueError(f"coordinate index {coordinate} out of range 0..{n_coords - 1}")
    flat = coords.reshape(-1).copy()
    flat[coordinate] += amount
    return geom.with_coordinates(flat.reshape(-1, 3))


CENTRAL_FD = "central_fd"
HELLMANN_FEYNMAN_FD = "hellmann_feynman_fd"


@dataclass(frozen=True)
class GradientResult:
    gradient: np.ndarray  # Hartree/Bohr, one entry per displaced coordinate
    step: float  # dR in Bohr
    method: str
    fd_error_estimate: np.ndarray  # per-coordinate Richardson estimate
    coordinates: tuple[int, ...]


def gradient_central_fd(energy_fn, geom: MolecularGeometry, coordinates,
                        dR: float = 1e-3) -> GradientResult:
    """Central differences: [E(R + dR/2 v_i) - E(R - dR/2 v_i)] / dR.

    The truncation error is estimated by Richardson comparison against the
    doubled step 2*dR. energy_fn failures propagate with the offending
    displaced geometry attached to the exception.
    """
    if dR <= 0:
        raise ValueError("finite-difference step dR must be positive")
    coordinates = tuple(int(c) for c in coordinates)
    grads = np.zeros(len(coordinates))
    errors = np.zeros(len(coordinates))
    for n, coord in enumerate(coordinates):
        samples = {}
        for amount in (+0.5 * dR, -0.5 * dR, +dR, -dR):
            displaced = displace(geom, coord, amount)
            try:
                samples[amount] = float(energy_fn(displaced))
            except Exception as exc:
                exc.displaced_geometry = displaced
                raise
        g1 = (samples[0.5 * dR] - samples[-0.5 * dR]) / dR
        g2 = (samples[dR] - samples[-dR]) / (2.0 * dR)
        grads[n] = g1
        errors[n] = abs(g1 - g2) / 3.0
    return GradientResult(grads, dR, CENTRAL_FD, errors, coordinates)


def gradient_hellmann_feynman_fd(h_plus: PauliSum, h_minus: PauliSum,
                                 state: Statevector, dR: float) -> float:
    """<psi| (H+ - H-) |psi> / dR: coefficient-differentiated gradient.

    H+ and H- are Hamiltonians built at geometries displaced +-dR/2 along
    one coordinate; terms present in only one operand count as zero in the
    other.
    """
    if dR <= 0:
        raise ValueError("finite-difference step dR must be positive")
    diff = h_plus - h_minus
    return expectation_exact(state, diff) / dR
