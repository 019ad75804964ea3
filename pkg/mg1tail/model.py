"""
Block kernels of an M/G/1-type Markov chain: loading, validation, generating
functions with closed-form tails, drift, and the additive kernel support.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple

import numpy
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from mg1tail.exceptions import (AtPole, OutsideRadius, ParseError,
                                ValidationError)
from mg1tail.linalg import (matrix_power_series, negative_binomial_tail,
                            root_of_unity, stationary_vector)
from mg1tail.solver_parameters import POLE_TOLERANCE, STOCHASTIC_TOLERANCE
from mg1tail.utilities import read_json

logger = logging.getLogger(__name__)

MODEL_FIELDS = {"M", "M0", "A", "B0", "B", "C0", "a_tail", "b_tail"}
A_TAIL_FIELDS = {"start_index", "ratio", "coeff"}
B_TAIL_FIELDS = {"radius", "order", "start_index", "poles"}
POLE_FIELDS = {"angle_num", "angle_den", "weight_re", "weight_im"}


@dataclass(frozen=True)
class GeometricTail:
    """Kernel blocks coeff * ratio^k for every level jump k > start_index."""

    start_index: int
    ratio: float
    coeff: numpy.ndarray

    @property
    def radius(self) -> float:
        return 1.0 / self.ratio

    def block(self, k: int) -> numpy.ndarray:
        return self.coeff * self.ratio**k


@dataclass(frozen=True)
class TailPole:
    """A pole r_B * exp(2 pi i angle) of B*(z) with its leading coefficient."""

    angle: Fraction
    weight: numpy.ndarray

    @property
    def zeta(self) -> complex:
        return root_of_unity(self.angle)


@dataclass(frozen=True)
class BTailSpec:
    """
    Boundary blocks for k > start_index given by their poles, so that

        B(k) = sum_n W_n binom(k + m_B - 1, m_B - 1) (conj(zeta_n) / r_B)^k

    and (1 - z / (r_B zeta_n))^{m_B} B*(z) tends to W_n at each pole.
    """

    radius: float
    order: int
    start_index: int
    poles: Tuple[TailPole, ...]

    def _ratio(self, pole: TailPole) -> complex:
        return pole.zeta.conjugate() / self.radius

    def block(self, k: int) -> numpy.ndarray:
        """Complex block B(k) for k > start_index."""

        binomial = math.comb(k + self.order - 1, self.order - 1)
        return sum(
            pole.weight * binomial * self._ratio(pole) ** k for pole in self.poles
        )

    def star(self, z: complex) -> numpy.ndarray:
        """Sum over k > start_index of z^k B(k)."""

        return sum(
            pole.weight
            * negative_binomial_tail(z * self._ratio(pole), self.order, self.start_index + 1)
            for pole in self.poles
        )

    def star_derivative(self, z: complex) -> numpy.ndarray:
        """Derivative in z of the sum over k > start_index of z^k B(k)."""

        # k binom(k + m - 1, m - 1) = m binom(k + m - 1, m)
        return sum(
            pole.weight
            * self.order
            * self._ratio(pole)
            * negative_binomial_tail(z * self._ratio(pole), self.order + 1, self.start_index)
            for pole in self.poles
        )

    def pole_locations(self) -> List[complex]:
        return [self.radius * pole.zeta for pole in self.poles]


@dataclass(frozen=True)
class MG1Model:
    """
    Block kernels of an M/G/1-type Markov chain.

    Parameters
    ----------
    M
        Number of phases at levels k >= 1.
    M0
        Number of phases at level 0.
    A
        Array of shape (K_A + 1, M, M) with A(k), k = 0..K_A.
    B0
        The M0 x M0 block B(0).
    B
        Array of shape (K_B, M0, M) with B(k), k = 1..K_B.
    C0
        The M x M0 block C(0).
    a_tail
        Optional geometric tail of A(k).
    b_tail
        Optional pole specification of the tail of B(k).
    name
        A label used in log messages and reports.
    """

    M: int
    M0: int
    A: numpy.ndarray
    B0: numpy.ndarray
    B: numpy.ndarray
    C0: numpy.ndarray
    a_tail: Optional[GeometricTail] = None
    b_tail: Optional[BTailSpec] = None
    name: str = field(default="model", compare=False)

    @property
    def r_A(self) -> float:
        return self.a_tail.radius if self.a_tail is not None else math.inf

    @property
    def r_B(self) -> float:
        return self.b_tail.radius if self.b_tail is not None else math.inf

    @property
    def max_jump(self) -> int:
        """Largest level index of an explicit or representative tail block."""

        jumps = [len(self.A) - 1, len(self.B)]
        if self.a_tail is not None:
            jumps.append(self.a_tail.start_index + 2)
        if self.b_tail is not None:
            jumps.append(self.b_tail.start_index + 2)

        return max(jumps)


@dataclass(frozen=True)
class DriftProfile:
    """Stationary vector of A, mean jump vectors, and the drift rho = pi beta_A."""

    pi: numpy.ndarray
    beta_A: numpy.ndarray
    beta_B: numpy.ndarray
    rho: float


def A_block(model: MG1Model, k: int) -> numpy.ndarray:
    """The block A(k), including the geometric tail."""

    if k < len(model.A):
        return model.A[k]

    if model.a_tail is not None and k > model.a_tail.start_index:
        return model.a_tail.block(k)

    return numpy.zeros((model.M, model.M))


def B_block(model: MG1Model, k: int) -> numpy.ndarray:
    """The block B(k), with B(0) the M0 x M0 boundary block."""

    if k == 0:
        return model.B0

    if k <= len(model.B):
        return model.B[k - 1]

    if model.b_tail is not None and k > model.b_tail.start_index:
        return model.b_tail.block(k).real

    return numpy.zeros((model.M0, model.M))


def eval_A_star(model: MG1Model, z: complex) -> numpy.ndarray:
    """A*(z) = sum_k z^k A(k)."""

    if model.a_tail is None:
        return matrix_power_series(model.A, z)

    return matrix_power_series(model.A, z, model.a_tail)


def eval_A_star_derivative(model: MG1Model, z: complex) -> numpy.ndarray:
    """A*'(z) = sum_k k z^(k-1) A(k)."""

    if model.a_tail is not None and abs(z) >= model.r_A:
        raise OutsideRadius(f"|z| = {abs(z):.6g} is not inside r_A = {model.r_A:.6g}")

    k = numpy.arange(1, len(model.A))
    derivative = numpy.zeros((model.M, model.M), dtype=complex)
    if len(k) > 0:
        # Sum over j of z^j (j + 1) A(j + 1)
        derivative = matrix_power_series(k[:, None, None] * model.A[1:], z)

    if model.a_tail is not None:
        tail = model.a_tail
        derivative = derivative + tail.coeff * tail.ratio * negative_binomial_tail(
            tail.ratio * z, 2, tail.start_index
        )

    return derivative


def eval_Gamma_A_star(model: MG1Model, z: complex) -> numpy.ndarray:
    """Gamma_A*(z) = A*(z) / z."""

    if z == 0:
        raise ValueError("Gamma_A*(z) is not defined at z = 0")

    return eval_A_star(model, z) / z


def _check_not_at_pole(model: MG1Model, z: complex):
    tolerance = POLE_TOLERANCE * max(1.0, model.r_B)
    for location in model.b_tail.pole_locations():
        if abs(z - location) < tolerance:
            raise AtPole(f"B*(z) has a pole at z = {location:.6g}")


def eval_B_star(model: MG1Model, z: complex) -> numpy.ndarray:
    """
    B*(z) = sum_{k >= 1} z^k B(k). With a pole specification the closed form
    is used everywhere off the declared poles.
    """

    head = numpy.concatenate([numpy.zeros((1, model.M0, model.M)), model.B])
    value = matrix_power_series(head, z)

    if model.b_tail is not None:
        _check_not_at_pole(model, z)
        value = value + model.b_tail.star(z)

    return value


def eval_B_star_derivative(model: MG1Model, z: complex) -> numpy.ndarray:
    """B*'(z) = sum_{k >= 1} k z^(k-1) B(k)."""

    k = numpy.arange(1, len(model.B) + 1)
    value = numpy.zeros((model.M0, model.M), dtype=complex)
    if len(k) > 0:
        value = matrix_power_series(k[:, None, None] * model.B, z)

    if model.b_tail is not None:
        _check_not_at_pole(model, z)
        value = value + model.b_tail.star_derivative(z)

    return value


def gamma_A_support(model: MG1Model) -> List[Tuple[int, int, int]]:
    """
    Support of the additive kernel Gamma_A(k) = A(k + 1) as (i, j, k) triples
    with 0-based phases. A geometric tail contributes its coefficient support
    at the displacements start_index and start_index + 1.
    """

    support = list()

    for k, block in enumerate(model.A):
        for i, j in zip(*numpy.nonzero(block > 0)):
            support.append((int(i), int(j), k - 1))

    if model.a_tail is not None:
        start = model.a_tail.start_index
        for displacement in (start, start + 1):
            for i, j in zip(*numpy.nonzero(model.a_tail.coeff > 0)):
                support.append((int(i), int(j), displacement))

    return support


def is_strongly_connected(adjacency) -> bool:
    """Returns True if the support graph of a square matrix is strongly connected."""

    n_components, _ = connected_components(
        csr_matrix(numpy.asarray(adjacency) > 0), directed=True, connection="strong"
    )
    return n_components == 1


def check_irreducible_T(model: MG1Model):
    """
    Check reachability of the level-phase chain on the level graph truncated
    to levels 0..(max jump + 2). Raises ValidationError if it is not strongly
    connected.
    """

    n_levels = model.max_jump + 2

    def index(level, phase):
        if level == 0:
            return phase
        return model.M0 + (level - 1) * model.M + phase

    n_states = model.M0 + n_levels * model.M
    adjacency = numpy.zeros((n_states, n_states), dtype=bool)

    def add_edges(source_level, target_level, block):
        for i, j in zip(*numpy.nonzero(block > 0)):
            adjacency[index(source_level, i), index(target_level, j)] = True

    for k in range(n_levels + 1):
        add_edges(0, k, B_block(model, k))

    add_edges(1, 0, model.C0)

    for level in range(1, n_levels + 1):
        for k in range(0, n_levels - level + 2):
            add_edges(level, level + k - 1, A_block(model, k))

    if not is_strongly_connected(adjacency):
        raise ValidationError("T not irreducible on the truncated level graph")


def _check_b_tail(model: MG1Model, tol: float):
    """Check the pole specification of the boundary tail."""

    b_tail = model.b_tail

    if not b_tail.radius > 1:
        raise ValidationError("b_tail radius not above 1", slack=1 - b_tail.radius)

    if b_tail.order < 1:
        raise ValidationError("b_tail order below 1")

    angles = [pole.angle for pole in b_tail.poles]
    if angles != sorted(set(angles)) or any(a < 0 or a >= 1 for a in angles):
        raise ValidationError("b_tail pole angles not distinct, sorted, in [0, 1)")

    if Fraction(0) not in angles:
        raise ValidationError("b_tail has no pole at angle 0")

    weights = {pole.angle: pole.weight for pole in b_tail.poles}
    for angle, weight in weights.items():
        if angle in (Fraction(0), Fraction(1, 2)):
            continue
        conjugate = Fraction(1) - angle
        if conjugate not in weights:
            raise ValidationError(f"b_tail pole at angle {angle} has no conjugate")
        slack = numpy.abs(weights[conjugate] - weight.conjugate()).max()
        if slack > tol:
            raise ValidationError(
                f"b_tail weight at angle {conjugate} is not the conjugate of "
                f"the weight at angle {angle}",
                slack=slack,
            )

    # The implied blocks must be real and nonnegative over a few full turns
    period = math.lcm(*[angle.denominator for angle in angles])
    for k in range(b_tail.start_index + 1, b_tail.start_index + 3 * period + b_tail.order + 2):
        block = b_tail.block(k)
        scale = max(1.0, numpy.abs(block).max())
        if numpy.abs(block.imag).max() > tol * scale:
            raise ValidationError(
                f"B({k}) implied by b_tail is not real",
                slack=numpy.abs(block.imag).max(),
            )
        if block.real.min() < -tol * scale:
            raise ValidationError(
                f"B({k}) implied by b_tail is negative", slack=-block.real.min()
            )


def validate_model(model: MG1Model, tol: float = STOCHASTIC_TOLERANCE):
    """
    Check the structural invariants of a model and raise ValidationError with
    the first violated invariant.
    """

    blocks = {"A": model.A, "B0": model.B0, "B": model.B, "C0": model.C0}
    if model.a_tail is not None:
        blocks["a_tail coeff"] = model.a_tail.coeff

    for label, block in blocks.items():
        if block.size > 0 and block.min() < 0:
            raise ValidationError(f"{label} has negative entries", slack=-block.min())

    if model.a_tail is not None and not 0 < model.a_tail.ratio < 1:
        raise ValidationError(f"a_tail ratio {model.a_tail.ratio} not in (0, 1)")

    if model.b_tail is not None:
        _check_b_tail(model, tol)

    ones = numpy.ones(model.M)
    A = eval_A_star(model, 1.0).real
    slack = numpy.abs(A @ ones - 1).max()
    if slack > tol:
        raise ValidationError("A not stochastic", slack=slack)

    B = eval_B_star(model, 1.0).real
    slack = numpy.abs(model.B0.sum(axis=1) + B @ ones - 1).max()
    if slack > tol:
        raise ValidationError("B(0)e + Be != e", slack=slack)

    # Rows of level 1 must sum to one as well
    slack = numpy.abs(model.C0.sum(axis=1) - model.A[0] @ ones).max()
    if slack > tol:
        raise ValidationError("C(0)e != A(0)e", slack=slack)

    if not is_strongly_connected(A):
        raise ValidationError("A not irreducible")

    check_irreducible_T(model)


def drift(model: MG1Model) -> DriftProfile:
    """
    Stationary vector pi of A, beta_A = A*'(1)e, beta_B = B*'(1)e, and
    rho = pi beta_A.
    """

    A = eval_A_star(model, 1.0).real
    pi = stationary_vector(A)
    beta_A = eval_A_star_derivative(model, 1.0).real @ numpy.ones(model.M)
    beta_B = eval_B_star_derivative(model, 1.0).real @ numpy.ones(model.M)
    rho = float(pi @ beta_A)

    return DriftProfile(pi=pi, beta_A=beta_A, beta_B=beta_B, rho=rho)


def require_stable(drift_profile: DriftProfile):
    """Raise ValidationError unless rho < 1."""

    if not drift_profile.rho < 1:
        raise ValidationError("rho not below 1", slack=drift_profile.rho - 1)


def _read_int(document, key, label, minimum=0):
    value = document[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ParseError(f'{label} "{key}" must be an integer >= {minimum}')
    return value


def _read_float(document, key, label):
    value = document[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f'{label} "{key}" must be a number')
    return float(value)


def _read_matrix(value, shape, label) -> numpy.ndarray:
    try:
        matrix = numpy.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{label} is not a numeric matrix")

    if matrix.shape != shape:
        raise ParseError(f"{label} has shape {matrix.shape}, expected {shape}")

    if not numpy.isfinite(matrix).all():
        raise ParseError(f"{label} has non-finite entries")

    matrix.setflags(write=False)
    return matrix


def _read_blocks(value, shape, label, first=0) -> numpy.ndarray:
    if not isinstance(value, list):
        raise ParseError(f"{label} must be a list of matrices")

    blocks = [_read_matrix(block, shape, f"{label}({k})") for k, block in enumerate(value, start=first)]
    array = numpy.array(blocks, dtype=float).reshape((len(blocks),) + shape)
    array.setflags(write=False)
    return array


def _check_fields(document, expected, label):
    if not isinstance(document, dict):
        raise ParseError(f"{label} must be a JSON object")

    unknown = set(document) - expected
    if unknown:
        raise ParseError(f"{label} has unknown fields {sorted(unknown)}")

    missing = expected - set(document)
    if missing:
        raise ParseError(f"{label} is missing fields {sorted(missing)}")


def model_from_dict(document: dict, name: str = "model", validate: bool = True) -> MG1Model:
    """
    Build a model from a decoded JSON document and check its invariants.

    Parameters
    ----------
    document
        The decoded model file.
    name
        A label for the model.
    validate
        Check the structural invariants after parsing.
    """

    _check_fields(document, MODEL_FIELDS, "model")

    M = _read_int(document, "M", "model", minimum=1)
    M0 = _read_int(document, "M0", "model", minimum=1)

    A = _read_blocks(document["A"], (M, M), "A")
    if len(A) == 0:
        raise ParseError("A must contain at least A(0)")

    B0 = _read_matrix(document["B0"], (M0, M0), "B0")
    B = _read_blocks(document["B"], (M0, M), "B", first=1)
    C0 = _read_matrix(document["C0"], (M, M0), "C0")

    a_tail = None
    if document["a_tail"] is not None:
        tail_document = document["a_tail"]
        _check_fields(tail_document, A_TAIL_FIELDS, "a_tail")
        a_tail = GeometricTail(
            start_index=_read_int(tail_document, "start_index", "a_tail"),
            ratio=_read_float(tail_document, "ratio", "a_tail"),
            coeff=_read_matrix(tail_document["coeff"], (M, M), "a_tail coeff"),
        )
        if len(A) - 1 > a_tail.start_index:
            raise ParseError("A has explicit blocks beyond a_tail start_index")

    b_tail = None
    if document["b_tail"] is not None:
        tail_document = document["b_tail"]
        _check_fields(tail_document, B_TAIL_FIELDS, "b_tail")

        if not isinstance(tail_document["poles"], list) or not tail_document["poles"]:
            raise ParseError("b_tail poles must be a nonempty list")

        poles = list()
        for n, pole_document in enumerate(tail_document["poles"]):
            label = f"b_tail pole {n}"
            _check_fields(pole_document, POLE_FIELDS, label)
            denominator = _read_int(pole_document, "angle_den", label, minimum=1)
            numerator = _read_int(pole_document, "angle_num", label)
            weight = _read_matrix(pole_document["weight_re"], (M0, M), f"{label} weight_re") + 1j * _read_matrix(
                pole_document["weight_im"], (M0, M), f"{label} weight_im"
            )
            weight.setflags(write=False)
            poles.append(TailPole(angle=Fraction(numerator, denominator), weight=weight))

        b_tail = BTailSpec(
            radius=_read_float(tail_document, "radius", "b_tail"),
            order=_read_int(tail_document, "order", "b_tail", minimum=1),
            start_index=_read_int(tail_document, "start_index", "b_tail"),
            poles=tuple(poles),
        )
        if len(B) > b_tail.start_index:
            raise ParseError("B has explicit blocks beyond b_tail start_index")

    model = MG1Model(
        M=M, M0=M0, A=A, B0=B0, B=B, C0=C0, a_tail=a_tail, b_tail=b_tail, name=name
    )

    if validate:
        validate_model(model)

    return model


def model_to_dict(model: MG1Model) -> dict:
    """Inverse of model_from_dict."""

    document = {
        "M": model.M,
        "M0": model.M0,
        "A": model.A.tolist(),
        "B0": model.B0.tolist(),
        "B": model.B.tolist(),
        "C0": model.C0.tolist(),
        "a_tail": None,
        "b_tail": None,
    }

    if model.a_tail is not None:
        document["a_tail"] = {
            "start_index": model.a_tail.start_index,
            "ratio": model.a_tail.ratio,
            "coeff": model.a_tail.coeff.tolist(),
        }

    if model.b_tail is not None:
        document["b_tail"] = {
            "radius": model.b_tail.radius,
            "order": model.b_tail.order,
            "start_index": model.b_tail.start_index,
            "poles": [
                {
                    "angle_num": pole.angle.numerator,
                    "angle_den": pole.angle.denominator,
                    "weight_re": pole.weight.real.tolist(),
                    "weight_im": pole.weight.imag.tolist(),
                }
                for pole in model.b_tail.poles
            ],
        }

    return document


def load_model(path, validate: bool = True) -> MG1Model:
    """Read a model file, named after its stem, and optionally validate it."""

    path = Path(path)
    logger.info(f"Loading model {path}")

    return model_from_dict(read_json(path), name=path.stem, validate=validate)
