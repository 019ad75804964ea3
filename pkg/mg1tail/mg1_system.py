import logging
from pathlib import Path

import numpy

from mg1tail.asymptotics import AsymptoticReport, analyze
from mg1tail.fundamental import (FundamentalSet, Subject, R_star,
                                 solve_fundamental, structure_normal_form)
from mg1tail.model import MG1Model, drift, load_model, validate_model
from mg1tail.oracle import ComparisonTable, compare, exact_tails
from mg1tail.solver_parameters import DEFAULT_LEVELS, DEFAULT_TOLERANCES
from mg1tail.spectral import SpectralProfile, spectral_profile

logger = logging.getLogger(__name__)


class MG1TailSystem:
    """
    A class representing an M/G/1-type model together with its solver
    settings. Drift, fundamental matrices, spectral profile, and asymptotic
    report are computed on first use and cached.
    """

    def __init__(
        self,
        model_path: str = None,
        model: MG1Model = None,
        tolerances: dict = None,
        levels: int = DEFAULT_LEVELS,
    ):
        """
        Initializes the MG1TailSystem object with a model and solver settings.

        Parameters
        ----------
        model_path
            The path to a model file. Ignored if model is given.
        model
            An already constructed model.
        tolerances
            Overrides for the entries of DEFAULT_TOLERANCES.
        levels
            Number of levels of the stationary prefix.
        """

        if model is None and model_path is None:
            raise ValueError("MG1TailSystem requires either model_path or model")

        if levels < 1:
            raise ValueError(f"levels must be at least 1, got {levels}")

        self.tolerances = dict(DEFAULT_TOLERANCES)
        if tolerances is not None:
            unknown = set(tolerances) - set(DEFAULT_TOLERANCES)
            if unknown:
                raise ValueError(f"unknown tolerance names {sorted(unknown)}")
            self.tolerances.update(tolerances)

        self.levels = levels

        if model is None:
            model = load_model(Path(model_path), validate=False)

        self.model = model
        self.system_name = model.name

        self._validated = False
        self._drift = None
        self._fundamental = None
        self._spectral = None
        self._report = None

    def validate(self):
        """Check the structural invariants of the model and stability rho < 1."""

        if not self._validated:
            logger.info(f"Validating model {self.system_name}")
            validate_model(self.model, self.tolerances["stochastic"])
            self._validated = True

        return self.drift

    @property
    def drift(self):
        if self._drift is None:
            self._drift = drift(self.model)

        return self._drift

    def solve(self) -> FundamentalSet:
        """G, U, R matrices, boundary vector, and the stationary prefix."""

        if self._fundamental is None:
            self.validate()
            logger.info(f"Computing fundamental matrices for model {self.system_name}")
            self._fundamental = solve_fundamental(
                self.model,
                k_levels=self.levels,
                g_tolerance=self.tolerances["g_matrix"],
                drift_profile=self.drift,
            )

        return self._fundamental

    def spectral(self) -> SpectralProfile:
        """Theta, Perron vectors at theta, and the period of the kernel."""

        if self._spectral is None:
            self.validate()
            self._spectral = spectral_profile(
                self.model,
                self.drift,
                theta_tol=self.tolerances["theta"],
                perron_tol=self.tolerances["perron"],
            )

        return self._spectral

    def analyze(self) -> AsymptoticReport:
        """Regime and prefactors of the tail probabilities."""

        if self._report is None:
            spectral = self.spectral()
            fund = self.solve()
            logger.info(f"Analyzing asymptotics of model {self.system_name}")
            self._report = analyze(self.model, spectral, fund, self.tolerances)

        return self._report

    def tails(self) -> numpy.ndarray:
        """Exact tail vectors x_bar(k) for k = 0..levels-1."""

        return exact_tails(self.solve(), self.tolerances["remainder"])

    def compare(self) -> ComparisonTable:
        """Predicted against exact tails."""

        return compare(
            self.model,
            self.solve(),
            self.analyze(),
            noise_floor=self.tolerances["noise_floor"],
            remainder_tol=self.tolerances["remainder"],
        )

    def structure(self):
        """Normal forms of G and R*(1)."""

        fund = self.solve()
        R_one = R_star(self.model, fund, 1.0).real

        return (
            structure_normal_form(fund.G, Subject.G_MATRIX),
            structure_normal_form(R_one, Subject.R_MATRIX),
        )
