"""Catalog of benchmark models with closed-form reference values."""
from pathlib import Path

from mg1tail.utilities import package_data_directory

model_directory = Path(package_data_directory, "models")

# Benchmark models with the model file and the values known in closed form.
# A theta of None means delta(A*(y)) = y has no root in (1, r_A).
benchmark_models = {
    "scalar": {
        "description": "Random walk with A(0) = 0.4, A(1) = 0.4, A(2) = 0.2 and B(k) = A(k)",
        "model_path": Path(model_directory, "scalar.json"),
        "theta": 2.0,
        "tau": 1,
        "tau_prime": 1,
        "rho": 0.8,
        "regime": "BelowRB",
        "x0": [0.2],
        "x1": [0.3],
        "delta_prime": 1.2,
        "prefactors": {0: [1.0]},
    },
    "two_phase": {
        "description": "Alternating phases with down rate q = 0.8 and up-two rate p = 0.2",
        "model_path": Path(model_directory, "two_phase.json"),
        "theta": 4.0,
        "tau": 2,
        "tau_prime": 1,
        "rho": 0.4,
        "regime": "BelowRB",
        "x0": [0.3, 0.3],
        "x1": [0.075, 0.075],
        "delta_prime": 1.6,
        "offsets": [0, 1],
        "prefactors": {0: [0.5, 0.5]},
    },
    "two_phase_boundary": {
        "description": "Alternating phases with a single boundary phase",
        "model_path": Path(model_directory, "two_phase_boundary.json"),
        "theta": 4.0,
        "tau": 2,
        "rho": 0.4,
        "regime": "BelowRB",
        "delta_prime": 1.6,
        "offsets": [0, 1],
    },
    "above_rb": {
        "description": "Scalar random walk with boundary jumps B(k) = 0.5 (2/3)^k",
        "model_path": Path(model_directory, "above_rb.json"),
        "theta": 2.0,
        "tau": 1,
        "rho": 0.8,
        "regime": "AboveRB",
        "x0": [1 / 16],
        "decay_base": 1.5,
        "order": 1,
        "prefactors": {0: [1.875]},
    },
    "at_rb": {
        "description": "Scalar random walk with boundary jumps B(k) = 0.5 (1/2)^k",
        "model_path": Path(model_directory, "at_rb.json"),
        "theta": 2.0,
        "tau": 1,
        "rho": 0.8,
        "regime": "AtRB",
        "x0": [1 / 6],
        "decay_base": 2.0,
        "order": 2,
        "prefactors": {0: [5 / 12]},
    },
    "no_theta": {
        "description": "Kernel A(k) proportional to 1.5^-k / (k + 1)^3, truncated at 60",
        "model_path": Path(model_directory, "no_theta.json"),
        "theta": None,
        "tau": 1,
        "regime": "Unsupported",
    },
    "no_theta_btail": {
        "description": "Kernel of no_theta with boundary jumps B(k) = 0.1 (1/1.2)^k",
        "model_path": Path(model_directory, "no_theta_btail.json"),
        "theta": None,
        "tau": 1,
        "regime": "NoThetaAboveRB",
        "decay_base": 1.2,
        "order": 1,
    },
}
