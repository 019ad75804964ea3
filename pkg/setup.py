"""
mg1tail
Stationary distribution and light-tailed asymptotics of M/G/1-type Markov chains
"""
import sys
from setuptools import setup, find_packages

short_description = "Stationary distribution and light-tailed asymptotics of M/G/1-type Markov chains".split("\n")[0]

# from https://github.com/pytest-dev/pytest-runner#conditional-requirement
needs_pytest = {'pytest', 'test', 'ptr'}.intersection(sys.argv)
pytest_runner = ['pytest-runner'] if needs_pytest else []

try:
    with open("README.md", "r") as handle:
        long_description = handle.read()
except OSError:
    long_description = None


setup(
    # Self-descriptive entries which should always be present
    name='mg1tail',
    description=short_description,
    long_description=long_description,
    long_description_content_type="text/markdown",
    version='0.1.0',
    license='MIT',

    # Which Python importable modules should be included when your package is installed
    packages=find_packages(),

    # Ship the benchmark model files with the package
    include_package_data=True,
    package_data={'mg1tail': ['data/models/*.json']},

    # Allows `setup.py test` to work correctly with pytest
    setup_requires=[] + pytest_runner,

    # Required packages for pip installs; the conda environments in devtools pin the same stack
    install_requires=['click', 'numpy', 'pandas', 'scipy'],

    # Setup click for command-line arguments
    entry_points={
        'console_scripts': [
            'mg1tail = mg1tail.cli:main',
        ],
    },

    python_requires=">=3.9",
)
