"""Command-line interface: validate, solve, analyze, compare, and structure."""
import logging
import sys
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Optional

import click
import numpy
import pandas

from mg1tail.asymptotics import AsymptoticReport, Regime
from mg1tail.exceptions import NumericalError, ParseError, ValidationError
from mg1tail.mg1_system import MG1TailSystem
from mg1tail.solver_parameters import DEFAULT_LEVELS, DEFAULT_TOLERANCES
from mg1tail.utilities import dataframe_to_csv

logger = logging.getLogger(__name__)

NO_THETA_LINE = "theta = none (Assumption 3 fails)"

# Label of the prefactor vectors per regime
PREFACTOR_LABELS = {
    Regime.BELOW_RB: "c",
    Regime.ABOVE_RB: "xi",
    Regime.NO_THETA_ABOVE_RB: "xi",
    Regime.AT_RB: "c_hat",
}


class Command(str, Enum):
    VALIDATE = "validate"
    SOLVE = "solve"
    ANALYZE = "analyze"
    COMPARE = "compare"
    STRUCTURE = "structure"


class OutputFormat(str, Enum):
    HUMAN = "human"
    CSV = "csv"


@dataclass(frozen=True)
class RunConfig:
    """Settings of one command-line invocation."""

    command: Command
    model_path: str
    levels: int = DEFAULT_LEVELS
    tolerances: Dict[str, float] = field(default_factory=dict)
    output: Optional[str] = None
    format: OutputFormat = OutputFormat.HUMAN


def format_number(value) -> str:
    """Shortest repr of a float rounded to 10 significant digits."""

    return repr(float(f"{float(value):.10g}"))


def format_vector(values) -> str:
    return ", ".join(format_number(value) for value in numpy.atleast_1d(values))


def _lines_to_text(lines) -> str:
    return "\n".join(f"{key} = {value}" for key, value in lines) + "\n"


def _validate(system: MG1TailSystem, output_format: OutputFormat):
    drift_profile = system.validate()
    model = system.model

    if output_format == OutputFormat.CSV:
        return pandas.DataFrame(
            [{"model": model.name, "valid": True, "M": model.M, "M0": model.M0, "rho": drift_profile.rho}]
        )

    return _lines_to_text(
        [
            ("model", model.name),
            ("valid", "true"),
            ("M", model.M),
            ("M0", model.M0),
            ("rho", format_number(drift_profile.rho)),
        ]
    )


def _solve(system: MG1TailSystem, output_format: OutputFormat):
    fund = system.solve()
    tails = system.tails()
    M = system.model.M

    x = numpy.full((fund.k_levels + 1, M), numpy.nan)
    x[0, : system.model.M0] = fund.x0
    x[1:] = fund.x

    df = pandas.DataFrame({"k": numpy.arange(fund.k_levels)})
    for phase in range(M):
        df[f"x_{phase}"] = x[: fund.k_levels, phase]
    for phase in range(M):
        df[f"xbar_{phase}"] = tails[:, phase]

    if output_format == OutputFormat.CSV:
        return df

    return df.to_string(index=False) + "\n"


def _report_lines(system: MG1TailSystem, report: AsymptoticReport):
    lines = list()
    model = system.model
    spectral = system.spectral()

    lines.append(("model", model.name))
    lines.append(("rho", format_number(spectral.rho)))
    lines.append(("r_A", format_number(spectral.r_A)))
    lines.append(("r_B", format_number(spectral.r_B)))

    if spectral.theta is None:
        lines.append(NO_THETA_LINE.split(" = ", 1))
    else:
        lines.append(("theta", format_number(spectral.theta)))
        lines.append(("delta_prime", format_number(spectral.delta_prime)))

    lines.append(("tau", spectral.tau))
    lines.append(("offsets", ", ".join(str(p) for p in spectral.offsets)))
    for n, determinant in spectral.period_checks:
        lines.append((f"period_check_{n}", format_number(determinant)))

    lines.append(("regime", report.regime.value))

    if report.regime == Regime.BELOW_RB:
        lines.append(("tau_prime", report.period))
    elif report.regime == Regime.AT_RB:
        lines.append(("tau_prime", report.diagnostics["tau_prime"]))
        lines.append(("tau_hat (upper bound on the period)", report.period))
    elif report.period is not None:
        lines.append(("period", report.period))

    if report.expansion is not None:
        lines.append(("order", report.order))
        lines.append(("decay_base", format_number(report.decay_base)))
        label = PREFACTOR_LABELS[report.regime]
        for l, prefactor in report.prefactors.items():
            lines.append((f"{label}_{l}", format_vector(prefactor)))

    return lines


def _analyze(system: MG1TailSystem, output_format: OutputFormat):
    report = system.analyze()
    lines = _report_lines(system, report)

    if output_format == OutputFormat.CSV:
        return pandas.DataFrame([{"name": key, "value": value} for key, value in lines])

    return _lines_to_text(lines)


def _compare(system: MG1TailSystem, output_format: OutputFormat):
    table = system.compare()

    if output_format == OutputFormat.CSV:
        return table.rows

    summary = [
        (key, format_number(value) if isinstance(value, float) else value)
        for key, value in table.summary.items()
    ]
    return _lines_to_text(summary) + table.rows.to_string(index=False) + "\n"


def _structure(system: MG1TailSystem, output_format: OutputFormat):
    reports = system.structure()
    records = [
        {
            "subject": report.subject.value,
            "form": report.form.value,
            "classes": "; ".join(" ".join(str(i) for i in c) for c in report.classes),
        }
        for report in reports
    ]

    if output_format == OutputFormat.CSV:
        return pandas.DataFrame(records)

    return _lines_to_text(
        (record["subject"], f"{record['form']} (classes {record['classes']})")
        for record in records
    )


COMMANDS = {
    Command.VALIDATE: _validate,
    Command.SOLVE: _solve,
    Command.ANALYZE: _analyze,
    Command.COMPARE: _compare,
    Command.STRUCTURE: _structure,
}


def run(config: RunConfig) -> int:
    """
    Execute one command and write its report. Returns the exit status: 0 on
    success, 1 for an invalid model file, 2 for a numerical failure.
    """

    try:
        system = MG1TailSystem(
            model_path=config.model_path,
            tolerances=config.tolerances,
            levels=config.levels,
        )
        result = COMMANDS[Command(config.command)](system, OutputFormat(config.format))
    except (ParseError, ValidationError) as error:
        click.echo(f"error: {error}", err=True)
        return 1
    except NumericalError as error:
        click.echo(f"numerical failure: {error}", err=True)
        return 2

    if isinstance(result, pandas.DataFrame):
        result = dataframe_to_csv(result)

    if config.output is None:
        click.echo(result, nl=False)
    else:
        Path(config.output).write_text(result)

    return 0


def _parse_tolerances(ctx, param, values) -> Dict[str, float]:
    tolerances = dict()

    for value in values:
        name, separator, number = value.partition("=")
        if not separator:
            raise click.BadParameter(f"{value} is not of the form name=value")
        if name not in DEFAULT_TOLERANCES:
            raise click.BadParameter(
                f"unknown tolerance {name}, expected one of {sorted(DEFAULT_TOLERANCES)}"
            )
        try:
            tolerances[name] = float(number)
        except ValueError:
            raise click.BadParameter(f"{number} is not a number")

    return tolerances


def _common_options(function):
    options = [
        click.argument("model_path", type=click.Path(dir_okay=False)),
        click.option(
            "--levels",
            default=DEFAULT_LEVELS,
            show_default=True,
            type=click.IntRange(min=1),
            help="Number of levels of the stationary prefix.",
        ),
        click.option(
            "--format",
            "output_format",
            default=OutputFormat.HUMAN.value,
            show_default=True,
            type=click.Choice([f.value for f in OutputFormat]),
            help="Output format.",
        ),
        click.option(
            "-o",
            "--output",
            default=None,
            type=click.Path(dir_okay=False),
            help="Path to write the report. Default is standard output.",
        ),
        click.option(
            "--tol",
            "tolerances",
            multiple=True,
            callback=_parse_tolerances,
            help="Tolerance override name=value, may be repeated.",
        ),
    ]

    for option in reversed(options):
        function = option(function)

    return function


def _make_command(command: Command, help_text: str):
    @_common_options
    def callback(model_path, levels, output_format, output, tolerances):
        config = RunConfig(
            command=command,
            model_path=model_path,
            levels=levels,
            tolerances=tolerances,
            output=output,
            format=OutputFormat(output_format),
        )
        sys.exit(run(config))

    return click.command(name=command.value, help=help_text)(callback)


@click.group()
def main():
    """Stationary distribution and tail asymptotics of M/G/1-type Markov chains."""

    logging.basicConfig(level=logging.WARNING, stream=sys.stderr)


main.add_command(_make_command(Command.VALIDATE, "Check the invariants of a model file."))
main.add_command(_make_command(Command.SOLVE, "Write x(k) and x_bar(k) for the computed levels."))
main.add_command(_make_command(Command.ANALYZE, "Report theta, the period, the regime, and prefactors."))
main.add_command(_make_command(Command.COMPARE, "Compare predicted and exact tails."))
main.add_command(_make_command(Command.STRUCTURE, "Normal forms of G and R*(1)."))


if __name__ == "__main__":
    main()
