import click
import numpy

from mg1tail.utilities import exists_and_not_empty, write_json


@click.command()
@click.option(
    "-r",
    "--radius",
    default=1.5,
    show_default=True,
    type=click.FLOAT,
    help="Convergence radius r_A of the kernel generating function.",
)
@click.option(
    "-k",
    "--truncation",
    default=60,
    show_default=True,
    type=click.INT,
    help="Largest level jump with an explicit kernel block.",
)
@click.option(
    "-o",
    "--output_prefix",
    default="no_theta",
    show_default=True,
    type=click.STRING,
    help="Prefix of the model files to write.",
)
@click.option(
    "--force",
    is_flag=True,
    help="Overwrite existing model files.",
)
def main(radius, truncation, output_prefix, force):
    # Kernel A(k) proportional to r^-k / (k + 1)^3 for k = 0..K, renormalized
    # to a stochastic kernel. Its generating function converges up to r but
    # A*(r) / r < 1, so delta(A*(y)) = y has no root in (1, r).
    k = numpy.arange(truncation + 1)
    weights = radius ** (-k.astype(float)) / (k + 1.0) ** 3
    A = weights / weights.sum()
    blocks = [[[float(a)]] for a in A]

    # A zero-coefficient geometric tail declares the convergence radius
    a_tail = {"start_index": truncation, "ratio": 1 / radius, "coeff": [[0.0]]}

    models = {
        # Skip-free boundary: B(k) = A(k) and C(0) = A(0)
        output_prefix: {
            "M": 1,
            "M0": 1,
            "A": blocks,
            "B0": blocks[0],
            "B": blocks[1:],
            "C0": blocks[0],
            "a_tail": a_tail,
            "b_tail": None,
        },
        # Boundary jumps B(k) = 0.1 (1 / 1.2)^k with r_B = 1.2 < r_A
        f"{output_prefix}_btail": {
            "M": 1,
            "M0": 1,
            "A": blocks,
            "B0": [[0.5]],
            "B": [],
            "C0": blocks[0],
            "a_tail": a_tail,
            "b_tail": {
                "radius": 1.2,
                "order": 1,
                "start_index": 0,
                "poles": [
                    {"angle_num": 0, "angle_den": 1, "weight_re": [[0.1]], "weight_im": [[0.0]]}
                ],
            },
        },
    }

    for name, document in models.items():
        json_path = f"{name}.json"
        if exists_and_not_empty(json_path) and not force:
            print(f"{json_path} exists, use --force to overwrite")
            continue
        write_json(document, json_path)


if __name__ == "__main__":
    main()
