"""Utilities for file input and output."""
import json
from pathlib import Path

from mg1tail.exceptions import ParseError

package_data_directory = Path(Path(__file__).parent.absolute(), "data")


def exists_and_not_empty(file_name):
    """Returns True if file_name exists and is not empty."""

    path = Path(file_name)
    return path.exists() and path.stat().st_size > 0


def read_json(json_path):
    """Read a JSON document, raising ParseError if it cannot be decoded."""

    path = Path(json_path)
    if not path.exists():
        raise ParseError(f"model file {path} does not exist")

    try:
        with open(path, "r") as json_file:
            return json.load(json_file)
    except json.JSONDecodeError as error:
        raise ParseError(f"model file {path} is not valid JSON: {error}")


def write_json(document, json_path):
    """Write a JSON document with two-space indentation."""

    with open(json_path, "w") as json_file:
        json.dump(document, json_file, indent=2)
        json_file.write("\n")


def dataframe_to_csv(df, csv_path=None):
    """
    Write a pandas DataFrame as CSV with 17 significant digits and LF line
    endings. Returns the CSV text if csv_path is None.
    """

    return df.to_csv(
        csv_path,
        index=False,
        float_format="%.17g",
        lineterminator="\n",
    )
