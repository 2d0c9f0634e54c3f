# volformer
# Volumetric adaptation of pretrained 2D vision transformers
#
# Licensed under the MIT License <http://opensource.org/licenses/MIT>
# SPDX-License-Identifier: MIT
# Copyright (c) 2024-present volformer contributors

# @black_format

"""Utility methods for writing results to the console."""

from typing import List, Sequence

from colorama import Fore

ERROR_COLOR = Fore.RED
INFO_COLOR = Fore.YELLOW
RESET_COLOR = Fore.RESET


def info(text: str) -> None:
    """Prints a string of text as info to the console.

    Args:
        text (str): The text to print.
    """

    print(f"{INFO_COLOR}{text}{RESET_COLOR}")


def error(text: str) -> None:
    """Prints a string of text as error to the console.

    Args:
        text (str): The text to print.
    """

    print(f"{ERROR_COLOR}{text}{RESET_COLOR}")


def format_table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Aligns rows of cells into columns. The first column is left aligned, the rest right
    aligned.

    Args:
        header (Sequence[str]): The column titles.
        rows (Sequence[Sequence[str]]): The cells, one sequence per row.

    Returns:
        str: The table, one line per row after a header and a rule, ending in a newline.
    """

    widths = [len(title) for title in header]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"Row {list(row)} has {len(row)} cells, expected {len(header)}")
        widths = [max(width, len(cell)) for width, cell in zip(widths, row)]

    def line(cells: Sequence[str]) -> str:
        parts: List[str] = []
        for index, (cell, width) in enumerate(zip(cells, widths)):
            parts.append(cell.ljust(width) if index == 0 else cell.rjust(width))
        return "  ".join(parts).rstrip()

    rule = "  ".join("-" * width for width in widths)
    return "\n".join([line(header), rule] + [line(row) for row in rows]) + "\n"
