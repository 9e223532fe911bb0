import io
from pprint import pformat
from typing import TYPE_CHECKING

import xlsxwriter

from rmsa.exports import atomic_write_bytes

if TYPE_CHECKING:
    from pathlib import Path

    from rmsa.engine import ExperimentResult

XLSX_SAFE_TYPES = (str, int, float)


def create_in_memory_xlsx() -> tuple[io.BytesIO, xlsxwriter.Workbook]:
    buffer = io.BytesIO()
    workbook = xlsxwriter.Workbook(
        buffer,
        {
            "in_memory": True,
            "strings_to_urls": False,
        },
    )

    return buffer, workbook


def finalize_in_memory_xlsx(buffer: io.BytesIO, workbook: xlsxwriter.Workbook, path: "Path") -> None:
    workbook.close()
    atomic_write_bytes(path, buffer.getvalue())


def xlsx_safe_value(value):
    if type(value) in XLSX_SAFE_TYPES:
        return value

    return pformat(value)


def write_rows(worksheet, header: list[str], rows, header_format=None) -> None:
    worksheet.write_row(0, 0, header, header_format)
    for row_index, row in enumerate(rows, start=1):
        worksheet.write_row(row_index, 0, [xlsx_safe_value(value) for value in row])
    worksheet.freeze_panes(1, 0)


def export_results_xlsx(results: list["ExperimentResult"], path: "Path") -> None:
    """Same data as results.csv and seeds.csv, one sheet each."""
    buffer, workbook = create_in_memory_xlsx()
    bold = workbook.add_format({"bold": True})

    series = [result.mean_series() for result in results]
    sheet = workbook.add_worksheet("results")
    write_rows(
        sheet,
        ["episode", *(result.label for result in results)],
        ([episode, *(s[episode] for s in series)] for episode in range(len(series[0]) if series else 0)),
        bold,
    )

    sheet = workbook.add_worksheet("seeds")
    write_rows(
        sheet,
        ["label", "seed", "episode", "blocked", "total", "blocking_probability"],
        (
            [result.label, seed.seed, stats.episode_index, stats.blocked, stats.total, stats.blocking_probability]
            for result in results
            for seed in result.seeds
            for stats in seed.episodes
        ),
        bold,
    )

    finalize_in_memory_xlsx(buffer, workbook, path)
