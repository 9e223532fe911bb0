import csv
import io
import logging
from pathlib import Path as FsPath

from rmsa.agents.base import RoutingAgent, TableRow
from rmsa.exceptions import ConfigError
from rmsa.grid import CongestionLevel
from rmsa.topology import parse_node

logger = logging.getLogger(__name__)

CHECKPOINT_HEADER = ["sd_pair", "level", "path_index", "Q", "N"]
ALGORITHM_MARKER = "# algorithm: "
NO_LEVEL = "-"


def dump_checkpoint(agent: RoutingAgent) -> str:
    buffer = io.StringIO()
    buffer.write(f"{ALGORITHM_MARKER}{agent.algorithm}\n")

    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CHECKPOINT_HEADER)
    for (source, destination), level, index, q, n in agent.table_rows():
        writer.writerow([f"{source}->{destination}", NO_LEVEL if level is None else str(level), index, repr(q), n])

    return buffer.getvalue()


def parse_checkpoint(text: str, source: str = "<string>") -> tuple[str | None, list[TableRow]]:
    lines = text.splitlines()
    algorithm = None
    first_row = 2
    if lines and lines[0].startswith(ALGORITHM_MARKER):
        algorithm = lines.pop(0).removeprefix(ALGORITHM_MARKER).strip()
        first_row += 1

    rows: list[TableRow] = []
    reader = csv.DictReader(lines)
    if reader.fieldnames != CHECKPOINT_HEADER:
        raise ConfigError(f"{source}: expected columns {','.join(CHECKPOINT_HEADER)}, got {reader.fieldnames}")

    for lineno, record in enumerate(reader, start=first_row):
        try:
            src, dst = record["sd_pair"].split("->")
            level = None if record["level"] == NO_LEVEL else CongestionLevel(int(record["level"]) - 1)
            pair = (parse_node(src), parse_node(dst))
            rows.append((pair, level, int(record["path_index"]), float(record["Q"]), int(record["N"])))
        except ValueError as e:
            raise ConfigError(f"{source}:{lineno}: malformed checkpoint row {record}: {e}") from e

    return algorithm, rows


def load_checkpoint(agent: RoutingAgent, path: str | FsPath) -> None:
    """Warm-starts an agent from a table written by `dump_checkpoint`. The
    table must come from the same algorithm and the same candidate set;
    tables without the algorithm marker are taken on their shape alone."""
    path = FsPath(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read checkpoint {path}: {e}") from e

    algorithm, rows = parse_checkpoint(text, str(path))
    if algorithm is not None and algorithm != agent.algorithm:
        raise ConfigError(f"Checkpoint {path} holds a {algorithm} table, cannot warm-start {agent.algorithm}")

    for row in rows:
        pair, _level, index, _q, _n = row
        if pair not in agent.candidates or not 0 <= index < len(agent.candidates[pair]):
            raise ConfigError(f"Checkpoint {path} does not match the candidate paths: {pair} / {index}")
        try:
            agent.restore_row(row)
        except ValueError as e:
            raise ConfigError(f"Checkpoint {path}: {e}") from e

    logger.info(f"Warm-started {agent!r} from {path} ({len(rows)} entries)")
